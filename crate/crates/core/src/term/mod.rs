//! Composition trees for morphisms of the free strict monoidal category.
//!
//! A [`Term`] is simultaneously a proof tree in the ⊗-only fragment of
//! noncommutative linear logic and the combinatorial skeleton of a k-d tree
//! over the diagram's nodes: `Seq` is a vertical cut, `Par` a horizontal one.

mod proof;

use std::fmt;

use thiserror::Error;

use crate::signature::{word_concat, Signature, Word};

pub use proof::{to_proof_tree, ProofRule, ProofTree};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// A generating morphism, by name.
    Gen(String),
    /// Identity on a word; `Id([])` is the empty diagram.
    Id(Word),
    /// The crossing `u v → v u`.
    Sym(Word, Word),
    /// `first` then `second`, reading left to right.
    Seq(Box<Term>, Box<Term>),
    /// `top` stacked over `bottom`.
    Par(Box<Term>, Box<Term>),
}

impl Term {
    pub fn gen(name: impl Into<String>) -> Term {
        Term::Gen(name.into())
    }

    pub fn id(w: Word) -> Term {
        Term::Id(w)
    }

    pub fn sym(u: Word, v: Word) -> Term {
        Term::Sym(u, v)
    }

    pub fn seq(first: Term, second: Term) -> Term {
        Term::Seq(Box::new(first), Box::new(second))
    }

    pub fn par(top: Term, bottom: Term) -> Term {
        Term::Par(Box::new(top), Box::new(bottom))
    }

    /// Right-nested sequential composite of a nonempty list.
    pub fn seq_all(mut terms: Vec<Term>) -> Option<Term> {
        let mut acc = terms.pop()?;
        while let Some(t) = terms.pop() {
            acc = Term::seq(t, acc);
        }
        Some(acc)
    }

    /// Right-nested parallel composite of a nonempty list.
    pub fn par_all(mut terms: Vec<Term>) -> Option<Term> {
        let mut acc = terms.pop()?;
        while let Some(t) = terms.pop() {
            acc = Term::par(t, acc);
        }
        Some(acc)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Term::Gen(_) | Term::Id(_) | Term::Sym(..))
    }

    pub fn children(&self) -> Option<(&Term, &Term)> {
        match self {
            Term::Seq(a, b) | Term::Par(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// Number of constructors in the tree.
    pub fn node_count(&self) -> usize {
        match self.children() {
            Some((a, b)) => 1 + a.node_count() + b.node_count(),
            None => 1,
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self.children() {
            Some((a, b)) => a.leaf_count() + b.leaf_count(),
            None => 1,
        }
    }

    pub fn generator_count(&self) -> usize {
        match self {
            Term::Gen(_) => 1,
            Term::Id(_) | Term::Sym(..) => 0,
            Term::Seq(a, b) | Term::Par(a, b) => a.generator_count() + b.generator_count(),
        }
    }

    /// Depth of the tree; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self.children() {
            Some((a, b)) => 1 + a.depth().max(b.depth()),
            None => 1,
        }
    }

    pub fn contains_sym(&self) -> bool {
        match self {
            Term::Sym(..) => true,
            Term::Gen(_) | Term::Id(_) => false,
            Term::Seq(a, b) | Term::Par(a, b) => a.contains_sym() || b.contains_sym(),
        }
    }

    /// Generator names in left-to-right leaf order.
    pub fn generator_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |_, t| {
            if let Term::Gen(name) = t {
                out.push(name.as_str());
            }
        });
        out
    }

    /// Calls `f` on every leaf together with its path, in leaf order.
    pub fn visit_leaves<'a>(&'a self, f: &mut impl FnMut(&Path, &'a Term)) {
        fn go<'a>(t: &'a Term, path: &mut Path, f: &mut impl FnMut(&Path, &'a Term)) {
            match t.children() {
                Some((a, b)) => {
                    path.push(Child::First);
                    go(a, path, f);
                    path.pop();
                    path.push(Child::Second);
                    go(b, path, f);
                    path.pop();
                }
                None => f(path, t),
            }
        }
        go(self, &mut Path::root(), f)
    }

    pub fn subterm(&self, path: &Path) -> Option<&Term> {
        let mut cur = self;
        for step in path.steps() {
            let (a, b) = cur.children()?;
            cur = match step {
                Child::First => a,
                Child::Second => b,
            };
        }
        Some(cur)
    }

    /// Returns a copy with the subterm at `path` replaced, or `None` if the
    /// path does not address a node.
    pub fn replace_at(&self, path: &Path, replacement: Term) -> Option<Term> {
        fn go(t: &Term, steps: &[Child], replacement: Term) -> Option<Term> {
            let Some((&step, rest)) = steps.split_first() else {
                return Some(replacement);
            };
            match (t, step) {
                (Term::Seq(a, b), Child::First) => Some(Term::seq(go(a, rest, replacement)?, (**b).clone())),
                (Term::Seq(a, b), Child::Second) => Some(Term::seq((**a).clone(), go(b, rest, replacement)?)),
                (Term::Par(a, b), Child::First) => Some(Term::par(go(a, rest, replacement)?, (**b).clone())),
                (Term::Par(a, b), Child::Second) => Some(Term::par((**a).clone(), go(b, rest, replacement)?)),
                _ => None,
            }
        }
        go(self, path.steps(), replacement)
    }
}

impl fmt::Display for Term {
    /// Compact infix form: `;` for sequential, `⊗` for parallel composition.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Gen(name) => f.write_str(name),
            Term::Id(w) => write!(f, "id[{w}]"),
            Term::Sym(u, v) => write!(f, "sym[{u} | {v}]"),
            Term::Seq(a, b) => write!(f, "({a} ; {b})"),
            Term::Par(a, b) => write!(f, "({a} ⊗ {b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Child {
    /// `first` of a `Seq`, `top` of a `Par`.
    First,
    /// `second` of a `Seq`, `bottom` of a `Par`.
    Second,
}

/// Position of a node: the sequence of child choices from the root.
/// Displayed as `/` for the root and `/0/1` otherwise.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(Vec<Child>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn from_steps(steps: Vec<Child>) -> Self {
        Path(steps)
    }

    pub fn steps(&self) -> &[Child] {
        &self.0
    }

    pub fn push(&mut self, c: Child) {
        self.0.push(c);
    }

    pub fn pop(&mut self) -> Option<Child> {
        self.0.pop()
    }

    pub fn child(&self, c: Child) -> Path {
        let mut p = self.clone();
        p.push(c);
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(s: &str) -> Option<Path> {
        if s == "/" {
            return Some(Path::root());
        }
        let rest = s.strip_prefix('/')?;
        rest.split('/')
            .map(|p| match p {
                "0" => Some(Child::First),
                "1" => Some(Child::Second),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Path)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for c in &self.0 {
            f.write_str(match c {
                Child::First => "/0",
                Child::Second => "/1",
            })?;
        }
        Ok(())
    }
}

/// The type `dom → cod` of a morphism, i.e. the sequent `dom ⊢ cod`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MorphismType {
    pub dom: Word,
    pub cod: Word,
}

impl MorphismType {
    pub fn new(dom: Word, cod: Word) -> Self {
        MorphismType { dom, cod }
    }
}

impl fmt::Display for MorphismType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊢ {}", self.dom, self.cod)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    /// A sequential composite whose interfaces disagree: `expected` is the
    /// codomain of the first part, `found` the domain of the second.
    #[error("interface mismatch at {path}: expected {expected}, found {found}")]
    Mismatch { path: Path, expected: Word, found: Word },
    #[error("unknown generator {name} at {path}")]
    UnknownGenerator { path: Path, name: String },
    #[error("undeclared object {name} at {path}")]
    UndeclaredObject { path: Path, name: String },
}

impl TypeError {
    pub fn path(&self) -> &Path {
        match self {
            TypeError::Mismatch { path, .. } | TypeError::UnknownGenerator { path, .. } | TypeError::UndeclaredObject { path, .. } => path,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            TypeError::Mismatch { .. } => "type-error",
            TypeError::UnknownGenerator { .. } => "unknown-generator",
            TypeError::UndeclaredObject { .. } => "undeclared-object",
        }
    }
}

/// Computes the type of `t`, failing at the first ill-typed node in
/// post-order.
pub fn typecheck(t: &Term, sig: &Signature) -> Result<MorphismType, TypeError> {
    fn check_word(w: &Word, sig: &Signature, path: &Path) -> Result<(), TypeError> {
        match w.iter().find(|o| !sig.has_object(o)) {
            Some(o) => Err(TypeError::UndeclaredObject {
                path: path.clone(),
                name: o.to_string(),
            }),
            None => Ok(()),
        }
    }

    fn go(t: &Term, sig: &Signature, path: &mut Path) -> Result<MorphismType, TypeError> {
        match t {
            Term::Gen(name) => sig
                .generator(name)
                .map(|g| MorphismType::new(g.dom.clone(), g.cod.clone()))
                .ok_or_else(|| TypeError::UnknownGenerator {
                    path: path.clone(),
                    name: name.clone(),
                }),
            Term::Id(w) => {
                check_word(w, sig, path)?;
                Ok(MorphismType::new(w.clone(), w.clone()))
            }
            Term::Sym(u, v) => {
                check_word(u, sig, path)?;
                check_word(v, sig, path)?;
                Ok(MorphismType::new(word_concat(u, v), word_concat(v, u)))
            }
            Term::Seq(a, b) => {
                path.push(Child::First);
                let ta = go(a, sig, path)?;
                path.pop();
                path.push(Child::Second);
                let tb = go(b, sig, path)?;
                path.pop();
                if ta.cod != tb.dom {
                    return Err(TypeError::Mismatch {
                        path: path.clone(),
                        expected: ta.cod,
                        found: tb.dom,
                    });
                }
                Ok(MorphismType::new(ta.dom, tb.cod))
            }
            Term::Par(a, b) => {
                path.push(Child::First);
                let ta = go(a, sig, path)?;
                path.pop();
                path.push(Child::Second);
                let tb = go(b, sig, path)?;
                path.pop();
                Ok(MorphismType::new(word_concat(&ta.dom, &tb.dom), word_concat(&ta.cod, &tb.cod)))
            }
        }
    }

    go(t, sig, &mut Path::root())
}

/// ⊗-width: the largest number of factors composed in parallel at any
/// point of the tree.
pub fn tensor_width(t: &Term) -> usize {
    match t {
        Term::Gen(_) | Term::Id(_) | Term::Sym(..) => 1,
        Term::Seq(a, b) => tensor_width(a).max(tensor_width(b)),
        Term::Par(a, b) => tensor_width(a) + tensor_width(b),
    }
}

/// The running example term `(f1 ⊗ f2) ; (f3 ⊗ f4)`, of type
/// `x1 x2 → x6 x7`.
pub fn running_example_term() -> Term {
    Term::seq(
        Term::par(Term::gen("f1"), Term::gen("f2")),
        Term::par(Term::gen("f3"), Term::gen("f4")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{running_example_signature, Generator, ObjectName};

    fn w(names: &[&str]) -> Word {
        Word::from_names(names.iter().copied())
    }

    #[test]
    fn typecheck_examples() {
        let sig = running_example_signature();
        assert_eq!(
            typecheck(&Term::gen("f1"), &sig).unwrap(),
            MorphismType::new(w(&["x1"]), w(&["x3", "x4"]))
        );
        assert_eq!(
            typecheck(&Term::id(w(&["x1", "x2"])), &sig).unwrap(),
            MorphismType::new(w(&["x1", "x2"]), w(&["x1", "x2"]))
        );
        assert_eq!(
            typecheck(&running_example_term(), &sig).unwrap(),
            MorphismType::new(w(&["x1", "x2"]), w(&["x6", "x7"]))
        );
        let err = typecheck(&Term::seq(Term::gen("f1"), Term::gen("f2")), &sig).unwrap_err();
        assert_eq!(
            err,
            TypeError::Mismatch {
                path: Path::root(),
                expected: w(&["x3", "x4"]),
                found: w(&["x2"]),
            }
        );
    }

    #[test]
    fn typecheck_reports_unknown_names_with_paths() {
        let sig = running_example_signature();
        let t = Term::par(Term::gen("f1"), Term::gen("nope"));
        assert_eq!(
            typecheck(&t, &sig).unwrap_err(),
            TypeError::UnknownGenerator {
                path: Path::from_steps(vec![Child::Second]),
                name: "nope".into(),
            }
        );
        let t = Term::seq(Term::id(w(&["x1"])), Term::Id(Word::new(vec![ObjectName::new("zz").unwrap()])));
        assert!(matches!(typecheck(&t, &sig), Err(TypeError::UndeclaredObject { .. })));
    }

    #[test]
    fn empty_identity_and_sym_types() {
        let sig = running_example_signature();
        assert_eq!(
            typecheck(&Term::id(Word::empty()), &sig).unwrap(),
            MorphismType::new(Word::empty(), Word::empty())
        );
        assert_eq!(
            typecheck(&Term::sym(w(&["x1"]), w(&["x2", "x3"])), &sig).unwrap(),
            MorphismType::new(w(&["x1", "x2", "x3"]), w(&["x2", "x3", "x1"]))
        );
    }

    #[test]
    fn width_examples() {
        let mut sig = Signature::default();
        sig.push_object(ObjectName::new("a").unwrap());
        for n in ["f", "g", "h"] {
            sig.push_generator(Generator::new(n, w(&["a"]), w(&["a"])));
        }
        assert_eq!(tensor_width(&Term::gen("f1")), 1);
        // max(1 + 1, 1 + 1)
        assert_eq!(tensor_width(&running_example_term()), 2);
        let t = Term::par(Term::par(Term::gen("f"), Term::gen("g")), Term::gen("h"));
        assert_eq!(tensor_width(&t), 3);
    }

    #[test]
    fn paths_round_trip_and_address_subterms() {
        let t = running_example_term();
        let p = Path::from_steps(vec![Child::Second, Child::First]);
        assert_eq!(p.to_string(), "/1/0");
        assert_eq!(Path::parse("/1/0"), Some(p.clone()));
        assert_eq!(Path::parse("/"), Some(Path::root()));
        assert_eq!(Path::parse("/2"), None);
        assert_eq!(t.subterm(&p), Some(&Term::gen("f3")));
        let r = t.replace_at(&p, Term::gen("g")).unwrap();
        assert_eq!(r.generator_names(), vec!["f1", "f2", "g", "f4"]);
        assert!(t
            .replace_at(&Path::from_steps(vec![Child::First, Child::First, Child::First]), Term::gen("g"))
            .is_none());
    }

    #[test]
    fn counts() {
        let t = running_example_term();
        assert_eq!(t.node_count(), 7);
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(t.generator_count(), 4);
        assert_eq!(t.depth(), 3);
        assert_eq!(
            Term::seq_all(vec![Term::gen("a"), Term::gen("b"), Term::gen("c")]).unwrap(),
            Term::seq(Term::gen("a"), Term::seq(Term::gen("b"), Term::gen("c")))
        );
    }
}
