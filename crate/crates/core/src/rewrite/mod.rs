//! Commuting conversions, layered normal forms, ⊗-width reduction and term
//! equivalence.

mod equiv;
mod normal;
mod width;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::signature::{Signature, Word};
use crate::term::{typecheck, Child, Path, Term};

pub use equiv::{terms_equivalent, Equivalence, EquivalenceError};
pub use normal::{normalize, CLASS_LIMIT};
pub use width::{minimize_width, CostModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    SeqAssoc,
    ParAssoc,
    SeqUnitLeft,
    SeqUnitRight,
    ParUnitTop,
    ParUnitBottom,
    Interchange,
    InterchangeInverse,
    IdFusion,
}

impl Rule {
    pub const ALL: [Rule; 9] = [
        Rule::SeqAssoc,
        Rule::ParAssoc,
        Rule::SeqUnitLeft,
        Rule::SeqUnitRight,
        Rule::ParUnitTop,
        Rule::ParUnitBottom,
        Rule::Interchange,
        Rule::InterchangeInverse,
        Rule::IdFusion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::SeqAssoc => "seq-assoc",
            Rule::ParAssoc => "par-assoc",
            Rule::SeqUnitLeft => "seq-unit-left",
            Rule::SeqUnitRight => "seq-unit-right",
            Rule::ParUnitTop => "par-unit-top",
            Rule::ParUnitBottom => "par-unit-bottom",
            Rule::Interchange => "interchange",
            Rule::InterchangeInverse => "interchange-inverse",
            Rule::IdFusion => "id-fusion",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

/// One commuting conversion at one position.
///
/// Forward directions:
///
/// | rule | forward |
/// |---|---|
/// | seq-assoc | `(a;b);c → a;(b;c)` |
/// | par-assoc | `(a⊗b)⊗c → a⊗(b⊗c)` |
/// | seq-unit-left | `id;a → a` |
/// | seq-unit-right | `a;id → a` |
/// | par-unit-top | `id(ε)⊗a → a` |
/// | par-unit-bottom | `a⊗id(ε) → a` |
/// | interchange | `(a⊗b);(c⊗d) → (a;c)⊗(b;d)` |
/// | interchange-inverse | `(a;c)⊗(b;d) → (a⊗b);(c⊗d)` |
/// | id-fusion | `id(u)⊗id(v) → id(uv)` |
///
/// Unit rules have no backward form. Backward id-fusion splits `id(w)` after
/// `split` objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RewriteStep {
    pub rule: Rule,
    pub path: Path,
    pub direction: Direction,
    pub split: Option<usize>,
}

impl RewriteStep {
    pub fn forward(rule: Rule, path: Path) -> Self {
        RewriteStep {
            rule,
            path,
            direction: Direction::Forward,
            split: None,
        }
    }

    pub fn backward(rule: Rule, path: Path) -> Self {
        RewriteStep {
            rule,
            path,
            direction: Direction::Backward,
            split: None,
        }
    }
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = match self.direction {
            Direction::Forward => "→",
            Direction::Backward => "←",
        };
        write!(f, "{} {} at {}", self.rule, dir, self.path)?;
        if let Some(k) = self.split {
            write!(f, " split {k}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("{rule} does not match at {path}")]
    InvalidStep { rule: Rule, path: Path },
}

impl RewriteError {
    pub fn code(&self) -> &'static str {
        "invalid-step"
    }
}

fn interchange_matches(a: &Term, c: &Term, sig: &Signature) -> bool {
    match (typecheck(a, sig), typecheck(c, sig)) {
        (Ok(ta), Ok(tc)) => ta.cod == tc.dom,
        _ => false,
    }
}

/// Every step that applies somewhere in `t`, in pre-order of positions.
/// Unit introductions are never listed.
pub fn applicable_rewrites(t: &Term, sig: &Signature) -> Vec<RewriteStep> {
    fn go(t: &Term, sig: &Signature, path: &mut Path, out: &mut Vec<RewriteStep>) {
        let here = |rule, dir| RewriteStep {
            rule,
            path: path.clone(),
            direction: dir,
            split: None,
        };
        use Direction::*;
        match t {
            Term::Seq(a, b) => {
                if matches!(**a, Term::Seq(..)) {
                    out.push(here(Rule::SeqAssoc, Forward));
                }
                if matches!(**b, Term::Seq(..)) {
                    out.push(here(Rule::SeqAssoc, Backward));
                }
                if matches!(**a, Term::Id(_)) {
                    out.push(here(Rule::SeqUnitLeft, Forward));
                }
                if matches!(**b, Term::Id(_)) {
                    out.push(here(Rule::SeqUnitRight, Forward));
                }
                if let (Term::Par(a1, _), Term::Par(c1, _)) = (&**a, &**b) {
                    if interchange_matches(a1, c1, sig) {
                        out.push(here(Rule::Interchange, Forward));
                    }
                }
            }
            Term::Par(a, b) => {
                if matches!(**a, Term::Par(..)) {
                    out.push(here(Rule::ParAssoc, Forward));
                }
                if matches!(**b, Term::Par(..)) {
                    out.push(here(Rule::ParAssoc, Backward));
                }
                if matches!(&**a, Term::Id(w) if w.is_empty()) {
                    out.push(here(Rule::ParUnitTop, Forward));
                }
                if matches!(&**b, Term::Id(w) if w.is_empty()) {
                    out.push(here(Rule::ParUnitBottom, Forward));
                }
                if matches!((&**a, &**b), (Term::Seq(..), Term::Seq(..))) {
                    out.push(here(Rule::InterchangeInverse, Forward));
                }
                if matches!((&**a, &**b), (Term::Id(_), Term::Id(_))) {
                    out.push(here(Rule::IdFusion, Forward));
                }
            }
            Term::Id(w) => {
                for k in 1..w.len() {
                    out.push(RewriteStep {
                        split: Some(k),
                        ..here(Rule::IdFusion, Backward)
                    });
                }
            }
            Term::Gen(_) | Term::Sym(..) => {}
        }
        if let Some((a, b)) = t.children() {
            path.push(Child::First);
            go(a, sig, path, out);
            path.pop();
            path.push(Child::Second);
            go(b, sig, path, out);
            path.pop();
        }
    }

    let mut out = Vec::new();
    go(t, sig, &mut Path::root(), &mut out);
    out
}

fn rewrite_node(t: &Term, step: &RewriteStep, sig: &Signature) -> Option<Term> {
    use Direction::*;
    let b = |t: &Term| Box::new(t.clone());
    match (step.rule, step.direction, t) {
        (Rule::SeqAssoc, Forward, Term::Seq(ab, c)) => match &**ab {
            Term::Seq(a, bb) => Some(Term::Seq(a.clone(), Box::new(Term::Seq(bb.clone(), c.clone())))),
            _ => None,
        },
        (Rule::SeqAssoc, Backward, Term::Seq(a, bc)) => match &**bc {
            Term::Seq(bb, c) => Some(Term::Seq(Box::new(Term::Seq(a.clone(), bb.clone())), c.clone())),
            _ => None,
        },
        (Rule::ParAssoc, Forward, Term::Par(ab, c)) => match &**ab {
            Term::Par(a, bb) => Some(Term::Par(a.clone(), Box::new(Term::Par(bb.clone(), c.clone())))),
            _ => None,
        },
        (Rule::ParAssoc, Backward, Term::Par(a, bc)) => match &**bc {
            Term::Par(bb, c) => Some(Term::Par(Box::new(Term::Par(a.clone(), bb.clone())), c.clone())),
            _ => None,
        },
        (Rule::SeqUnitLeft, Forward, Term::Seq(id, a)) if matches!(**id, Term::Id(_)) => Some((**a).clone()),
        (Rule::SeqUnitRight, Forward, Term::Seq(a, id)) if matches!(**id, Term::Id(_)) => Some((**a).clone()),
        (Rule::ParUnitTop, Forward, Term::Par(id, a)) if matches!(&**id, Term::Id(w) if w.is_empty()) => Some((**a).clone()),
        (Rule::ParUnitBottom, Forward, Term::Par(a, id)) if matches!(&**id, Term::Id(w) if w.is_empty()) => Some((**a).clone()),
        (Rule::Interchange, Forward, Term::Seq(top, bottom)) | (Rule::InterchangeInverse, Backward, Term::Seq(top, bottom)) => {
            match (&**top, &**bottom) {
                (Term::Par(a, bb), Term::Par(c, d)) if interchange_matches(a, c, sig) => {
                    Some(Term::par(Term::Seq(b(a), b(c)), Term::Seq(b(bb), b(d))))
                }
                _ => None,
            }
        }
        (Rule::InterchangeInverse, Forward, Term::Par(top, bottom)) | (Rule::Interchange, Backward, Term::Par(top, bottom)) => {
            match (&**top, &**bottom) {
                (Term::Seq(a, c), Term::Seq(bb, d)) => Some(Term::seq(Term::Par(b(a), b(bb)), Term::Par(b(c), b(d)))),
                _ => None,
            }
        }
        (Rule::IdFusion, Forward, Term::Par(u, v)) => match (&**u, &**v) {
            (Term::Id(u), Term::Id(v)) => Some(Term::Id(crate::signature::word_concat(u, v))),
            _ => None,
        },
        (Rule::IdFusion, Backward, Term::Id(w)) => {
            let k = step.split.filter(|&k| k > 0 && k < w.len())?;
            let (u, v): (Word, Word) = w.split_at(k);
            Some(Term::par(Term::Id(u), Term::Id(v)))
        }
        _ => None,
    }
}

/// Applies one step, replacing exactly the subtree at `step.path`.
pub fn apply(t: &Term, step: &RewriteStep, sig: &Signature) -> Result<Term, RewriteError> {
    let invalid = || RewriteError::InvalidStep {
        rule: step.rule,
        path: step.path.clone(),
    };
    let node = t.subterm(&step.path).ok_or_else(invalid)?;
    let replacement = rewrite_node(node, step, sig).ok_or_else(invalid)?;
    t.replace_at(&step.path, replacement).ok_or_else(invalid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{running_example_signature, Generator, ObjectName};
    use crate::term::running_example_term;

    fn w(names: &[&str]) -> Word {
        Word::from_names(names.iter().copied())
    }

    /// g1: a→b, g2: c→d, g3: b→e, g4: d→f.
    pub(crate) fn grid_signature() -> Signature {
        let objects = ["a", "b", "c", "d", "e", "f"].map(|o| ObjectName::new(o).unwrap()).to_vec();
        let gens = [("g1", "a", "b"), ("g2", "c", "d"), ("g3", "b", "e"), ("g4", "d", "f")]
            .map(|(n, d, c)| Generator::new(n, w(&[d]), w(&[c])))
            .to_vec();
        Signature::new(objects, gens)
    }

    fn grid() -> Term {
        Term::seq(
            Term::par(Term::gen("g1"), Term::gen("g2")),
            Term::par(Term::gen("g3"), Term::gen("g4")),
        )
    }

    fn root(rule: Rule) -> RewriteStep {
        RewriteStep::forward(rule, Path::root())
    }

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.as_str().parse::<Rule>(), Ok(r));
        }
    }

    #[test]
    fn seq_assoc_at_root() {
        let sig = running_example_signature();
        let t = Term::seq(Term::seq(Term::gen("f2"), Term::id(w(&["x5"]))), Term::id(w(&["x5"])));
        assert!(applicable_rewrites(&t, &sig).contains(&root(Rule::SeqAssoc)));
    }

    #[test]
    fn generators_admit_no_steps() {
        let sig = running_example_signature();
        assert_eq!(applicable_rewrites(&Term::gen("f1"), &sig), vec![]);
    }

    #[test]
    fn interchange_needs_matching_interfaces() {
        let sig = grid_signature();
        let steps = applicable_rewrites(&grid(), &sig);
        assert!(steps.contains(&root(Rule::Interchange)));
        let out = apply(&grid(), &root(Rule::Interchange), &sig).unwrap();
        assert_eq!(
            out,
            Term::par(
                Term::seq(Term::gen("g1"), Term::gen("g3")),
                Term::seq(Term::gen("g2"), Term::gen("g4"))
            )
        );
        assert_eq!(typecheck(&out, &sig), typecheck(&grid(), &sig));

        // f1 has two outputs but f3 only one input.
        let sig = running_example_signature();
        let t = running_example_term();
        assert!(!applicable_rewrites(&t, &sig).contains(&root(Rule::Interchange)));
        assert!(apply(&t, &root(Rule::Interchange), &sig).is_err());
    }

    #[test]
    fn unit_and_assoc_examples() {
        let sig = running_example_signature();
        let t = Term::seq(Term::id(w(&["x1"])), Term::gen("f1"));
        assert_eq!(apply(&t, &root(Rule::SeqUnitLeft), &sig), Ok(Term::gen("f1")));
        let t = Term::par(Term::par(Term::gen("f1"), Term::gen("f2")), Term::gen("f3"));
        assert_eq!(
            apply(&t, &root(Rule::ParAssoc), &sig),
            Ok(Term::par(Term::gen("f1"), Term::par(Term::gen("f2"), Term::gen("f3"))))
        );
        let t = Term::par(Term::id(Word::empty()), Term::gen("f3"));
        assert_eq!(apply(&t, &root(Rule::ParUnitTop), &sig), Ok(Term::gen("f3")));
        assert!(apply(&t, &RewriteStep::backward(Rule::ParUnitTop, Path::root()), &sig).is_err());
    }

    #[test]
    fn id_fusion_both_ways() {
        let sig = running_example_signature();
        let t = Term::id(w(&["x1", "x2", "x3"]));
        let splits: Vec<_> = applicable_rewrites(&t, &sig).into_iter().filter_map(|s| s.split).collect();
        assert_eq!(splits, vec![1, 2]);
        let step = RewriteStep {
            split: Some(2),
            ..RewriteStep::backward(Rule::IdFusion, Path::root())
        };
        let split = apply(&t, &step, &sig).unwrap();
        assert_eq!(split, Term::par(Term::id(w(&["x1", "x2"])), Term::id(w(&["x3"]))));
        assert_eq!(apply(&split, &root(Rule::IdFusion), &sig), Ok(t));
    }

    #[test]
    fn steps_apply_below_the_root() {
        let sig = grid_signature();
        let t = Term::seq(grid(), Term::id(w(&["e", "f"])));
        let step = RewriteStep::forward(Rule::Interchange, Path::parse("/0").unwrap());
        assert!(applicable_rewrites(&t, &sig).contains(&step));
        let out = apply(&t, &step, &sig).unwrap();
        assert_eq!(out.subterm(&Path::parse("/1").unwrap()), t.subterm(&Path::parse("/1").unwrap()));
    }

    #[test]
    fn every_listed_step_preserves_the_type() {
        let sig = grid_signature();
        let t = Term::seq(
            Term::par(Term::seq(Term::gen("g1"), Term::id(w(&["b"]))), Term::id(w(&["c"]))),
            Term::par(Term::gen("g3"), Term::gen("g2")),
        );
        let ty = typecheck(&t, &sig).unwrap();
        let steps = applicable_rewrites(&t, &sig);
        assert!(!steps.is_empty());
        for s in steps {
            let out = apply(&t, &s, &sig).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert_eq!(typecheck(&out, &sig).as_ref(), Ok(&ty), "{s}");
        }
    }
}
