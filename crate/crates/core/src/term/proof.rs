//! Derivations in the ⊗-only fragment of noncommutative linear logic.

use std::fmt::{self, Write as _};

use super::{typecheck, Child, MorphismType, Path, Term, TypeError};
use crate::signature::{Signature, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProofRule {
    Id,
    Axiom,
    SymAxiom,
    Cut,
    TensorIntro,
}

impl ProofRule {
    pub fn for_term(t: &Term) -> ProofRule {
        match t {
            Term::Gen(_) => ProofRule::Axiom,
            Term::Id(_) => ProofRule::Id,
            Term::Sym(..) => ProofRule::SymAxiom,
            Term::Seq(..) => ProofRule::Cut,
            Term::Par(..) => ProofRule::TensorIntro,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProofRule::Id => "(id)",
            ProofRule::Axiom => "(f-ax)",
            ProofRule::SymAxiom => "(sym-ax)",
            ProofRule::Cut => "(cut)",
            ProofRule::TensorIntro => "(⊗-intro)",
        }
    }

    fn latex_label(self) -> &'static str {
        match self {
            ProofRule::Id => "$(\\mathrm{id})$",
            ProofRule::Axiom => "$(f\\text{-ax})$",
            ProofRule::SymAxiom => "$(\\sigma\\text{-ax})$",
            ProofRule::Cut => "$(\\mathrm{cut})$",
            ProofRule::TensorIntro => "$(\\otimes\\text{-intro})$",
        }
    }
}

/// A derivation tree isomorphic to the term it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub rule: ProofRule,
    /// Generator name for axiom nodes.
    pub axiom: Option<String>,
    pub conclusion: MorphismType,
    pub premises: Vec<ProofTree>,
}

impl ProofTree {
    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::node_count).sum::<usize>()
    }

    /// One node per line, two spaces of indentation per level:
    /// `(rule) dom ⊢ cod`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out, 0);
        out
    }

    fn write_text(&self, out: &mut String, depth: usize) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        let _ = writeln!(out, "{} {}", self.rule.label(), self.conclusion);
        for p in &self.premises {
            p.write_text(out, depth + 1);
        }
    }

    /// `bussproofs` markup wrapped in a `prooftree` environment.
    pub fn to_latex(&self) -> String {
        let mut out = String::from("\\begin{prooftree}\n");
        self.write_latex(&mut out);
        out.push_str("\\end{prooftree}\n");
        out
    }

    fn write_latex(&self, out: &mut String) {
        for p in &self.premises {
            p.write_latex(out);
        }
        if self.premises.is_empty() {
            out.push_str("\\AxiomC{}\n");
        }
        let _ = writeln!(out, "\\RightLabel{{{}}}", self.rule.latex_label());
        let inference = match self.premises.len() {
            0 | 1 => "UnaryInfC",
            _ => "BinaryInfC",
        };
        let _ = writeln!(
            out,
            "\\{inference}{{${} \\vdash {}$}}",
            latex_word(&self.conclusion.dom),
            latex_word(&self.conclusion.cod)
        );
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn latex_word(w: &Word) -> String {
    if w.is_empty() {
        return "I".into();
    }
    w.iter()
        .map(|o| format!("\\mathrm{{{}}}", o.as_str().replace('_', "\\_")))
        .collect::<Vec<_>>()
        .join("\\,")
}

/// Builds the derivation for a well-typed term.
pub fn to_proof_tree(t: &Term, sig: &Signature) -> Result<ProofTree, TypeError> {
    // One upfront check gives the first error in post-order; after that every
    // subterm is known to be well-typed.
    typecheck(t, sig)?;

    fn go(t: &Term, sig: &Signature, path: &mut Path) -> ProofTree {
        let premises = match t.children() {
            Some((a, b)) => {
                path.push(Child::First);
                let pa = go(a, sig, path);
                path.pop();
                path.push(Child::Second);
                let pb = go(b, sig, path);
                path.pop();
                vec![pa, pb]
            }
            None => Vec::new(),
        };
        let conclusion = match (t, premises.as_slice()) {
            (Term::Seq(..), [a, b]) => MorphismType::new(a.conclusion.dom.clone(), b.conclusion.cod.clone()),
            (Term::Par(..), [a, b]) => MorphismType::new(
                crate::signature::word_concat(&a.conclusion.dom, &b.conclusion.dom),
                crate::signature::word_concat(&a.conclusion.cod, &b.conclusion.cod),
            ),
            _ => typecheck(t, sig).expect("subterm of a well-typed term"),
        };
        ProofTree {
            rule: ProofRule::for_term(t),
            axiom: match t {
                Term::Gen(n) => Some(n.clone()),
                _ => None,
            },
            conclusion,
            premises,
        }
    }

    Ok(go(t, sig, &mut Path::root()))
}
