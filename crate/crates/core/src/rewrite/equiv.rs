use std::collections::BTreeMap;

use thiserror::Error;

use super::normal::normal_form;
use crate::backend::{evaluate, MatrixBindings, Mode};
use crate::signature::{ObjectName, Signature};
use crate::term::{typecheck, MorphismType, Term, TypeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Equivalence {
    Yes,
    No,
    ProbablyYes,
}

impl Equivalence {
    pub fn as_str(self) -> &'static str {
        match self {
            Equivalence::Yes => "yes",
            Equivalence::No => "no",
            Equivalence::ProbablyYes => "probably-yes",
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("types differ: {left} vs {right}")]
    TypeMismatch { left: MorphismType, right: MorphismType },
    #[error(transparent)]
    Type(#[from] TypeError),
}

const DRAWS: u64 = 3;
const SEED: u64 = 0x5eed_0b7e;

/// Dimension 2 or 3 by object index.
fn probe_dims(sig: &Signature) -> BTreeMap<ObjectName, usize> {
    sig.objects().iter().enumerate().map(|(i, o)| (o.clone(), 2 + i % 2)).collect()
}

/// Decides equality modulo the strict monoidal axioms for planar terms, and
/// tests it on random matrices when a crossing is present. Planar terms with
/// too many zero-arity exchanges to search exhaustively also fall back to the
/// random test.
pub fn terms_equivalent(t1: &Term, t2: &Term, sig: &Signature) -> Result<Equivalence, EquivalenceError> {
    let ty1 = typecheck(t1, sig)?;
    let ty2 = typecheck(t2, sig)?;
    if ty1 != ty2 {
        return Err(EquivalenceError::TypeMismatch { left: ty1, right: ty2 });
    }
    if !t1.contains_sym() && !t2.contains_sym() {
        let (n1, exact1) = normal_form(t1, sig)?;
        let (n2, exact2) = normal_form(t2, sig)?;
        if n1 == n2 {
            return Ok(Equivalence::Yes);
        }
        if exact1 && exact2 {
            return Ok(Equivalence::No);
        }
    }
    let dims = probe_dims(sig);
    for draw in 0..DRAWS {
        let b = MatrixBindings::random(sig, &dims, Mode::Kron, SEED + draw).expect("dims cover the signature");
        let m1 = evaluate(t1, &b, Mode::Kron).expect("well-typed term over complete bindings");
        let m2 = evaluate(t2, &b, Mode::Kron).expect("well-typed term over complete bindings");
        let scale = m1.entries().iter().chain(m2.entries()).fold(1.0f64, |a, x| a.max(x.abs()));
        if m1.max_abs_diff(&m2).is_none_or(|d| d > 1e-9 * scale) {
            return Ok(Equivalence::No);
        }
    }
    Ok(Equivalence::ProbablyYes)
}
