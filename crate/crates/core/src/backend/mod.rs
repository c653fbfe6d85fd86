//! Semantic evaluation of terms.
//!
//! A [`Backend`] supplies identities, generators, symmetries and the two
//! composition operators; [`interpret`] is the structural recursion that
//! combines them. Two matrix interpretations are provided: [`Mode::Kron`]
//! (tensor is the Kronecker product, word dimensions multiply) and
//! [`Mode::Dirsum`] (tensor is the block direct sum, word dimensions add).

mod codegen;
mod matrix;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signature::{ObjectName, Signature, Word};
use crate::term::Term;

pub use codegen::{codegen, CodegenError, CodegenStats, Program, TargetTemplate, TemplateError};
pub use matrix::{swap_matrix, Matrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Kron,
    Dirsum,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Kron => "kron",
            Mode::Dirsum => "dirsum",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kron" => Ok(Mode::Kron),
            "dirsum" => Ok(Mode::Dirsum),
            other => Err(format!("unknown mode {other:?} (expected kron or dirsum)")),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BackendError {
    #[error("no binding for {name}")]
    MissingBinding { name: String },
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix declared {rows}x{cols} has {len} entries")]
    BadShape { rows: usize, cols: usize, len: usize },
    #[error("binding for {name} is {found:?} but its type needs {expected:?}")]
    InconsistentBinding {
        name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("dimension of {name} must be positive")]
    NonPositiveDim { name: String },
    #[error("entry {index} of {name} is not finite")]
    NonFiniteEntry { name: String, index: usize },
}

impl BackendError {
    pub fn code(&self) -> &'static str {
        match self {
            BackendError::MissingBinding { .. } => "missing-binding",
            BackendError::DimMismatch { .. } => "dim-mismatch",
            BackendError::BadShape { .. } => "bad-shape",
            BackendError::InconsistentBinding { .. } => "inconsistent-binding",
            BackendError::NonPositiveDim { .. } => "non-positive-dim",
            BackendError::NonFiniteEntry { .. } => "non-finite-entry",
        }
    }
}

/// The capability set a semantic target must provide.
pub trait Backend {
    type Value;
    type Error;

    fn id(&self, w: &Word) -> Result<Self::Value, Self::Error>;
    fn gen(&self, name: &str) -> Result<Self::Value, Self::Error>;
    fn sym(&self, u: &Word, v: &Word) -> Result<Self::Value, Self::Error>;
    fn seq(&self, first: Self::Value, second: Self::Value) -> Result<Self::Value, Self::Error>;
    fn par(&self, top: Self::Value, bottom: Self::Value) -> Result<Self::Value, Self::Error>;
}

/// Post-order structural recursion over `t`.
pub fn interpret<B: Backend>(t: &Term, backend: &B) -> Result<B::Value, B::Error> {
    match t {
        Term::Gen(name) => backend.gen(name),
        Term::Id(w) => backend.id(w),
        Term::Sym(u, v) => backend.sym(u, v),
        Term::Seq(a, b) => {
            let va = interpret(a, backend)?;
            let vb = interpret(b, backend)?;
            backend.seq(va, vb)
        }
        Term::Par(a, b) => {
            let va = interpret(a, backend)?;
            let vb = interpret(b, backend)?;
            backend.par(va, vb)
        }
    }
}

/// Object dimensions and generator matrices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MatrixBindings {
    pub dims: BTreeMap<ObjectName, usize>,
    pub matrices: BTreeMap<String, Matrix>,
}

impl MatrixBindings {
    /// Product of object dimensions (kron) or their sum (dirsum). The empty
    /// word has dimension 1 and 0 respectively.
    pub fn word_dim(&self, w: &Word, mode: Mode) -> Result<usize, BackendError> {
        let mut acc = match mode {
            Mode::Kron => 1,
            Mode::Dirsum => 0,
        };
        for o in w {
            let d = *self
                .dims
                .get(o)
                .ok_or_else(|| BackendError::MissingBinding { name: o.to_string() })?;
            acc = match mode {
                Mode::Kron => acc * d,
                Mode::Dirsum => acc + d,
            };
        }
        Ok(acc)
    }

    /// Checks that every generator has a finite matrix whose shape matches
    /// its type, and every object a positive dimension.
    pub fn validate(&self, sig: &Signature, mode: Mode) -> Result<(), BackendError> {
        for o in sig.objects() {
            match self.dims.get(o) {
                None => return Err(BackendError::MissingBinding { name: o.to_string() }),
                Some(0) => return Err(BackendError::NonPositiveDim { name: o.to_string() }),
                Some(_) => {}
            }
        }
        for g in sig.generators() {
            let m = self
                .matrices
                .get(&g.name)
                .ok_or_else(|| BackendError::MissingBinding { name: g.name.clone() })?;
            let expected = (self.word_dim(&g.dom, mode)?, self.word_dim(&g.cod, mode)?);
            if (m.rows(), m.cols()) != expected {
                return Err(BackendError::InconsistentBinding {
                    name: g.name.clone(),
                    expected,
                    found: (m.rows(), m.cols()),
                });
            }
            if let Some(index) = m.entries().iter().position(|x| !x.is_finite()) {
                return Err(BackendError::NonFiniteEntry {
                    name: g.name.clone(),
                    index,
                });
            }
        }
        Ok(())
    }

    /// Pseudorandom bindings: every generator gets entries drawn uniformly
    /// from `[-1, 1)`, in signature order, row-major, from a ChaCha8 stream
    /// seeded with `seed`.
    pub fn random(sig: &Signature, dims: &BTreeMap<ObjectName, usize>, mode: Mode, seed: u64) -> Result<Self, BackendError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bindings = MatrixBindings {
            dims: dims.clone(),
            matrices: BTreeMap::new(),
        };
        for g in sig.generators() {
            let rows = bindings.word_dim(&g.dom, mode)?;
            let cols = bindings.word_dim(&g.cod, mode)?;
            let entries = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
            bindings.matrices.insert(g.name.clone(), Matrix::new(rows, cols, entries)?);
        }
        Ok(bindings)
    }

    /// Same dimension for every declared object.
    pub fn uniform_dims(sig: &Signature, dim: usize) -> BTreeMap<ObjectName, usize> {
        sig.objects().iter().map(|o| (o.clone(), dim)).collect()
    }
}

/// Matrix semantics in one of the two modes.
pub struct MatrixBackend<'a> {
    pub bindings: &'a MatrixBindings,
    pub mode: Mode,
}

impl Backend for MatrixBackend<'_> {
    type Value = Matrix;
    type Error = BackendError;

    fn id(&self, w: &Word) -> Result<Matrix, BackendError> {
        Ok(Matrix::identity(self.bindings.word_dim(w, self.mode)?))
    }

    fn gen(&self, name: &str) -> Result<Matrix, BackendError> {
        self.bindings
            .matrices
            .get(name)
            .cloned()
            .ok_or_else(|| BackendError::MissingBinding { name: name.to_string() })
    }

    fn sym(&self, u: &Word, v: &Word) -> Result<Matrix, BackendError> {
        Ok(swap_matrix(
            self.mode,
            self.bindings.word_dim(u, self.mode)?,
            self.bindings.word_dim(v, self.mode)?,
        ))
    }

    fn seq(&self, first: Matrix, second: Matrix) -> Result<Matrix, BackendError> {
        first.matmul(&second)
    }

    fn par(&self, top: Matrix, bottom: Matrix) -> Result<Matrix, BackendError> {
        Ok(match self.mode {
            Mode::Kron => top.kron(&bottom),
            Mode::Dirsum => top.direct_sum(&bottom),
        })
    }
}

/// Evaluates `t` to a matrix of shape `(dim dom, dim cod)`.
pub fn evaluate(t: &Term, bindings: &MatrixBindings, mode: Mode) -> Result<Matrix, BackendError> {
    interpret(t, &MatrixBackend { bindings, mode })
}

/// Like [`evaluate`], but independent subtrees run on the rayon pool. Each
/// combination step is the same as in the sequential recursion, so results
/// are bit-identical.
pub fn evaluate_parallel(t: &Term, bindings: &MatrixBindings, mode: Mode) -> Result<Matrix, BackendError> {
    fn go(t: &Term, backend: &MatrixBackend<'_>, depth: usize) -> Result<Matrix, BackendError> {
        let (a, b) = match t {
            Term::Seq(a, b) | Term::Par(a, b) if depth < 8 => (a, b),
            _ => return interpret(t, backend),
        };
        let (va, vb) = rayon::join(|| go(a, backend, depth + 1), || go(b, backend, depth + 1));
        let (va, vb) = (va?, vb?);
        match t {
            Term::Seq(..) => backend.seq(va, vb),
            _ => backend.par(va, vb),
        }
    }
    go(t, &MatrixBackend { bindings, mode }, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::running_example_signature;
    use crate::term::running_example_term;

    fn w(names: &[&str]) -> Word {
        Word::from_names(names.iter().copied())
    }

    fn dims(pairs: &[(&str, usize)]) -> MatrixBindings {
        MatrixBindings {
            dims: pairs.iter().map(|(n, d)| (ObjectName::new(*n).unwrap(), *d)).collect(),
            matrices: BTreeMap::new(),
        }
    }

    #[test]
    fn additive_swap_of_unit_wires() {
        let b = dims(&[("x", 1)]);
        let m = evaluate(&Term::sym(w(&["x"]), w(&["x"])), &b, Mode::Dirsum).unwrap();
        assert_eq!(m, Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
    }

    #[test]
    fn identity_on_word_is_identity_of_product_dim() {
        let b = dims(&[("x", 2), ("y", 3)]);
        assert_eq!(evaluate(&Term::id(w(&["x", "y"])), &b, Mode::Kron).unwrap(), Matrix::identity(6));
        assert_eq!(evaluate(&Term::id(w(&["x", "y"])), &b, Mode::Dirsum).unwrap(), Matrix::identity(5));
        assert_eq!(evaluate(&Term::id(Word::empty()), &b, Mode::Kron).unwrap(), Matrix::identity(1));
        assert_eq!(evaluate(&Term::id(Word::empty()), &b, Mode::Dirsum).unwrap(), Matrix::identity(0));
    }

    #[test]
    fn kron_identities_for_short_words() {
        let names = ["a", "b", "c"];
        for da in 1..=3 {
            for db in 1..=3 {
                for dc in 1..=3 {
                    let b = dims(&[("a", da), ("b", db), ("c", dc)]);
                    for len in 0..=3 {
                        let word: Vec<&str> = (0..len).map(|i| names[(i * 2 + da) % 3]).collect();
                        let expected: usize = word.iter().map(|n| b.dims[&ObjectName::new(*n).unwrap()]).product();
                        assert_eq!(evaluate(&Term::id(w(&word)), &b, Mode::Kron).unwrap(), Matrix::identity(expected));
                    }
                }
            }
        }
    }

    #[test]
    fn missing_bindings_are_reported() {
        let b = dims(&[("x", 2)]);
        assert_eq!(
            evaluate(&Term::gen("f"), &b, Mode::Kron),
            Err(BackendError::MissingBinding { name: "f".into() })
        );
        assert!(matches!(
            evaluate(&Term::id(w(&["y"])), &b, Mode::Kron),
            Err(BackendError::MissingBinding { .. })
        ));
    }

    #[test]
    fn seeded_bindings_have_the_right_shapes() {
        let sig = running_example_signature();
        let b = MatrixBindings::random(&sig, &MatrixBindings::uniform_dims(&sig, 2), Mode::Kron, 42).unwrap();
        let shapes: Vec<_> = ["f1", "f2", "f3", "f4"]
            .iter()
            .map(|n| (b.matrices[*n].rows(), b.matrices[*n].cols()))
            .collect();
        assert_eq!(shapes, vec![(2, 4), (2, 2), (2, 2), (4, 2)]);
        assert_eq!(b.validate(&sig, Mode::Kron), Ok(()));
        let b3 = MatrixBindings::random(&sig, &MatrixBindings::uniform_dims(&sig, 3), Mode::Kron, 42).unwrap();
        assert!(b3.validate(&sig, Mode::Dirsum).is_err());
        let again = MatrixBindings::random(&sig, &MatrixBindings::uniform_dims(&sig, 2), Mode::Kron, 42).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn sequential_composition_is_matrix_product() {
        let sig = running_example_signature();
        let b = MatrixBindings::random(&sig, &MatrixBindings::uniform_dims(&sig, 2), Mode::Kron, 7).unwrap();
        let lhs = evaluate(&running_example_term(), &b, Mode::Kron).unwrap();
        let top = evaluate(&Term::par(Term::gen("f1"), Term::gen("f2")), &b, Mode::Kron).unwrap();
        let bottom = evaluate(&Term::par(Term::gen("f3"), Term::gen("f4")), &b, Mode::Kron).unwrap();
        assert_eq!(lhs, top.matmul(&bottom).unwrap());
    }

    #[test]
    fn parallel_evaluation_is_bit_identical() {
        let sig = running_example_signature();
        for mode in [Mode::Kron, Mode::Dirsum] {
            let b = MatrixBindings::random(&sig, &MatrixBindings::uniform_dims(&sig, 3), mode, 11).unwrap();
            let t = Term::seq(running_example_term(), Term::par(Term::id(w(&["x6"])), Term::id(w(&["x7"]))));
            assert_eq!(evaluate(&t, &b, mode).unwrap(), evaluate_parallel(&t, &b, mode).unwrap());
        }
    }

    #[test]
    fn mode_parses() {
        assert_eq!("kron".parse::<Mode>(), Ok(Mode::Kron));
        assert_eq!("dirsum".parse::<Mode>(), Ok(Mode::Dirsum));
        assert!("sum".parse::<Mode>().is_err());
    }
}
