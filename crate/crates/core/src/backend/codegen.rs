//! Straight-line code generation through a textual target template.
//!
//! Templates use `${name}` placeholders. Each emitted statement binds a fresh
//! variable `t0, t1, …` in post-order over the term.

use std::cell::{Cell, RefCell};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{interpret, Backend, BackendError, MatrixBindings, Mode};
use crate::signature::Word;
use crate::term::Term;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetTemplate {
    pub name: String,
    #[serde(default)]
    pub prelude: String,
    /// `${out}`, `${rows}`, `${cols}`, `${entries}` (comma separated, row-major).
    pub constant: Option<String>,
    /// `${out}`, `${lhs}`, `${rhs}`.
    pub product: Option<String>,
    /// `${out}`, `${lhs}`, `${rhs}`; used in kron mode.
    pub kronecker: Option<String>,
    /// `${out}`, `${lhs}`, `${rhs}`; used in dirsum mode.
    pub direct_sum: Option<String>,
    /// `${out}`, `${dim}`.
    pub identity: Option<String>,
    /// `${out}`, `${m}`, `${n}`; `${mode}` is available.
    pub swap: Option<String>,
    /// `${result}`.
    pub output: Option<String>,
    #[serde(default)]
    pub epilogue: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template {template} has no `{field}` entry")]
    MissingField { template: String, field: &'static str },
    #[error("template {template}: `{field}` lacks placeholder ${{{placeholder}}}")]
    MissingPlaceholder {
        template: String,
        field: &'static str,
        placeholder: &'static str,
    },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CodegenError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

impl CodegenError {
    pub fn code(&self) -> &'static str {
        match self {
            CodegenError::Template(_) => "template-error",
            CodegenError::Backend(e) => e.code(),
        }
    }
}

impl TargetTemplate {
    /// A Python/NumPy target. The program prints the result as
    /// `{"rows": r, "cols": c, "entries": [...]}`.
    pub fn numpy() -> Self {
        TargetTemplate {
            name: "numpy".into(),
            prelude: NUMPY_PRELUDE.into(),
            constant: Some("${out} = np.array([${entries}], dtype=float).reshape(${rows}, ${cols})".into()),
            product: Some("${out} = ${lhs} @ ${rhs}".into()),
            kronecker: Some("${out} = np.kron(${lhs}, ${rhs})".into()),
            direct_sum: Some("${out} = dsum(${lhs}, ${rhs})".into()),
            identity: Some("${out} = np.eye(${dim})".into()),
            swap: Some("${out} = swap(${m}, ${n}, \"${mode}\")".into()),
            output: Some(
                "print(json.dumps({\"rows\": int(${result}.shape[0]), \"cols\": int(${result}.shape[1]), \
                 \"entries\": [float(x) for x in ${result}.reshape(-1)]}))"
                    .into(),
            ),
            epilogue: String::new(),
        }
    }

    /// Looks up a built-in template by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "numpy" => Some(TargetTemplate::numpy()),
            _ => None,
        }
    }

    fn field(&self, field: &'static str, placeholders: &[&'static str]) -> Result<&str, TemplateError> {
        let value = match field {
            "constant" => &self.constant,
            "product" => &self.product,
            "kronecker" => &self.kronecker,
            "direct_sum" => &self.direct_sum,
            "identity" => &self.identity,
            "swap" => &self.swap,
            "output" => &self.output,
            _ => unreachable!("unknown template field {field}"),
        };
        let value = value.as_deref().ok_or_else(|| TemplateError::MissingField {
            template: self.name.clone(),
            field,
        })?;
        for placeholder in placeholders {
            if !value.contains(&format!("${{{placeholder}}}")) {
                return Err(TemplateError::MissingPlaceholder {
                    template: self.name.clone(),
                    field,
                    placeholder,
                });
            }
        }
        Ok(value)
    }

    /// Checks the fields a program in `mode` needs.
    pub fn validate(&self, mode: Mode) -> Result<(), TemplateError> {
        self.field("constant", &["out", "rows", "cols", "entries"])?;
        self.field("product", &["out", "lhs", "rhs"])?;
        match mode {
            Mode::Kron => self.field("kronecker", &["out", "lhs", "rhs"])?,
            Mode::Dirsum => self.field("direct_sum", &["out", "lhs", "rhs"])?,
        };
        self.field("identity", &["out", "dim"])?;
        self.field("swap", &["out", "m", "n"])?;
        self.field("output", &["result"])?;
        Ok(())
    }
}

const NUMPY_PRELUDE: &str = r#"import json
import numpy as np


def swap(m, n, mode):
    if mode == "dirsum":
        s = np.zeros((m + n, m + n))
        for i in range(m):
            s[i, n + i] = 1.0
        for j in range(n):
            s[m + j, j] = 1.0
        return s
    s = np.zeros((m * n, m * n))
    for i in range(m):
        for j in range(n):
            s[i * n + j, j * m + i] = 1.0
    return s


def dsum(a, b):
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out

"#;

fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in values {
        out = out.replace(&format!("${{{key}}}"), value);
    }
    out
}

/// Counts of emitted statements by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CodegenStats {
    pub constants: usize,
    pub products: usize,
    pub kroneckers: usize,
    pub direct_sums: usize,
    pub identities: usize,
    pub swaps: usize,
    pub outputs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub source: String,
    pub stats: CodegenStats,
}

struct Emitter<'a> {
    template: &'a TargetTemplate,
    bindings: &'a MatrixBindings,
    mode: Mode,
    lines: RefCell<Vec<String>>,
    stats: RefCell<CodegenStats>,
    next: Cell<usize>,
}

impl Emitter<'_> {
    fn fresh(&self) -> String {
        let n = self.next.get();
        self.next.set(n + 1);
        format!("t{n}")
    }

    fn emit(&self, field: &'static str, values: &[(&str, &str)], bump: impl FnOnce(&mut CodegenStats)) -> String {
        let template = self.template.field(field, &[]).expect("template validated before emission");
        self.lines.borrow_mut().push(fill(template, values));
        bump(&mut self.stats.borrow_mut());
        values
            .iter()
            .find(|(k, _)| *k == "out")
            .map(|(_, v)| v.to_string())
            .unwrap_or_default()
    }
}

impl Backend for Emitter<'_> {
    type Value = String;
    type Error = BackendError;

    fn id(&self, w: &Word) -> Result<String, BackendError> {
        let dim = self.bindings.word_dim(w, self.mode)?.to_string();
        let out = self.fresh();
        Ok(self.emit("identity", &[("out", &out), ("dim", &dim)], |s| s.identities += 1))
    }

    fn gen(&self, name: &str) -> Result<String, BackendError> {
        let m = self
            .bindings
            .matrices
            .get(name)
            .ok_or_else(|| BackendError::MissingBinding { name: name.to_string() })?;
        let entries: Vec<String> = m.entries().iter().map(|x| format!("{x:?}")).collect();
        let (rows, cols) = (m.rows().to_string(), m.cols().to_string());
        let out = self.fresh();
        Ok(self.emit(
            "constant",
            &[("out", &out), ("rows", &rows), ("cols", &cols), ("entries", &entries.join(", "))],
            |s| s.constants += 1,
        ))
    }

    fn sym(&self, u: &Word, v: &Word) -> Result<String, BackendError> {
        let m = self.bindings.word_dim(u, self.mode)?.to_string();
        let n = self.bindings.word_dim(v, self.mode)?.to_string();
        let out = self.fresh();
        Ok(
            self.emit("swap", &[("out", &out), ("m", &m), ("n", &n), ("mode", self.mode.as_str())], |s| {
                s.swaps += 1
            }),
        )
    }

    fn seq(&self, first: String, second: String) -> Result<String, BackendError> {
        let out = self.fresh();
        Ok(self.emit("product", &[("out", &out), ("lhs", &first), ("rhs", &second)], |s| s.products += 1))
    }

    fn par(&self, top: String, bottom: String) -> Result<String, BackendError> {
        let out = self.fresh();
        let values = [("out", out.as_str()), ("lhs", top.as_str()), ("rhs", bottom.as_str())];
        Ok(match self.mode {
            Mode::Kron => self.emit("kronecker", &values, |s| s.kroneckers += 1),
            Mode::Dirsum => self.emit("direct_sum", &values, |s| s.direct_sums += 1),
        })
    }
}

/// Emits a program that computes `evaluate(t, bindings, mode)` when run in
/// the template's target environment.
pub fn codegen(t: &Term, bindings: &MatrixBindings, mode: Mode, template: &TargetTemplate) -> Result<Program, CodegenError> {
    template.validate(mode)?;
    let emitter = Emitter {
        template,
        bindings,
        mode,
        lines: RefCell::new(Vec::new()),
        stats: RefCell::new(CodegenStats::default()),
        next: Cell::new(0),
    };
    let result = interpret(t, &emitter)?;
    let output = template.field("output", &["result"])?;
    let mut stats = emitter.stats.into_inner();
    stats.outputs = 1;

    let mut source = template.prelude.clone();
    for line in emitter.lines.into_inner() {
        source.push_str(&line);
        source.push('\n');
    }
    source.push_str(&fill(output, &[("result", &result)]));
    source.push('\n');
    source.push_str(&template.epilogue);
    Ok(Program { source, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::running_example_signature;
    use crate::term::running_example_term;

    fn bindings() -> MatrixBindings {
        let sig = running_example_signature();
        MatrixBindings::random(&sig, &MatrixBindings::uniform_dims(&sig, 2), Mode::Kron, 42).unwrap()
    }

    #[test]
    fn single_generator() {
        let p = codegen(&Term::gen("f1"), &bindings(), Mode::Kron, &TargetTemplate::numpy()).unwrap();
        assert_eq!(
            p.stats,
            CodegenStats {
                constants: 1,
                outputs: 1,
                ..Default::default()
            }
        );
        assert!(p.source.contains("t0 = np.array(["));
        assert!(p.source.trim_end().ends_with("t0.reshape(-1)]}))"));
    }

    #[test]
    fn sequential_pair() {
        let sig = running_example_signature();
        let mut b = bindings();
        b.matrices.insert("f1".into(), crate::backend::Matrix::zeros(2, 2));
        let _ = sig;
        let p = codegen(
            &Term::seq(Term::gen("f2"), Term::gen("f1")),
            &b,
            Mode::Kron,
            &TargetTemplate::numpy(),
        )
        .unwrap();
        assert_eq!((p.stats.constants, p.stats.products), (2, 1));
        assert!(p.source.contains("t2 = t0 @ t1\n"));
    }

    #[test]
    fn running_example_counts() {
        let p = codegen(&running_example_term(), &bindings(), Mode::Kron, &TargetTemplate::numpy()).unwrap();
        assert_eq!(
            p.stats,
            CodegenStats {
                constants: 4,
                kroneckers: 2,
                products: 1,
                outputs: 1,
                ..Default::default()
            }
        );
    }

    #[test]
    fn template_errors() {
        let mut t = TargetTemplate::numpy();
        t.product = Some("${out} = ${lhs} @ rhs".into());
        assert_eq!(
            codegen(&Term::gen("f1"), &bindings(), Mode::Kron, &t),
            Err(CodegenError::Template(TemplateError::MissingPlaceholder {
                template: "numpy".into(),
                field: "product",
                placeholder: "rhs",
            }))
        );
        let mut t = TargetTemplate::numpy();
        t.direct_sum = None;
        assert!(t.validate(Mode::Kron).is_ok());
        assert!(matches!(
            t.validate(Mode::Dirsum),
            Err(TemplateError::MissingField { field: "direct_sum", .. })
        ));
    }
}
