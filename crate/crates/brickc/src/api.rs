//! The pipeline behind every CLI verb and HTTP endpoint.
//!
//! Each operation takes a parsed document plus options and returns the JSON
//! value the service sends back. The CLI prints the same value, or one of
//! its string fields, so both front ends produce identical bytes.

use brickc_core::backend::{codegen, evaluate, MatrixBindings, Mode, TargetTemplate};
use brickc_core::il::{self, Bindings, IlDocument, IlError};
use brickc_core::render::{render as render_scene, RenderOptions, Style};
use brickc_core::rewrite::{minimize_width, normalize as normal_form, CostModel};
use brickc_core::signature::Word;
use brickc_core::term::{tensor_width, to_proof_tree, typecheck, Term};
use brickc_core::tiling::brick_to_term;
use serde::Deserialize;
use serde_json::{json, Value};

/// A structured failure. `malformed` separates bad input (HTTP 400) from
/// well-formed documents that fail to check (HTTP 422).
#[derive(Clone, Debug, PartialEq)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    pub path: Option<String>,
    pub malformed: bool,
}

impl ApiError {
    fn semantic(code: &str, message: impl Into<String>, path: Option<&str>) -> Self {
        ApiError {
            code: code.into(),
            message: message.into(),
            path: path.map(str::to_string),
            malformed: false,
        }
    }

    fn malformed(code: &str, message: impl Into<String>, path: &str) -> Self {
        ApiError {
            code: code.into(),
            message: message.into(),
            path: Some(path.into()),
            malformed: true,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": {"code": self.code, "message": self.message, "path": self.path}})
    }
}

impl From<IlError> for ApiError {
    fn from(e: IlError) -> Self {
        ApiError {
            code: e.code().into(),
            message: e.to_string(),
            path: Some(e.path()),
            malformed: e.is_malformed(),
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// The canonical text of a response: compact JSON and a trailing newline.
pub fn to_body(v: &Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

/// Parses a document, optionally lifting a top-level `options` object out
/// of it first.
pub fn parse_request(text: &str) -> Result<(IlDocument, Value), ApiError> {
    let mut v = il::parse_json(text)?;
    let options = match v.as_object_mut() {
        Some(m) => m.remove("options").unwrap_or_else(|| json!({})),
        None => json!({}),
    };
    Ok((il::parse_value(&v)?, options))
}

pub fn parse_options<T: for<'de> Deserialize<'de>>(options: &Value) -> Result<T, ApiError> {
    serde_json::from_value(options.clone()).map_err(|e| ApiError::malformed("schema-error", e.to_string(), "$.options"))
}

/// The document's term, or the term read off its brick diagram.
pub fn diagram(doc: &IlDocument) -> Result<Term, ApiError> {
    if let Some(t) = &doc.term {
        return Ok(t.clone());
    }
    match &doc.brick {
        Some(b) => brick_to_term(b, &doc.signature).map_err(|e| ApiError::semantic(e.code(), e.to_string(), Some("$.brick"))),
        None => Err(ApiError::malformed(
            "missing-diagram",
            "the document has neither `term` nor `brick`",
            "$",
        )),
    }
}

fn word_json(w: &Word) -> Value {
    w.iter().map(|o| Value::from(o.as_str())).collect()
}

fn type_error(e: brickc_core::term::TypeError) -> ApiError {
    ApiError::semantic(e.code(), e.to_string(), Some(&e.path().to_string()))
}

pub fn check(doc: &IlDocument) -> Result<Value, ApiError> {
    let t = diagram(doc)?;
    let ty = typecheck(&t, &doc.signature).map_err(type_error)?;
    Ok(json!({"dom": word_json(&ty.dom), "cod": word_json(&ty.cod), "sequent": ty.to_string()}))
}

pub fn stats(doc: &IlDocument) -> Result<Value, ApiError> {
    let t = diagram(doc)?;
    let ty = typecheck(&t, &doc.signature).map_err(type_error)?;
    Ok(json!({
        "sequent": ty.to_string(),
        "tensor_width": tensor_width(&t),
        "leaves": t.leaf_count(),
        "generator_leaves": t.generator_count(),
        "nodes": t.node_count(),
        "depth": t.depth(),
    }))
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileOptions {
    pub mode: Option<Mode>,
    /// Draw fresh bindings from this seed instead of using the document's.
    pub seed: Option<u64>,
    /// Dimension of every object for seeded bindings; defaults to 2.
    pub dim: Option<usize>,
    /// Bindings in the document format, overriding the document's.
    pub bindings: Option<Value>,
    /// A built-in template name or a template object.
    pub emit: Option<Emit>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Emit {
    Builtin(String),
    Template(Box<TargetTemplate>),
}

/// Seeded bindings for `doc`'s signature with every object of dimension
/// `dim`.
pub fn seeded_bindings(doc: &IlDocument, mode: Mode, seed: u64, dim: usize) -> Result<Bindings, ApiError> {
    if dim == 0 {
        return Err(ApiError::malformed("schema-error", "dimension must be positive", "$.options.dim"));
    }
    let dims = MatrixBindings::uniform_dims(&doc.signature, dim);
    let values =
        MatrixBindings::random(&doc.signature, &dims, mode, seed).map_err(|e| ApiError::semantic(e.code(), e.to_string(), None))?;
    Ok(Bindings { mode: Some(mode), values })
}

pub fn bindings(doc: &IlDocument, mode: Mode, seed: u64, dim: usize) -> Result<Value, ApiError> {
    Ok(il::bindings_to_value(&seeded_bindings(doc, mode, seed, dim)?))
}

pub fn compile(doc: &IlDocument, opts: &CompileOptions) -> Result<Value, ApiError> {
    let t = diagram(doc)?;
    typecheck(&t, &doc.signature).map_err(type_error)?;
    let explicit = match &opts.bindings {
        Some(v) => Some(il::parse_bindings_value(v, &doc.signature).map_err(|e| {
            let mut err = ApiError::from(e);
            err.path = err.path.map(|p| p.replacen('$', "$.options.bindings", 1));
            err
        })?),
        None => None,
    };
    let mode = opts
        .mode
        .or(explicit.as_ref().and_then(|b| b.mode))
        .or(doc.bindings.as_ref().and_then(|b| b.mode))
        .unwrap_or_default();
    let bindings = match (opts.seed, explicit, &doc.bindings) {
        (Some(seed), _, _) => seeded_bindings(doc, mode, seed, opts.dim.unwrap_or(2))?,
        (None, Some(b), _) => b,
        (None, None, Some(b)) => b.clone(),
        (None, None, None) => {
            return Err(ApiError::malformed(
                "missing-bindings",
                "no bindings: add `bindings` to the document or pass a seed",
                "$",
            ))
        }
    };
    bindings
        .values
        .validate(&doc.signature, mode)
        .map_err(|e| ApiError::semantic(e.code(), e.to_string(), Some("$.bindings")))?;
    match &opts.emit {
        None => {
            let m = evaluate(&t, &bindings.values, mode).map_err(|e| ApiError::semantic(e.code(), e.to_string(), None))?;
            Ok(il::matrix_to_value(&m))
        }
        Some(emit) => {
            let template = match emit {
                Emit::Builtin(name) => TargetTemplate::builtin(name)
                    .ok_or_else(|| ApiError::malformed("unknown-template", format!("no built-in template `{name}`"), "$.options.emit"))?,
                Emit::Template(t) => (**t).clone(),
            };
            let p = codegen(&t, &bindings.values, mode, &template)
                .map_err(|e| ApiError::semantic(e.code(), e.to_string(), Some("$.options.emit")))?;
            Ok(json!({"source": p.source, "mode": mode.as_str()}))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeOptions {
    #[serde(default)]
    pub minimize_width: bool,
}

/// The document with its term replaced by the layered normal form, or by a
/// width-reduced form of it. Any brick diagram is dropped.
pub fn normalize(doc: &IlDocument, opts: &NormalizeOptions) -> Result<Value, ApiError> {
    let t = diagram(doc)?;
    let sig = &doc.signature;
    let n = normal_form(&t, sig).map_err(type_error)?;
    let n = if opts.minimize_width {
        minimize_width(&n, sig, &CostModel::default()).map_err(type_error)?
    } else {
        n
    };
    let mut out = doc.clone();
    out.term = Some(n);
    out.brick = None;
    Ok(il::to_value(&out))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderRequest {
    pub style: String,
    pub width: f64,
    pub height: f64,
    pub font_size: f64,
}

impl Default for RenderRequest {
    fn default() -> Self {
        let d = RenderOptions::default();
        RenderRequest {
            style: d.style.as_str().into(),
            width: d.width,
            height: d.height,
            font_size: d.font_size,
        }
    }
}

impl RenderRequest {
    pub fn options(&self) -> Result<RenderOptions, ApiError> {
        let style: Style = self
            .style
            .parse()
            .map_err(|e: String| ApiError::malformed("schema-error", e, "$.options.style"))?;
        Ok(RenderOptions {
            style,
            width: self.width,
            height: self.height,
            font_size: self.font_size,
        })
    }
}

pub fn render(doc: &IlDocument, req: &RenderRequest) -> Result<Value, ApiError> {
    let opts = req.options()?;
    let t = diagram(doc)?;
    let scene = render_scene(&t, &doc.signature, &opts).map_err(|e| ApiError::semantic(e.code(), e.to_string(), None))?;
    Ok(json!({"style": opts.style.as_str(), "svg": scene.to_svg()}))
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofOptions {
    #[serde(default)]
    pub latex: bool,
}

pub fn proof(doc: &IlDocument, opts: &ProofOptions) -> Result<Value, ApiError> {
    let t = diagram(doc)?;
    let p = to_proof_tree(&t, &doc.signature).map_err(type_error)?;
    let text = if opts.latex { p.to_latex() } else { p.to_text() };
    Ok(json!({"format": if opts.latex { "latex" } else { "text" }, "proof": text}))
}

#[cfg(test)]
mod tests {
    use super::*;
    use brickc_core::signature::running_example_signature;
    use brickc_core::term::running_example_term;

    fn doc() -> IlDocument {
        let mut d = IlDocument::new(running_example_signature());
        d.term = Some(running_example_term());
        d
    }

    #[test]
    fn check_and_stats() {
        let d = doc();
        assert_eq!(check(&d).unwrap()["sequent"], "x1 x2 ⊢ x6 x7");
        let s = stats(&d).unwrap();
        assert_eq!(s["tensor_width"], 2);
        assert_eq!(s["generator_leaves"], 4);
    }

    #[test]
    fn compile_needs_bindings() {
        let err = compile(&doc(), &CompileOptions::default()).unwrap_err();
        assert_eq!(err.code, "missing-bindings");
        assert!(err.malformed);
    }

    #[test]
    fn seeded_compile_has_the_right_shape() {
        let opts = CompileOptions {
            seed: Some(42),
            ..CompileOptions::default()
        };
        let m = compile(&doc(), &opts).unwrap();
        assert_eq!((m["rows"].as_u64(), m["cols"].as_u64()), (Some(4), Some(4)));
        let d = CompileOptions {
            seed: Some(42),
            mode: Some(Mode::Dirsum),
            dim: Some(1),
            ..CompileOptions::default()
        };
        let m = compile(&doc(), &d).unwrap();
        assert_eq!((m["rows"].as_u64(), m["cols"].as_u64()), (Some(2), Some(2)));
    }

    #[test]
    fn options_are_lifted_out_of_requests() {
        let mut v = il::to_value(&doc());
        v["options"] = json!({"style": "brick"});
        let (d, opts) = parse_request(&v.to_string()).unwrap();
        assert_eq!(d, doc());
        let req: RenderRequest = parse_options(&opts).unwrap();
        assert_eq!(req.style, "brick");
        assert!(parse_options::<RenderRequest>(&json!({"colour": 1})).unwrap_err().malformed);
    }

    #[test]
    fn empty_documents_have_no_diagram() {
        let d = IlDocument::new(running_example_signature());
        assert_eq!(check(&d).unwrap_err().code, "missing-diagram");
    }
}
