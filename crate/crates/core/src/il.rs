//! The JSON interchange format (`.mcil.json`).
//!
//! [`serialize`] writes the canonical form: sorted keys, no whitespace,
//! floats in shortest round-trip notation, `seq`/`par` chains flattened
//! along their right spine. [`parse`] accepts any JSON with the same
//! structure and returns a fully validated document.
//!
//! ```text
//! {"version":1,
//!  "signature":{"objects":["x1",...],"generators":[{"name":"f1","dom":["x1"],"cod":["x3","x4"]},...]},
//!  "term":{"op":"seq","args":[{"op":"par","args":[...]},...]},
//!  "brick":{"cells":[{"rect":["0","0","1/2","1/2"],"gen":"f1"},...],
//!           "wires":[{"segment":["1/2","0","1"],"names":["x3","x4","x5"]},...]},
//!  "bindings":{"mode":"kron","dims":{"x1":2,...},"matrices":{"f1":{"rows":2,"cols":4,"entries":[...]}}}}
//! ```

use std::collections::{BTreeMap, HashMap};

use serde_json::{Map, Value};
use thiserror::Error;

use crate::backend::{BackendError, Matrix, MatrixBindings, Mode};
use crate::signature::{validate_signature, Generator, ObjectName, Signature, Word};
use crate::term::{typecheck, Child, Path, Term, TypeError};
use crate::tiling::{BrickDiagram, BrickError, CellLabel, Rect, Segment, Tiling, Q};

pub const VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct IlDocument {
    pub signature: Signature,
    pub term: Option<Term>,
    pub brick: Option<BrickDiagram>,
    pub bindings: Option<Bindings>,
}

impl IlDocument {
    pub fn new(signature: Signature) -> Self {
        IlDocument {
            signature,
            term: None,
            brick: None,
            bindings: None,
        }
    }
}

/// Matrix bindings with the mode they were written for, if any.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    pub mode: Option<Mode>,
    pub values: MatrixBindings,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum IlError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {error}")]
    Type { path: String, error: TypeError },
    #[error("{path}: {error}")]
    Brick { path: String, error: BrickError },
    #[error("{path}: {error}")]
    Bindings { path: String, error: BackendError },
}

impl IlError {
    pub fn code(&self) -> &'static str {
        match self {
            IlError::Syntax { .. } => "syntax-error",
            IlError::Schema { .. } => "schema-error",
            IlError::Type { error, .. } => error.code(),
            IlError::Brick { error, .. } => error.code(),
            IlError::Bindings { error, .. } => error.code(),
        }
    }

    /// JSON path of the offending value, or the byte offset for syntax
    /// errors.
    pub fn path(&self) -> String {
        match self {
            IlError::Syntax { offset, .. } => format!("@{offset}"),
            IlError::Schema { path, .. } | IlError::Type { path, .. } | IlError::Brick { path, .. } | IlError::Bindings { path, .. } => {
                path.clone()
            }
        }
    }

    /// Malformed input as opposed to a well-formed but ill-typed document.
    pub fn is_malformed(&self) -> bool {
        matches!(self, IlError::Syntax { .. } | IlError::Schema { .. })
    }
}

pub fn serialize(doc: &IlDocument) -> String {
    to_value(doc).to_string()
}

pub fn to_value(doc: &IlDocument) -> Value {
    let mut m = Map::new();
    m.insert("version".into(), VERSION.into());
    m.insert("signature".into(), signature_to_value(&doc.signature));
    if let Some(t) = &doc.term {
        m.insert("term".into(), term_to_value(t));
    }
    if let Some(b) = &doc.brick {
        m.insert("brick".into(), brick_to_value(b));
    }
    if let Some(b) = &doc.bindings {
        m.insert("bindings".into(), bindings_to_value(b));
    }
    Value::Object(m)
}

fn word_to_value(w: &Word) -> Value {
    Value::Array(w.iter().map(|o| Value::from(o.as_str())).collect())
}

pub fn signature_to_value(sig: &Signature) -> Value {
    let generators = sig
        .generators()
        .iter()
        .map(|g| {
            let mut m = Map::new();
            m.insert("name".into(), g.name.clone().into());
            m.insert("dom".into(), word_to_value(&g.dom));
            m.insert("cod".into(), word_to_value(&g.cod));
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("objects".into(), sig.objects().iter().map(|o| Value::from(o.as_str())).collect());
    m.insert("generators".into(), Value::Array(generators));
    Value::Object(m)
}

pub fn term_to_value(t: &Term) -> Value {
    let mut m = Map::new();
    match t {
        Term::Gen(n) => {
            m.insert("op".into(), "gen".into());
            m.insert("name".into(), n.clone().into());
        }
        Term::Id(w) => {
            m.insert("op".into(), "id".into());
            m.insert("wire".into(), word_to_value(w));
        }
        Term::Sym(u, v) => {
            m.insert("op".into(), "sym".into());
            m.insert("left".into(), word_to_value(u));
            m.insert("right".into(), word_to_value(v));
        }
        Term::Seq(..) | Term::Par(..) => {
            let is_seq = matches!(t, Term::Seq(..));
            let mut args = Vec::new();
            let mut cur = t;
            loop {
                match (cur, is_seq) {
                    (Term::Seq(a, b), true) | (Term::Par(a, b), false) => {
                        args.push(term_to_value(a));
                        cur = b;
                    }
                    _ => {
                        args.push(term_to_value(cur));
                        break;
                    }
                }
            }
            m.insert("op".into(), if is_seq { "seq" } else { "par" }.into());
            m.insert("args".into(), Value::Array(args));
        }
    }
    Value::Object(m)
}

fn rational_to_value(x: Q) -> Value {
    Value::from(x.to_string())
}

pub fn brick_to_value(b: &BrickDiagram) -> Value {
    let cells = b
        .tiling()
        .cells()
        .iter()
        .zip(b.labels())
        .map(|(c, l)| {
            let mut m = Map::new();
            m.insert("rect".into(), [c.x0, c.y0, c.x1, c.y1].into_iter().map(rational_to_value).collect());
            match l {
                CellLabel::Gen(n) => m.insert("gen".into(), n.clone().into()),
                CellLabel::PassThrough(w) => m.insert("id".into(), word_to_value(w)),
            };
            Value::Object(m)
        })
        .collect();
    let wires = b
        .wires()
        .iter()
        .map(|(s, w)| {
            let mut m = Map::new();
            m.insert("segment".into(), [s.x, s.y0, s.y1].into_iter().map(rational_to_value).collect());
            m.insert("names".into(), word_to_value(w));
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("cells".into(), Value::Array(cells));
    m.insert("wires".into(), Value::Array(wires));
    Value::Object(m)
}

pub fn matrix_to_value(x: &Matrix) -> Value {
    let mut m = Map::new();
    m.insert("rows".into(), x.rows().into());
    m.insert("cols".into(), x.cols().into());
    m.insert("entries".into(), x.entries().iter().map(|&e| Value::from(e)).collect());
    Value::Object(m)
}

pub fn bindings_to_value(b: &Bindings) -> Value {
    let mut m = Map::new();
    if let Some(mode) = b.mode {
        m.insert("mode".into(), mode.as_str().into());
    }
    m.insert(
        "dims".into(),
        Value::Object(b.values.dims.iter().map(|(o, &d)| (o.to_string(), d.into())).collect()),
    );
    m.insert(
        "matrices".into(),
        Value::Object(b.values.matrices.iter().map(|(n, x)| (n.clone(), matrix_to_value(x))).collect()),
    );
    Value::Object(m)
}

/// Parses JSON text, reporting the byte offset of a syntax error.
pub fn parse_json(text: &str) -> Result<Value, IlError> {
    serde_json::from_str(text).map_err(|e| {
        let line_start: usize = text.split_inclusive('\n').take(e.line().saturating_sub(1)).map(str::len).sum();
        IlError::Syntax {
            offset: (line_start + e.column().saturating_sub(1)).min(text.len()),
            message: e.to_string(),
        }
    })
}

pub fn parse(text: &str) -> Result<IlDocument, IlError> {
    parse_value(&parse_json(text)?)
}

pub fn parse_value(v: &Value) -> Result<IlDocument, IlError> {
    let root = At::root(v);
    root.only_keys(&["version", "signature", "term", "brick", "bindings"])?;
    let version = root.field("version")?;
    if version.uint()? != VERSION {
        return Err(version.schema(format!("unsupported version (expected {VERSION})")));
    }
    let signature = parse_signature(&root.field("signature")?)?;
    let term = root.opt("term").map(|t| parse_term(&t, &signature)).transpose()?;
    let brick = root.opt("brick").map(|b| parse_brick(&b, &signature)).transpose()?;
    let bindings = root.opt("bindings").map(|b| parse_bindings_at(&b, &signature)).transpose()?;
    Ok(IlDocument {
        signature,
        term,
        brick,
        bindings,
    })
}

/// A standalone bindings file, checked against `sig`.
pub fn parse_bindings(text: &str, sig: &Signature) -> Result<Bindings, IlError> {
    parse_bindings_at(&At::root(&parse_json(text)?), sig)
}

pub fn parse_bindings_value(v: &Value, sig: &Signature) -> Result<Bindings, IlError> {
    parse_bindings_at(&At::root(v), sig)
}

/// A standalone term, checked against `sig`.
pub fn parse_term_value(v: &Value, sig: &Signature) -> Result<Term, IlError> {
    parse_term(&At::root(v), sig)
}

struct At<'a> {
    v: &'a Value,
    path: String,
}

impl<'a> At<'a> {
    fn root(v: &'a Value) -> Self {
        At { v, path: "$".into() }
    }

    fn schema(&self, message: impl Into<String>) -> IlError {
        IlError::Schema {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    fn obj(&self) -> Result<&'a Map<String, Value>, IlError> {
        self.v.as_object().ok_or_else(|| self.schema("expected an object"))
    }

    fn key_path(&self, key: &str) -> String {
        if !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            format!("{}.{key}", self.path)
        } else {
            format!("{}[{}]", self.path, Value::from(key))
        }
    }

    fn opt(&self, key: &str) -> Option<At<'a>> {
        self.v.get(key).map(|v| At {
            v,
            path: self.key_path(key),
        })
    }

    fn field(&self, key: &str) -> Result<At<'a>, IlError> {
        self.obj()?;
        self.opt(key).ok_or_else(|| self.schema(format!("missing field `{key}`")))
    }

    fn only_keys(&self, allowed: &[&str]) -> Result<(), IlError> {
        match self.obj()?.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(At {
                v: self.v,
                path: self.key_path(k),
            }
            .schema("unknown field")),
            None => Ok(()),
        }
    }

    fn entries(&self) -> Result<Vec<(&'a String, At<'a>)>, IlError> {
        Ok(self.obj()?.iter().map(|(k, v)| (k, At { v, path: self.key_path(k) })).collect())
    }

    fn arr(&self) -> Result<Vec<At<'a>>, IlError> {
        let items = self.v.as_array().ok_or_else(|| self.schema("expected an array"))?;
        Ok(items
            .iter()
            .enumerate()
            .map(|(i, v)| At {
                v,
                path: format!("{}[{i}]", self.path),
            })
            .collect())
    }

    fn str(&self) -> Result<&'a str, IlError> {
        self.v.as_str().ok_or_else(|| self.schema("expected a string"))
    }

    fn uint(&self) -> Result<u64, IlError> {
        self.v.as_u64().ok_or_else(|| self.schema("expected a nonnegative integer"))
    }

    fn usize(&self) -> Result<usize, IlError> {
        usize::try_from(self.uint()?).map_err(|_| self.schema("integer too large"))
    }

    fn float(&self) -> Result<f64, IlError> {
        self.v.as_f64().ok_or_else(|| self.schema("expected a number"))
    }

    fn rational(&self) -> Result<Q, IlError> {
        match self.v {
            Value::Number(n) => n
                .as_i64()
                .map(|i| Q::from_integer(i.into()))
                .ok_or_else(|| self.schema("expected an integer or a rational string")),
            Value::String(s) => s.trim().parse::<Q>().map_err(|_| self.schema(format!("`{s}` is not a rational"))),
            _ => Err(self.schema("expected an integer or a rational string")),
        }
    }

    fn object_name(&self) -> Result<ObjectName, IlError> {
        let s = self.str()?;
        ObjectName::new(s).ok_or_else(|| self.schema(format!("`{s}` is not an object name")))
    }

    /// A word whose objects are all declared in `sig`.
    fn word(&self, sig: &Signature) -> Result<Word, IlError> {
        self.arr()?
            .iter()
            .map(|o| {
                let name = o.object_name()?;
                if sig.has_object(&name) {
                    Ok(name)
                } else {
                    Err(o.schema(format!("undeclared object `{name}`")))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word::new)
    }
}

fn parse_signature(at: &At) -> Result<Signature, IlError> {
    at.only_keys(&["objects", "generators"])?;
    let objects = at
        .field("objects")?
        .arr()?
        .iter()
        .map(At::object_name)
        .collect::<Result<Vec<_>, _>>()?;
    let mut sig = Signature::new(objects, Vec::new());
    let raw = Signature::new(sig.objects().to_vec(), Vec::new());
    for g in at.field("generators")?.arr()? {
        g.only_keys(&["name", "dom", "cod"])?;
        let name = g.field("name")?.str()?.to_string();
        let dom = g.field("dom")?.word(&raw)?;
        let cod = g.field("cod")?.word(&raw)?;
        sig.push_generator(Generator::new(name, dom, cod));
    }
    if let Err(violations) = validate_signature(&sig) {
        let v = &violations[0];
        return Err(IlError::Schema {
            path: format!("{}.{}", at.path, v.location),
            message: format!("{}: {}", v.code, v.message),
        });
    }
    Ok(sig)
}

fn parse_term(at: &At, sig: &Signature) -> Result<Term, IlError> {
    let mut paths = HashMap::new();
    let t = term_at(at, sig, &mut Path::root(), &mut paths)?;
    typecheck(&t, sig).map_err(|error| IlError::Type {
        path: paths.get(error.path()).cloned().unwrap_or_else(|| at.path.clone()),
        error,
    })?;
    Ok(t)
}

fn term_at(at: &At, sig: &Signature, path: &mut Path, paths: &mut HashMap<Path, String>) -> Result<Term, IlError> {
    paths.insert(path.clone(), at.path.clone());
    let op = at.field("op")?;
    let t = match op.str()? {
        "gen" => {
            at.only_keys(&["op", "name"])?;
            let name = at.field("name")?;
            let n = name.str()?;
            if sig.generator(n).is_none() {
                return Err(name.schema(format!("undeclared generator `{n}`")));
            }
            Term::gen(n)
        }
        "id" => {
            at.only_keys(&["op", "wire"])?;
            Term::id(at.field("wire")?.word(sig)?)
        }
        "sym" => {
            at.only_keys(&["op", "left", "right"])?;
            Term::sym(at.field("left")?.word(sig)?, at.field("right")?.word(sig)?)
        }
        op_name @ ("seq" | "par") => {
            at.only_keys(&["op", "args"])?;
            let args_at = at.field("args")?;
            let args = args_at.arr()?;
            if args.is_empty() {
                return Err(args_at.schema("`args` must not be empty"));
            }
            let n = args.len();
            let mut parsed = Vec::with_capacity(n);
            for (i, a) in args.iter().enumerate() {
                let depth = path.len();
                for _ in 0..i {
                    paths.entry(path.clone()).or_insert_with(|| at.path.clone());
                    path.push(Child::Second);
                }
                if i + 1 < n {
                    paths.entry(path.clone()).or_insert_with(|| at.path.clone());
                    path.push(Child::First);
                }
                parsed.push(term_at(a, sig, path, paths)?);
                while path.len() > depth {
                    path.pop();
                }
            }
            let nary = if op_name == "seq" { Term::seq_all } else { Term::par_all };
            nary(parsed).expect("nonempty args")
        }
        other => return Err(op.schema(format!("unknown op `{other}`"))),
    };
    Ok(t)
}

fn parse_brick(at: &At, sig: &Signature) -> Result<BrickDiagram, IlError> {
    at.only_keys(&["cells", "wires"])?;
    let cells_at = at.field("cells")?;
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for c in cells_at.arr()? {
        c.only_keys(&["rect", "gen", "id"])?;
        let rect_at = c.field("rect")?;
        let coords = rect_at.arr()?.iter().map(At::rational).collect::<Result<Vec<_>, _>>()?;
        let [x0, y0, x1, y1] = coords[..] else {
            return Err(rect_at.schema("expected [x0, y0, x1, y1]"));
        };
        cells.push(Rect::new(x0, y0, x1, y1).ok_or_else(|| rect_at.schema("cell has no area"))?);
        labels.push(match (c.opt("gen"), c.opt("id")) {
            (Some(g), None) => {
                let n = g.str()?;
                if sig.generator(n).is_none() {
                    return Err(g.schema(format!("undeclared generator `{n}`")));
                }
                CellLabel::Gen(n.to_string())
            }
            (None, Some(w)) => CellLabel::PassThrough(w.word(sig)?),
            _ => return Err(c.schema("a cell needs exactly one of `gen` and `id`")),
        });
    }
    let tiling = Tiling::from_cells(cells).map_err(|e| IlError::Brick {
        path: cells_at.path.clone(),
        error: e.into(),
    })?;
    let mut wires: BTreeMap<Segment, Word> = BTreeMap::new();
    let mut wire_paths = BTreeMap::new();
    let wires_at = at.field("wires")?;
    for w in wires_at.arr()? {
        w.only_keys(&["segment", "names"])?;
        let seg_at = w.field("segment")?;
        let coords = seg_at.arr()?.iter().map(At::rational).collect::<Result<Vec<_>, _>>()?;
        let [x, y0, y1] = coords[..] else {
            return Err(seg_at.schema("expected [x, y0, y1]"));
        };
        let s = Segment { x, y0, y1 };
        if wires.insert(s, w.field("names")?.word(sig)?).is_some() {
            return Err(seg_at.schema("segment listed twice"));
        }
        wire_paths.insert(s, w.path.clone());
    }
    let b = BrickDiagram::new(tiling, labels, wires).map_err(|error| IlError::Brick {
        path: match &error {
            BrickError::UnknownSegment { segment } => wire_paths[&**segment].clone(),
            _ => at.path.clone(),
        },
        error,
    })?;
    b.check_wires(sig).map_err(|error| IlError::Brick {
        path: match &error {
            BrickError::WireMismatch { segment, .. } => wire_paths.get(&**segment).cloned().unwrap_or_else(|| wires_at.path.clone()),
            _ => at.path.clone(),
        },
        error,
    })?;
    Ok(b)
}

fn parse_bindings_at(at: &At, sig: &Signature) -> Result<Bindings, IlError> {
    at.only_keys(&["mode", "dims", "matrices"])?;
    let mode = at
        .opt("mode")
        .map(|m| m.str()?.parse::<Mode>().map_err(|e| m.schema(e)))
        .transpose()?;
    let mut values = MatrixBindings::default();
    for (k, d) in at.field("dims")?.entries()? {
        let name = ObjectName::new(k.as_str()).filter(|o| sig.has_object(o));
        let name = name.ok_or_else(|| d.schema(format!("undeclared object `{k}`")))?;
        values.dims.insert(name, d.usize()?);
    }
    for (k, m) in at.field("matrices")?.entries()? {
        if sig.generator(k).is_none() {
            return Err(m.schema(format!("undeclared generator `{k}`")));
        }
        m.only_keys(&["rows", "cols", "entries"])?;
        let rows = m.field("rows")?.usize()?;
        let cols = m.field("cols")?.usize()?;
        let entries = m.field("entries")?.arr()?.iter().map(At::float).collect::<Result<Vec<_>, _>>()?;
        let x = Matrix::new(rows, cols, entries).map_err(|e| m.schema(e.to_string()))?;
        values.matrices.insert(k.clone(), x);
    }
    if let Some(mode) = mode {
        values.validate(sig, mode).map_err(|error| IlError::Bindings {
            path: at.path.clone(),
            error,
        })?;
    }
    Ok(Bindings { mode, values })
}
