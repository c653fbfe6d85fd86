//! SVG rendering by recursion over the k-d layout.
//!
//! String style draws one node per generator and one chained path per
//! string, from its source (a diagram input or a generator output) to its
//! target. Brick style draws the cells of [`term_to_brick`] and marks each
//! wire as a dot on its segment.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::signature::{ObjectName, Signature};
use crate::term::{Path, Term, TypeError};
use crate::tiling::{layout, maximal_segments, term_to_brick, BrickError, CellLabel, KdLeaf, TermToBrickError, Q};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Style {
    #[default]
    String,
    Brick,
}

impl Style {
    pub fn as_str(self) -> &'static str {
        match self {
            Style::String => "string",
            Style::Brick => "brick",
        }
    }
}

impl FromStr for Style {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "string" => Ok(Style::String),
            "brick" => Ok(Style::Brick),
            other => Err(format!("unknown style {other:?} (expected string or brick)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    pub style: Style,
    pub width: f64,
    pub height: f64,
    pub font_size: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            style: Style::String,
            width: 640.0,
            height: 480.0,
            font_size: 12.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

fn pt(x: f64, y: f64) -> Point {
    Point { x, y }
}

/// A cubic Bézier piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cubic {
    pub from: Point,
    pub c1: Point,
    pub c2: Point,
    pub to: Point,
}

impl Cubic {
    /// Horizontal tangents at both ends.
    fn flat(from: Point, to: Point) -> Cubic {
        let mx = (from.x + to.x) / 2.0;
        Cubic {
            from,
            c1: pt(mx, from.y),
            c2: pt(mx, to.y),
            to,
        }
    }

    fn points(&self) -> [Point; 4] {
        [self.from, self.c1, self.c2, self.to]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Rect { x: f64, y: f64, w: f64, h: f64, dashed: bool },
    Text { x: f64, y: f64, text: String, size: f64 },
    Circle { cx: f64, cy: f64, r: f64 },
    Line { from: Point, to: Point },
    Wire { pieces: Vec<Cubic> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub id: String,
    pub shape: Shape,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvgScene {
    pub width: f64,
    pub height: f64,
    pub elements: Vec<Element>,
}

impl SvgScene {
    pub fn ids_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.elements.iter().map(|e| e.id.as_str()).filter(move |id| id.starts_with(prefix))
    }

    pub fn node_count(&self) -> usize {
        self.ids_with_prefix("node:").count()
    }

    /// The name part of every `wire:<name>:<k>` id, sorted.
    pub fn wire_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .ids_with_prefix("wire:")
            .filter_map(|id| id["wire:".len()..].rsplit_once(':').map(|(n, _)| n.to_string()))
            .collect();
        names.sort();
        names
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = num(self.width),
            h = num(self.height)
        );
        for e in &self.elements {
            let id = escape(&e.id);
            let _ = match &e.shape {
                Shape::Rect { x, y, w, h, dashed } => writeln!(
                    s,
                    r#"<rect id="{id}" x="{}" y="{}" width="{}" height="{}" fill="white" stroke="black"{}/>"#,
                    num(*x),
                    num(*y),
                    num(*w),
                    num(*h),
                    if *dashed { r#" stroke-dasharray="4 3""# } else { "" }
                ),
                Shape::Text { x, y, text, size } => writeln!(
                    s,
                    r#"<text id="{id}" x="{}" y="{}" font-size="{}" text-anchor="middle" dominant-baseline="central">{}</text>"#,
                    num(*x),
                    num(*y),
                    num(*size),
                    escape(text)
                ),
                Shape::Circle { cx, cy, r } => writeln!(
                    s,
                    r#"<circle id="{id}" cx="{}" cy="{}" r="{}" fill="black"/>"#,
                    num(*cx),
                    num(*cy),
                    num(*r)
                ),
                Shape::Line { from, to } => writeln!(
                    s,
                    r#"<line id="{id}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
                    num(from.x),
                    num(from.y),
                    num(to.x),
                    num(to.y)
                ),
                Shape::Wire { pieces } => writeln!(s, r#"<path id="{id}" d="{}" fill="none" stroke="black"/>"#, path_data(pieces)),
            };
        }
        s.push_str("</svg>\n");
        s
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn path_data(pieces: &[Cubic]) -> String {
    let mut d = String::new();
    let mut at: Option<Point> = None;
    for c in pieces {
        if at != Some(c.from) {
            let _ = write!(d, "M {} {} ", num(c.from.x), num(c.from.y));
        }
        let _ = write!(
            d,
            "C {} {} {} {} {} {} ",
            num(c.c1.x),
            num(c.c1.y),
            num(c.c2.x),
            num(c.c2.y),
            num(c.to.x),
            num(c.to.y)
        );
        at = Some(c.to);
    }
    d.trim_end().to_string()
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("width, height and font size must be positive and finite")]
    InvalidOptions,
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Brick(#[from] BrickError),
}

impl RenderError {
    pub fn code(&self) -> &'static str {
        match self {
            RenderError::InvalidOptions => "invalid-options",
            RenderError::Type(e) => e.code(),
            RenderError::Brick(e) => e.code(),
        }
    }
}

impl From<TermToBrickError> for RenderError {
    fn from(e: TermToBrickError) -> Self {
        match e {
            TermToBrickError::Brick(b) => RenderError::Brick(b),
            TermToBrickError::Type(t) => RenderError::Type(t),
        }
    }
}

pub fn render(t: &Term, sig: &Signature, opts: &RenderOptions) -> Result<SvgScene, RenderError> {
    let valid = |x: f64| x.is_finite() && x > 0.0;
    if !(valid(opts.width) && valid(opts.height) && valid(opts.font_size)) {
        return Err(RenderError::InvalidOptions);
    }
    match opts.style {
        Style::String => render_string(t, sig, opts),
        Style::Brick => render_brick(t, sig, opts),
    }
}

struct Frame {
    w: f64,
    h: f64,
}

impl Frame {
    fn x(&self, x: Q) -> f64 {
        to_f64(x) * self.w
    }

    fn y(&self, y: Q) -> f64 {
        to_f64(y) * self.h
    }
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// `(k+1)/(n+1)` of the way from `lo` to `hi`.
fn spaced(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    lo + (hi - lo) * (k + 1) as f64 / (n + 1) as f64
}

/// Pixel geometry of one leaf in string style.
struct LeafBox {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    inset: f64,
}

impl LeafBox {
    fn new(leaf: &KdLeaf, f: &Frame) -> Self {
        let (x0, x1) = (f.x(leaf.rect.x0), f.x(leaf.rect.x1));
        LeafBox {
            x0,
            x1,
            y0: f.y(leaf.rect.y0),
            y1: f.y(leaf.rect.y1),
            inset: ((x1 - x0) * 0.15).min(12.0),
        }
    }

    fn input(&self, k: usize, n: usize) -> Point {
        pt(self.x0 + self.inset, spaced(self.y0, self.y1, k, n))
    }

    fn output(&self, k: usize, n: usize) -> Point {
        pt(self.x1 - self.inset, spaced(self.y0, self.y1, k, n))
    }

    fn node(&self) -> (f64, f64, f64, f64) {
        let (w, h) = ((self.x1 - self.x0) * 0.4, (self.y1 - self.y0) * 0.6);
        let (cx, cy) = ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0);
        (cx - w / 2.0, cy - h / 2.0, w, h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Source {
    Input(usize),
    Out { leaf: usize, index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Target {
    Output(usize),
    In { leaf: usize, index: usize },
}

fn render_string(t: &Term, sig: &Signature, opts: &RenderOptions) -> Result<SvgScene, RenderError> {
    let l = layout(t, sig, crate::tiling::Rect::unit())?;
    let f = Frame {
        w: opts.width,
        h: opts.height,
    };
    let boxes: Vec<LeafBox> = l.leaves.iter().map(|leaf| LeafBox::new(leaf, &f)).collect();

    let mut next: HashMap<Source, Target> = HashMap::new();
    for (i, p) in l.inputs.iter().enumerate() {
        next.insert(
            Source::Input(i),
            Target::In {
                leaf: p.leaf,
                index: p.index,
            },
        );
    }
    for seam in &l.seams {
        for (a, b) in seam.left.iter().zip(&seam.right) {
            next.insert(
                Source::Out {
                    leaf: a.leaf,
                    index: a.index,
                },
                Target::In {
                    leaf: b.leaf,
                    index: b.index,
                },
            );
        }
    }
    for (j, p) in l.outputs.iter().enumerate() {
        next.insert(
            Source::Out {
                leaf: p.leaf,
                index: p.index,
            },
            Target::Output(j),
        );
    }

    let source_point = |s: Source| match s {
        Source::Input(i) => pt(0.0, spaced(0.0, f.h, i, l.dom.len())),
        Source::Out { leaf, index } => boxes[leaf].output(index, l.leaves[leaf].cod.len()),
    };
    let node_attach = |leaf: usize, index: usize, output: bool| {
        let (x, y, w, h) = boxes[leaf].node();
        let n = if output {
            l.leaves[leaf].cod.len()
        } else {
            l.leaves[leaf].dom.len()
        };
        pt(if output { x + w } else { x }, spaced(y, y + h, index, n))
    };

    let mut elements = Vec::new();
    let mut starts: Vec<(Source, ObjectName, Vec<Cubic>)> = Vec::new();
    for (i, o) in l.dom.iter().enumerate() {
        starts.push((Source::Input(i), o.clone(), Vec::new()));
    }
    for (li, leaf) in l.leaves.iter().enumerate() {
        if let Term::Gen(name) = &leaf.term {
            let (x, y, w, h) = boxes[li].node();
            let path = leaf.path.to_string();
            elements.push(Element {
                id: format!("node:{path}"),
                shape: Shape::Rect { x, y, w, h, dashed: false },
            });
            elements.push(Element {
                id: format!("label:{path}"),
                shape: Shape::Text {
                    x: x + w / 2.0,
                    y: y + h / 2.0,
                    text: name.clone(),
                    size: opts.font_size,
                },
            });
            for (k, o) in leaf.cod.iter().enumerate() {
                let from = node_attach(li, k, true);
                let to = boxes[li].output(k, leaf.cod.len());
                starts.push((Source::Out { leaf: li, index: k }, o.clone(), vec![Cubic::flat(from, to)]));
            }
        }
    }

    let mut counts: BTreeMap<ObjectName, usize> = BTreeMap::new();
    for (start, name, mut pieces) in starts {
        let mut cur = start;
        loop {
            let from = source_point(cur);
            match next[&cur] {
                Target::Output(j) => {
                    pieces.push(Cubic::flat(from, pt(f.w, spaced(0.0, f.h, j, l.cod.len()))));
                    break;
                }
                Target::In { leaf, index } => {
                    let kd = &l.leaves[leaf];
                    let port = boxes[leaf].input(index, kd.dom.len());
                    pieces.push(Cubic::flat(from, port));
                    let out = match &kd.term {
                        Term::Gen(_) => {
                            pieces.push(Cubic::flat(port, node_attach(leaf, index, false)));
                            break;
                        }
                        Term::Sym(u, v) if index < u.len() => index + v.len(),
                        Term::Sym(u, _) => index - u.len(),
                        _ => index,
                    };
                    pieces.push(Cubic::flat(port, boxes[leaf].output(out, kd.cod.len())));
                    cur = Source::Out { leaf, index: out };
                }
            }
        }
        let k = counts.entry(name.clone()).or_default();
        elements.push(Element {
            id: format!("wire:{name}:{k}"),
            shape: Shape::Wire { pieces },
        });
        *k += 1;
    }
    Ok(SvgScene {
        width: f.w,
        height: f.h,
        elements,
    })
}

fn render_brick(t: &Term, sig: &Signature, opts: &RenderOptions) -> Result<SvgScene, RenderError> {
    let b = term_to_brick(t, sig)?;
    let l = layout(t, sig, crate::tiling::Rect::unit())?;
    let f = Frame {
        w: opts.width,
        h: opts.height,
    };
    let mut elements = Vec::new();
    for ((c, label), leaf) in b.tiling().cells().iter().zip(b.labels()).zip(&l.leaves) {
        let (x, y) = (f.x(c.x0), f.y(c.y0));
        let (w, h) = (f.x(c.x1) - x, f.y(c.y1) - y);
        let path = leaf.path.to_string();
        let gen = matches!(label, CellLabel::Gen(_));
        elements.push(Element {
            id: format!("{}:{path}", if gen { "node" } else { "cell" }),
            shape: Shape::Rect { x, y, w, h, dashed: !gen },
        });
        if let CellLabel::Gen(name) = label {
            elements.push(Element {
                id: format!("label:{path}"),
                shape: Shape::Text {
                    x: x + w / 2.0,
                    y: y + h / 2.0,
                    text: name.clone(),
                    size: opts.font_size,
                },
            });
        }
    }
    let r = (opts.font_size / 4.0).max(1.0);
    let mut counts: BTreeMap<ObjectName, usize> = BTreeMap::new();
    for s in maximal_segments(b.tiling()) {
        let w = b.wires_on(&s);
        for (k, o) in w.iter().enumerate() {
            let (cx, cy) = (f.x(s.x), spaced(f.y(s.y0), f.y(s.y1), k, w.len()));
            let n = counts.entry(o.clone()).or_default();
            elements.push(Element {
                id: format!("wire:{o}:{n}"),
                shape: Shape::Circle { cx, cy, r },
            });
            let tx = (cx + r + opts.font_size / 2.0).min(f.w);
            elements.push(Element {
                id: format!("wirelabel:{o}:{n}"),
                shape: Shape::Text {
                    x: tx,
                    y: (cy - r - opts.font_size / 2.0).max(0.0),
                    text: o.to_string(),
                    size: opts.font_size,
                },
            });
            *n += 1;
        }
    }
    Ok(SvgScene {
        width: f.w,
        height: f.h,
        elements,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneViolation {
    pub code: &'static str,
    pub id: String,
    pub message: String,
}

impl fmt::Display for SceneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.code, self.id, self.message)
    }
}

const CONTINUITY_TOLERANCE: f64 = 1e-6;

/// Structural checks: viewport containment, unique ids, and continuity of
/// every wire path.
pub fn scene_checks(s: &SvgScene) -> Vec<SceneViolation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let inside = |p: Point| {
        p.x >= -CONTINUITY_TOLERANCE
            && p.x <= s.width + CONTINUITY_TOLERANCE
            && p.y >= -CONTINUITY_TOLERANCE
            && p.y <= s.height + CONTINUITY_TOLERANCE
    };
    for e in &s.elements {
        if !seen.insert(e.id.as_str()) {
            out.push(SceneViolation {
                code: "duplicate-id",
                id: e.id.clone(),
                message: "id used more than once".into(),
            });
        }
        let points: Vec<Point> = match &e.shape {
            Shape::Rect { x, y, w, h, .. } => vec![pt(*x, *y), pt(x + w, y + h)],
            Shape::Text { x, y, .. } => vec![pt(*x, *y)],
            Shape::Circle { cx, cy, .. } => vec![pt(*cx, *cy)],
            Shape::Line { from, to } => vec![*from, *to],
            Shape::Wire { pieces } => pieces.iter().flat_map(Cubic::points).collect(),
        };
        if let Some(p) = points.iter().find(|p| !inside(**p)) {
            out.push(SceneViolation {
                code: "out-of-viewport",
                id: e.id.clone(),
                message: format!("point ({}, {}) lies outside the viewport", p.x, p.y),
            });
        }
        if let Shape::Wire { pieces } = &e.shape {
            for (k, w) in pieces.windows(2).enumerate() {
                let (a, b) = (w[0].to, w[1].from);
                if (a.x - b.x).abs() > CONTINUITY_TOLERANCE || (a.y - b.y).abs() > CONTINUITY_TOLERANCE {
                    out.push(SceneViolation {
                        code: "discontinuous-wire",
                        id: e.id.clone(),
                        message: format!(
                            "piece {} ends at ({}, {}) but piece {} starts at ({}, {})",
                            k,
                            a.x,
                            a.y,
                            k + 1,
                            b.x,
                            b.y
                        ),
                    });
                }
            }
        }
    }
    out
}

/// The path ids of every generator leaf, for cross-checking `node:` ids.
pub fn generator_paths(t: &Term) -> Vec<Path> {
    let mut out = Vec::new();
    t.visit_leaves(&mut |p, leaf| {
        if matches!(leaf, Term::Gen(_)) {
            out.push(p.clone());
        }
    });
    out
}
