use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{cuts, layout, split, Cut, PinwheelObstruction, Rect, Tiling, TilingError, Q};
use crate::signature::{word_concat, ObjectName, Signature, Word};
use crate::term::{MorphismType, Path, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellLabel {
    Gen(String),
    /// An identity brick carrying these wires straight through.
    PassThrough(Word),
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLabel::Gen(n) => f.write_str(n),
            CellLabel::PassThrough(w) => {
                let names: Vec<&str> = w.iter().map(ObjectName::as_str).collect();
                write!(f, "id:{}", names.join(","))
            }
        }
    }
}

impl CellLabel {
    pub fn parse(s: &str) -> Option<CellLabel> {
        match s.strip_prefix("id:") {
            Some("") => Some(CellLabel::PassThrough(Word::empty())),
            Some(rest) => rest
                .split(',')
                .map(ObjectName::new)
                .collect::<Option<Vec<_>>>()
                .map(|v| CellLabel::PassThrough(Word::new(v))),
            None if !s.is_empty() && !s.chars().any(char::is_whitespace) => Some(CellLabel::Gen(s.to_string())),
            None => None,
        }
    }
}

/// A maximal vertical run of cell edges at `x`, from `y0` down to `y1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub x: Q,
    pub y0: Q,
    pub y1: Q,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={} y={}..{}", self.x, self.y0, self.y1)
    }
}

/// Every maximal vertical segment of the tiling, including both sides of
/// the bounds, sorted by `x` then `y0`.
pub fn maximal_segments(t: &Tiling) -> Vec<Segment> {
    let mut edges: Vec<Segment> = t
        .cells()
        .iter()
        .flat_map(|c| {
            [
                Segment {
                    x: c.x0,
                    y0: c.y0,
                    y1: c.y1,
                },
                Segment {
                    x: c.x1,
                    y0: c.y0,
                    y1: c.y1,
                },
            ]
        })
        .collect();
    edges.sort();
    let mut out: Vec<Segment> = Vec::new();
    for e in edges {
        match out.last_mut() {
            Some(last) if last.x == e.x && e.y0 <= last.y1 => last.y1 = last.y1.max(e.y1),
            _ => out.push(e),
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Cells whose right edge lies on the segment.
    Left,
    /// Cells whose left edge lies on the segment.
    Right,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BrickError {
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error("{found} labels for {expected} cells")]
    LabelCount { expected: usize, found: usize },
    #[error("wires given on {segment}, which is not a maximal segment")]
    UnknownSegment { segment: Box<Segment> },
    #[error("wires on {segment} are {expected} but the cells on its {side:?} side carry {found}")]
    WireMismatch {
        segment: Box<Segment>,
        side: Side,
        expected: Word,
        found: Word,
    },
    #[error(transparent)]
    Pinwheel(Box<PinwheelObstruction>),
    #[error("cell {cell}: unknown generator `{name}`")]
    UnknownGenerator { cell: usize, name: String },
    #[error("cell {cell}: undeclared object `{name}`")]
    UndeclaredObject { cell: usize, name: String },
    #[error("crossing at {path} has no brick form")]
    ContainsSym { path: Path },
}

impl BrickError {
    pub fn code(&self) -> &'static str {
        match self {
            BrickError::Tiling(e) => e.code(),
            BrickError::LabelCount { .. } => "label-count",
            BrickError::UnknownSegment { .. } => "unknown-segment",
            BrickError::WireMismatch { .. } => "wire-mismatch",
            BrickError::Pinwheel(_) => "pinwheel",
            BrickError::UnknownGenerator { .. } => "unknown-generator",
            BrickError::UndeclaredObject { .. } => "undeclared-object",
            BrickError::ContainsSym { .. } => "contains-sym",
        }
    }
}

/// A labelled tiling with the wires crossing each vertical boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrickDiagram {
    tiling: Tiling,
    labels: Vec<CellLabel>,
    wires: BTreeMap<Segment, Word>,
}

impl BrickDiagram {
    /// Segments missing from `wires` carry no wires.
    pub fn new(tiling: Tiling, labels: Vec<CellLabel>, wires: BTreeMap<Segment, Word>) -> Result<Self, BrickError> {
        if labels.len() != tiling.len() {
            return Err(BrickError::LabelCount {
                expected: tiling.len(),
                found: labels.len(),
            });
        }
        let segments = maximal_segments(&tiling);
        if let Some(segment) = wires.keys().find(|s| segments.binary_search(s).is_err()) {
            return Err(BrickError::UnknownSegment {
                segment: Box::new(*segment),
            });
        }
        let wires = wires.into_iter().filter(|(_, w)| !w.is_empty()).collect();
        Ok(BrickDiagram { tiling, labels, wires })
    }

    pub fn tiling(&self) -> &Tiling {
        &self.tiling
    }

    pub fn labels(&self) -> &[CellLabel] {
        &self.labels
    }

    pub fn wires(&self) -> &BTreeMap<Segment, Word> {
        &self.wires
    }

    pub fn wires_on(&self, s: &Segment) -> Word {
        self.wires.get(s).cloned().unwrap_or_default()
    }

    /// Cells on one side of a segment, top to bottom.
    pub fn cells_along(&self, s: &Segment, side: Side) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.tiling.len())
            .filter(|&i| {
                let c = &self.tiling.cells()[i];
                let edge = match side {
                    Side::Left => c.x1,
                    Side::Right => c.x0,
                };
                edge == s.x && s.y0 <= c.y0 && c.y1 <= s.y1
            })
            .collect();
        idx.sort_by_key(|&i| self.tiling.cells()[i].y0);
        idx
    }

    /// One line per cell, `x0 y0 x1 y1 label`, then one `wire x y0 y1 name`
    /// line per wire in top-to-bottom order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, l) in self.tiling.cells().iter().zip(&self.labels) {
            let _ = writeln!(out, "{} {} {} {} {}", c.x0, c.y0, c.x1, c.y1, l);
        }
        for (s, w) in &self.wires {
            for o in w {
                let _ = writeln!(out, "wire {} {} {} {}", s.x, s.y0, s.y1, o);
            }
        }
        out
    }

    fn cell_type(&self, i: usize, sig: &Signature) -> Result<(Term, MorphismType), BrickError> {
        match &self.labels[i] {
            CellLabel::Gen(name) => {
                let g = sig.generator(name).ok_or_else(|| BrickError::UnknownGenerator {
                    cell: i,
                    name: name.clone(),
                })?;
                Ok((Term::gen(name.clone()), MorphismType::new(g.dom.clone(), g.cod.clone())))
            }
            CellLabel::PassThrough(w) => match w.iter().find(|o| !sig.has_object(o)) {
                Some(o) => Err(BrickError::UndeclaredObject {
                    cell: i,
                    name: o.to_string(),
                }),
                None => Ok((Term::Id(w.clone()), MorphismType::new(w.clone(), w.clone()))),
            },
        }
    }

    /// Checks every segment's wire list against the cells on both sides.
    pub fn check_wires(&self, sig: &Signature) -> Result<(), BrickError> {
        let types = (0..self.tiling.len())
            .map(|i| self.cell_type(i, sig).map(|(_, ty)| ty))
            .collect::<Result<Vec<_>, _>>()?;
        for s in maximal_segments(&self.tiling) {
            let expected = self.wires_on(&s);
            for side in [Side::Left, Side::Right] {
                let cells = self.cells_along(&s, side);
                if cells.is_empty() {
                    continue;
                }
                let found = cells.iter().fold(Word::empty(), |acc, &i| {
                    word_concat(
                        &acc,
                        match side {
                            Side::Left => &types[i].cod,
                            Side::Right => &types[i].dom,
                        },
                    )
                });
                if found != expected {
                    return Err(BrickError::WireMismatch {
                        segment: Box::new(s),
                        side,
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Reads a brick diagram: the bounds are the bounding box of the cells.
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_brick(text: &str) -> Result<BrickDiagram, ParseError> {
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    let mut wires: BTreeMap<Segment, Vec<ObjectName>> = BTreeMap::new();
    let rational = |tok: &str, line: usize| {
        tok.parse::<Q>().map_err(|_| ParseError {
            line,
            message: format!("`{tok}` is not a rational"),
        })
    };
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            [first, ..] if first.starts_with('#') => {}
            ["wire", x, y0, y1, name] => {
                let s = Segment {
                    x: rational(x, line)?,
                    y0: rational(y0, line)?,
                    y1: rational(y1, line)?,
                };
                let o = ObjectName::new(*name).ok_or_else(|| ParseError {
                    line,
                    message: format!("`{name}` is not an object name"),
                })?;
                wires.entry(s).or_default().push(o);
            }
            [x0, y0, x1, y1, label] => {
                let r = Rect::new(rational(x0, line)?, rational(y0, line)?, rational(x1, line)?, rational(y1, line)?).ok_or_else(|| {
                    ParseError {
                        line,
                        message: "cell has no area".into(),
                    }
                })?;
                let l = CellLabel::parse(label).ok_or_else(|| ParseError {
                    line,
                    message: format!("bad label `{label}`"),
                })?;
                cells.push(r);
                labels.push(l);
            }
            _ => {
                return Err(ParseError {
                    line,
                    message: "expected `x0 y0 x1 y1 label` or `wire x y0 y1 name`".into(),
                })
            }
        }
    }
    let tiling = Tiling::from_cells(cells).map_err(|e| ParseError {
        line: 0,
        message: e.to_string(),
    })?;
    let wires = wires.into_iter().map(|(s, v)| (s, Word::new(v))).collect();
    BrickDiagram::new(tiling, labels, wires).map_err(|e| ParseError {
        line: 0,
        message: e.to_string(),
    })
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; 0 for whole-document errors.
    pub line: usize,
    pub message: String,
}

fn segment_containing(b: &BrickDiagram, x: Q, y0: Q, y1: Q) -> Segment {
    maximal_segments(&b.tiling)
        .into_iter()
        .find(|s| s.x == x && s.y0 <= y0 && y1 <= s.y1)
        .unwrap_or(Segment { x, y0, y1 })
}

type Typed = Result<(Term, MorphismType), BrickError>;

/// Reads the brick diagram back as a term: `VCut → Seq`, `HCut → Par`.
///
/// Cuts are tried in the same order as [`super::decompose`]; a cut whose two
/// sides do not compose is skipped in favour of the next one.
pub fn brick_to_term(b: &BrickDiagram, sig: &Signature) -> Result<Term, BrickError> {
    b.check_wires(sig)?;
    let cells = b.tiling.cells();
    let mut memo: HashMap<Rect, Typed> = HashMap::new();

    fn go(b: &BrickDiagram, sig: &Signature, cells: &[Rect], idx: Vec<usize>, region: Rect, memo: &mut HashMap<Rect, Typed>) -> Typed {
        if let Some(hit) = memo.get(&region) {
            return hit.clone();
        }
        let result = if let [only] = idx[..] {
            b.cell_type(only, sig)
        } else {
            let candidates = cuts(cells, &idx, &region);
            if candidates.is_empty() {
                Err(BrickError::Pinwheel(Box::new(PinwheelObstruction {
                    witness: Box::new(Tiling {
                        bounds: region,
                        cells: idx.iter().map(|&i| cells[i]).collect(),
                    }),
                })))
            } else {
                let mut first_err = None;
                let mut found = None;
                for cut in candidates {
                    let [(ra, ia), (rb, ib)] = split(cells, &idx, &region, cut);
                    let attempt = go(b, sig, cells, ia, ra, memo).and_then(|(ta, tya)| {
                        let (tb, tyb) = go(b, sig, cells, ib, rb, memo)?;
                        match cut {
                            Cut::V(x) if tya.cod != tyb.dom => Err(BrickError::WireMismatch {
                                segment: Box::new(segment_containing(b, x, region.y0, region.y1)),
                                side: Side::Right,
                                expected: tya.cod,
                                found: tyb.dom,
                            }),
                            Cut::V(_) => Ok((Term::seq(ta, tb), MorphismType::new(tya.dom, tyb.cod))),
                            Cut::H(_) => Ok((
                                Term::par(ta, tb),
                                MorphismType::new(word_concat(&tya.dom, &tyb.dom), word_concat(&tya.cod, &tyb.cod)),
                            )),
                        }
                    });
                    match attempt {
                        Ok(ok) => {
                            found = Some(ok);
                            break;
                        }
                        Err(e) => {
                            first_err.get_or_insert(e);
                        }
                    }
                }
                found.ok_or_else(|| first_err.expect("at least one cut tried"))
            }
        };
        memo.insert(region, result.clone());
        result
    }

    let (term, ty) = go(b, sig, cells, (0..cells.len()).collect(), b.tiling.bounds(), &mut memo)?;
    let bounds = b.tiling.bounds();
    let segs = maximal_segments(&b.tiling);
    let side_word = |x: Q| segs.iter().find(|s| s.x == x).map(|s| b.wires_on(s)).unwrap_or_default();
    debug_assert_eq!(side_word(bounds.x0), ty.dom);
    debug_assert_eq!(side_word(bounds.x1), ty.cod);
    Ok(term)
}

/// Lays the term out in the unit square; identities become pass-through
/// bricks.
pub fn term_to_brick(t: &Term, sig: &Signature) -> Result<BrickDiagram, TermToBrickError> {
    let mut sym = None;
    t.visit_leaves(&mut |p, leaf| {
        if sym.is_none() && matches!(leaf, Term::Sym(..)) {
            sym = Some(p.clone());
        }
    });
    if let Some(path) = sym {
        return Err(TermToBrickError::Brick(BrickError::ContainsSym { path }));
    }
    let l = layout(t, sig, Rect::unit())?;
    let cells: Vec<Rect> = l.leaves.iter().map(|leaf| leaf.rect).collect();
    let labels = l
        .leaves
        .iter()
        .map(|leaf| match &leaf.term {
            Term::Gen(n) => CellLabel::Gen(n.clone()),
            _ => CellLabel::PassThrough(leaf.dom.clone()),
        })
        .collect();
    let tiling = Tiling::new(Rect::unit(), cells).expect("layout tiles the unit square");
    let mut b = BrickDiagram {
        tiling,
        labels,
        wires: BTreeMap::new(),
    };
    for s in maximal_segments(&b.tiling) {
        let (side, left) = if s.x == b.tiling.bounds().x0 {
            (Side::Right, false)
        } else {
            (Side::Left, true)
        };
        let w = b.cells_along(&s, side).into_iter().fold(Word::empty(), |acc, i| {
            let leaf = &l.leaves[i];
            word_concat(&acc, if left { &leaf.cod } else { &leaf.dom })
        });
        if !w.is_empty() {
            b.wires.insert(s, w);
        }
    }
    Ok(b)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TermToBrickError {
    #[error(transparent)]
    Brick(#[from] BrickError),
    #[error(transparent)]
    Type(#[from] crate::term::TypeError),
}
