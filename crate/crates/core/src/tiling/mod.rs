//! Rectangular tilings with exact rational coordinates, guillotine
//! decomposition into k-d trees, and brick diagrams.
//!
//! `y` grows downward: a cell's top edge is `y0`.

mod brick;
mod enumerate;
mod layout;

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use thiserror::Error;

pub use brick::{
    brick_to_term, maximal_segments, parse_brick, term_to_brick, BrickDiagram, BrickError, CellLabel, ParseError, Segment, Side,
    TermToBrickError,
};
pub use enumerate::{double_order, double_order_key, enumerate_tilings};
pub use layout::{layout, KdLayout, KdLeaf, LeafKind, Port, Seam};

pub type Q = Ratio<i128>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    pub x0: Q,
    pub y0: Q,
    pub x1: Q,
    pub y1: Q,
}

impl Rect {
    pub fn new(x0: Q, y0: Q, x1: Q, y1: Q) -> Option<Rect> {
        (x0 < x1 && y0 < y1).then_some(Rect { x0, y0, x1, y1 })
    }

    /// Integer corners; panics on an empty rectangle.
    pub fn ints(x0: i128, y0: i128, x1: i128, y1: i128) -> Rect {
        Rect::new(q(x0), q(y0), q(x1), q(y1)).expect("positive area")
    }

    pub fn unit() -> Rect {
        Rect::ints(0, 0, 1, 1)
    }

    pub fn width(&self) -> Q {
        self.x1 - self.x0
    }

    pub fn height(&self) -> Q {
        self.y1 - self.y0
    }

    pub fn area(&self) -> Q {
        self.width() * self.height()
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        self.x0 <= r.x0 && r.x1 <= self.x1 && self.y0 <= r.y0 && r.y1 <= self.y1
    }

    fn contains_point(&self, x: Q, y: Q) -> bool {
        self.x0 < x && x < self.x1 && self.y0 < y && y < self.y1
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]×[{}, {}]", self.x0, self.x1, self.y0, self.y1)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TilingError {
    #[error("a tiling needs at least one cell")]
    Empty,
    #[error("cell {index} leaves the bounds")]
    OutOfBounds { index: usize },
    #[error("cells overlap near ({x}, {y})")]
    Overlap { x: Q, y: Q },
    #[error("point ({x}, {y}) is not covered")]
    Gap { x: Q, y: Q },
}

impl TilingError {
    pub fn code(&self) -> &'static str {
        "invalid-tiling"
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tiling {
    bounds: Rect,
    cells: Vec<Rect>,
}

impl Tiling {
    /// Checks that the cells exactly cover `bounds` without overlap: areas
    /// sum to the bounds area and the centre of every cell of the induced
    /// grid lies in exactly one cell.
    pub fn new(bounds: Rect, cells: Vec<Rect>) -> Result<Tiling, TilingError> {
        if cells.is_empty() {
            return Err(TilingError::Empty);
        }
        if let Some(index) = cells.iter().position(|c| !bounds.contains_rect(c)) {
            return Err(TilingError::OutOfBounds { index });
        }
        let xs: BTreeSet<Q> = cells.iter().flat_map(|c| [c.x0, c.x1]).chain([bounds.x0, bounds.x1]).collect();
        let ys: BTreeSet<Q> = cells.iter().flat_map(|c| [c.y0, c.y1]).chain([bounds.y0, bounds.y1]).collect();
        let xs: Vec<Q> = xs.into_iter().collect();
        let ys: Vec<Q> = ys.into_iter().collect();
        let half = Q::new(1, 2);
        for xw in xs.windows(2) {
            for yw in ys.windows(2) {
                let (x, y) = ((xw[0] + xw[1]) * half, (yw[0] + yw[1]) * half);
                match cells.iter().filter(|c| c.contains_point(x, y)).count() {
                    0 => return Err(TilingError::Gap { x, y }),
                    1 => {}
                    _ => return Err(TilingError::Overlap { x, y }),
                }
            }
        }
        let total = cells.iter().fold(Q::zero(), |acc, c| acc + c.area());
        debug_assert_eq!(total, bounds.area());
        Ok(Tiling { bounds, cells })
    }

    /// The tiling whose bounds are the bounding box of `cells`.
    pub fn from_cells(cells: Vec<Rect>) -> Result<Tiling, TilingError> {
        let first = *cells.first().ok_or(TilingError::Empty)?;
        let bounds = cells.iter().fold(first, |b, c| Rect {
            x0: b.x0.min(c.x0),
            y0: b.y0.min(c.y0),
            x1: b.x1.max(c.x1),
            y1: b.y1.max(c.y1),
        });
        Tiling::new(bounds, cells)
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn cells(&self) -> &[Rect] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells sorted, coordinates replaced by their ranks.
    pub fn compressed(&self) -> Tiling {
        let xs: Vec<Q> = self.coords(|c| [c.x0, c.x1]);
        let ys: Vec<Q> = self.coords(|c| [c.y0, c.y1]);
        let rank = |v: &[Q], x: Q| q(v.binary_search(&x).expect("coordinate present") as i128);
        let mut cells: Vec<Rect> = self
            .cells
            .iter()
            .map(|c| Rect {
                x0: rank(&xs, c.x0),
                y0: rank(&ys, c.y0),
                x1: rank(&xs, c.x1),
                y1: rank(&ys, c.y1),
            })
            .collect();
        cells.sort();
        Tiling {
            bounds: Rect::ints(0, 0, xs.len() as i128 - 1, ys.len() as i128 - 1),
            cells,
        }
    }

    fn coords(&self, f: impl Fn(&Rect) -> [Q; 2]) -> Vec<Q> {
        let set: BTreeSet<Q> = self.cells.iter().flat_map(f).collect();
        set.into_iter().collect()
    }

    /// Left-to-right mirror image.
    pub fn mirrored(&self) -> Tiling {
        let b = self.bounds;
        let flip = |c: &Rect| Rect {
            x0: b.x0 + b.x1 - c.x1,
            x1: b.x0 + b.x1 - c.x0,
            ..*c
        };
        Tiling {
            bounds: b,
            cells: self.cells.iter().map(flip).collect(),
        }
    }
}

/// The pinwheel on the 3×3 square.
pub fn pinwheel() -> Tiling {
    Tiling::new(
        Rect::ints(0, 0, 3, 3),
        vec![
            Rect::ints(0, 2, 2, 3),
            Rect::ints(2, 1, 3, 3),
            Rect::ints(1, 0, 3, 1),
            Rect::ints(0, 0, 1, 2),
            Rect::ints(1, 1, 2, 2),
        ],
    )
    .expect("pinwheel is a tiling")
}

/// A k-d tree whose leaves are cells. `VCut` splits left from right,
/// `HCut` top from bottom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CutTree<L> {
    Leaf(L),
    VCut {
        x: Q,
        left: Box<CutTree<L>>,
        right: Box<CutTree<L>>,
    },
    HCut {
        y: Q,
        top: Box<CutTree<L>>,
        bottom: Box<CutTree<L>>,
    },
}

impl<L> CutTree<L> {
    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        fn go<'a, L>(t: &'a CutTree<L>, out: &mut Vec<&'a L>) {
            match t {
                CutTree::Leaf(l) => out.push(l),
                CutTree::VCut { left: a, right: b, .. } | CutTree::HCut { top: a, bottom: b, .. } => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn map<M>(self, f: &mut impl FnMut(L) -> M) -> CutTree<M> {
        match self {
            CutTree::Leaf(l) => CutTree::Leaf(f(l)),
            CutTree::VCut { x, left, right } => CutTree::VCut {
                x,
                left: Box::new(left.map(f)),
                right: Box::new(right.map(f)),
            },
            CutTree::HCut { y, top, bottom } => CutTree::HCut {
                y,
                top: Box::new(top.map(f)),
                bottom: Box::new(bottom.map(f)),
            },
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("no guillotine cut in a {} cell region {}", witness.len(), witness.bounds())]
pub struct PinwheelObstruction {
    pub witness: Box<Tiling>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cut {
    V(Q),
    H(Q),
}

/// Guillotine cuts of the cells `idx` inside `region`: vertical ones first,
/// each direction by increasing coordinate.
pub(crate) fn cuts(cells: &[Rect], idx: &[usize], region: &Rect) -> Vec<Cut> {
    let crosses_v = |x: Q| idx.iter().any(|&i| cells[i].x0 < x && x < cells[i].x1);
    let crosses_h = |y: Q| idx.iter().any(|&i| cells[i].y0 < y && y < cells[i].y1);
    let xs: BTreeSet<Q> = idx.iter().map(|&i| cells[i].x0).filter(|&x| x > region.x0).collect();
    let ys: BTreeSet<Q> = idx.iter().map(|&i| cells[i].y0).filter(|&y| y > region.y0).collect();
    xs.into_iter()
        .filter(|&x| !crosses_v(x))
        .map(Cut::V)
        .chain(ys.into_iter().filter(|&y| !crosses_h(y)).map(Cut::H))
        .collect()
}

pub(crate) fn split(cells: &[Rect], idx: &[usize], region: &Rect, cut: Cut) -> [(Rect, Vec<usize>); 2] {
    let (a, b) = match cut {
        Cut::V(x) => (Rect { x1: x, ..*region }, Rect { x0: x, ..*region }),
        Cut::H(y) => (Rect { y1: y, ..*region }, Rect { y0: y, ..*region }),
    };
    let inside = |r: &Rect| idx.iter().copied().filter(|&i| r.contains_rect(&cells[i])).collect();
    [(a, inside(&a)), (b, inside(&b))]
}

/// Recursively cuts the tiling along full-span lines, preferring vertical
/// cuts and then the smallest coordinate. Leaves are cell indices.
pub fn decompose(t: &Tiling) -> Result<CutTree<usize>, PinwheelObstruction> {
    fn go(cells: &[Rect], idx: Vec<usize>, region: Rect) -> Result<CutTree<usize>, PinwheelObstruction> {
        if let [only] = idx[..] {
            return Ok(CutTree::Leaf(only));
        }
        let Some(&cut) = cuts(cells, &idx, &region).first() else {
            return Err(PinwheelObstruction {
                witness: Box::new(Tiling {
                    bounds: region,
                    cells: idx.iter().map(|&i| cells[i]).collect(),
                }),
            });
        };
        let [(ra, ia), (rb, ib)] = split(cells, &idx, &region, cut);
        let (a, b) = (Box::new(go(cells, ia, ra)?), Box::new(go(cells, ib, rb)?));
        Ok(match cut {
            Cut::V(x) => CutTree::VCut { x, left: a, right: b },
            Cut::H(y) => CutTree::HCut { y, top: a, bottom: b },
        })
    }
    go(&t.cells, (0..t.cells.len()).collect(), t.bounds)
}
