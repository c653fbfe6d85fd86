use super::{Rect, Q};
use crate::signature::{Signature, Word};
use crate::term::{typecheck, Child, Path, Term, TypeError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeafKind {
    Gen(String),
    Id,
    Sym,
}

/// A leaf of the term together with the region it owns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KdLeaf {
    pub path: Path,
    pub rect: Rect,
    pub kind: LeafKind,
    pub term: Term,
    pub dom: Word,
    pub cod: Word,
}

/// Port `index` of leaf `leaf`; whether it is an input or an output depends
/// on where it appears.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Port {
    pub leaf: usize,
    pub index: usize,
}

/// The vertical cut of a `Seq` node. `left[k]` is an output port that feeds
/// the input port `right[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seam {
    pub path: Path,
    pub x: Q,
    pub y0: Q,
    pub y1: Q,
    pub left: Vec<Port>,
    pub right: Vec<Port>,
}

/// The k-d tree of a term laid out in `bounds`: `Seq` cuts vertically and
/// `Par` horizontally, each at the position proportional to the leaf counts
/// of the two sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KdLayout {
    pub bounds: Rect,
    pub leaves: Vec<KdLeaf>,
    /// In pre-order of the `Seq` nodes.
    pub seams: Vec<Seam>,
    /// Input ports on the left side, top to bottom.
    pub inputs: Vec<Port>,
    /// Output ports on the right side, top to bottom.
    pub outputs: Vec<Port>,
    pub dom: Word,
    pub cod: Word,
}

pub fn layout(t: &Term, sig: &Signature, bounds: Rect) -> Result<KdLayout, TypeError> {
    let ty = typecheck(t, sig)?;
    let mut out = KdLayout {
        bounds,
        leaves: Vec::new(),
        seams: Vec::new(),
        inputs: Vec::new(),
        outputs: Vec::new(),
        dom: ty.dom,
        cod: ty.cod,
    };
    let (inputs, outputs) = go(t, sig, bounds, &mut Path::root(), &mut out);
    out.inputs = inputs;
    out.outputs = outputs;
    Ok(out)
}

fn cut_at(lo: Q, hi: Q, a: &Term, b: &Term) -> Q {
    let (na, nb) = (a.leaf_count() as i128, b.leaf_count() as i128);
    lo + (hi - lo) * Q::new(na, na + nb)
}

fn go(t: &Term, sig: &Signature, rect: Rect, path: &mut Path, out: &mut KdLayout) -> (Vec<Port>, Vec<Port>) {
    match t {
        Term::Seq(a, b) => {
            let x = cut_at(rect.x0, rect.x1, a, b);
            let at = out.seams.len();
            out.seams.push(Seam {
                path: path.clone(),
                x,
                y0: rect.y0,
                y1: rect.y1,
                left: Vec::new(),
                right: Vec::new(),
            });
            path.push(Child::First);
            let (ins, mid_out) = go(a, sig, Rect { x1: x, ..rect }, path, out);
            path.pop();
            path.push(Child::Second);
            let (mid_in, outs) = go(b, sig, Rect { x0: x, ..rect }, path, out);
            path.pop();
            out.seams[at].left = mid_out;
            out.seams[at].right = mid_in;
            (ins, outs)
        }
        Term::Par(a, b) => {
            let y = cut_at(rect.y0, rect.y1, a, b);
            path.push(Child::First);
            let (mut ins, mut outs) = go(a, sig, Rect { y1: y, ..rect }, path, out);
            path.pop();
            path.push(Child::Second);
            let (ins_b, outs_b) = go(b, sig, Rect { y0: y, ..rect }, path, out);
            path.pop();
            ins.extend(ins_b);
            outs.extend(outs_b);
            (ins, outs)
        }
        leaf => {
            let ty = typecheck(leaf, sig).expect("leaf of a well-typed term");
            let kind = match leaf {
                Term::Gen(n) => LeafKind::Gen(n.clone()),
                Term::Id(_) => LeafKind::Id,
                _ => LeafKind::Sym,
            };
            let index = out.leaves.len();
            let ports = |n: usize| (0..n).map(|k| Port { leaf: index, index: k }).collect::<Vec<_>>();
            let io = (ports(ty.dom.len()), ports(ty.cod.len()));
            out.leaves.push(KdLeaf {
                path: path.clone(),
                rect,
                kind,
                term: leaf.clone(),
                dom: ty.dom,
                cod: ty.cod,
            });
            io
        }
    }
}
