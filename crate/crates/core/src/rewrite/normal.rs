//! Layered normal forms.
//!
//! A term is flattened to a sequence of *slices*: each generator or crossing
//! together with the index of its first input wire at the moment it fires.
//! Adjacent slices acting on disjoint wire ranges may be exchanged, and two
//! terms are equal modulo the monoidal axioms exactly when their slice
//! sequences are related by such exchanges. The normal form takes, layer by
//! layer, every slice that can be exchanged to the front, then orders each
//! layer canonically.

use std::collections::HashSet;

use crate::signature::{Signature, Word};
use crate::term::{typecheck, Term, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Slice {
    pub leaf: Term,
    pub dom: Word,
    pub cod: Word,
    pub offset: usize,
}

impl Slice {
    fn ins(&self) -> usize {
        self.dom.len()
    }

    fn outs(&self) -> usize {
        self.cod.len()
    }

    fn at(&self, offset: usize) -> Slice {
        Slice { offset, ..self.clone() }
    }
}

/// The domain of `t` and its slices in firing order.
pub(crate) fn flatten(t: &Term, sig: &Signature) -> Result<(Word, Vec<Slice>), TypeError> {
    fn go(t: &Term, sig: &Signature, offset: usize, out: &mut Vec<Slice>) -> usize {
        match t {
            Term::Id(w) => w.len(),
            Term::Gen(_) | Term::Sym(..) => {
                let ty = typecheck(t, sig).expect("leaf of a well-typed term");
                let width = ty.cod.len();
                out.push(Slice {
                    leaf: t.clone(),
                    dom: ty.dom,
                    cod: ty.cod,
                    offset,
                });
                width
            }
            Term::Seq(a, b) => {
                go(a, sig, offset, out);
                go(b, sig, offset, out)
            }
            Term::Par(a, b) => {
                let wa = go(a, sig, offset, out);
                wa + go(b, sig, offset + wa, out)
            }
        }
    }

    let ty = typecheck(t, sig)?;
    let mut slices = Vec::new();
    go(t, sig, 0, &mut slices);
    Ok((ty.dom, slices))
}

/// Exchanges `a` followed by `b` into `b'` followed by `a'`, if they act on
/// disjoint wires.
pub(crate) fn exchange(a: &Slice, b: &Slice) -> Option<(Slice, Slice)> {
    let (i, j) = (a.offset, b.offset);
    if j >= i + a.outs() {
        Some((b.at(j - a.outs() + a.ins()), a.clone()))
    } else if j + b.ins() <= i {
        Some((b.clone(), a.at(i - b.ins() + b.outs())))
    } else {
        None
    }
}

/// Splits the sequence into maximal front layers.
fn layers(mut seq: Vec<Slice>) -> Vec<Vec<Slice>> {
    let mut out = Vec::new();
    while !seq.is_empty() {
        let mut front = 0;
        for k in 0..seq.len() {
            let mut trial = seq.clone();
            let moved = (0..k).rev().all(|m| match exchange(&trial[m], &trial[m + 1]) {
                Some((b, a)) => {
                    trial[m] = b;
                    trial[m + 1] = a;
                    true
                }
                None => false,
            });
            if moved {
                seq = trial;
                front += 1;
            }
        }
        out.push(seq.drain(..front).collect());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Block {
    Wire(Word),
    Node(Slice),
}

impl Block {
    fn ins(&self) -> usize {
        match self {
            Block::Wire(_) => 1,
            Block::Node(s) => s.ins(),
        }
    }

    fn outs(&self) -> usize {
        match self {
            Block::Wire(_) => 1,
            Block::Node(s) => s.outs(),
        }
    }
}

/// Whether vertically adjacent blocks may trade places.
fn commute(above: &Block, below: &Block) -> bool {
    (above.ins() == 0 && below.outs() == 0) || (above.outs() == 0 && below.ins() == 0)
}

/// Packs pairwise independent slices over the wires `input` into one layer.
fn pack(input: &Word, layer: &[Slice]) -> Vec<Block> {
    let mut blocks: Vec<Block> = input.iter().map(|o| Block::Wire(Word::new(vec![o.clone()]))).collect();
    for s in layer {
        let mut pos = 0;
        let mut at = blocks.len();
        for (b, blk) in blocks.iter().enumerate() {
            let fits = if s.ins() == 0 {
                pos + blk.outs() > s.offset
            } else {
                pos == s.offset && matches!(blk, Block::Wire(_))
            };
            if fits {
                at = b;
                break;
            }
            pos += blk.outs();
        }
        debug_assert!(blocks[at..at + s.ins()].iter().all(|b| matches!(b, Block::Wire(_))));
        blocks.splice(at..at + s.ins(), [Block::Node(s.clone())]);
    }

    // Lexicographically least arrangement under `commute`.
    let mut rest = blocks;
    let mut ordered = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let mut best = 0;
        for k in 1..rest.len() {
            if (0..k).all(|m| commute(&rest[m], &rest[k])) {
                if let (Block::Node(x), Block::Node(y)) = (&rest[k], &rest[best]) {
                    if x.leaf < y.leaf {
                        best = k;
                    }
                }
            }
        }
        ordered.push(rest.remove(best));
    }
    ordered
}

fn layer_term(blocks: Vec<Block>) -> (Term, Word) {
    let mut leaves = Vec::new();
    let mut run: Vec<crate::signature::ObjectName> = Vec::new();
    let mut output = Vec::new();
    for b in blocks {
        match b {
            Block::Wire(w) => {
                output.extend(w.iter().cloned());
                run.extend(w.iter().cloned());
            }
            Block::Node(s) => {
                if !run.is_empty() {
                    leaves.push(Term::Id(Word::new(std::mem::take(&mut run))));
                }
                output.extend(s.cod.iter().cloned());
                leaves.push(s.leaf);
            }
        }
    }
    if !run.is_empty() {
        leaves.push(Term::Id(Word::new(run)));
    }
    (Term::par_all(leaves).expect("layer has a node"), Word::new(output))
}

/// The layered normal form: a right-nested `Seq` of layers, each a
/// right-nested `Par` of generator, crossing and identity leaves, with every
/// generator in the earliest layer it can reach. Terms without generators
/// normalize to an identity.
///
/// When some generator or crossing has no inputs or no outputs, the result
/// is canonical only if the exchange class has at most [`CLASS_LIMIT`]
/// members.
pub fn normalize(t: &Term, sig: &Signature) -> Result<Term, TypeError> {
    normal_form(t, sig).map(|(nf, _)| nf)
}

/// Largest exchange class searched exhaustively.
pub const CLASS_LIMIT: usize = 2_000_000;

/// The normal form, and whether it is known to be canonical.
pub(crate) fn normal_form(t: &Term, sig: &Signature) -> Result<(Term, bool), TypeError> {
    let (dom, seq) = flatten(t, sig)?;
    if seq.iter().all(|s| s.ins() > 0 && s.outs() > 0) {
        return Ok((from_slices(&dom, seq), true));
    }
    // A slice without inputs meeting one without outputs can be exchanged in
    // two ways, so the front layers depend on the representative. Layer the
    // least member of the class instead.
    let mut leaves: Vec<&Term> = seq.iter().map(|s| &s.leaf).collect();
    leaves.sort();
    leaves.dedup();
    let rank: Vec<usize> = seq.iter().map(|s| leaves.binary_search(&&s.leaf).unwrap()).collect();
    let mut by_rank: Vec<&Slice> = Vec::with_capacity(leaves.len());
    for r in 0..leaves.len() {
        by_rank.push(&seq[rank.iter().position(|&x| x == r).expect("every rank occurs")]);
    }
    // Equal leaves have equal types, so searching over (rank, offset) keys
    // rather than slice indices loses nothing and skips permutations of
    // repeated leaves.
    let arity: Vec<(usize, usize)> = by_rank.iter().map(|s| (s.ins(), s.outs())).collect();
    let start: Vec<(usize, usize)> = seq.iter().zip(&rank).map(|(s, &r)| (r, s.offset)).collect();
    let max_wires = dom.len() + seq.iter().map(|s| s.outs()).sum::<usize>();
    let (least, complete) = if start.len() <= 8 && leaves.len() <= 256 && max_wires < 256 {
        let (class, complete) = exchange_class(&arity, Packed::pack(&start), start.len());
        (
            class.into_iter().max().expect("class contains the start").unpack(start.len()),
            complete,
        )
    } else {
        let (class, complete) = exchange_class(&arity, start.clone(), start.len());
        (class.into_iter().min().expect("class contains the start"), complete)
    };
    let slices = least.iter().map(|&(r, o)| by_rank[r].at(o)).collect();
    Ok((from_slices(&dom, slices), complete))
}

trait Sequence: Clone + Eq + std::hash::Hash {
    fn get(&self, k: usize) -> (usize, usize);
    fn set(&mut self, k: usize, v: (usize, usize));
}

impl Sequence for Vec<(usize, usize)> {
    fn get(&self, k: usize) -> (usize, usize) {
        self[k]
    }

    fn set(&mut self, k: usize, v: (usize, usize)) {
        self[k] = v;
    }
}

/// Up to eight `(rank, offset)` pairs below 256, one per 16 bits with the
/// first pair highest. Each pair is stored complemented, so the largest
/// packed value is the lexicographically least sequence.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Packed(u128);

impl Packed {
    fn shift(k: usize) -> u32 {
        (112 - 16 * k) as u32
    }

    fn pack(s: &[(usize, usize)]) -> Packed {
        let mut p = Packed(0);
        for (k, &v) in s.iter().enumerate() {
            p.set(k, v);
        }
        p
    }

    fn unpack(self, len: usize) -> Vec<(usize, usize)> {
        (0..len).map(|k| self.get(k)).collect()
    }
}

impl Sequence for Packed {
    fn get(&self, k: usize) -> (usize, usize) {
        let v = !((self.0 >> Self::shift(k)) as u16);
        ((v >> 8) as usize, (v & 0xff) as usize)
    }

    fn set(&mut self, k: usize, (r, o): (usize, usize)) {
        let v = !(((r as u16) << 8) | o as u16);
        self.0 = self.0 & !(0xffff << Self::shift(k)) | (v as u128) << Self::shift(k);
    }
}

/// Sequences of `len` `(leaf rank, offset)` pairs reachable from `start` by
/// adjacent exchanges, and whether that is all of them. `arity[r]` is the number of
/// inputs and outputs of rank `r`.
fn exchange_class<S: Sequence>(arity: &[(usize, usize)], start: S, len: usize) -> (HashSet<S>, bool) {
    let ins = |k: usize| arity[k].0;
    let outs = |k: usize| arity[k].1;
    let mut seen = HashSet::from([start.clone()]);
    let mut stack = vec![start];
    while let Some(s) = stack.pop() {
        for k in 0..len.saturating_sub(1) {
            let ((a, i), (b, j)) = (s.get(k), s.get(k + 1));
            let mut moves = Vec::with_capacity(2);
            if j >= i + outs(a) {
                moves.push(((b, j - outs(a) + ins(a)), (a, i)));
            }
            if j + ins(b) <= i {
                moves.push(((b, j), (a, i - ins(b) + outs(b))));
            }
            for (x, y) in moves {
                let mut n = s.clone();
                n.set(k, x);
                n.set(k + 1, y);
                if !seen.contains(&n) {
                    if seen.len() == CLASS_LIMIT {
                        return (seen, false);
                    }
                    seen.insert(n.clone());
                    stack.push(n);
                }
            }
        }
    }
    (seen, true)
}

pub(crate) fn from_slices(dom: &Word, seq: Vec<Slice>) -> Term {
    let mut wires = dom.clone();
    let mut terms = Vec::new();
    for layer in layers(seq) {
        let (term, next) = layer_term(pack(&wires, &layer));
        terms.push(term);
        wires = next;
    }
    Term::seq_all(terms).unwrap_or(Term::Id(wires))
}
