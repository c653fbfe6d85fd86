//! Seeded random signatures, well-typed terms and documents.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::backend::{MatrixBindings, Mode};
use crate::il::{Bindings, IlDocument};
use crate::rewrite::{applicable_rewrites, apply};
use crate::signature::{Generator, ObjectName, Signature, Word};
use crate::term::{typecheck, Term};
use crate::tiling::term_to_brick;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub objects: usize,
    pub generator_kinds: usize,
    /// Upper bound on generator leaves per term.
    pub max_generators: usize,
    pub max_arity: usize,
    pub max_depth: usize,
    /// Upper bound on [`wire_count`].
    pub max_wires: usize,
    pub symmetric: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            objects: 3,
            generator_kinds: 6,
            max_generators: 8,
            max_arity: 2,
            max_depth: 6,
            max_wires: 5,
            symmetric: true,
        }
    }
}

impl SampleConfig {
    pub fn planar() -> Self {
        SampleConfig {
            symmetric: false,
            ..SampleConfig::default()
        }
    }
}

fn random_word(rng: &mut impl Rng, objects: &[ObjectName], min: usize, max: usize) -> Word {
    let n = rng.random_range(min..=max);
    (0..n).map(|_| objects.choose(rng).expect("objects").clone()).collect()
}

/// Objects `a`, `b`, … and generators `g0`, `g1`, … with random arities.
/// Every object is the whole domain of at least one generator.
pub fn random_signature(rng: &mut impl Rng, cfg: &SampleConfig) -> Signature {
    let objects: Vec<ObjectName> = (0..cfg.objects)
        .map(|i| ObjectName::new(((b'a' + i as u8) as char).to_string()).expect("letter"))
        .collect();
    let mut sig = Signature::new(objects.clone(), Vec::new());
    for i in 0..cfg.generator_kinds.max(cfg.objects) {
        let dom = if i < cfg.objects {
            Word::new(vec![objects[i].clone()])
        } else {
            random_word(rng, &objects, 0, cfg.max_arity)
        };
        let cod = random_word(rng, &objects, 0, cfg.max_arity);
        sig.push_generator(Generator::new(format!("g{i}"), dom, cod));
    }
    sig
}

struct TermGen<'a, R> {
    rng: &'a mut R,
    sig: &'a Signature,
    cfg: &'a SampleConfig,
    budget: usize,
}

impl<R: Rng> TermGen<'_, R> {
    fn with_dom(&mut self, w: &Word, depth: usize) -> Term {
        let leaf_only = depth >= self.cfg.max_depth || self.budget == 0;
        let choice = if leaf_only { 0 } else { self.rng.random_range(0..10) };
        match choice {
            0..=2 if !leaf_only && w.len() > 1 && !self.fits_any(w) => {
                let k = self.rng.random_range(1..w.len());
                let (a, b) = w.split_at(k);
                Term::par(self.with_dom(&a, depth + 1), self.with_dom(&b, depth + 1))
            }
            0..=2 => self.leaf(w),
            3..=5 => {
                let first = self.with_dom(w, depth + 1);
                let mid = typecheck(&first, self.sig).expect("generated terms are well-typed").cod;
                let second = self.with_dom(&mid, depth + 1);
                Term::seq(first, second)
            }
            6..=8 => {
                let k = if w.is_empty() { 0 } else { self.rng.random_range(0..=w.len()) };
                let (a, b) = w.split_at(k);
                Term::par(self.with_dom(&a, depth + 1), self.with_dom(&b, depth + 1))
            }
            _ if self.cfg.symmetric && !w.is_empty() => {
                let k = self.rng.random_range(0..=w.len());
                let (a, b) = w.split_at(k);
                Term::sym(a, b)
            }
            _ => self.leaf(w),
        }
    }

    fn fits_any(&self, w: &Word) -> bool {
        self.sig.generators().iter().any(|g| &g.dom == w)
    }

    fn leaf(&mut self, w: &Word) -> Term {
        let fits: Vec<&Generator> = self.sig.generators().iter().filter(|g| &g.dom == w).collect();
        if self.budget > 0 && !fits.is_empty() && self.rng.random_bool(0.8) {
            self.budget -= 1;
            Term::gen(fits.choose(self.rng).expect("nonempty").name.clone())
        } else {
            Term::id(w.clone())
        }
    }
}

/// The largest number of wires crossing any vertical line through the
/// layout of `t`.
pub fn wire_count(t: &Term, sig: &Signature) -> usize {
    match t {
        Term::Seq(a, b) => wire_count(a, sig).max(wire_count(b, sig)),
        Term::Par(a, b) => wire_count(a, sig) + wire_count(b, sig),
        leaf => typecheck(leaf, sig).map(|ty| ty.dom.len().max(ty.cod.len())).unwrap_or(0),
    }
}

/// A well-typed term over `sig` with at most `cfg.max_generators`
/// generator leaves, at most `cfg.max_wires` wires and a domain of length
/// 1 to 3.
pub fn random_term(rng: &mut impl Rng, sig: &Signature, cfg: &SampleConfig) -> Term {
    loop {
        let dom = random_word(rng, sig.objects(), 1, 3.min(cfg.max_wires));
        let mut g = TermGen {
            rng: &mut *rng,
            sig,
            cfg,
            budget: cfg.max_generators,
        };
        let t = g.with_dom(&dom, 0);
        if wire_count(&t, sig) <= cfg.max_wires {
            return t;
        }
    }
}

/// Applies up to `steps` randomly chosen commuting conversions.
pub fn random_variant(rng: &mut impl Rng, t: &Term, sig: &Signature, steps: usize) -> Term {
    let mut cur = t.clone();
    for _ in 0..steps {
        let options = applicable_rewrites(&cur, sig);
        let Some(step) = options.choose(rng) else { break };
        cur = apply(&cur, step, sig).expect("listed rewrites apply");
    }
    cur
}

pub fn random_dims(rng: &mut impl Rng, sig: &Signature, max_dim: usize) -> BTreeMap<ObjectName, usize> {
    sig.objects().iter().map(|o| (o.clone(), rng.random_range(1..=max_dim))).collect()
}

/// A document with a term, a brick diagram when the term is planar, and
/// bindings for a random mode.
pub fn random_document(rng: &mut impl Rng) -> IlDocument {
    let cfg = SampleConfig::default();
    let sig = random_signature(rng, &cfg);
    let t = random_term(rng, &sig, &cfg);
    let mode = if rng.random_bool(0.5) { Mode::Kron } else { Mode::Dirsum };
    let dims = random_dims(rng, &sig, 3);
    let values = MatrixBindings::random(&sig, &dims, mode, rng.random()).expect("dims cover the signature");
    IlDocument {
        brick: term_to_brick(&t, &sig).ok(),
        term: Some(t),
        bindings: Some(Bindings {
            mode: rng.random_bool(0.7).then_some(mode),
            values,
        }),
        signature: sig,
    }
}
