use std::collections::BTreeMap;

use crate::signature::{word_concat, ObjectName, Signature, Word};
use crate::term::{tensor_width, typecheck, Child, MorphismType, Path, Term, TypeError};

/// Dense flop estimates for evaluating a term in kron mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostModel {
    pub default_dim: u128,
    pub dims: BTreeMap<ObjectName, u128>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            default_dim: 2,
            dims: BTreeMap::new(),
        }
    }
}

impl CostModel {
    pub fn word_dim(&self, w: &Word) -> u128 {
        w.iter()
            .map(|o| self.dims.get(o).copied().unwrap_or(self.default_dim))
            .fold(1u128, u128::saturating_mul)
    }

    /// `d·m·c` per `Seq` node plus the product of the four interface
    /// dimensions per `Par` node.
    pub fn cost(&self, t: &Term, sig: &Signature) -> Result<u128, TypeError> {
        fn go(m: &CostModel, t: &Term, sig: &Signature) -> Result<(MorphismType, u128), TypeError> {
            match t {
                Term::Seq(a, b) | Term::Par(a, b) => {
                    let (ta, ca) = go(m, a, sig)?;
                    let (tb, cb) = go(m, b, sig)?;
                    let d = |w: &Word| m.word_dim(w);
                    let (ty, own) = if matches!(t, Term::Seq(..)) {
                        if ta.cod != tb.dom {
                            typecheck(t, sig)?;
                        }
                        let own = d(&ta.dom).saturating_mul(d(&ta.cod)).saturating_mul(d(&tb.cod));
                        (MorphismType::new(ta.dom, tb.cod), own)
                    } else {
                        let own = [&ta.dom, &ta.cod, &tb.dom, &tb.cod]
                            .into_iter()
                            .map(d)
                            .fold(1u128, u128::saturating_mul);
                        (MorphismType::new(word_concat(&ta.dom, &tb.dom), word_concat(&ta.cod, &tb.cod)), own)
                    };
                    Ok((ty, ca.saturating_add(cb).saturating_add(own)))
                }
                leaf => Ok((typecheck(leaf, sig)?, 0)),
            }
        }
        go(self, t, sig).map(|(_, c)| c)
    }
}

/// Ways of splitting the parallel node `a ⊗ b` into two layers.
fn splits(a: &Term, b: &Term, sig: &Signature) -> Vec<Term> {
    let (Ok(ta), Ok(tb)) = (typecheck(a, sig), typecheck(b, sig)) else {
        return Vec::new();
    };
    let id = |w: &Word| Term::Id(w.clone());
    let layers = |p: Term, q: Term, r: Term, s: Term| Term::seq(Term::par(p, q), Term::par(r, s));
    let mut out = Vec::new();
    if let (Term::Seq(a1, a2), Term::Seq(b1, b2)) = (a, b) {
        out.push(layers((**a1).clone(), (**b1).clone(), (**a2).clone(), (**b2).clone()));
    }
    if let Term::Seq(a1, a2) = a {
        out.push(layers((**a1).clone(), b.clone(), (**a2).clone(), id(&tb.cod)));
        out.push(layers((**a1).clone(), id(&tb.dom), (**a2).clone(), b.clone()));
    }
    if let Term::Seq(b1, b2) = b {
        out.push(layers(a.clone(), (**b1).clone(), id(&ta.cod), (**b2).clone()));
        out.push(layers(id(&ta.dom), (**b1).clone(), a.clone(), (**b2).clone()));
    }
    out.push(layers(a.clone(), id(&tb.dom), id(&ta.cod), b.clone()));
    out.push(layers(id(&ta.dom), b.clone(), a.clone(), id(&tb.cod)));
    out
}

fn candidates(t: &Term, sig: &Signature) -> Vec<Term> {
    fn go(node: &Term, root: &Term, sig: &Signature, path: &mut Path, out: &mut Vec<Term>) {
        if let Term::Par(a, b) = node {
            for s in splits(a, b, sig) {
                out.extend(root.replace_at(path, s));
            }
        }
        if let Some((a, b)) = node.children() {
            path.push(Child::First);
            go(a, root, sig, path, out);
            path.pop();
            path.push(Child::Second);
            go(b, root, sig, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(t, t, sig, &mut Path::root(), &mut out);
    out
}

/// Greedy descent over interchange-inverse moves, including splits that pad
/// with identities. A move is taken only when it lowers
/// `(tensor_width, cost)` lexicographically; the best such move wins.
pub fn minimize_width(t: &Term, sig: &Signature, model: &CostModel) -> Result<Term, TypeError> {
    let score = |t: &Term| -> Result<(usize, u128), TypeError> { Ok((tensor_width(t), model.cost(t, sig)?)) };
    let mut current = t.clone();
    let mut best = score(&current)?;
    loop {
        let mut next: Option<(Term, (usize, u128))> = None;
        for c in candidates(&current, sig) {
            let s = score(&c)?;
            if s < next.as_ref().map_or(best, |(_, b)| *b) {
                next = Some((c, s));
            }
        }
        match next {
            Some((c, s)) => {
                current = c;
                best = s;
            }
            None => return Ok(current),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{terms_equivalent, Equivalence};
    use crate::signature::{running_example_signature, Generator};
    use crate::term::running_example_term;

    fn w(names: &[&str]) -> Word {
        Word::from_names(names.iter().copied())
    }

    /// Four one-wire generators `p, q, r, s: x → x`.
    fn sig() -> Signature {
        let gens = ["p", "q", "r", "s"].map(|n| Generator::new(n, w(&["x"]), w(&["x"]))).to_vec();
        Signature::new(vec![ObjectName::new("x").unwrap()], gens)
    }

    #[test]
    fn generator_is_a_fixpoint() {
        let sig = running_example_signature();
        assert_eq!(minimize_width(&Term::gen("f1"), &sig, &CostModel::default()), Ok(Term::gen("f1")));
    }

    #[test]
    fn hand_computed_costs() {
        let sig = sig();
        let m = CostModel::default();
        let par = Term::par(Term::gen("p"), Term::gen("q"));
        assert_eq!(m.cost(&par, &sig), Ok(16));
        let split = Term::seq(
            Term::par(Term::gen("p"), Term::id(w(&["x"]))),
            Term::par(Term::id(w(&["x"])), Term::gen("q")),
        );
        // 16 + 16 for the two tensors, 4·4·4 for the product
        assert_eq!(m.cost(&split, &sig), Ok(96));
        assert_eq!(minimize_width(&par, &sig, &m), Ok(par));
    }

    #[test]
    fn width_drops_when_stacks_interleave() {
        let sig = sig();
        let pq = Term::par(Term::gen("p"), Term::gen("q"));
        let rs = Term::par(Term::gen("r"), Term::gen("s"));
        let t = Term::par(
            Term::seq(pq.clone(), Term::id(w(&["x", "x"]))),
            Term::seq(Term::id(w(&["x", "x"])), rs.clone()),
        );
        assert_eq!(tensor_width(&t), 4);
        let out = minimize_width(&t, &sig, &CostModel::default()).unwrap();
        assert!(tensor_width(&out) < 4, "{out}");
        assert_eq!(terms_equivalent(&t, &out, &sig), Ok(Equivalence::Yes));
    }

    #[test]
    fn running_example_is_untouched() {
        let sig = running_example_signature();
        let t = running_example_term();
        let out = minimize_width(&t, &sig, &CostModel::default()).unwrap();
        assert!(tensor_width(&out) <= tensor_width(&t));
        assert_eq!(terms_equivalent(&t, &out, &sig), Ok(Equivalence::Yes));
    }
}
