//! Contexts, sort-carrying de Bruijn variables, and positional renamings.
//!
//! A context is an ordered list of ground sorts; index 0 is the most
//! recently bound variable. Renamings are positional maps between
//! contexts that preserve sorts, which keeps them structurally comparable
//! and printable.

use std::fmt;

use thiserror::Error;

use crate::signature::{render_sort, Sort};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Ctx(pub Vec<Sort>);

impl Ctx {
    pub fn empty() -> Ctx {
        Ctx(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Sort> {
        self.0.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sort> {
        self.0.iter()
    }
}

impl fmt::Display for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(render_sort).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// A de Bruijn variable with its sort cached. The cache must agree with
/// the context the variable is used in; `check` verifies this.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Var {
    pub index: usize,
    pub sort: Sort,
}

impl Var {
    pub fn new(index: usize, sort: Sort) -> Var {
        Var { index, sort }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CtxError {
    #[error("variable index {index} out of bounds for context of length {len}")]
    OutOfBounds { index: usize, len: usize },
    #[error("context mismatch: expected {expected}, found {found}")]
    ContextMismatch { expected: String, found: String },
}

pub fn concat(left: &Ctx, right: &Ctx) -> Ctx {
    let mut v = left.0.clone();
    v.extend(right.0.iter().cloned());
    Ctx(v)
}

pub fn lookup_sort(ctx: &Ctx, index: usize) -> Result<&Sort, CtxError> {
    ctx.get(index).ok_or(CtxError::OutOfBounds { index, len: ctx.len() })
}

/// A sort-preserving positional renaming: `map[i]` is the target position
/// of source variable `i`, with `target[map[i]] == source[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Renaming {
    pub source: Ctx,
    pub target: Ctx,
    pub map: Vec<usize>,
}

impl Renaming {
    pub fn apply(&self, index: usize) -> usize {
        self.map[index]
    }

    /// Verify the sort-preservation invariant.
    pub fn validate(&self) -> Result<(), CtxError> {
        if self.map.len() != self.source.len() {
            return Err(CtxError::ContextMismatch {
                expected: self.source.to_string(),
                found: format!("map of length {}", self.map.len()),
            });
        }
        for (i, &j) in self.map.iter().enumerate() {
            let t = lookup_sort(&self.target, j)?;
            if t != &self.source.0[i] {
                return Err(CtxError::ContextMismatch {
                    expected: render_sort(&self.source.0[i]),
                    found: render_sort(t),
                });
            }
        }
        Ok(())
    }
}

pub fn id_ren(ctx: &Ctx) -> Renaming {
    Renaming { source: ctx.clone(), target: ctx.clone(), map: (0..ctx.len()).collect() }
}

pub fn compose_ren(first: &Renaming, second: &Renaming) -> Result<Renaming, CtxError> {
    if first.target != second.source {
        return Err(CtxError::ContextMismatch {
            expected: first.target.to_string(),
            found: second.source.to_string(),
        });
    }
    Ok(Renaming {
        source: first.source.clone(),
        target: second.target.clone(),
        map: first.map.iter().map(|&i| second.map[i]).collect(),
    })
}

/// Injection of the left summand: `left ⇝ concat(left, right)`.
pub fn inl_ren(left: &Ctx, right: &Ctx) -> Renaming {
    Renaming {
        source: left.clone(),
        target: concat(left, right),
        map: (0..left.len()).collect(),
    }
}

/// Injection of the right summand: `right ⇝ concat(left, right)`.
pub fn inr_ren(left: &Ctx, right: &Ctx) -> Renaming {
    Renaming {
        source: right.clone(),
        target: concat(left, right),
        map: (0..right.len()).map(|i| left.len() + i).collect(),
    }
}

/// Universal copairing out of a concatenation.
pub fn copair_ren(left: &Renaming, right: &Renaming) -> Result<Renaming, CtxError> {
    if left.target != right.target {
        return Err(CtxError::ContextMismatch {
            expected: left.target.to_string(),
            found: right.target.to_string(),
        });
    }
    let mut map = left.map.clone();
    map.extend(right.map.iter().copied());
    Ok(Renaming {
        source: concat(&left.source, &right.source),
        target: left.target.clone(),
        map,
    })
}

/// Extend a renaming across newly bound variables: indices below
/// `|bound|` are fixed, the rest follow the underlying renaming.
pub fn lift_ren(bound: &Ctx, ren: &Renaming) -> Renaming {
    let n = bound.len();
    let mut map: Vec<usize> = (0..n).collect();
    map.extend(ren.map.iter().map(|&i| n + i));
    Renaming {
        source: concat(bound, &ren.source),
        target: concat(bound, &ren.target),
        map,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nat() -> Sort {
        Sort::base("N")
    }

    fn arrow(a: Sort, b: Sort) -> Sort {
        Sort::app("=>", vec![a, b])
    }

    #[test]
    fn concat_and_lookup() {
        let g = Ctx(vec![nat()]);
        let d = Ctx(vec![arrow(nat(), nat())]);
        assert_eq!(concat(&Ctx::empty(), &g), g);
        let gd = concat(&g, &d);
        assert_eq!(gd.0, vec![nat(), arrow(nat(), nat())]);
        assert_eq!(lookup_sort(&gd, 0).unwrap(), &nat());
        assert_eq!(lookup_sort(&gd, 1).unwrap(), &arrow(nat(), nat()));
        assert!(lookup_sort(&Ctx::empty(), 0).is_err());
    }

    #[test]
    fn identity_and_composition() {
        let g = Ctx(vec![nat(), nat()]);
        assert_eq!(id_ren(&g).map, vec![0, 1]);

        // single-step shifts [N] -> [N,N] -> [N,N,N] compose to map [2]
        let one = Ctx(vec![nat()]);
        let two = Ctx(vec![nat(), nat()]);
        let three = Ctx(vec![nat(), nat(), nat()]);
        let s1 = inr_ren(&one, &one);
        assert_eq!(s1.target, two);
        let s2 = inr_ren(&one, &two);
        assert_eq!(s2.target, three);
        let c = compose_ren(&s1, &s2).unwrap();
        assert_eq!(c.map, vec![2]);
        c.validate().unwrap();

        // category laws
        let rho = inl_ren(&g, &one);
        assert_eq!(compose_ren(&id_ren(&g), &rho).unwrap(), rho);
        assert_eq!(compose_ren(&rho, &id_ren(&rho.target)).unwrap(), rho);
    }

    #[test]
    fn injections_and_copairing() {
        let g = Ctx(vec![nat()]);
        let s = Ctx(vec![Sort::star()]);
        assert_eq!(inl_ren(&g, &s).map, vec![0]);
        let gs = concat(&g, &s);
        assert_eq!(inr_ren(&gs, &g).map, vec![2]);

        // copair(inl, inr) = id
        let inl = inl_ren(&g, &s);
        let inr = inr_ren(&g, &s);
        let cp = copair_ren(&inl, &inr).unwrap();
        assert_eq!(cp, id_ren(&gs));

        // contraction renaming: both halves to the same context
        let contr = copair_ren(&id_ren(&g), &id_ren(&g)).unwrap();
        assert_eq!(contr.map, vec![0, 0]);
        contr.validate().unwrap();
    }

    #[test]
    fn lifting() {
        let one = Ctx(vec![nat()]);
        let rho = inr_ren(&one, &one);
        let lifted = lift_ren(&one, &rho);
        assert_eq!(lifted.map, vec![0, 2]);
        lifted.validate().unwrap();

        assert_eq!(lift_ren(&Ctx::empty(), &rho), rho);
        let g = Ctx(vec![nat(), Sort::star()]);
        assert_eq!(lift_ren(&one, &id_ren(&g)), id_ren(&concat(&one, &g)));
    }

    fn small_sort() -> impl Strategy<Value = Sort> {
        prop_oneof![
            Just(nat()),
            Just(arrow(nat(), nat())),
            Just(Sort::star()),
        ]
    }

    fn small_ctx() -> impl Strategy<Value = Ctx> {
        prop::collection::vec(small_sort(), 0..4).prop_map(Ctx)
    }

    proptest! {
        /// A generated renaming out of a context always preserves sorts,
        /// and lifting distributes over composition.
        #[test]
        fn lift_respects_composition(g in small_ctx(), pad in small_ctx(), theta in small_ctx(), seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            // rho : g -> concat(g, pad) with randomised positions
            let target = concat(&g, &pad);
            let mut map = Vec::new();
            for s in g.iter() {
                let candidates: Vec<usize> = target
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| *t == s)
                    .map(|(i, _)| i)
                    .collect();
                map.push(candidates[rng.gen_range(0..candidates.len())]);
            }
            let rho = Renaming { source: g.clone(), target: target.clone(), map };
            rho.validate().unwrap();
            // varrho : target -> target, a random endo-renaming
            let mut map2 = Vec::new();
            for s in target.iter() {
                let candidates: Vec<usize> = target
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| *t == s)
                    .map(|(i, _)| i)
                    .collect();
                map2.push(candidates[rng.gen_range(0..candidates.len())]);
            }
            let varrho = Renaming { source: target.clone(), target: target.clone(), map: map2 };

            let lhs = lift_ren(&theta, &compose_ren(&rho, &varrho).unwrap());
            let rhs = compose_ren(&lift_ren(&theta, &rho), &lift_ren(&theta, &varrho)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        /// copair is the unique map satisfying the injection equations.
        #[test]
        fn copair_universal_property(g in small_ctx(), d in small_ctx(), k in 0usize..3) {
            let theta = concat(&g, &d);
            // pick rho1/rho2 as injections shifted by a dummy padding choice
            let _ = k;
            let rho1 = inl_ren(&g, &d);
            let rho2 = inr_ren(&g, &d);
            let h = copair_ren(&rho1, &rho2).unwrap();
            prop_assert_eq!(compose_ren(&inl_ren(&g, &d), &h).unwrap(), rho1.clone());
            prop_assert_eq!(compose_ren(&inr_ren(&g, &d), &h).unwrap(), rho2.clone());
            // uniqueness: any map agreeing on both injections equals h
            for i in 0..theta.len() {
                let via = if i < g.len() { rho1.map[i] } else { rho2.map[i - g.len()] };
                prop_assert_eq!(h.map[i], via);
            }
        }
    }
}
