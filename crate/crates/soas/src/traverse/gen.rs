//! Deterministic random generation of sorts, contexts, terms, renamings,
//! substitutions, and metavariable contexts. All generation is driven by
//! a caller-supplied RNG so that every case is replayable from a seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::ctx::{concat, Ctx, Renaming};
use crate::signature::{instantiate, unify_sorts, Signature, Sort};
use crate::term::{Arg, MCtx, MvarDecl, Sub, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("uninhabitable goal: no variable, metavariable, or operator produces the requested sort")]
    Uninhabitable,
    #[error("generation gave up after {0} retries")]
    RetriesExhausted(usize),
}

const MAX_RETRIES: usize = 100;

/// Sample a ground sort from the signature's type constructors, nesting
/// at most `depth` levels.
pub fn gen_sort(sig: &Signature, rng: &mut impl Rng, depth: usize) -> Sort {
    if sig.is_unsorted() {
        return Sort::star();
    }
    let nullary: Vec<_> = sig.typecons.iter().filter(|t| t.arity == 0).collect();
    if depth == 0 || nullary.is_empty() || rng.gen_bool(0.5) {
        if let Some(t) = nullary.choose(rng) {
            return Sort::base(t.name.clone());
        }
    }
    let t = sig.typecons.choose(rng).expect("sorted signature has type constructors");
    let args = (0..t.arity).map(|_| gen_sort(sig, rng, depth.saturating_sub(1))).collect();
    Sort::app(t.name.clone(), args)
}

pub fn gen_ctx(sig: &Signature, rng: &mut impl Rng, max_len: usize) -> Ctx {
    let len = rng.gen_range(0..=max_len);
    Ctx((0..len).map(|_| gen_sort(sig, rng, 2)).collect())
}

pub fn gen_mctx(sig: &Signature, rng: &mut impl Rng, max_len: usize) -> MCtx {
    let len = rng.gen_range(0..=max_len);
    MCtx(
        (0..len)
            .map(|i| MvarDecl {
                name: format!("m{i}"),
                params: gen_ctx(sig, rng, 2),
                sort: gen_sort(sig, rng, 2),
            })
            .collect(),
    )
}

/// A random sort-preserving renaming out of `source`: the target is the
/// source plus padding, shuffled, and each variable maps to a random
/// position of its sort.
pub fn gen_renaming(sig: &Signature, rng: &mut impl Rng, source: &Ctx) -> Renaming {
    let mut target: Vec<Sort> = source.0.clone();
    let pad = rng.gen_range(0..=2);
    for _ in 0..pad {
        target.push(gen_sort(sig, rng, 2));
    }
    target.shuffle(rng);
    let target = Ctx(target);
    let map = source
        .iter()
        .map(|s| {
            let candidates: Vec<usize> = target
                .iter()
                .enumerate()
                .filter(|(_, t)| *t == s)
                .map(|(i, _)| i)
                .collect();
            candidates[rng.gen_range(0..candidates.len())]
        })
        .collect();
    Renaming { source: source.clone(), target, map }
}

/// A random substitution from `source`. The target context is the source
/// plus padding so every entry sort is inhabited by at least a variable.
pub fn gen_sub(
    sig: &Signature,
    mctx: &MCtx,
    rng: &mut impl Rng,
    source: &Ctx,
    budget: usize,
) -> Result<(Sub, Ctx), GenError> {
    let mut target: Vec<Sort> = source.0.clone();
    for _ in 0..rng.gen_range(0..=2usize) {
        target.push(gen_sort(sig, rng, 2));
    }
    target.shuffle(rng);
    let target = Ctx(target);
    let entries = source
        .iter()
        .map(|s| gen_term(sig, mctx, &target, s, budget, rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((Sub { source: source.clone(), entries }, target))
}

/// Generate a well-formed term of the requested sort. The budget bounds
/// the node count softly: once spent, only variables, constants, and
/// sort-shrinking operators are considered.
pub fn gen_term(
    sig: &Signature,
    mctx: &MCtx,
    ctx: &Ctx,
    sort: &Sort,
    budget: usize,
    rng: &mut impl Rng,
) -> Result<Term, GenError> {
    let mut pool = budget as isize;
    let mut retries = 0usize;
    go(sig, mctx, ctx, sort, &mut pool, rng, &mut retries)
}

enum Production {
    UseVar(usize),
    UseMvar(usize),
    UseOp(String, BTreeMap<String, Sort>),
}

fn go(
    sig: &Signature,
    mctx: &MCtx,
    ctx: &Ctx,
    sort: &Sort,
    pool: &mut isize,
    rng: &mut impl Rng,
    retries: &mut usize,
) -> Result<Term, GenError> {
    let exhausted = *pool <= 1;
    let mut candidates = Vec::new();
    for (i, s) in ctx.iter().enumerate() {
        if s == sort {
            candidates.push(Production::UseVar(i));
        }
    }
    for (m, decl) in mctx.0.iter().enumerate() {
        if decl.sort == *sort && (!exhausted || decl.params.is_empty()) {
            candidates.push(Production::UseMvar(m));
        }
    }
    for op in &sig.ops {
        let mut theta = BTreeMap::new();
        if unify_sorts(&op.result, sort, &mut theta).is_err() {
            continue;
        }
        // fill sort variables the result leaves free with sampled sorts
        for v in &op.sortvars {
            if !theta.contains_key(v) {
                theta.insert(v.clone(), gen_sort(sig, rng, 2));
            }
        }
        if exhausted {
            let shrinking = !op.args.is_empty()
                && op.args.iter().all(|a| {
                    instantiate(&a.body, &theta)
                        .map(|s| s.node_count() < sort.node_count())
                        .unwrap_or(false)
                });
            if !(op.args.is_empty() || shrinking) {
                continue;
            }
        }
        candidates.push(Production::UseOp(op.name.clone(), theta));
    }

    while !candidates.is_empty() {
        let pick = rng.gen_range(0..candidates.len());
        let chosen = candidates.swap_remove(pick);
        let saved = *pool;
        *pool -= 1;
        let attempt = match &chosen {
            Production::UseVar(i) => Ok(Term::var(*i, ctx.get(*i).unwrap().clone())),
            Production::UseMvar(m) => {
                let decl = mctx.get(*m).unwrap().clone();
                let entries = decl
                    .params
                    .iter()
                    .map(|p| go(sig, mctx, ctx, p, pool, rng, retries))
                    .collect::<Result<Vec<_>, _>>();
                attempt_mvar(*m, &decl, entries)
            }
            Production::UseOp(name, theta) => {
                let decl = sig.op(name).unwrap().clone();
                let mut args = Vec::with_capacity(decl.args.len());
                let mut failed = None;
                for ba in &decl.args {
                    let bound = Ctx(
                        ba.bound
                            .iter()
                            .rev()
                            .map(|b| instantiate(b, theta).expect("theta covers sortvars"))
                            .collect(),
                    );
                    let body_sort = instantiate(&ba.body, theta).expect("theta covers sortvars");
                    let inner = concat(&bound, ctx);
                    match go(sig, mctx, &inner, &body_sort, pool, rng, retries) {
                        Ok(body) => args.push(Arg { bound, body }),
                        Err(e) => {
                            failed = Some(e);
                            break;
                        }
                    }
                }
                match failed {
                    None => Ok(Term::Con { op: name.clone(), inst: theta.clone(), args }),
                    Some(e) => Err(e),
                }
            }
        };
        match attempt {
            Ok(t) => return Ok(t),
            Err(GenError::RetriesExhausted(n)) => return Err(GenError::RetriesExhausted(n)),
            Err(GenError::Uninhabitable) => {
                *pool = saved;
                *retries += 1;
                if *retries > MAX_RETRIES {
                    return Err(GenError::RetriesExhausted(*retries));
                }
            }
        }
    }
    Err(GenError::Uninhabitable)
}

fn attempt_mvar(
    m: usize,
    decl: &MvarDecl,
    entries: Result<Vec<Term>, GenError>,
) -> Result<Term, GenError> {
    Ok(Term::MVar {
        mvar: m,
        env: Sub { source: decl.params.clone(), entries: entries? },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_spec;
    use crate::term::check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const STLC_TINY: &str = "
type
  N : 0-ary
  _=>_ : 2-ary | r30
term
  app : (a => b) a -> b
  lam : a.b -> a => b
";

    const PD: &str = "
term
  zero : -> *
  one : -> *
  inv : * -> *
  add : * * -> *
  mult : * * -> *
  pdiff : *.* * -> *
";

    #[test]
    fn budget_one_forces_the_only_inhabitant() {
        let sig = parse_spec(STLC_TINY).unwrap();
        let ctx = Ctx(vec![Sort::base("N")]);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = gen_term(&sig, &MCtx::empty(), &ctx, &Sort::base("N"), 1, &mut rng).unwrap();
            assert_eq!(t, Term::var(0, Sort::base("N")));
        }
    }

    #[test]
    fn budget_one_unsorted_picks_a_constant() {
        let sig = parse_spec(PD).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t =
                gen_term(&sig, &MCtx::empty(), &Ctx::empty(), &Sort::star(), 1, &mut rng).unwrap();
            match &t {
                Term::Con { op, args, .. } if args.is_empty() => {
                    assert!(op == "zero" || op == "one");
                }
                other => panic!("expected a constant, got {other:?}"),
            }
        }
    }

    #[test]
    fn uninhabitable_goal_reported() {
        let sig = parse_spec(STLC_TINY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // no ze/su here: sort N in the empty context has no closed terms
        let r = gen_term(&sig, &MCtx::empty(), &Ctx::empty(), &Sort::base("N"), 8, &mut rng);
        assert!(r.is_err());
    }

    #[test]
    fn generated_terms_check() {
        for spec in [STLC_TINY, PD] {
            let sig = parse_spec(spec).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let mut produced = 0;
            for case in 0..1000 {
                let mctx = gen_mctx(&sig, &mut rng, 2);
                let ctx = gen_ctx(&sig, &mut rng, 3);
                let sort = gen_sort(&sig, &mut rng, 2);
                match gen_term(&sig, &mctx, &ctx, &sort, 20, &mut rng) {
                    Ok(t) => {
                        produced += 1;
                        let got = check(&sig, &mctx, &ctx, &t)
                            .unwrap_or_else(|e| panic!("case {case}: {e}"));
                        assert_eq!(got, sort);
                    }
                    Err(_) => {} // some goals are uninhabitable; that is fine
                }
            }
            assert!(produced > 500, "generator should succeed most of the time");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let sig = parse_spec(PD).unwrap();
        let gen = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            gen_term(&sig, &MCtx::empty(), &Ctx::empty(), &Sort::star(), 20, &mut rng).unwrap()
        };
        assert_eq!(gen(5), gen(5));
    }
}
