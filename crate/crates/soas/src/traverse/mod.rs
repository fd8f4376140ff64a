//! Structural traversals: renaming, simultaneous and single-variable
//! substitution, and the generic fold into user algebras.
//!
//! Renaming and substitution descend under binders by lifting the mapping
//! across the bound context, which is what keeps them capture-avoiding.
//! Both are total on well-formed inputs and preserve sorts; the law suite
//! checks the identity, composition, unit, associativity, and fusion
//! equations relating them on randomized terms.

pub mod gen;

use crate::ctx::{concat, copair_ren, id_ren, inl_ren, inr_ren, lift_ren, Ctx, Renaming, Var};
use crate::signature::Sort;
use crate::term::{id_sub, lookup, Arg, Sub, Term};

/// Rename every variable of `t` along `rho`.
pub fn ren(t: &Term, rho: &Renaming) -> Term {
    match t {
        Term::Var(v) => Term::Var(Var::new(rho.apply(v.index), v.sort.clone())),
        Term::MVar { mvar, env } => Term::MVar {
            mvar: *mvar,
            env: Sub {
                source: env.source.clone(),
                entries: env.entries.iter().map(|e| ren(e, rho)).collect(),
            },
        },
        Term::Con { op, inst, args } => Term::Con {
            op: op.clone(),
            inst: inst.clone(),
            args: args
                .iter()
                .map(|a| Arg {
                    bound: a.bound.clone(),
                    body: ren(&a.body, &lift_ren(&a.bound, rho)),
                })
                .collect(),
        },
    }
}

/// Weaken on the right of the context: `t` in `ctx` becomes a term in
/// `concat(ctx, pad)` with indices unchanged.
pub fn wkl(t: &Term, ctx: &Ctx, pad: &Ctx) -> Term {
    ren(t, &inl_ren(ctx, pad))
}

/// Weaken on the left of the context: `t` in `ctx` becomes a term in
/// `concat(pad, ctx)` with indices shifted by `|pad|`.
pub fn wkr(t: &Term, pad: &Ctx, ctx: &Ctx) -> Term {
    ren(t, &inr_ren(pad, ctx))
}

/// Merge a duplicated context: `t` in `concat(ctx, ctx)` becomes a term
/// in `ctx`.
pub fn contr(t: &Term, ctx: &Ctx) -> Term {
    let cp = copair_ren(&id_ren(ctx), &id_ren(ctx)).expect("same target");
    ren(t, &cp)
}

/// Extend a substitution across newly bound variables: the bound
/// variables map to themselves and the original entries are weakened past
/// them in one block.
pub fn lift_sub(bound: &Ctx, sub_map: &Sub, target: &Ctx) -> Sub {
    let mut entries: Vec<Term> = bound
        .iter()
        .enumerate()
        .map(|(i, s)| Term::var(i, s.clone()))
        .collect();
    let weaken = inr_ren(bound, target);
    entries.extend(sub_map.entries.iter().map(|e| ren(e, &weaken)));
    Sub { source: concat(bound, &sub_map.source), entries }
}

/// Simultaneous substitution: replace every variable of `t` by its entry.
/// `target` is the context the entries live in.
pub fn sub(t: &Term, sub_map: &Sub, target: &Ctx) -> Term {
    match t {
        Term::Var(v) => lookup(sub_map, v).expect("variable within substitution").clone(),
        Term::MVar { mvar, env } => Term::MVar {
            mvar: *mvar,
            env: Sub {
                source: env.source.clone(),
                entries: env.entries.iter().map(|e| sub(e, sub_map, target)).collect(),
            },
        },
        Term::Con { op, inst, args } => Term::Con {
            op: op.clone(),
            inst: inst.clone(),
            args: args
                .iter()
                .map(|a| {
                    let lifted = lift_sub(&a.bound, sub_map, target);
                    let inner_target = concat(&a.bound, target);
                    Arg { bound: a.bound.clone(), body: sub(&a.body, &lifted, &inner_target) }
                })
                .collect(),
        },
    }
}

/// Substitute `s` for the head variable of `t`'s context.
pub fn sub1(s: &Term, s_sort: &Sort, t: &Term, ctx: &Ctx) -> Term {
    let mut entries = vec![s.clone()];
    entries.extend(id_sub(ctx).entries);
    let mut source = vec![s_sort.clone()];
    source.extend(ctx.iter().cloned());
    sub(t, &Sub { source: Ctx(source), entries }, ctx)
}

/// Substitute `s1` and `s2` for the two head variables of `t`'s context.
pub fn sub2(s1: &Term, s1_sort: &Sort, s2: &Term, s2_sort: &Sort, t: &Term, ctx: &Ctx) -> Term {
    let mut entries = vec![s1.clone(), s2.clone()];
    entries.extend(id_sub(ctx).entries);
    let mut source = vec![s1_sort.clone(), s2_sort.clone()];
    source.extend(ctx.iter().cloned());
    sub(t, &Sub { source: Ctx(source), entries }, ctx)
}

/// A semantic target for the generic fold: one handler per constructor
/// shape. Handlers must be pure for the fold to be the unique
/// structure-preserving map into the carrier.
pub trait MetaAlgebra {
    type Value;

    /// An operator node; each evaluated argument comes tagged with the
    /// context its binders introduced.
    fn on_con(
        &self,
        op: &str,
        inst: &std::collections::BTreeMap<String, Sort>,
        args: Vec<(Ctx, Self::Value)>,
    ) -> Self::Value;

    fn on_var(&self, v: &Var) -> Self::Value;

    fn on_mvar(&self, mvar: usize, env: Vec<Self::Value>) -> Self::Value;
}

/// The structural recursion out of the term tree: each subterm is visited
/// exactly once, including metavariable environments.
pub fn fold<A: MetaAlgebra>(alg: &A, t: &Term) -> A::Value {
    match t {
        Term::Var(v) => alg.on_var(v),
        Term::MVar { mvar, env } => {
            let values = env.entries.iter().map(|e| fold(alg, e)).collect();
            alg.on_mvar(*mvar, values)
        }
        Term::Con { op, inst, args } => {
            let values = args
                .iter()
                .map(|a| (a.bound.clone(), fold(alg, &a.body)))
                .collect();
            alg.on_con(op, inst, values)
        }
    }
}

/// The syntactic algebra: rebuilding each node. Folding with it is the
/// identity, which pins down the fold as the unique homomorphism. It
/// carries the metavariable context to restore environment sources.
pub struct SyntacticAlgebra<'a> {
    pub mctx: &'a crate::term::MCtx,
}

impl MetaAlgebra for SyntacticAlgebra<'_> {
    type Value = Term;

    fn on_con(
        &self,
        op: &str,
        inst: &std::collections::BTreeMap<String, Sort>,
        args: Vec<(Ctx, Term)>,
    ) -> Term {
        Term::Con {
            op: op.to_string(),
            inst: inst.clone(),
            args: args.into_iter().map(|(bound, body)| Arg { bound, body }).collect(),
        }
    }

    fn on_var(&self, v: &Var) -> Term {
        Term::Var(v.clone())
    }

    fn on_mvar(&self, mvar: usize, env: Vec<Term>) -> Term {
        let source = self.mctx.get(mvar).map(|d| d.params.clone()).unwrap_or_default();
        Term::MVar { mvar, env: Sub { source, entries: env } }
    }
}

/// Node counter.
pub struct SizeAlgebra;

impl MetaAlgebra for SizeAlgebra {
    type Value = usize;

    fn on_con(
        &self,
        _op: &str,
        _inst: &std::collections::BTreeMap<String, Sort>,
        args: Vec<(Ctx, usize)>,
    ) -> usize {
        1 + args.into_iter().map(|(_, n)| n).sum::<usize>()
    }

    fn on_var(&self, _v: &Var) -> usize {
        1
    }

    fn on_mvar(&self, _mvar: usize, env: Vec<usize>) -> usize {
        1 + env.into_iter().sum::<usize>()
    }
}
