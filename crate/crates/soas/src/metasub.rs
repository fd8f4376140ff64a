//! Metasubstitution: capture-permitting replacement of metavariables by
//! terms over another metavariable context.
//!
//! A mapping assigns to each metavariable `m : (params, sort)` of the
//! source context a replacement term over the target metavariable
//! context, well-formed in `concat(params, global)` — so replacements may
//! mention both the parameters of `m` and every object variable in scope
//! at the occurrence. Descending under a binder weakens the mapping: the
//! parameters keep their positions while the global variables shift past
//! the newly bound ones.

use thiserror::Error;

use crate::ctx::{concat, inr_ren, lift_ren, Ctx};
use crate::term::{id_sub, MCtx, Sub, Term};
use crate::traverse::{ren, sub};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaMap {
    pub source: MCtx,
    pub target: MCtx,
    pub global: Ctx,
    /// One replacement per source metavariable, in order; entry `m` is a
    /// term over `target` in `concat(source[m].params, global)`.
    pub entries: Vec<Term>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetaMapError {
    #[error("mapping must cover all {expected} metavariables, got {found} entries")]
    WrongLength { expected: usize, found: usize },
    #[error("metavariable #{0} missing from mapping")]
    Missing(usize),
}

impl MetaMap {
    /// Total mappings only: one entry per source metavariable.
    pub fn new(
        source: MCtx,
        target: MCtx,
        global: Ctx,
        entries: Vec<Term>,
    ) -> Result<MetaMap, MetaMapError> {
        if entries.len() != source.len() {
            return Err(MetaMapError::WrongLength { expected: source.len(), found: entries.len() });
        }
        Ok(MetaMap { source, target, global, entries })
    }

    pub fn entry(&self, m: usize) -> Result<&Term, MetaMapError> {
        self.entries.get(m).ok_or(MetaMapError::Missing(m))
    }
}

/// The identity mapping: each metavariable maps to itself applied to its
/// parameters.
pub fn id_metamap(mctx: &MCtx, global: &Ctx) -> MetaMap {
    let entries = mctx
        .0
        .iter()
        .enumerate()
        .map(|(m, decl)| Term::MVar { mvar: m, env: id_sub(&decl.params) })
        .collect();
    MetaMap {
        source: mctx.clone(),
        target: mctx.clone(),
        global: global.clone(),
        entries,
    }
}

/// Weaken a mapping across newly bound variables: each entry is renamed
/// so its parameter positions stay fixed and its global positions shift
/// by `|bound|`.
pub fn wk_metamap(map: &MetaMap, bound: &Ctx) -> MetaMap {
    if bound.is_empty() {
        return map.clone();
    }
    let entries = map
        .source
        .0
        .iter()
        .zip(&map.entries)
        .map(|(decl, entry)| {
            let rho = lift_ren(&decl.params, &inr_ren(bound, &map.global));
            ren(entry, &rho)
        })
        .collect();
    MetaMap {
        source: map.source.clone(),
        target: map.target.clone(),
        global: concat(bound, &map.global),
        entries,
    }
}

/// Apply a metasubstitution mapping to a term over the mapping's source
/// metavariable context, in context `global`.
///
/// Variables are fixed; operator nodes descend with a weakened mapping;
/// a metavariable occurrence becomes its replacement with the (recursively
/// metasubstituted) environment substituted for the parameters and the
/// global variables left alone.
pub fn msub(t: &Term, map: &MetaMap) -> Term {
    match t {
        Term::Var(v) => Term::Var(v.clone()),
        Term::Con { op, inst, args } => Term::Con {
            op: op.clone(),
            inst: inst.clone(),
            args: args
                .iter()
                .map(|a| {
                    let inner = wk_metamap(map, &a.bound);
                    crate::term::Arg { bound: a.bound.clone(), body: msub(&a.body, &inner) }
                })
                .collect(),
        },
        Term::MVar { mvar, env } => {
            let decl = &map.source.0[*mvar];
            let replacement = &map.entries[*mvar];
            // parameter entries first, then the identity on the globals
            let mut entries: Vec<Term> = env.entries.iter().map(|e| msub(e, map)).collect();
            entries.extend(id_sub(&map.global).entries);
            let s = Sub { source: concat(&decl.params, &map.global), entries };
            sub(replacement, &s, &map.global)
        }
    }
}

/// Sequential composition: apply `first`, then `second`. The entry for
/// `m` is `first[m]` metasubstituted by `second` weakened across `m`'s
/// parameters.
pub fn compose_metamaps(first: &MetaMap, second: &MetaMap) -> MetaMap {
    let entries = first
        .source
        .0
        .iter()
        .zip(&first.entries)
        .map(|(decl, entry)| msub(entry, &wk_metamap(second, &decl.params)))
        .collect();
    MetaMap {
        source: first.source.clone(),
        target: second.target.clone(),
        global: first.global.clone(),
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{parse_spec, Sort};
    use crate::term::{check, parse_term, MvarDecl, NamedCtx};

    const ARITH: &str = "
type
  N : 0-ary
  _=>_ : 2-ary | r30
term
  lam : a.b -> a => b
  add : N N -> N
  mul : N N -> N
  one : -> N
";

    fn nat() -> Sort {
        Sort::base("N")
    }

    fn setup() -> (crate::signature::Signature, MCtx, MCtx, Ctx, NamedCtx) {
        let sig = parse_spec(ARITH).unwrap();
        let source = MCtx(vec![
            MvarDecl { name: "a".into(), params: Ctx(vec![nat(), nat()]), sort: nat() },
            MvarDecl { name: "b".into(), params: Ctx(vec![nat()]), sort: nat() },
        ]);
        let target = MCtx(vec![MvarDecl {
            name: "c".into(),
            params: Ctx(vec![nat()]),
            sort: nat(),
        }]);
        let global = Ctx(vec![nat()]);
        let named: NamedCtx = vec![(Some("x".into()), nat())];
        (sig, source, target, global, named)
    }

    /// Replacing a two-parameter hole under a binder: environment entries
    /// are substituted for the parameters while the global variable keeps
    /// pointing past the new binder.
    #[test]
    fn worked_example_exact_tree() {
        let (sig, source, target, global, named) = setup();
        let nn = Sort::app("=>", vec![nat(), nat()]);
        let t = parse_term(&sig, &source, &named, "lam(y. a[add(x, one), b[y]])", Some(&nn))
            .unwrap();
        check(&sig, &source, &global, &t).unwrap();

        // a(m, n) -> mul(c(m), n), entry over [m, n, x]
        let a_entry = parse_term(
            &sig,
            &target,
            &vec![(None, nat()), (None, nat()), (Some("x".into()), nat())],
            "mul(c[x0], x1)",
            None,
        )
        .unwrap();
        // b(m) -> c(add(m, x)), entry over [m, x]
        let b_entry = parse_term(
            &sig,
            &target,
            &vec![(None, nat()), (Some("x".into()), nat())],
            "c[add(x0, x1)]",
            None,
        )
        .unwrap();
        let zeta =
            MetaMap::new(source.clone(), target.clone(), global.clone(), vec![a_entry, b_entry])
                .unwrap();

        let result = msub(&t, &zeta);
        let expected = parse_term(
            &sig,
            &target,
            &named,
            "lam(y. mul(c[add(x, one)], c[add(y, x)]))",
            Some(&nn),
        )
        .unwrap();
        assert_eq!(result, expected);
        // the substituted term stays well-formed at the same sort
        assert_eq!(
            check(&sig, &target, &global, &result).unwrap(),
            check(&sig, &source, &global, &t).unwrap()
        );
    }

    #[test]
    fn identity_mapping_entries() {
        let (_sig, source, _target, global, _named) = setup();
        let id = id_metamap(&source, &global);
        // entry for a two-parameter hole is the hole applied to x0, x1
        assert_eq!(
            id.entries[0],
            Term::MVar {
                mvar: 0,
                env: Sub {
                    source: Ctx(vec![nat(), nat()]),
                    entries: vec![Term::var(0, nat()), Term::var(1, nat())],
                }
            }
        );
    }

    #[test]
    fn variables_are_fixed_and_closed_entries_pass_through() {
        let (sig, source, target, global, _named) = setup();
        let v = Term::var(0, nat());
        let one = parse_term(&sig, &target, &vec![(None, nat())], "one", None).unwrap();
        let b_closed = parse_term(&sig, &target, &vec![(None, nat())], "one", None).unwrap();
        let a_closed = parse_term(
            &sig,
            &target,
            &vec![(None, nat()), (None, nat()), (None, nat())],
            "one",
            None,
        )
        .unwrap();
        let zeta = MetaMap::new(source, target, global, vec![a_closed, b_closed]).unwrap();
        assert_eq!(msub(&v, &zeta), v);
        // a hole with an empty environment degenerates to its entry
        let m = Term::MVar { mvar: 1, env: Sub { source: Ctx(vec![nat()]), entries: vec![v] } };
        // b takes one parameter; its closed entry ignores it
        assert_eq!(msub(&m, &zeta), one);
    }

    #[test]
    fn weakening_shifts_globals_only() {
        let (sig, source, target, global, _named) = setup();
        // entry for b over [m, x]: c[add(m, x)]
        let b_entry = parse_term(
            &sig,
            &target,
            &vec![(None, nat()), (Some("x".into()), nat())],
            "c[add(x0, x1)]",
            None,
        )
        .unwrap();
        let a_entry = parse_term(
            &sig,
            &target,
            &vec![(None, nat()), (None, nat()), (None, nat())],
            "one",
            None,
        )
        .unwrap();
        let zeta = MetaMap::new(source, target, global, vec![a_entry, b_entry]).unwrap();
        let wk = wk_metamap(&zeta, &Ctx(vec![nat()]));
        // x (index 1 past the parameter) moved to index 2
        let expected = parse_term(
            &sig,
            &wk.target,
            &vec![(None, nat()), (None, nat()), (Some("x".into()), nat())],
            "c[add(x0, x2)]",
            None,
        )
        .unwrap();
        assert_eq!(wk.entries[1], expected);
        // weakening by nothing is the identity
        assert_eq!(wk_metamap(&wk, &Ctx::empty()), wk);
    }
}
