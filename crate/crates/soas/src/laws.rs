//! The law registry: every metatheoretic equation the engine is supposed
//! to satisfy, as a named check behind a common trait. Checks are
//! selected by name at runtime (`laws --only <name>`) and each case is
//! replayable from `(master seed, law name, case index)`.
//!
//! The equations cover the renaming laws (identity and composition), the
//! substitution monoid laws (units and associativity), the four
//! renaming/substitution fusion laws, sort preservation, fold uniqueness
//! and its homomorphism property, and the metasubstitution laws
//! (identity, the hole-occurrence equation, structural commutation,
//! preservation, and sequential composition).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ctx::{concat, id_ren, Ctx};
use crate::metasub::{compose_metamaps, id_metamap, msub, wk_metamap, MetaMap};
use crate::signature::Signature;
use crate::term::{check, id_sub, lookup, print_term, tabulate, MCtx, Sub, Term};
use crate::traverse::gen::{gen_ctx, gen_mctx, gen_renaming, gen_sort, gen_sub, gen_term, GenError};
use crate::traverse::{fold, ren, sub, SizeAlgebra, SyntacticAlgebra};

/// Shared inputs for every law case.
pub struct LawEnv {
    pub sig: Signature,
    pub budget: usize,
}

/// One randomized equation check. `run_case` draws its own inputs from
/// the RNG and reports a failure as a printable description of the
/// inputs and the two differing sides.
pub trait Law: Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String>;
}

/// All laws, in reporting order.
pub fn registry() -> Vec<Box<dyn Law>> {
    vec![
        Box::new(Counit),
        Box::new(Comult),
        Box::new(LeftUnit),
        Box::new(RightUnit),
        Box::new(Assoc),
        Box::new(RenAsSub),
        Box::new(SubRenFusion),
        Box::new(RenSubFusion),
        Box::new(Preservation),
        Box::new(FoldIdentity),
        Box::new(FoldHomomorphism),
        Box::new(MsubIdentity),
        Box::new(MsubMvar),
        Box::new(MsubHomomorphism),
        Box::new(MsubPreservation),
        Box::new(MsubKleisli),
    ]
}

pub fn law_by_name(name: &str) -> Option<Box<dyn Law>> {
    registry().into_iter().find(|l| l.name() == name)
}

/// Per-case seed: a stable FNV-1a mix of the master seed, law name, and
/// case index, so any failure replays independently of the others.
pub fn derive_seed(master: u64, law: &str, index: usize) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    };
    for b in master.to_le_bytes() {
        eat(b);
    }
    for b in law.bytes() {
        eat(b);
    }
    for b in (index as u64).to_le_bytes() {
        eat(b);
    }
    h
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub law: String,
    pub case_index: usize,
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct LawReport {
    pub name: String,
    pub passed: usize,
    pub cases: usize,
    pub counterexample: Option<Counterexample>,
}

/// Run one law for `cases` cases, stopping at the first failure.
pub fn run_law(law: &dyn Law, env: &LawEnv, cases: usize, master_seed: u64) -> LawReport {
    for index in 0..cases {
        let seed = derive_seed(master_seed, law.name(), index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Err(detail) = law.run_case(env, &mut rng) {
            return LawReport {
                name: law.name().to_string(),
                passed: index,
                cases,
                counterexample: Some(Counterexample {
                    law: law.name().to_string(),
                    case_index: index,
                    seed,
                    detail,
                }),
            };
        }
    }
    LawReport { name: law.name().to_string(), passed: cases, cases, counterexample: None }
}

/// Re-run a single case of a law (the replay path).
pub fn replay(law: &dyn Law, env: &LawEnv, master_seed: u64, index: usize) -> Result<(), String> {
    let seed = derive_seed(master_seed, law.name(), index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    law.run_case(env, &mut rng)
}

// ---------------------------------------------------------------------------
// Case generation helpers
// ---------------------------------------------------------------------------

/// A random well-formed term with its setting. Degenerate shapes (empty
/// contexts, empty metavariable contexts) are included on purpose.
fn draw_term(env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(MCtx, Ctx, Term), GenError> {
    for _ in 0..20 {
        let mctx = gen_mctx(&env.sig, rng, 2);
        let ctx = gen_ctx(&env.sig, rng, 3);
        let sort = gen_sort(&env.sig, rng, 2);
        match gen_term(&env.sig, &mctx, &ctx, &sort, env.budget, rng) {
            Ok(t) => return Ok((mctx, ctx, t)),
            Err(_) => continue,
        }
    }
    Err(GenError::RetriesExhausted(20))
}

fn gerr(e: GenError) -> String {
    format!("input generation failed: {e}")
}

fn draw_metamap(
    env: &LawEnv,
    rng: &mut ChaCha8Rng,
    source: &MCtx,
    global: &Ctx,
    budget: usize,
) -> Result<MetaMap, GenError> {
    'outer: for _ in 0..20 {
        let target = gen_mctx(&env.sig, rng, 2);
        let mut entries = Vec::with_capacity(source.len());
        for decl in &source.0 {
            let inner = concat(&decl.params, global);
            match gen_term(&env.sig, &target, &inner, &decl.sort, budget, rng) {
                Ok(t) => entries.push(t),
                Err(_) => continue 'outer,
            }
        }
        return Ok(MetaMap::new(source.clone(), target, global.clone(), entries)
            .expect("entries cover the source"));
    }
    Err(GenError::RetriesExhausted(20))
}

fn show(env: &LawEnv, mctx: &MCtx, t: &Term) -> String {
    print_term(&env.sig, mctx, &[], t)
}

fn expect_eq(
    env: &LawEnv,
    mctx: &MCtx,
    label: &str,
    lhs: &Term,
    rhs: &Term,
    inputs: &str,
) -> Result<(), String> {
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!(
            "{label}\n  left:  {}\n  right: {}\n  on {}",
            show(env, mctx, lhs),
            show(env, mctx, rhs),
            inputs
        ))
    }
}

fn compose_subs(first: &Sub, second: &Sub, second_target: &Ctx) -> Sub {
    Sub {
        source: first.source.clone(),
        entries: first.entries.iter().map(|e| sub(e, second, second_target)).collect(),
    }
}

// ---------------------------------------------------------------------------
// Renaming laws
// ---------------------------------------------------------------------------

struct Counit;

impl Law for Counit {
    fn name(&self) -> &'static str {
        "counit"
    }
    fn summary(&self) -> &'static str {
        "renaming along the identity is the identity"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let out = ren(&t, &id_ren(&ctx));
        expect_eq(env, &mctx, "ren(t, id) != t", &out, &t, &show(env, &mctx, &t))
    }
}

struct Comult;

impl Law for Comult {
    fn name(&self) -> &'static str {
        "comult"
    }
    fn summary(&self) -> &'static str {
        "successive renamings compose"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let rho = gen_renaming(&env.sig, rng, &ctx);
        let varrho = gen_renaming(&env.sig, rng, &rho.target);
        let composed = crate::ctx::compose_ren(&rho, &varrho).expect("matching contexts");
        let lhs = ren(&ren(&t, &rho), &varrho);
        let rhs = ren(&t, &composed);
        expect_eq(env, &mctx, "ren(ren(t,r),q) != ren(t, q.r)", &lhs, &rhs, &show(env, &mctx, &t))
    }
}

// ---------------------------------------------------------------------------
// Substitution monoid laws
// ---------------------------------------------------------------------------

struct LeftUnit;

impl Law for LeftUnit {
    fn name(&self) -> &'static str {
        "lunit"
    }
    fn summary(&self) -> &'static str {
        "substitution on a variable is lookup"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        // a random context with at least one variable
        for _ in 0..20 {
            let mctx = gen_mctx(&env.sig, rng, 2);
            let mut ctx = gen_ctx(&env.sig, rng, 3);
            if ctx.is_empty() {
                ctx = Ctx(vec![gen_sort(&env.sig, rng, 2)]);
            }
            let (sigma, target) = match gen_sub(&env.sig, &mctx, rng, &ctx, env.budget) {
                Ok(x) => x,
                Err(_) => continue,
            };
            let i = rng.gen_range(0..ctx.len());
            let v = crate::ctx::Var::new(i, ctx.get(i).unwrap().clone());
            let lhs = sub(&Term::Var(v.clone()), &sigma, &target);
            let rhs = lookup(&sigma, &v).expect("variable in range").clone();
            return expect_eq(
                env,
                &mctx,
                "sub(var, s) != lookup(s, var)",
                &lhs,
                &rhs,
                "variable case",
            );
        }
        Err(gerr(GenError::RetriesExhausted(20)))
    }
}

struct RightUnit;

impl Law for RightUnit {
    fn name(&self) -> &'static str {
        "runit"
    }
    fn summary(&self) -> &'static str {
        "substituting variables for themselves is the identity"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let out = sub(&t, &id_sub(&ctx), &ctx);
        expect_eq(env, &mctx, "sub(t, id) != t", &out, &t, &show(env, &mctx, &t))
    }
}

struct Assoc;

impl Law for Assoc {
    fn name(&self) -> &'static str {
        "assoc"
    }
    fn summary(&self) -> &'static str {
        "successive substitutions compose"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let (sigma, mid) = gen_sub(&env.sig, &mctx, rng, &ctx, env.budget).map_err(gerr)?;
        let (varsigma, target) = gen_sub(&env.sig, &mctx, rng, &mid, env.budget).map_err(gerr)?;
        let lhs = sub(&sub(&t, &sigma, &mid), &varsigma, &target);
        let composed = compose_subs(&sigma, &varsigma, &target);
        let rhs = sub(&t, &composed, &target);
        expect_eq(env, &mctx, "sub(sub(t,s),q) != sub(t, s;q)", &lhs, &rhs, &show(env, &mctx, &t))
    }
}

// ---------------------------------------------------------------------------
// Fusion laws
// ---------------------------------------------------------------------------

struct RenAsSub;

impl Law for RenAsSub {
    fn name(&self) -> &'static str {
        "ren-as-sub"
    }
    fn summary(&self) -> &'static str {
        "renaming is substitution of variables"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let rho = gen_renaming(&env.sig, rng, &ctx);
        let as_sub = tabulate(|v| Term::var(rho.apply(v.index), v.sort.clone()), &ctx);
        let lhs = ren(&t, &rho);
        let rhs = sub(&t, &as_sub, &rho.target);
        expect_eq(env, &mctx, "ren(t,r) != sub(t, var.r)", &lhs, &rhs, &show(env, &mctx, &t))
    }
}

struct SubRenFusion;

impl Law for SubRenFusion {
    fn name(&self) -> &'static str {
        "sub-ren-fusion"
    }
    fn summary(&self) -> &'static str {
        "substitution after renaming fuses into one substitution"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let rho = gen_renaming(&env.sig, rng, &ctx);
        let (sigma, target) =
            gen_sub(&env.sig, &mctx, rng, &rho.target, env.budget).map_err(gerr)?;
        let lhs = sub(&ren(&t, &rho), &sigma, &target);
        let fused = tabulate(
            |v| {
                let w = crate::ctx::Var::new(rho.apply(v.index), v.sort.clone());
                lookup(&sigma, &w).expect("in range").clone()
            },
            &ctx,
        );
        let rhs = sub(&t, &fused, &target);
        expect_eq(env, &mctx, "sub(ren(t,r),s) != sub(t, s.r)", &lhs, &rhs, &show(env, &mctx, &t))
    }
}

struct RenSubFusion;

impl Law for RenSubFusion {
    fn name(&self) -> &'static str {
        "ren-sub-fusion"
    }
    fn summary(&self) -> &'static str {
        "renaming after substitution fuses into one substitution"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let (sigma, mid) = gen_sub(&env.sig, &mctx, rng, &ctx, env.budget).map_err(gerr)?;
        let rho = gen_renaming(&env.sig, rng, &mid);
        let lhs = ren(&sub(&t, &sigma, &mid), &rho);
        let mapped = Sub {
            source: sigma.source.clone(),
            entries: sigma.entries.iter().map(|e| ren(e, &rho)).collect(),
        };
        let rhs = sub(&t, &mapped, &rho.target);
        expect_eq(env, &mctx, "ren(sub(t,s),r) != sub(t, r.s)", &lhs, &rhs, &show(env, &mctx, &t))
    }
}

struct Preservation;

impl Law for Preservation {
    fn name(&self) -> &'static str {
        "preservation"
    }
    fn summary(&self) -> &'static str {
        "substitution preserves the sort"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let before = check(&env.sig, &mctx, &ctx, &t).map_err(|e| e.to_string())?;
        let (sigma, target) = gen_sub(&env.sig, &mctx, rng, &ctx, env.budget).map_err(gerr)?;
        let out = sub(&t, &sigma, &target);
        let after = check(&env.sig, &mctx, &target, &out)
            .map_err(|e| format!("substituted term fails to check: {e}"))?;
        if before == after {
            Ok(())
        } else {
            Err(format!("sort changed from {before:?} to {after:?}"))
        }
    }
}

// ---------------------------------------------------------------------------
// Fold laws
// ---------------------------------------------------------------------------

struct FoldIdentity;

impl Law for FoldIdentity {
    fn name(&self) -> &'static str {
        "fold-identity"
    }
    fn summary(&self) -> &'static str {
        "the fold with the syntactic algebra rebuilds the term"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, _ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let out = fold(&SyntacticAlgebra { mctx: &mctx }, &t);
        expect_eq(env, &mctx, "fold(syntactic, t) != t", &out, &t, &show(env, &mctx, &t))
    }
}

fn direct_size(t: &Term) -> usize {
    match t {
        Term::Var(_) => 1,
        Term::MVar { env, .. } => 1 + env.entries.iter().map(direct_size).sum::<usize>(),
        Term::Con { args, .. } => 1 + args.iter().map(|a| direct_size(&a.body)).sum::<usize>(),
    }
}

struct FoldHomomorphism;

impl Law for FoldHomomorphism {
    fn name(&self) -> &'static str {
        "fold-homomorphism"
    }
    fn summary(&self) -> &'static str {
        "the fold agrees with direct structural recursion"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, _ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let via_fold = fold(&SizeAlgebra, &t);
        let direct = direct_size(&t);
        if via_fold == direct {
            Ok(())
        } else {
            Err(format!("fold size {via_fold} != direct size {direct} on {}", show(env, &mctx, &t)))
        }
    }
}

// ---------------------------------------------------------------------------
// Metasubstitution laws
// ---------------------------------------------------------------------------

struct MsubIdentity;

impl Law for MsubIdentity {
    fn name(&self) -> &'static str {
        "msub-identity"
    }
    fn summary(&self) -> &'static str {
        "the identity mapping leaves terms unchanged"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let out = msub(&t, &id_metamap(&mctx, &ctx));
        expect_eq(env, &mctx, "msub(t, id) != t", &out, &t, &show(env, &mctx, &t))
    }
}

struct MsubMvar;

impl Law for MsubMvar {
    fn name(&self) -> &'static str {
        "msub-mvar"
    }
    fn summary(&self) -> &'static str {
        "a hole occurrence becomes its entry with the environment substituted"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        // a metavariable occurrence with a random environment
        for _ in 0..20 {
            let mut mctx = gen_mctx(&env.sig, rng, 2);
            if mctx.is_empty() {
                let sort = gen_sort(&env.sig, rng, 2);
                mctx = MCtx(vec![crate::term::MvarDecl {
                    name: "m0".into(),
                    params: gen_ctx(&env.sig, rng, 2),
                    sort,
                }]);
            }
            let ctx = gen_ctx(&env.sig, rng, 2);
            let m = rng.gen_range(0..mctx.len());
            let decl = mctx.get(m).unwrap().clone();
            let mut entries = Vec::new();
            let mut ok = true;
            for p in decl.params.iter() {
                match gen_term(&env.sig, &mctx, &ctx, p, env.budget / 2 + 1, rng) {
                    Ok(t) => entries.push(t),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let envsub = Sub { source: decl.params.clone(), entries };
            let occurrence = Term::mvar(m, envsub.clone());
            let zeta = match draw_metamap(env, rng, &mctx, &ctx, env.budget / 2 + 1) {
                Ok(z) => z,
                Err(_) => continue,
            };
            let lhs = msub(&occurrence, &zeta);
            // independent route: substitute the metasubstituted
            // environment entries, then the identity on the globals
            let mut sub_entries: Vec<Term> =
                envsub.entries.iter().map(|e| msub(e, &zeta)).collect();
            sub_entries.extend(id_sub(&ctx).entries);
            let s = Sub { source: concat(&decl.params, &ctx), entries: sub_entries };
            let rhs = sub(zeta.entry(m).expect("entry"), &s, &ctx);
            return expect_eq(
                env,
                &zeta.target,
                "msub(mvar) != sub(entry, msub(env) + id)",
                &lhs,
                &rhs,
                "hole occurrence",
            );
        }
        Err(gerr(GenError::RetriesExhausted(20)))
    }
}

struct MsubHomomorphism;

impl Law for MsubHomomorphism {
    fn name(&self) -> &'static str {
        "msub-homomorphism"
    }
    fn summary(&self) -> &'static str {
        "the mapping commutes with operators and fixes variables"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let zeta = draw_metamap(env, rng, &mctx, &ctx, env.budget / 2 + 1).map_err(gerr)?;
        match &t {
            Term::Var(_) => {
                let out = msub(&t, &zeta);
                expect_eq(env, &zeta.target, "msub(var) != var", &out, &t, "variable case")
            }
            Term::Con { op, inst, args } => {
                let lhs = msub(&t, &zeta);
                let rhs = Term::Con {
                    op: op.clone(),
                    inst: inst.clone(),
                    args: args
                        .iter()
                        .map(|a| crate::term::Arg {
                            bound: a.bound.clone(),
                            body: msub(&a.body, &wk_metamap(&zeta, &a.bound)),
                        })
                        .collect(),
                };
                expect_eq(
                    env,
                    &zeta.target,
                    "msub does not commute with the operator node",
                    &lhs,
                    &rhs,
                    &show(env, &mctx, &t),
                )
            }
            Term::MVar { .. } => Ok(()), // covered by msub-mvar
        }
    }
}

struct MsubPreservation;

impl Law for MsubPreservation {
    fn name(&self) -> &'static str {
        "msub-preservation"
    }
    fn summary(&self) -> &'static str {
        "metasubstitution preserves sort and context"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
        let before = check(&env.sig, &mctx, &ctx, &t).map_err(|e| e.to_string())?;
        let zeta = draw_metamap(env, rng, &mctx, &ctx, env.budget / 2 + 1).map_err(gerr)?;
        let out = msub(&t, &zeta);
        let after = check(&env.sig, &zeta.target, &ctx, &out)
            .map_err(|e| format!("metasubstituted term fails to check: {e}"))?;
        if before == after {
            Ok(())
        } else {
            Err(format!("sort changed from {before:?} to {after:?}"))
        }
    }
}

struct MsubKleisli;

impl Law for MsubKleisli {
    fn name(&self) -> &'static str {
        "msub-kleisli"
    }
    fn summary(&self) -> &'static str {
        "two mappings in sequence equal their composite"
    }
    fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
        let budget = env.budget.min(10);
        let (mctx, ctx, t) = {
            let mut out = None;
            for _ in 0..20 {
                let mctx = gen_mctx(&env.sig, rng, 2);
                let ctx = gen_ctx(&env.sig, rng, 2);
                let sort = gen_sort(&env.sig, rng, 2);
                if let Ok(t) = gen_term(&env.sig, &mctx, &ctx, &sort, budget, rng) {
                    out = Some((mctx, ctx, t));
                    break;
                }
            }
            out.ok_or_else(|| gerr(GenError::RetriesExhausted(20)))?
        };
        let zeta = draw_metamap(env, rng, &mctx, &ctx, budget).map_err(gerr)?;
        let xi = draw_metamap(env, rng, &zeta.target, &ctx, budget).map_err(gerr)?;
        let lhs = msub(&msub(&t, &zeta), &xi);
        let composed = compose_metamaps(&zeta, &xi);
        let rhs = msub(&t, &composed);
        expect_eq(
            env,
            &xi.target,
            "msub(msub(t, z), x) != msub(t, z;x)",
            &lhs,
            &rhs,
            &show(env, &mctx, &t),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_spec;

    fn corpus(name: &str) -> String {
        std::fs::read_to_string(format!("{}/corpus/{}", env!("CARGO_MANIFEST_DIR"), name)).unwrap()
    }

    #[test]
    fn every_law_passes_on_both_corpora() {
        for file in ["stlc.soas", "pd.soas"] {
            let sig = parse_spec(&corpus(file)).unwrap();
            let env = LawEnv { sig, budget: 12 };
            for law in registry() {
                let report = run_law(law.as_ref(), &env, 60, 7);
                assert!(
                    report.counterexample.is_none(),
                    "{file}: law {} failed: {:?}",
                    law.name(),
                    report.counterexample
                );
            }
        }
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a = derive_seed(42, "counit", 0);
        let b = derive_seed(42, "counit", 0);
        let c = derive_seed(42, "counit", 1);
        let d = derive_seed(42, "comult", 0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn registry_names_are_unique_and_addressable() {
        let names: Vec<_> = registry().iter().map(|l| l.name().to_string()).collect();
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(names.len(), dedup.len());
        for n in &names {
            assert!(law_by_name(n).is_some());
        }
    }

    #[test]
    fn a_broken_equation_is_caught() {
        // sanity check on the machinery itself: a law comparing a term
        // against its weakened version must fail quickly
        struct Broken;
        impl Law for Broken {
            fn name(&self) -> &'static str {
                "broken"
            }
            fn summary(&self) -> &'static str {
                "intentionally false"
            }
            fn run_case(&self, env: &LawEnv, rng: &mut ChaCha8Rng) -> Result<(), String> {
                let (mctx, ctx, t) = draw_term(env, rng).map_err(gerr)?;
                let pad = Ctx(vec![gen_sort(&env.sig, rng, 1)]);
                let weakened = crate::traverse::wkr(&t, &pad, &ctx);
                expect_eq(env, &mctx, "t != wkr(t)", &t, &weakened, "broken law")
            }
        }
        let sig = parse_spec(&corpus("pd.soas")).unwrap();
        let env = LawEnv { sig, budget: 8 };
        let report = run_law(&Broken, &env, 200, 3);
        assert!(report.counterexample.is_some());
    }
}
