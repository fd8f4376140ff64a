//! An environment-model evaluator and a deterministic call-by-value
//! small-step relation for the lambda-calculus corpus (`app`, `lam`,
//! `ze`, `su` over the base sort `N` and the arrow `=>`).
//!
//! The evaluator is the generic fold instantiated at the carrier of
//! environment functions, so it is compositional by construction; the
//! law suite checks that each reduction step preserves it.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use rand::Rng;
use thiserror::Error;

use crate::ctx::{Ctx, Var};
use crate::signature::Sort;
use crate::term::{Arg, Term};
use crate::traverse::{fold, sub1, MetaAlgebra};

/// A semantic value: a natural number at the base sort, a function at
/// arrow sorts. Functions carry a description for printing only.
#[derive(Clone)]
pub enum Value {
    Nat(u64),
    Fun { f: Rc<dyn Fn(&Value) -> Value>, desc: String },
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Fun { desc, .. } => write!(f, "<fun {desc}>"),
        }
    }
}

impl Value {
    pub fn apply(&self, arg: &Value) -> Value {
        match self {
            Value::Fun { f, .. } => f(arg),
            Value::Nat(n) => panic!("applied a number {n} as a function"),
        }
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Value::Nat(n) => Some(*n),
            Value::Fun { .. } => None,
        }
    }
}

/// The interpretation of a context: one value per variable, position `i`
/// interpreting de Bruijn index `i`.
pub type Env = Vec<Value>;

type SemFn = Rc<dyn Fn(&Env) -> Value>;

struct EnvAlgebra;

impl MetaAlgebra for EnvAlgebra {
    type Value = SemFn;

    fn on_con(&self, op: &str, _inst: &BTreeMap<String, Sort>, args: Vec<(Ctx, SemFn)>) -> SemFn {
        match op {
            "app" => {
                let f = args[0].1.clone();
                let a = args[1].1.clone();
                Rc::new(move |env| f(env).apply(&a(env)))
            }
            "lam" => {
                let body = args[0].1.clone();
                Rc::new(move |env: &Env| {
                    let env = env.clone();
                    let body = body.clone();
                    Value::Fun {
                        f: Rc::new(move |a: &Value| {
                            let mut inner = Vec::with_capacity(env.len() + 1);
                            inner.push(a.clone());
                            inner.extend(env.iter().cloned());
                            body(&inner)
                        }),
                        desc: "closure".to_string(),
                    }
                })
            }
            "ze" => Rc::new(|_| Value::Nat(0)),
            "su" => {
                let e = args[0].1.clone();
                Rc::new(move |env| match e(env) {
                    Value::Nat(n) => Value::Nat(n + 1),
                    v => panic!("su applied to {v:?}"),
                })
            }
            other => panic!("no semantics for operator `{other}`"),
        }
    }

    fn on_var(&self, v: &Var) -> SemFn {
        let i = v.index;
        Rc::new(move |env| env[i].clone())
    }

    fn on_mvar(&self, _mvar: usize, _env: Vec<SemFn>) -> SemFn {
        panic!("evaluation requires a term without metavariables")
    }
}

/// Interpret a checked term without metavariables in an environment
/// matching its context.
pub fn eval(t: &Term, env: &Env) -> Value {
    fold(&EnvAlgebra, t)(env)
}

/// Value terms: abstractions and numerals.
pub fn is_val(t: &Term) -> bool {
    match t {
        Term::Con { op, args, .. } => match op.as_str() {
            "lam" | "ze" => true,
            "su" => is_val(&args[0].body),
            _ => false,
        },
        _ => false,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("cannot step an open term (free variable {0})")]
    OpenTerm(usize),
    #[error("term is stuck: no reduction rule applies")]
    Stuck,
}

/// One deterministic call-by-value step: reduce the function position,
/// then the argument, then fire beta; reduce under `su`. Returns `None`
/// on values.
pub fn step(t: &Term) -> Result<Option<Term>, StepError> {
    match t {
        Term::Var(v) => Err(StepError::OpenTerm(v.index)),
        Term::MVar { .. } => Err(StepError::Stuck),
        Term::Con { op, inst, args } => match op.as_str() {
            "lam" | "ze" => Ok(None),
            "su" => match step(&args[0].body)? {
                Some(inner) => Ok(Some(Term::Con {
                    op: op.clone(),
                    inst: inst.clone(),
                    args: vec![Arg { bound: Ctx::empty(), body: inner }],
                })),
                None => Ok(None),
            },
            "app" => {
                let f = &args[0].body;
                let a = &args[1].body;
                if let Some(f2) = step(f)? {
                    let mut new_args = args.clone();
                    new_args[0].body = f2;
                    return Ok(Some(Term::Con {
                        op: op.clone(),
                        inst: inst.clone(),
                        args: new_args,
                    }));
                }
                if let Some(a2) = step(a)? {
                    let mut new_args = args.clone();
                    new_args[1].body = a2;
                    return Ok(Some(Term::Con {
                        op: op.clone(),
                        inst: inst.clone(),
                        args: new_args,
                    }));
                }
                match f {
                    Term::Con { op: fop, args: fargs, .. } if fop == "lam" && is_val(a) => {
                        let body_arg = &fargs[0];
                        let arg_sort = body_arg.bound.get(0).expect("lam binds one variable");
                        Ok(Some(sub1(a, arg_sort, &body_arg.body, &Ctx::empty())))
                    }
                    _ => Err(StepError::Stuck),
                }
            }
            _ => Err(StepError::Stuck),
        },
    }
}

pub struct MultistepResult {
    pub term: Term,
    pub steps: usize,
    pub reached_value: bool,
}

/// Iterate `step` at most `fuel` times.
pub fn multistep(t: &Term, fuel: usize) -> Result<MultistepResult, StepError> {
    let mut current = t.clone();
    for k in 0..fuel {
        match step(&current)? {
            Some(next) => current = next,
            None => return Ok(MultistepResult { term: current, steps: k, reached_value: true }),
        }
    }
    let reached = step(&current)?.is_none();
    Ok(MultistepResult { term: current, steps: fuel, reached_value: reached })
}

/// Sample a value of the given sort: numbers at `N`, simple functions
/// (constants, and successor-like shifts on `N => N`) at arrows.
pub fn sample_value(sort: &Sort, rng: &mut impl Rng) -> Value {
    if sort == &Sort::base("N") {
        return Value::Nat(rng.gen_range(0..20));
    }
    if sort.con == "=>" && sort.args.len() == 2 {
        let dom = sort.args[0].clone();
        let cod = sort.args[1].clone();
        if dom == Sort::base("N") && cod == Sort::base("N") && rng.gen_bool(0.5) {
            let k = rng.gen_range(0..10u64);
            return Value::Fun {
                f: Rc::new(move |v| match v {
                    Value::Nat(n) => Value::Nat(n + k),
                    other => other.clone(),
                }),
                desc: format!("add{k}"),
            };
        }
        let fixed = sample_value(&cod, rng);
        return Value::Fun { f: Rc::new(move |_| fixed.clone()), desc: "const".to_string() };
    }
    panic!("cannot sample a value at sort {sort:?}");
}

/// Compare values at a sort: exact at `N`, pointwise on sampled
/// arguments at arrows.
pub fn eq_value_at(sort: &Sort, a: &Value, b: &Value, rng: &mut impl Rng, samples: usize) -> bool {
    if sort == &Sort::base("N") {
        return a.as_nat() == b.as_nat();
    }
    if sort.con == "=>" && sort.args.len() == 2 {
        for _ in 0..samples {
            let arg = sample_value(&sort.args[0], rng);
            if !eq_value_at(&sort.args[1], &a.apply(&arg), &b.apply(&arg), rng, samples) {
                return false;
            }
        }
        return true;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_spec;
    use crate::term::{parse_term, MCtx};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const STLC: &str = "
type
  N : 0-ary
  _=>_ : 2-ary | r30
term
  app : (a => b) a -> b | _$_ l20
  lam : a.b -> a => b | λ_ r10
  ze : -> N
  su : N -> N
";

    fn nat() -> Sort {
        Sort::base("N")
    }

    fn arrow(a: Sort, b: Sort) -> Sort {
        Sort::app("=>", vec![a, b])
    }

    fn parse_closed(sig: &crate::signature::Signature, text: &str, sort: &Sort) -> Term {
        parse_term(sig, &MCtx::empty(), &vec![], text, Some(sort)).unwrap()
    }

    #[test]
    fn numerals_evaluate() {
        let sig = parse_spec(STLC).unwrap();
        let t = parse_closed(&sig, "su(ze)", &nat());
        assert_eq!(eval(&t, &vec![]).as_nat(), Some(1));
    }

    #[test]
    fn identity_application() {
        let sig = parse_spec(STLC).unwrap();
        let t = parse_closed(&sig, "(lam(x. x) : N => N) $ su(ze)", &nat());
        assert_eq!(eval(&t, &vec![]).as_nat(), Some(1));
    }

    #[test]
    fn k_combinator_projects_first() {
        let sig = parse_spec(STLC).unwrap();
        let k_sort = arrow(nat(), arrow(nat(), nat()));
        let k = parse_closed(&sig, "lam(x. lam(y. x))", &k_sort);
        let v = eval(&k, &vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let a = rng.gen_range(0..100u64);
            let b = rng.gen_range(0..100u64);
            let out = v.apply(&Value::Nat(a)).apply(&Value::Nat(b));
            assert_eq!(out.as_nat(), Some(a));
        }
    }

    #[test]
    fn values_do_not_step() {
        let sig = parse_spec(STLC).unwrap();
        let lam = parse_closed(&sig, "(lam(x. x) : N => N)", &arrow(nat(), nat()));
        assert!(is_val(&lam));
        assert_eq!(step(&lam).unwrap(), None);
        let numeral = parse_closed(&sig, "su(su(ze))", &nat());
        assert!(is_val(&numeral));
        assert_eq!(step(&numeral).unwrap(), None);
        let redex = parse_closed(&sig, "(lam(x. x) : N => N) $ ze", &nat());
        assert!(!is_val(&redex));
    }

    #[test]
    fn beta_step() {
        let sig = parse_spec(STLC).unwrap();
        let t = parse_closed(&sig, "(lam(x. x) : N => N) $ su(ze)", &nat());
        let s = step(&t).unwrap().unwrap();
        assert_eq!(s, parse_closed(&sig, "su(ze)", &nat()));
    }

    #[test]
    fn leftmost_outer_application_reduces_first() {
        let sig = parse_spec(STLC).unwrap();
        // ((λλ x1) ze) (su ze): the outer-left redex fires first
        let t =
            parse_closed(&sig, "(lam(x. lam(y. x)) : N => N => N) $ ze $ su(ze)", &nat());
        let s1 = step(&t).unwrap().unwrap();
        let expected = parse_closed(&sig, "(lam(y. ze) : N => N) $ su(ze)", &nat());
        assert_eq!(s1, expected);
        let r = multistep(&t, 10).unwrap();
        assert!(r.reached_value);
        assert_eq!(r.term, parse_closed(&sig, "ze", &nat()));
        assert!(r.steps <= 3);
        // fuel 0 returns the term unchanged
        let r0 = multistep(&t, 0).unwrap();
        assert_eq!(r0.term, t);
        assert!(!r0.reached_value);
    }

    #[test]
    fn open_terms_are_rejected() {
        assert!(matches!(step(&Term::var(0, nat())), Err(StepError::OpenTerm(0))));
    }
}
