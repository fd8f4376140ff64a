//! Well-formedness checking. `check` synthesises the sort of a term and
//! validates every structural invariant along the way, reporting failures
//! with a path into the term.

use std::fmt;

use thiserror::Error;

use crate::ctx::{concat, Ctx};
use crate::signature::{operator_arity, render_sort, Signature, Sort};
use crate::term::{MCtx, Term};

/// One step into a term: an operator argument or a metavariable
/// environment entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathSeg {
    Arg(usize),
    Env(usize),
}

/// A path from the root of a term to the node a diagnostic refers to,
/// displayed like `.args[0].env[1]`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TermPath(pub Vec<PathSeg>);

impl TermPath {
    pub fn root() -> TermPath {
        TermPath(Vec::new())
    }

    fn child(&self, seg: PathSeg) -> TermPath {
        let mut v = self.0.clone();
        v.push(seg);
        TermPath(v)
    }
}

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "<root>");
        }
        for seg in &self.0 {
            match seg {
                PathSeg::Arg(i) => write!(f, ".args[{i}]")?,
                PathSeg::Env(i) => write!(f, ".env[{i}]")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("unbound variable at {path}: index {index} in context of length {ctx_len}")]
    UnboundVariable { path: TermPath, index: usize, ctx_len: usize },
    #[error("unknown operator `{op}` at {path}")]
    UnknownOperator { path: TermPath, op: String },
    #[error("unknown metavariable #{mvar} at {path}")]
    UnknownMetavariable { path: TermPath, mvar: usize },
    #[error("sort mismatch at {path}: expected {expected}, found {found}")]
    SortMismatch { path: TermPath, expected: String, found: String },
    #[error("environment length mismatch at {path}: metavariable `{name}` takes {expected} parameters, environment has {found}")]
    EnvLengthMismatch { path: TermPath, name: String, expected: usize, found: usize },
    #[error("incomplete instantiation at {path}: sort variable `{var}` of `{op}` not instantiated")]
    IncompleteInstantiation { path: TermPath, op: String, var: String },
    #[error("argument count mismatch at {path}: `{op}` takes {expected} arguments, found {found}")]
    ArgCountMismatch { path: TermPath, op: String, expected: usize, found: usize },
    #[error("binder mismatch at {path}: argument {index} of `{op}` binds {expected} variables, found {found}")]
    BinderMismatch { path: TermPath, op: String, index: usize, expected: usize, found: usize },
}

/// Synthesise the sort of `t` in `(mctx, ctx)` and validate it fully.
pub fn check(sig: &Signature, mctx: &MCtx, ctx: &Ctx, t: &Term) -> Result<Sort, CheckError> {
    check_at(sig, mctx, ctx, t, &TermPath::root())
}

fn check_at(
    sig: &Signature,
    mctx: &MCtx,
    ctx: &Ctx,
    t: &Term,
    path: &TermPath,
) -> Result<Sort, CheckError> {
    match t {
        Term::Var(v) => {
            let declared = ctx.get(v.index).ok_or(CheckError::UnboundVariable {
                path: path.clone(),
                index: v.index,
                ctx_len: ctx.len(),
            })?;
            if declared != &v.sort {
                return Err(CheckError::SortMismatch {
                    path: path.clone(),
                    expected: render_sort(declared),
                    found: render_sort(&v.sort),
                });
            }
            Ok(v.sort.clone())
        }
        Term::MVar { mvar, env } => {
            let decl = mctx.get(*mvar).ok_or(CheckError::UnknownMetavariable {
                path: path.clone(),
                mvar: *mvar,
            })?;
            if env.entries.len() != decl.params.len() {
                return Err(CheckError::EnvLengthMismatch {
                    path: path.clone(),
                    name: decl.name.clone(),
                    expected: decl.params.len(),
                    found: env.entries.len(),
                });
            }
            for (i, (entry, want)) in env.entries.iter().zip(decl.params.iter()).enumerate() {
                let seg = path.child(PathSeg::Env(i));
                let got = check_at(sig, mctx, ctx, entry, &seg)?;
                if &got != want {
                    return Err(CheckError::SortMismatch {
                        path: seg,
                        expected: render_sort(want),
                        found: render_sort(&got),
                    });
                }
            }
            Ok(decl.sort.clone())
        }
        Term::Con { op, inst, args } => {
            let decl = sig.op(op).ok_or(CheckError::UnknownOperator {
                path: path.clone(),
                op: op.clone(),
            })?;
            for v in &decl.sortvars {
                if !inst.contains_key(v) {
                    return Err(CheckError::IncompleteInstantiation {
                        path: path.clone(),
                        op: op.clone(),
                        var: v.clone(),
                    });
                }
            }
            let (arity, result) = operator_arity(sig, op, inst).expect("covered instantiation");
            if args.len() != arity.len() {
                return Err(CheckError::ArgCountMismatch {
                    path: path.clone(),
                    op: op.clone(),
                    expected: arity.len(),
                    found: args.len(),
                });
            }
            for (i, (arg, (bound, body_sort))) in args.iter().zip(arity.iter()).enumerate() {
                let seg = path.child(PathSeg::Arg(i));
                if arg.bound.0 != *bound {
                    return Err(CheckError::BinderMismatch {
                        path: seg,
                        op: op.clone(),
                        index: i,
                        expected: bound.len(),
                        found: arg.bound.len(),
                    });
                }
                let inner = concat(&arg.bound, ctx);
                let got = check_at(sig, mctx, &inner, &arg.body, &seg)?;
                if &got != body_sort {
                    return Err(CheckError::SortMismatch {
                        path: seg,
                        expected: render_sort(body_sort),
                        found: render_sort(&got),
                    });
                }
            }
            Ok(result)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_spec;
    use crate::term::{Arg, MvarDecl, Sub, Term};
    use std::collections::BTreeMap;

    const STLC: &str = "
type
  N : 0-ary
  _=>_ : 2-ary | r30
term
  app : (a => b) a -> b | _$_ l20
  lam : a.b -> a => b | λ_ r10
";

    fn nat() -> Sort {
        Sort::base("N")
    }

    fn arrow(a: Sort, b: Sort) -> Sort {
        Sort::app("=>", vec![a, b])
    }

    fn nn_inst() -> BTreeMap<String, Sort> {
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), nat());
        m.insert("b".to_string(), nat());
        m
    }

    #[test]
    fn application_checks() {
        let sig = parse_spec(STLC).unwrap();
        let ctx = Ctx(vec![arrow(nat(), nat()), nat()]);
        let t = Term::con(
            "app",
            nn_inst(),
            vec![
                Arg { bound: Ctx::empty(), body: Term::var(0, arrow(nat(), nat())) },
                Arg { bound: Ctx::empty(), body: Term::var(1, nat()) },
            ],
        );
        assert_eq!(check(&sig, &MCtx::empty(), &ctx, &t).unwrap(), nat());
    }

    #[test]
    fn unbound_variable_reported_with_path() {
        let sig = parse_spec(STLC).unwrap();
        let ctx = Ctx(vec![nat()]);
        let t = Term::var(1, nat());
        match check(&sig, &MCtx::empty(), &ctx, &t) {
            Err(CheckError::UnboundVariable { index: 1, ctx_len: 1, .. }) => {}
            other => panic!("expected unbound variable, got {other:?}"),
        }
    }

    #[test]
    fn env_length_mismatch() {
        let sig = parse_spec(STLC).unwrap();
        let mctx = MCtx(vec![MvarDecl {
            name: "a".to_string(),
            params: Ctx(vec![nat(), nat()]),
            sort: nat(),
        }]);
        let ctx = Ctx(vec![nat()]);
        let t = Term::mvar(0, Sub { source: Ctx(vec![nat()]), entries: vec![Term::var(0, nat())] });
        match check(&sig, &mctx, &ctx, &t) {
            Err(CheckError::EnvLengthMismatch { expected: 2, found: 1, .. }) => {}
            other => panic!("expected env length mismatch, got {other:?}"),
        }
    }

    #[test]
    fn unknown_operator_and_paths() {
        let sig = parse_spec(STLC).unwrap();
        let ctx = Ctx(vec![arrow(nat(), nat()), nat()]);
        // bury the bad node inside an application argument
        let bad = Term::con("mystery", BTreeMap::new(), vec![]);
        let t = Term::con(
            "app",
            nn_inst(),
            vec![
                Arg { bound: Ctx::empty(), body: Term::var(0, arrow(nat(), nat())) },
                Arg { bound: Ctx::empty(), body: bad },
            ],
        );
        match check(&sig, &MCtx::empty(), &ctx, &t) {
            Err(CheckError::UnknownOperator { op, path }) => {
                assert_eq!(op, "mystery");
                assert_eq!(path.to_string(), ".args[1]");
            }
            other => panic!("expected unknown operator, got {other:?}"),
        }
    }

    #[test]
    fn wrong_sort_argument() {
        let sig = parse_spec(STLC).unwrap();
        let ctx = Ctx(vec![nat(), nat()]);
        // app applied to two naturals: function position has wrong sort
        let t = Term::con(
            "app",
            nn_inst(),
            vec![
                Arg { bound: Ctx::empty(), body: Term::var(0, nat()) },
                Arg { bound: Ctx::empty(), body: Term::var(1, nat()) },
            ],
        );
        match check(&sig, &MCtx::empty(), &ctx, &t) {
            Err(CheckError::SortMismatch { path, .. }) => {
                assert_eq!(path.to_string(), ".args[0]");
            }
            other => panic!("expected sort mismatch, got {other:?}"),
        }
    }
}
