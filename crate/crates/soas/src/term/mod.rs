//! The signature-generic term tree: variables, parametrised metavariables
//! with first-order environments, and operator nodes carrying explicit
//! sort instantiations.
//!
//! Terms are nameless; concrete names exist only in the parser and
//! printer. Structural equality on the tree is α-equivalence, and the
//! instantiation map of an operator node is kept canonically ordered by
//! sort-variable name so that derived equality is the intended one.

mod check;
mod parse;
mod print;

pub use check::{check, CheckError, PathSeg, TermPath};
pub use parse::{parse_term, parse_term_at, NamedCtx, TermParseError};
pub use print::print_term;

use std::collections::BTreeMap;

use crate::ctx::{Ctx, Var};
use crate::signature::Sort;

/// A metavariable declaration: a name, the context of its parameters
/// (index 0 = first parameter), and its sort.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvarDecl {
    pub name: String,
    pub params: Ctx,
    pub sort: Sort,
}

/// An ordered metavariable context with unique names.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MCtx(pub Vec<MvarDecl>);

impl MCtx {
    pub fn empty() -> MCtx {
        MCtx(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&MvarDecl> {
        self.0.get(i)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|d| d.name == name)
    }

    /// Extend with one declaration, returning the new index.
    pub fn extended(&self, decl: MvarDecl) -> (MCtx, usize) {
        let mut v = self.0.clone();
        v.push(decl);
        let idx = v.len() - 1;
        (MCtx(v), idx)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(Var),
    /// A metavariable occurrence: an index into the ambient metavariable
    /// context and an environment filling its parameters.
    MVar { mvar: usize, env: Sub },
    /// An operator node with its sort-variable instantiation.
    Con { op: String, inst: BTreeMap<String, Sort>, args: Vec<Arg> },
}

/// One operator argument: the context its binders introduce (index 0 =
/// innermost binder) and the body, well-formed in `concat(bound, outer)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arg {
    pub bound: Ctx,
    pub body: Term,
}

/// A first-order simultaneous substitution: one term per variable of the
/// source context, in index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sub {
    pub source: Ctx,
    pub entries: Vec<Term>,
}

impl Term {
    pub fn var(index: usize, sort: Sort) -> Term {
        Term::Var(Var::new(index, sort))
    }

    pub fn mvar(mvar: usize, env: Sub) -> Term {
        Term::MVar { mvar, env }
    }

    pub fn con(op: impl Into<String>, inst: BTreeMap<String, Sort>, args: Vec<Arg>) -> Term {
        Term::Con { op: op.into(), inst, args }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::MVar { env, .. } => 1 + env.entries.iter().map(Term::node_count).sum::<usize>(),
            Term::Con { args, .. } => {
                1 + args.iter().map(|a| a.body.node_count()).sum::<usize>()
            }
        }
    }
}

impl Sub {
    pub fn empty() -> Sub {
        Sub { source: Ctx::empty(), entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Structural equality; on de Bruijn trees this is α-equivalence.
pub fn eq_term(a: &Term, b: &Term) -> bool {
    a == b
}

/// Look up the entry of a substitution at a variable of its source.
pub fn lookup<'a>(sub: &'a Sub, v: &Var) -> Result<&'a Term, CheckError> {
    sub.entries.get(v.index).ok_or_else(|| CheckError::UnboundVariable {
        path: TermPath::root(),
        index: v.index,
        ctx_len: sub.entries.len(),
    })
}

/// Materialise a substitution from a per-variable producer over `source`.
pub fn tabulate(mut f: impl FnMut(Var) -> Term, source: &Ctx) -> Sub {
    let entries = source
        .iter()
        .enumerate()
        .map(|(i, s)| f(Var::new(i, s.clone())))
        .collect();
    Sub { source: source.clone(), entries }
}

/// The identity substitution on a context.
pub fn id_sub(ctx: &Ctx) -> Sub {
    tabulate(Term::Var, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Sort;

    fn nat() -> Sort {
        Sort::base("N")
    }

    #[test]
    fn lookup_tabulate_inverse() {
        let ctx = Ctx(vec![nat(), Sort::star(), nat()]);
        let sub = tabulate(Term::Var, &ctx);
        for (i, s) in ctx.iter().enumerate() {
            let v = Var::new(i, s.clone());
            assert_eq!(lookup(&sub, &v).unwrap(), &Term::Var(v.clone()));
        }
        // tabulate . lookup = id on substitutions
        let again = tabulate(
            |v| lookup(&sub, &v).unwrap().clone(),
            &ctx,
        );
        assert_eq!(again, sub);
        // lookup on an empty substitution fails
        assert!(lookup(&Sub::empty(), &Var::new(0, nat())).is_err());
    }

    #[test]
    fn alpha_equality_is_structural() {
        // λx.x and λy.y are the same de Bruijn tree
        let body = |_: &str| Arg { bound: Ctx(vec![nat()]), body: Term::var(0, nat()) };
        let mut inst = BTreeMap::new();
        inst.insert("a".to_string(), nat());
        inst.insert("b".to_string(), nat());
        let t1 = Term::con("lam", inst.clone(), vec![body("x")]);
        let t2 = Term::con("lam", inst, vec![body("y")]);
        assert!(eq_term(&t1, &t2));
        assert!(!eq_term(&Term::var(0, nat()), &Term::var(1, nat())));
    }
}
