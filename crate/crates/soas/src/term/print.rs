//! Canonical printing. Output re-parses to the same tree: declared
//! notations are used with minimal parenthesisation, bound variables are
//! rendered `xK` by de Bruijn index, and a `(t : sort)` ascription is
//! inserted exactly where a bottom-up inference pass would need one.

use crate::signature::{
    instantiate, render_sort_with, Fixity, OperatorDecl, Placement, Signature, SortExpr,
};
use crate::term::{MCtx, Term};

/// Print a term in the given named context (index 0 = most recent).
/// `t` must be well-formed; printing is total on checked terms.
pub fn print_term(sig: &Signature, mctx: &MCtx, names: &[Option<String>], t: &Term) -> String {
    let mut stack: Vec<Option<String>> = names.to_vec();
    print_at(sig, mctx, &mut stack, t, 0, false)
}

fn var_name(stack: &[Option<String>], index: usize) -> String {
    if let Some(Some(n)) = stack.get(index) {
        // only use the name when it resolves back to this index
        if resolves_to(stack, n) == Some(index) {
            return n.clone();
        }
    }
    format!("x{index}")
}

fn resolves_to(stack: &[Option<String>], name: &str) -> Option<usize> {
    stack.iter().position(|n| n.as_deref() == Some(name))
}

/// `level` is the minimum precedence this position accepts; weaker
/// notations get parenthesised. `known` says whether a re-parse at this
/// position would have the node's sort available top-down.
fn print_at(
    sig: &Signature,
    mctx: &MCtx,
    stack: &mut Vec<Option<String>>,
    t: &Term,
    level: u32,
    known: bool,
) -> String {
    match t {
        Term::Var(v) => var_name(stack, v.index),
        Term::MVar { mvar, env } => {
            let decl = mctx.get(*mvar).expect("metavariable in scope");
            if env.entries.is_empty() {
                // force the `[]` form when a variable shadows the name
                if resolves_to(stack, &decl.name).is_some() {
                    return format!("{}[]", decl.name);
                }
                return decl.name.clone();
            }
            let parts: Vec<String> = env
                .entries
                .iter()
                .map(|e| print_at(sig, mctx, stack, e, 0, true))
                .collect();
            format!("{}[{}]", decl.name, parts.join(", "))
        }
        Term::Con { op, inst, args } => {
            let decl = sig.op(op).expect("operator declared").clone();
            let (arg_known, needs_ascription) = plan_inference(&decl, known);
            let rendered =
                render_con(sig, mctx, stack, &decl, args, &arg_known, level, needs_ascription);
            if needs_ascription {
                let sort = instantiate(&decl.result, inst).expect("checked term");
                format!("({} : {})", rendered, render_sort_with(sig, &sort))
            } else {
                rendered
            }
        }
    }
}

/// Replay the parser's left-to-right inference to decide which argument
/// positions see their sort top-down and whether this node needs an
/// ascription for its sort variables to be determined.
fn plan_inference(decl: &OperatorDecl, known: bool) -> (Vec<bool>, bool) {
    let simulate = |seeded: bool| -> Option<Vec<bool>> {
        let mut determined: Vec<String> = Vec::new();
        if seeded {
            determined.extend(decl.result.vars());
        }
        let covered = |e: &SortExpr, det: &[String]| e.vars().iter().all(|v| det.contains(v));
        let mut arg_known = Vec::with_capacity(decl.args.len());
        for ba in &decl.args {
            for b in &ba.bound {
                if !covered(b, &determined) {
                    return None;
                }
            }
            arg_known.push(covered(&ba.body, &determined));
            for v in ba.body.vars() {
                if !determined.contains(&v) {
                    determined.push(v);
                }
            }
        }
        if decl.sortvars.iter().all(|v| determined.contains(v)) {
            Some(arg_known)
        } else {
            None
        }
    };
    if let Some(plan) = simulate(known) {
        return (plan, false);
    }
    match simulate(true) {
        Some(plan) => (plan, true),
        // not even an ascription determines everything; print without
        None => (vec![known; decl.args.len()], false),
    }
}

#[allow(clippy::too_many_arguments)]
fn render_con(
    sig: &Signature,
    mctx: &MCtx,
    stack: &mut Vec<Option<String>>,
    decl: &OperatorDecl,
    args: &[crate::term::Arg],
    arg_known: &[bool],
    level: u32,
    ascribed: bool,
) -> String {
    // an ascription supplies its own parentheses
    let level = if ascribed { 0 } else { level };
    if let Some(n) = &decl.notation {
        match (n.placement(), args.len()) {
            (Placement::Atom, 0) => return n.bare_symbol().to_string(),
            (Placement::Infix, 2)
                if args[0].bound.is_empty() && args[1].bound.is_empty() =>
            {
                let (ll, rl) = match n.fixity {
                    Fixity::Left => (n.precedence, n.precedence + 1),
                    Fixity::Right => (n.precedence + 1, n.precedence),
                    Fixity::None => (n.precedence + 1, n.precedence + 1),
                };
                let l = print_at(sig, mctx, stack, &args[0].body, ll, arg_known[0]);
                let r = print_at(sig, mctx, stack, &args[1].body, rl, arg_known[1]);
                let s = format!("{} {} {}", l, n.bare_symbol(), r);
                return parenthesize(s, n.precedence, level);
            }
            (Placement::Prefix, 1) => {
                let mut inner: Vec<Option<String>> =
                    args[0].bound.iter().map(|_| None).collect();
                inner.extend(stack.iter().cloned());
                let b = print_at(sig, mctx, &mut inner, &args[0].body, n.precedence, arg_known[0]);
                let s = format!("{} {}", n.bare_symbol(), b);
                return parenthesize(s, n.precedence, level);
            }
            _ => {}
        }
    }
    // functional form
    if args.is_empty() {
        // force `()` when a variable or metavariable shadows the name
        if resolves_to(stack, &decl.name).is_some() || mctx.index_of(&decl.name).is_some() {
            return format!("{}()", decl.name);
        }
        return decl.name.clone();
    }
    let mut parts = Vec::with_capacity(args.len());
    for (i, arg) in args.iter().enumerate() {
        let k = arg.bound.len();
        let mut inner: Vec<Option<String>> =
            (0..k).map(|j| Some(format!("x{j}"))).collect();
        inner.extend(stack.iter().cloned());
        let body = print_at(sig, mctx, &mut inner, &arg.body, 0, arg_known[i]);
        if k == 0 {
            parts.push(body);
        } else {
            // binder names listed outermost first
            let names: Vec<String> = (0..k).rev().map(|j| format!("x{j}")).collect();
            parts.push(format!("{}. {}", names.join(" "), body));
        }
    }
    format!("{}({})", decl.name, parts.join(", "))
}

fn parenthesize(s: String, prec: u32, level: u32) -> String {
    if prec < level {
        format!("({s})")
    } else {
        s
    }
}

