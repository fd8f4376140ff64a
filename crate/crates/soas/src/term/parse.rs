//! Concrete term syntax.
//!
//! Terms are written in prefix form `op(a1, ..., an)` with binder
//! arguments as `v1 v2. body`, metavariable occurrences as `m[t1, ..., tk]`
//! (bare `m` when there are no parameters), and infix/prefix/atom forms
//! for operators with declared notation. `(t : sort)` ascribes a sort,
//! which is how terms that a single bottom-up inference pass cannot
//! determine get their sort-variable instantiations.
//!
//! Variables are resolved by name against the ambient named context,
//! extended at binders. Names of the shape `xK` fall back to de Bruijn
//! index `K` when no binding with that literal name is visible; the
//! printer only emits such names, so `xK` is effectively reserved.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ctx::Ctx;
use crate::lexer::{lex, Cursor, LexError, Tok};
use crate::signature::{
    instantiate, parse_sortexpr, render_sort, unify_sorts, Fixity, OperatorDecl, Placement,
    Signature, Sort, SortExpr, SpecError,
};
use crate::term::{Arg, MCtx, Sub, Term};

/// A named view of a context: index 0 is the most recently bound
/// variable; `None` marks an anonymous binder.
pub type NamedCtx = Vec<(Option<String>, Sort)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermParseError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{line}:{col}: {msg}")]
    Parse { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: unknown name `{name}`")]
    UnknownName { line: u32, col: u32, name: String },
    #[error("{line}:{col}: ambiguous sort inference for `{op}`: sort variables {residual:?} undetermined (add a `(t : sort)` ascription)")]
    Ambiguous { line: u32, col: u32, op: String, residual: Vec<String> },
    #[error("{line}:{col}: sort mismatch: expected {expected}, found {found}")]
    Mismatch { line: u32, col: u32, expected: String, found: String },
}

fn perr<T>(line: u32, col: u32, msg: impl Into<String>) -> Result<T, TermParseError> {
    Err(TermParseError::Parse { line, col, msg: msg.into() })
}

/// Parse a term over `(sig, mctx)` in the given named context. When
/// `expected` is supplied it seeds sort inference top-down and the final
/// sort must match it.
pub fn parse_term(
    sig: &Signature,
    mctx: &MCtx,
    named: &NamedCtx,
    text: &str,
    expected: Option<&Sort>,
) -> Result<Term, TermParseError> {
    let toks = lex(text, 0)?;
    let mut c = Cursor::new(&toks);
    let (t, _) = parse_term_at(sig, mctx, named, &mut c, expected)?;
    if !c.at_end() {
        let (line, col) = c.here();
        return perr(line, col, format!("unexpected token `{}`", c.peek().unwrap().tok));
    }
    Ok(t)
}

/// Parse a term from an existing cursor, stopping at the first token that
/// cannot continue the expression. Used by the theory and proof-script
/// parsers.
pub fn parse_term_at(
    sig: &Signature,
    mctx: &MCtx,
    named: &NamedCtx,
    c: &mut Cursor,
    expected: Option<&Sort>,
) -> Result<(Term, Sort), TermParseError> {
    let (line, col) = c.here();
    let (t, sort) = parse_expr(sig, mctx, named, c, 0, expected)?;
    if let Some(exp) = expected {
        if &sort != exp {
            return Err(TermParseError::Mismatch {
                line,
                col,
                expected: render_sort(exp),
                found: render_sort(&sort),
            });
        }
    }
    Ok((t, sort))
}

fn parse_expr(
    sig: &Signature,
    mctx: &MCtx,
    named: &NamedCtx,
    c: &mut Cursor,
    min_prec: u32,
    expected: Option<&Sort>,
) -> Result<(Term, Sort), TermParseError> {
    let (mut lhs, mut lhs_sort) = parse_primary(sig, mctx, named, c, expected)?;
    loop {
        let sym = match c.peek().map(|t| &t.tok) {
            Some(Tok::Sym(s)) => s.clone(),
            _ => break,
        };
        let decl = match sig.op_by_symbol(&sym) {
            Some(d) => d.clone(),
            None => break,
        };
        let notation = decl.notation.clone().unwrap();
        if notation.placement() != Placement::Infix
            || decl.args.len() != 2
            || decl.args.iter().any(|a| !a.bound.is_empty())
        {
            break;
        }
        if notation.precedence < min_prec {
            break;
        }
        // no seeding from `expected` here: in a chain like `f $ a $ b`
        // this node may not be the outermost one, so only the operands
        // determine its instantiation
        let (line, col) = c.here();
        c.next();
        let mut theta = BTreeMap::new();
        unify(&decl.args[0].body, &lhs_sort, &mut theta, line, col)?;
        let rhs_expected = instantiate(&decl.args[1].body, &theta).ok();
        let next_min = match notation.fixity {
            Fixity::Right => notation.precedence,
            _ => notation.precedence + 1,
        };
        let (rhs, rhs_sort) = parse_expr(sig, mctx, named, c, next_min, rhs_expected.as_ref())?;
        unify(&decl.args[1].body, &rhs_sort, &mut theta, line, col)?;
        let (inst, sort) = finish_inference(&decl, theta, line, col)?;
        lhs = Term::Con {
            op: decl.name.clone(),
            inst,
            args: vec![
                Arg { bound: Ctx::empty(), body: lhs },
                Arg { bound: Ctx::empty(), body: rhs },
            ],
        };
        lhs_sort = sort;
    }
    Ok((lhs, lhs_sort))
}

fn unify(
    e: &SortExpr,
    s: &Sort,
    theta: &mut BTreeMap<String, Sort>,
    line: u32,
    col: u32,
) -> Result<(), TermParseError> {
    unify_sorts(e, s, theta).map_err(|err| match err {
        SpecError::ConstructorClash { expected, found } => {
            TermParseError::Mismatch { line, col, expected, found }
        }
        SpecError::Conflict { old, new, .. } => {
            TermParseError::Mismatch { line, col, expected: old, found: new }
        }
        other => TermParseError::Parse { line, col, msg: other.to_string() },
    })
}

fn finish_inference(
    decl: &OperatorDecl,
    theta: BTreeMap<String, Sort>,
    line: u32,
    col: u32,
) -> Result<(BTreeMap<String, Sort>, Sort), TermParseError> {
    let residual: Vec<String> =
        decl.sortvars.iter().filter(|v| !theta.contains_key(*v)).cloned().collect();
    if !residual.is_empty() {
        return Err(TermParseError::Ambiguous { line, col, op: decl.name.clone(), residual });
    }
    let sort = instantiate(&decl.result, &theta).expect("full instantiation");
    Ok((theta, sort))
}

fn lookup_name(named: &NamedCtx, name: &str) -> Option<(usize, Sort)> {
    // literal name match first, most recent binding wins
    for (i, (n, s)) in named.iter().enumerate() {
        if n.as_deref() == Some(name) {
            return Some((i, s.clone()));
        }
    }
    // reserved de Bruijn spellings x0, x1, ...
    if let Some(rest) = name.strip_prefix('x') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(i) = rest.parse::<usize>() {
                if let Some((_, s)) = named.get(i) {
                    return Some((i, s.clone()));
                }
            }
        }
    }
    None
}

fn parse_primary(
    sig: &Signature,
    mctx: &MCtx,
    named: &NamedCtx,
    c: &mut Cursor,
    expected: Option<&Sort>,
) -> Result<(Term, Sort), TermParseError> {
    let (line, col) = c.here();
    match c.peek().map(|t| t.tok.clone()) {
        Some(Tok::LParen) => {
            c.next();
            // grouping or ascription
            let start = c.pos;
            let (t, s) = parse_expr(sig, mctx, named, c, 0, None).or_else(|e| {
                // an inner ambiguity may be resolved by an ascription;
                // look ahead for `:` and retry with the ascribed sort
                retry_with_ascription(sig, mctx, named, c, start, e)
            })?;
            match c.peek().map(|t| &t.tok) {
                Some(Tok::Colon) => {
                    c.next();
                    let ascribed = parse_ground_sort(sig, c)?;
                    let (l2, c2) = c.here();
                    match c.next().map(|t| &t.tok) {
                        Some(Tok::RParen) => {}
                        _ => return perr(l2, c2, "expected `)`"),
                    }
                    if s != ascribed {
                        return Err(TermParseError::Mismatch {
                            line,
                            col,
                            expected: render_sort(&ascribed),
                            found: render_sort(&s),
                        });
                    }
                    Ok((t, s))
                }
                Some(Tok::RParen) => {
                    c.next();
                    Ok((t, s))
                }
                _ => {
                    let (l2, c2) = c.here();
                    perr(l2, c2, "expected `)` or `:`")
                }
            }
        }
        Some(Tok::Name(name)) => {
            c.next();
            match c.peek().map(|t| &t.tok) {
                Some(Tok::LBrack) => parse_mvar(sig, mctx, named, c, &name, line, col),
                Some(Tok::LParen) => {
                    let decl = match sig.op(&name) {
                        Some(d) => d.clone(),
                        None => {
                            return Err(TermParseError::UnknownName { line, col, name })
                        }
                    };
                    parse_con_app(sig, mctx, named, c, &decl, expected, line, col)
                }
                _ => {
                    if let Some((i, s)) = lookup_name(named, &name) {
                        return Ok((Term::var(i, s.clone()), s));
                    }
                    if let Some(m) = mctx.index_of(&name) {
                        let decl = mctx.get(m).unwrap();
                        if !decl.params.is_empty() {
                            return perr(
                                line,
                                col,
                                format!(
                                    "metavariable `{name}` takes {} parameters; write `{name}[..]`",
                                    decl.params.len()
                                ),
                            );
                        }
                        return Ok((Term::mvar(m, Sub::empty()), decl.sort.clone()));
                    }
                    if let Some(decl) = sig.op(&name) {
                        let decl = decl.clone();
                        if !decl.args.is_empty() {
                            return perr(
                                line,
                                col,
                                format!("operator `{name}` expects arguments"),
                            );
                        }
                        return infer_nullary(&decl, expected, line, col);
                    }
                    // notation spelled as a name (letter symbols like λ)
                    if let Some(decl) = sig.op_by_symbol(&name) {
                        let decl = decl.clone();
                        return parse_notation_occurrence(
                            sig, mctx, named, c, &decl, expected, line, col,
                        );
                    }
                    Err(TermParseError::UnknownName { line, col, name })
                }
            }
        }
        Some(Tok::Nat(n)) => {
            let text = n.to_string();
            if let Some(decl) = sig.op_by_symbol(&text) {
                let decl = decl.clone();
                c.next();
                return parse_notation_occurrence(sig, mctx, named, c, &decl, expected, line, col);
            }
            perr(line, col, format!("no operator with notation `{text}`"))
        }
        Some(Tok::Sym(s)) => {
            if let Some(decl) = sig.op_by_symbol(&s) {
                let decl = decl.clone();
                c.next();
                return parse_notation_occurrence(sig, mctx, named, c, &decl, expected, line, col);
            }
            perr(line, col, format!("unexpected symbol `{s}`"))
        }
        other => perr(
            line,
            col,
            format!(
                "expected a term{}",
                other.map(|t| format!(", found `{t}`")).unwrap_or_default()
            ),
        ),
    }
}

/// Re-parse a parenthesised group whose body failed with an ambiguity by
/// pre-reading the ascription after `:`.
fn retry_with_ascription(
    sig: &Signature,
    mctx: &MCtx,
    named: &NamedCtx,
    c: &mut Cursor,
    start: usize,
    original: TermParseError,
) -> Result<(Term, Sort), TermParseError> {
    if !matches!(original, TermParseError::Ambiguous { .. }) {
        return Err(original);
    }
    // find the `:` at depth 0 from `start`
    let mut depth = 0i32;
    let mut colon = None;
    for (i, t) in c.toks.iter().enumerate().skip(start) {
        match t.tok {
            Tok::LParen | Tok::LBrack => depth += 1,
            Tok::RParen | Tok::RBrack => {
                if depth == 0 {
                    break;
                }
                depth -= 1;
            }
            Tok::Colon if depth == 0 => {
                colon = Some(i);
                break;
            }
            _ => {}
        }
    }
    let colon = match colon {
        Some(i) => i,
        None => return Err(original),
    };
    let mut sort_cursor = Cursor::new(c.toks);
    sort_cursor.pos = colon + 1;
    let ascribed = parse_ground_sort(sig, &mut sort_cursor)?;
    c.pos = start;
    let out = parse_expr(sig, mctx, named, c, 0, Some(&ascribed))?;
    Ok(out)
}

fn parse_ground_sort(sig: &Signature, c: &mut Cursor) -> Result<Sort, TermParseError> {
    let (line, col) = c.here();
    let e = parse_sortexpr(c, sig).map_err(|err| TermParseError::Parse {
        line,
        col,
        msg: err.to_string(),
    })?;
    instantiate(&e, &BTreeMap::new()).map_err(|_| TermParseError::Parse {
        line,
        col,
        msg: "sort ascription must be ground".into(),
    })
}

fn infer_nullary(
    decl: &OperatorDecl,
    expected: Option<&Sort>,
    line: u32,
    col: u32,
) -> Result<(Term, Sort), TermParseError> {
    let mut theta = BTreeMap::new();
    if let Some(exp) = expected {
        unify(&decl.result, exp, &mut theta, line, col)?;
    }
    let (inst, sort) = finish_inference(decl, theta, line, col)?;
    Ok((Term::Con { op: decl.name.clone(), inst, args: Vec::new() }, sort))
}

fn parse_mvar(
    sig: &Signature,
    mctx: &MCtx,
    named: &NamedCtx,
    c: &mut Cursor,
    name: &str,
    line: u32,
    col: u32,
) -> Result<(Term, Sort), TermParseError> {
    let m = match mctx.index_of(name) {
        Some(m) => m,
        None => {
            return Err(TermParseError::UnknownName {
                line,
                col,
                name: name.to_string(),
            })
        }
    };
    let decl = mctx.get(m).unwrap().clone();
    c.next(); // [
    let mut entries = Vec::new();
    if !matches!(c.peek().map(|t| &t.tok), Some(Tok::RBrack)) {
        loop {
            let i = entries.len();
            let want = decl.params.get(i).cloned();
            let (t, s) = parse_expr(sig, mctx, named, c, 0, want.as_ref())?;
            if let Some(w) = &want {
                if &s != w {
                    return Err(TermParseError::Mismatch {
                        line,
                        col,
                        expected: render_sort(w),
                        found: render_sort(&s),
                    });
                }
            }
            entries.push(t);
            match c.peek().map(|t| &t.tok) {
                Some(Tok::Comma) => {
                    c.next();
                }
                _ => break,
            }
        }
    }
    let (l2, c2) = c.here();
    match c.next().map(|t| &t.tok) {
        Some(Tok::RBrack) => {}
        _ => return perr(l2, c2, "expected `]`"),
    }
    if entries.len() != decl.params.len() {
        return perr(
            line,
            col,
            format!(
                "metavariable `{name}` takes {} parameters, found {}",
                decl.params.len(),
                entries.len()
            ),
        );
    }
    let env = Sub { source: decl.params.clone(), entries };
    Ok((Term::mvar(m, env), decl.sort))
}

/// `op(arg1, ..., argn)` with binder prefixes `v1 v2.` on binding
/// arguments. Sort-variable instantiations are inferred left to right.
fn parse_con_app(
    sig: &Signature,
    mctx: &MCtx,
    named: &NamedCtx,
    c: &mut Cursor,
    decl: &OperatorDecl,
    expected: Option<&Sort>,
    line: u32,
    col: u32,
) -> Result<(Term, Sort), TermParseError> {
    c.next(); // (
    let mut theta = BTreeMap::new();
    if let Some(exp) = expected {
        unify(&decl.result, exp, &mut theta, line, col)?;
    }
    let mut args = Vec::new();
    for (i, ba) in decl.args.iter().enumerate() {
        if i > 0 {
            let (l2, c2) = c.here();
            match c.next().map(|t| &t.tok) {
                Some(Tok::Comma) => {}
                _ => return perr(l2, c2, "expected `,`"),
            }
        }
        let names = parse_binder_prefix(c);
        if names.len() != ba.bound.len() {
            let (l2, c2) = c.here();
            return perr(
                l2,
                c2,
                format!(
                    "argument {} of `{}` binds {} variables, found {} binder names",
                    i + 1,
                    decl.name,
                    ba.bound.len(),
                    names.len()
                ),
            );
        }
        // bound sorts must be determined before entering the binder
        let mut bound_sorts = Vec::with_capacity(ba.bound.len());
        for b in &ba.bound {
            match instantiate(b, &theta) {
                Ok(s) => bound_sorts.push(s),
                Err(_) => {
                    return Err(TermParseError::Ambiguous {
                        line,
                        col,
                        op: decl.name.clone(),
                        residual: b.vars().into_iter().filter(|v| !theta.contains_key(v)).collect(),
                    })
                }
            }
        }
        // binder names are listed outermost first; the context is indexed
        // innermost first
        let mut inner: NamedCtx = names
            .iter()
            .rev()
            .zip(bound_sorts.iter().rev())
            .map(|(n, s)| (n.clone(), s.clone()))
            .collect();
        inner.extend(named.iter().cloned());
        let bound = Ctx(bound_sorts.iter().rev().cloned().collect());
        let body_expected = instantiate(&ba.body, &theta).ok();
        let (l2, c2) = c.here();
        let (body, body_sort) = parse_expr(sig, mctx, &inner, c, 0, body_expected.as_ref())?;
        unify(&ba.body, &body_sort, &mut theta, l2, c2)?;
        args.push(Arg { bound, body });
    }
    let (l3, c3) = c.here();
    match c.next().map(|t| &t.tok) {
        Some(Tok::RParen) => {}
        _ => return perr(l3, c3, "expected `)`"),
    }
    let (inst, sort) = finish_inference(decl, theta, line, col)?;
    Ok((Term::Con { op: decl.name.clone(), inst, args }, sort))
}

/// Zero or more names followed by `.`; backtracks when the dot is absent.
fn parse_binder_prefix(c: &mut Cursor) -> Vec<Option<String>> {
    let start = c.pos;
    let mut names = Vec::new();
    while let Some(Tok::Name(n)) = c.peek().map(|t| &t.tok) {
        names.push(Some(n.clone()));
        c.next();
    }
    if !names.is_empty() && matches!(c.peek().map(|t| &t.tok), Some(Tok::Dot)) {
        c.next();
        return names;
    }
    c.pos = start;
    Vec::new()
}

/// An occurrence of a declared notation in operator position: prefix
/// symbols take one operand (possibly binding), atoms take none.
fn parse_notation_occurrence(
    sig: &Signature,
    mctx: &MCtx,
    named: &NamedCtx,
    c: &mut Cursor,
    decl: &OperatorDecl,
    expected: Option<&Sort>,
    line: u32,
    col: u32,
) -> Result<(Term, Sort), TermParseError> {
    let notation = decl.notation.clone().unwrap();
    match notation.placement() {
        Placement::Atom => {
            if !decl.args.is_empty() {
                return perr(line, col, format!("notation `{}` is not nullary", notation.symbol));
            }
            infer_nullary(decl, expected, line, col)
        }
        Placement::Prefix => {
            if decl.args.len() != 1 {
                return perr(
                    line,
                    col,
                    format!("prefix notation `{}` needs a unary operator", notation.symbol),
                );
            }
            let ba = &decl.args[0];
            let mut theta = BTreeMap::new();
            if let Some(exp) = expected {
                unify(&decl.result, exp, &mut theta, line, col)?;
            }
            let mut bound_sorts = Vec::with_capacity(ba.bound.len());
            for b in &ba.bound {
                match instantiate(b, &theta) {
                    Ok(s) => bound_sorts.push(s),
                    Err(_) => {
                        return Err(TermParseError::Ambiguous {
                            line,
                            col,
                            op: decl.name.clone(),
                            residual: b
                                .vars()
                                .into_iter()
                                .filter(|v| !theta.contains_key(v))
                                .collect(),
                        })
                    }
                }
            }
            // notation form binds anonymously
            let mut inner: NamedCtx =
                bound_sorts.iter().rev().map(|s| (None, s.clone())).collect();
            inner.extend(named.iter().cloned());
            let bound = Ctx(bound_sorts.iter().rev().cloned().collect());
            let body_expected = instantiate(&ba.body, &theta).ok();
            let (l2, c2) = c.here();
            let (body, body_sort) =
                parse_expr(sig, mctx, &inner, c, notation.precedence, body_expected.as_ref())?;
            unify(&ba.body, &body_sort, &mut theta, l2, c2)?;
            let (inst, sort) = finish_inference(decl, theta, line, col)?;
            Ok((Term::Con { op: decl.name.clone(), inst, args: vec![Arg { bound, body }] }, sort))
        }
        other => perr(
            line,
            col,
            format!("notation `{}` ({other:?}) cannot start a term", notation.symbol),
        ),
    }
}
