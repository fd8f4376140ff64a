//! Signatures: declared sorts, operators with binding arities, and the
//! textual signature language.
//!
//! A signature declares type constructors (each with an arity and optional
//! infix/prefix notation) and operators. An operator has a list of
//! arguments, each of which may bind variables (`a.b` binds one variable of
//! sort `a` in a body of sort `b`), and a result sort. Sort expressions may
//! mention sort variables: any lowercase-style name that is not a declared
//! type constructor. A signature without a `type` section works over the
//! single implicit sort `*`.

use std::collections::BTreeMap;


use thiserror::Error;

use crate::lexer::{lex, Cursor, LexError, Tok, Token};

/// A ground sort: a declared type constructor applied to child sorts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort {
    pub con: String,
    pub args: Vec<Sort>,
}

impl Sort {
    pub fn base(name: impl Into<String>) -> Sort {
        Sort { con: name.into(), args: Vec::new() }
    }

    pub fn app(name: impl Into<String>, args: Vec<Sort>) -> Sort {
        Sort { con: name.into(), args }
    }

    /// The implicit sort of signatures without a `type` section.
    pub fn star() -> Sort {
        Sort::base("*")
    }

    pub fn node_count(&self) -> usize {
        1 + self.args.iter().map(Sort::node_count).sum::<usize>()
    }
}

/// A sort expression: a sort tree whose leaves may be sort variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortExpr {
    Var(String),
    Con(String, Vec<SortExpr>),
}

impl SortExpr {
    pub fn from_sort(s: &Sort) -> SortExpr {
        SortExpr::Con(s.con.clone(), s.args.iter().map(SortExpr::from_sort).collect())
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            SortExpr::Var(v) => {
                if !out.iter().any(|w| w == v) {
                    out.push(v.clone());
                }
            }
            SortExpr::Con(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

/// Operator notation: a symbol with underscores marking argument slots
/// (`_+_` infix, `-_` prefix, `0` atom), an associativity, and a binding
/// strength (higher binds tighter).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Notation {
    pub symbol: String,
    pub fixity: Fixity,
    pub precedence: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixity {
    Left,
    Right,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Infix,
    Prefix,
    Postfix,
    Atom,
}

impl Notation {
    /// The symbol with slot underscores removed.
    pub fn bare_symbol(&self) -> &str {
        self.symbol.trim_matches('_')
    }

    pub fn placement(&self) -> Placement {
        let leading = self.symbol.starts_with('_');
        let trailing = self.symbol.ends_with('_') && self.symbol.len() > 1;
        match (leading, trailing) {
            (true, true) => Placement::Infix,
            (false, true) => Placement::Prefix,
            (true, false) => Placement::Postfix,
            (false, false) => Placement::Atom,
        }
    }

    fn fixity_code(&self) -> String {
        match self.fixity {
            Fixity::Left => format!("l{}", self.precedence),
            Fixity::Right => format!("r{}", self.precedence),
            Fixity::None => format!("{}", self.precedence),
        }
    }
}

/// A declared type constructor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeConDecl {
    pub name: String,
    pub arity: usize,
    pub notation: Option<Notation>,
}

/// One argument position of an operator: the sorts of the variables it
/// binds (listed outermost first) and the sort of its body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundArity {
    pub bound: Vec<SortExpr>,
    pub body: SortExpr,
}

/// A declared operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorDecl {
    pub name: String,
    pub sortvars: Vec<String>,
    pub args: Vec<BoundArity>,
    pub result: SortExpr,
    pub notation: Option<Notation>,
}

/// An uninterpreted line from the `theory` section, kept verbatim with its
/// source line for later elaboration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTheoryLine {
    pub line: u32,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    pub typecons: Vec<TypeConDecl>,
    pub ops: Vec<OperatorDecl>,
    pub raw_theory: Vec<RawTheoryLine>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{line}:{col}: {msg}")]
    Parse { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: duplicate name `{name}`")]
    DuplicateName { line: u32, col: u32, name: String },
    #[error("{line}:{col}: sort constructor `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch { line: u32, col: u32, name: String, expected: usize, got: usize },
    #[error("{line}:{col}: undeclared sort variable `{name}`")]
    UndeclaredSortVar { line: u32, col: u32, name: String },
    #[error("unbound sort variable `{0}`")]
    UnboundSortVar(String),
    #[error("sort constructor clash: expected `{expected}`, found `{found}`")]
    ConstructorClash { expected: String, found: String },
    #[error("conflicting instantiation for `{var}`: `{old}` vs `{new}`")]
    Conflict { var: String, old: String, new: String },
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("incomplete instantiation: sort variable `{0}` not covered")]
    IncompleteInstantiation(String),
}

impl Signature {
    pub fn typecon(&self, name: &str) -> Option<&TypeConDecl> {
        self.typecons.iter().find(|t| t.name == name)
    }

    pub fn op(&self, name: &str) -> Option<&OperatorDecl> {
        self.ops.iter().find(|o| o.name == name)
    }

    /// True when the signature has no `type` section and works over `*`.
    pub fn is_unsorted(&self) -> bool {
        self.typecons.is_empty()
    }

    /// Find an operator by its bare notation symbol.
    pub fn op_by_symbol(&self, sym: &str) -> Option<&OperatorDecl> {
        self.ops
            .iter()
            .find(|o| o.notation.as_ref().map(|n| n.bare_symbol() == sym).unwrap_or(false))
    }

    pub fn typecon_by_symbol(&self, sym: &str) -> Option<&TypeConDecl> {
        self.typecons
            .iter()
            .find(|t| t.notation.as_ref().map(|n| n.bare_symbol() == sym).unwrap_or(false))
    }
}

/// Substitute sort variables in `e` with the ground sorts of `theta`.
pub fn instantiate(e: &SortExpr, theta: &BTreeMap<String, Sort>) -> Result<Sort, SpecError> {
    match e {
        SortExpr::Var(v) => theta.get(v).cloned().ok_or_else(|| SpecError::UnboundSortVar(v.clone())),
        SortExpr::Con(c, args) => Ok(Sort {
            con: c.clone(),
            args: args.iter().map(|a| instantiate(a, theta)).collect::<Result<_, _>>()?,
        }),
    }
}

/// Match a sort expression against a ground sort, extending `theta`.
/// Succeeds exactly when `instantiate(e, theta') == s` for the returned
/// extension `theta'` of `theta`.
pub fn unify_sorts(
    e: &SortExpr,
    s: &Sort,
    theta: &mut BTreeMap<String, Sort>,
) -> Result<(), SpecError> {
    match e {
        SortExpr::Var(v) => match theta.get(v) {
            Some(old) if old == s => Ok(()),
            Some(old) => Err(SpecError::Conflict {
                var: v.clone(),
                old: render_sort(old),
                new: render_sort(s),
            }),
            None => {
                theta.insert(v.clone(), s.clone());
                Ok(())
            }
        },
        SortExpr::Con(c, args) => {
            if *c != s.con || args.len() != s.args.len() {
                return Err(SpecError::ConstructorClash {
                    expected: render_sort_expr(e),
                    found: render_sort(s),
                });
            }
            for (a, b) in args.iter().zip(&s.args) {
                unify_sorts(a, b, theta)?;
            }
            Ok(())
        }
    }
}

/// The ground arity of an operator under a full instantiation: for each
/// argument the context bound by it (index 0 = innermost binder) and its
/// body sort, plus the ground result sort.
pub fn operator_arity(
    sig: &Signature,
    op: &str,
    theta: &BTreeMap<String, Sort>,
) -> Result<(Vec<(Vec<Sort>, Sort)>, Sort), SpecError> {
    let decl = sig.op(op).ok_or_else(|| SpecError::UnknownOperator(op.to_string()))?;
    for v in &decl.sortvars {
        if !theta.contains_key(v) {
            return Err(SpecError::IncompleteInstantiation(v.clone()));
        }
    }
    let mut args = Vec::with_capacity(decl.args.len());
    for ba in &decl.args {
        // bound variables are declared outermost first; the context is
        // indexed innermost first
        let mut ctx = Vec::with_capacity(ba.bound.len());
        for b in ba.bound.iter().rev() {
            ctx.push(instantiate(b, theta)?);
        }
        args.push((ctx, instantiate(&ba.body, theta)?));
    }
    Ok((args, instantiate(&decl.result, theta)?))
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

pub fn render_sort(s: &Sort) -> String {
    render_sort_expr(&SortExpr::from_sort(s))
}

/// Compound sorts are parenthesised; this keeps the rendering trivially
/// re-parseable and byte-stable.
pub fn render_sort_expr(e: &SortExpr) -> String {
    render_sort_expr_in(e, None)
}

/// Like [`render_sort_expr`] but using the signature's type notations, so
/// the output re-parses under the same signature.
pub fn render_sort_expr_sig(sig: &Signature, e: &SortExpr) -> String {
    render_sort_expr_in(e, Some(sig))
}

fn render_sort_expr_in(e: &SortExpr, sig: Option<&Signature>) -> String {
    match e {
        SortExpr::Var(v) => v.clone(),
        SortExpr::Con(c, args) if args.is_empty() => c.clone(),
        SortExpr::Con(c, args) => {
            let infix = sig
                .and_then(|s| s.typecon(c))
                .and_then(|t| t.notation.as_ref())
                .filter(|n| n.placement() == Placement::Infix && args.len() == 2);
            match infix {
                Some(n) => format!(
                    "({} {} {})",
                    render_sort_expr_in(&args[0], sig),
                    n.bare_symbol(),
                    render_sort_expr_in(&args[1], sig)
                ),
                None => {
                    let parts: Vec<String> = args
                        .iter()
                        .map(|a| {
                            let r = render_sort_expr_in(a, sig);
                            if matches!(a, SortExpr::Con(_, xs) if !xs.is_empty()) {
                                r // already parenthesised
                            } else {
                                r
                            }
                        })
                        .collect();
                    format!("({} {})", c, parts.join(" "))
                }
            }
        }
    }
}

/// Render a sort using the signature's type notations (used in messages
/// and the `term` subcommand output).
pub fn render_sort_with(sig: &Signature, s: &Sort) -> String {
    let e = SortExpr::from_sort(s);
    let r = render_sort_expr_in(&e, Some(sig));
    // strip one layer of outer parentheses for readability
    if r.starts_with('(') && r.ends_with(')') {
        r[1..r.len() - 1].to_string()
    } else {
        r
    }
}

/// Canonical machine-readable dump: one `ty`/`op` line per declaration, in
/// declaration order, newline-terminated. The dump is itself accepted by
/// [`parse_spec`].
pub fn dump_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for t in &sig.typecons {
        out.push_str(&format!("ty {} {}", t.name, t.arity));
        if let Some(n) = &t.notation {
            out.push_str(&format!(" {} {}", n.symbol, n.fixity_code()));
        }
        out.push('\n');
    }
    for o in &sig.ops {
        let args: Vec<String> = o
            .args
            .iter()
            .map(|a| {
                let bound: Vec<String> =
                    a.bound.iter().map(|b| render_sort_expr_sig(sig, b)).collect();
                format!("({};{})", bound.join(","), render_sort_expr_sig(sig, &a.body))
            })
            .collect();
        let mut line = format!("op {} :", o.name);
        for a in &args {
            line.push(' ');
            line.push_str(a);
        }
        line.push_str(&format!(" -> {}", render_sort_expr_sig(sig, &o.result)));
        if let Some(n) = &o.notation {
            line.push_str(&format!(" {} {}", n.symbol, n.fixity_code()));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn perr<T>(line: u32, col: u32, msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Parse { line, col, msg: msg.into() })
}

fn parse_fixity(spelling: &str) -> Option<(Fixity, u32)> {
    let (fix, digits) = match spelling.as_bytes().first()? {
        b'l' => (Fixity::Left, &spelling[1..]),
        b'r' => (Fixity::Right, &spelling[1..]),
        b'0'..=b'9' => (Fixity::None, spelling),
        _ => return None,
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((fix, digits.parse().ok()?))
}

/// Parse either the signature language or a signature dump (auto-detected
/// by the leading `ty`/`op` token).
pub fn parse_spec(text: &str) -> Result<Signature, SpecError> {
    let toks = lex(text, 0)?;
    match toks.first() {
        Some(t) if t.tok == Tok::Name("ty".into()) || t.tok == Tok::Name("op".into()) => {
            parse_dump(&toks)
        }
        _ => {
            let mut c = Cursor::new(&toks);
            parse_spec_language(&mut c, text)
        }
    }
}

fn is_section_keyword(t: &Token) -> bool {
    matches!(&t.tok, Tok::Name(n) if n == "type" || n == "term" || n == "theory")
}

/// A section keyword only counts as one when it is not itself the start of
/// a declaration (`term : ...` would be a declaration named `term`).
fn at_section(c: &Cursor, kw: &str) -> bool {
    match c.peek() {
        Some(t) if t.tok == Tok::Name(kw.into()) => !matches!(
            c.peek_at(1).map(|t| &t.tok),
            Some(Tok::Colon) | Some(Tok::Sym(_))
        ),
        _ => false,
    }
}

fn at_any_section(c: &Cursor) -> bool {
    match c.peek() {
        Some(t) if is_section_keyword(t) => {
            !matches!(c.peek_at(1).map(|t| &t.tok), Some(Tok::Colon))
        }
        _ => false,
    }
}

fn parse_spec_language(c: &mut Cursor, text: &str) -> Result<Signature, SpecError> {
    let mut sig = Signature::default();

    if at_section(c, "type") {
        c.next();
        while !c.at_end() && !at_any_section(c) {
            parse_tydecl(c, &mut sig)?;
        }
    }

    let (line, col) = c.here();
    if !at_section(c, "term") {
        return perr(line, col, "expected `term` section");
    }
    c.next();
    while !c.at_end() && !at_any_section(c) {
        parse_opdecl(c, &mut sig)?;
    }

    if at_section(c, "theory") {
        c.next();
        collect_theory_lines(c, text, &mut sig);
    }

    if !c.at_end() {
        let (line, col) = c.here();
        return perr(line, col, format!("unexpected token `{}`", c.peek().unwrap().tok));
    }
    Ok(sig)
}

fn parse_tydecl(c: &mut Cursor, sig: &mut Signature) -> Result<(), SpecError> {
    let (spelling, line, col) = match c.take_spelling() {
        Some(s) => s,
        None => return perr(c.eof.0, c.eof.1, "expected type constructor declaration"),
    };
    let has_slots = spelling.contains('_');
    let name = spelling.trim_matches('_').to_string();
    if name.is_empty() {
        return perr(line, col, "empty type constructor name");
    }
    expect_colon(c)?;
    let (nline, ncol) = c.here();
    let arity = match c.next().map(|t| &t.tok) {
        Some(Tok::Nat(n)) => *n as usize,
        _ => return perr(nline, ncol, "expected arity count"),
    };
    // the `-ary` suffix
    let (sline, scol) = c.here();
    match (c.next().map(|t| &t.tok), c.next().map(|t| &t.tok)) {
        (Some(Tok::Sym(s)), Some(Tok::Name(a))) if s == "-" && a == "ary" => {}
        _ => return perr(sline, scol, "expected `-ary`"),
    }
    let mut notation = None;
    if matches!(c.peek().map(|t| &t.tok), Some(Tok::Bar)) {
        c.next();
        notation = Some(parse_notation(c, if has_slots { Some(spelling.clone()) } else { None })?);
    } else if has_slots {
        notation =
            Some(Notation { symbol: spelling.clone(), fixity: Fixity::None, precedence: 0 });
    }
    if sig.typecon(&name).is_some() {
        return Err(SpecError::DuplicateName { line, col, name });
    }
    sig.typecons.push(TypeConDecl { name, arity, notation });
    Ok(())
}

/// Parse `SYMBOL [fixity]` or, when the declaration name already carried
/// the symbol slots, just `fixity`.
fn parse_notation(c: &mut Cursor, name_symbol: Option<String>) -> Result<Notation, SpecError> {
    let (line, col) = c.here();
    let (first, _, _) = match c.take_spelling() {
        Some(s) => s,
        None => return perr(line, col, "expected notation"),
    };
    if let Some(sym) = name_symbol {
        // the spelling after `|` must be the fixity
        match parse_fixity(&first) {
            Some((fixity, precedence)) => return Ok(Notation { symbol: sym, fixity, precedence }),
            None => return perr(line, col, format!("expected fixity, found `{first}`")),
        }
    }
    // otherwise: SYMBOL then optional fixity
    let mut notation = Notation { symbol: first, fixity: Fixity::None, precedence: 0 };
    if let Some(t) = c.peek() {
        let spelled = t.tok.to_string();
        if let Some((fixity, precedence)) = parse_fixity(&spelled) {
            // a bare number is a valid notation symbol (`| 0`), so only a
            // following token can be a fixity
            c.next();
            notation.fixity = fixity;
            notation.precedence = precedence;
        }
    }
    Ok(notation)
}

fn expect_colon(c: &mut Cursor) -> Result<(), SpecError> {
    let (line, col) = c.here();
    match c.next().map(|t| &t.tok) {
        Some(Tok::Colon) => Ok(()),
        _ => perr(line, col, "expected `:`"),
    }
}

fn parse_opdecl(c: &mut Cursor, sig: &mut Signature) -> Result<(), SpecError> {
    let (line, col) = c.here();
    let name = match c.next().map(|t| &t.tok) {
        Some(Tok::Name(n)) => n.clone(),
        _ => return perr(line, col, "expected operator name"),
    };
    expect_colon(c)?;
    let mut args = Vec::new();
    loop {
        if matches!(c.peek().map(|t| &t.tok), Some(Tok::Arrow)) {
            c.next();
            break;
        }
        if c.at_end() {
            let (l, co) = c.here();
            return perr(l, co, "expected `->` in operator declaration");
        }
        args.push(parse_argspec(c, sig)?);
    }
    let result = parse_sortexpr(c, sig)?;
    let mut notation = None;
    if matches!(c.peek().map(|t| &t.tok), Some(Tok::Bar)) {
        c.next();
        notation = Some(parse_notation(c, None)?);
    }
    // sort variables: every undeclared leaf, in order of first appearance
    let mut sortvars: Vec<String> = Vec::new();
    let mut exprs: Vec<&SortExpr> = Vec::new();
    for a in &args {
        exprs.extend(a.bound.iter());
        exprs.push(&a.body);
    }
    exprs.push(&result);
    for e in exprs {
        for v in e.vars() {
            if !sortvars.contains(&v) {
                sortvars.push(v);
            }
        }
    }
    if sig.is_unsorted() {
        if let Some(v) = sortvars.first() {
            return Err(SpecError::UndeclaredSortVar { line, col, name: v.clone() });
        }
    }
    if sig.op(&name).is_some() {
        return Err(SpecError::DuplicateName { line, col, name });
    }
    sig.ops.push(OperatorDecl { name, sortvars, args, result, notation });
    Ok(())
}

/// An argument spec: either a plain sort expression or a binder
/// `bvars . body` or `( bvars ) . body`.
fn parse_argspec(c: &mut Cursor, sig: &Signature) -> Result<BoundArity, SpecError> {
    if matches!(c.peek().map(|t| &t.tok), Some(Tok::LParen)) {
        // could be `( bvars ) . body` or a parenthesised sort expression
        let start = c.pos;
        c.next();
        let mut bvars = vec![parse_sortexpr(c, sig)?];
        while matches!(c.peek().map(|t| &t.tok), Some(Tok::Comma)) {
            c.next();
            bvars.push(parse_sortexpr(c, sig)?);
        }
        let (line, col) = c.here();
        match c.next().map(|t| &t.tok) {
            Some(Tok::RParen) => {}
            _ => return perr(line, col, "expected `)`"),
        }
        if matches!(c.peek().map(|t| &t.tok), Some(Tok::Dot)) {
            c.next();
            let body = parse_sortexpr(c, sig)?;
            return Ok(BoundArity { bound: bvars, body });
        }
        if bvars.len() == 1 {
            // plain parenthesised sort expression; reparse to allow infix
            // continuation after the closing paren
            c.pos = start;
            let e = parse_sortexpr(c, sig)?;
            return finish_argspec(c, sig, e);
        }
        let (line, col) = c.here();
        return perr(line, col, "expected `.` after bound variable list");
    }
    let e = parse_sortexpr(c, sig)?;
    finish_argspec(c, sig, e)
}

fn finish_argspec(c: &mut Cursor, sig: &Signature, e: SortExpr) -> Result<BoundArity, SpecError> {
    if matches!(c.peek().map(|t| &t.tok), Some(Tok::Dot)) {
        c.next();
        let body = parse_sortexpr(c, sig)?;
        return Ok(BoundArity { bound: vec![e], body });
    }
    Ok(BoundArity { bound: Vec::new(), body: e })
}

/// Precedence-climbing parser for sort expressions using the signature's
/// type-constructor notations.
pub fn parse_sortexpr(c: &mut Cursor, sig: &Signature) -> Result<SortExpr, SpecError> {
    parse_sortexpr_prec(c, sig, 0)
}

fn parse_sortexpr_prec(c: &mut Cursor, sig: &Signature, min_prec: u32) -> Result<SortExpr, SpecError> {
    let mut lhs = parse_sort_atom(c, sig)?;
    loop {
        let sym = match c.peek().map(|t| &t.tok) {
            Some(Tok::Sym(s)) => s.clone(),
            _ => break,
        };
        let decl = match sig.typecon_by_symbol(&sym) {
            Some(d) => d,
            None => break,
        };
        let notation = decl.notation.clone().unwrap();
        if notation.placement() != Placement::Infix || decl.arity != 2 {
            break;
        }
        if notation.precedence < min_prec {
            break;
        }
        let name = decl.name.clone();
        c.next();
        let next_min = match notation.fixity {
            Fixity::Right => notation.precedence,
            _ => notation.precedence + 1,
        };
        let rhs = parse_sortexpr_prec(c, sig, next_min)?;
        lhs = SortExpr::Con(name, vec![lhs, rhs]);
    }
    Ok(lhs)
}

fn parse_sort_atom(c: &mut Cursor, sig: &Signature) -> Result<SortExpr, SpecError> {
    let (line, col) = c.here();
    match c.peek().map(|t| t.tok.clone()) {
        Some(Tok::LParen) => {
            c.next();
            let e = parse_sortexpr(c, sig)?;
            let (l2, c2) = c.here();
            match c.next().map(|t| &t.tok) {
                Some(Tok::RParen) => Ok(e),
                _ => perr(l2, c2, "expected `)`"),
            }
        }
        Some(Tok::Name(n)) => {
            c.next();
            match sig.typecon(&n) {
                Some(d) if d.arity == 0 => Ok(SortExpr::Con(n, Vec::new())),
                Some(d) => {
                    let arity = d.arity;
                    let mut args = Vec::with_capacity(arity);
                    for _ in 0..arity {
                        args.push(parse_sort_atom(c, sig)?);
                    }
                    Ok(SortExpr::Con(n, args))
                }
                None => {
                    if sig.is_unsorted() {
                        return Err(SpecError::UndeclaredSortVar { line, col, name: n });
                    }
                    Ok(SortExpr::Var(n))
                }
            }
        }
        Some(Tok::Sym(s)) => {
            // implicit `*` of unsorted signatures, or a prefix type notation
            if s == "*" && sig.is_unsorted() {
                c.next();
                return Ok(SortExpr::Con("*".into(), Vec::new()));
            }
            if let Some(d) = sig.typecon_by_symbol(&s) {
                let notation = d.notation.clone().unwrap();
                if notation.placement() == Placement::Prefix && d.arity == 1 {
                    let name = d.name.clone();
                    let prec = notation.precedence;
                    c.next();
                    let arg = parse_sortexpr_prec(c, sig, prec)?;
                    return Ok(SortExpr::Con(name, vec![arg]));
                }
                if notation.placement() == Placement::Atom && d.arity == 0 {
                    c.next();
                    return Ok(SortExpr::Con(d.name.clone(), Vec::new()));
                }
            }
            perr(line, col, format!("unexpected symbol `{s}` in sort expression"))
        }
        other => perr(
            line,
            col,
            format!(
                "expected sort expression{}",
                other.map(|t| format!(", found `{t}`")).unwrap_or_default()
            ),
        ),
    }
}

/// Collect raw theory lines verbatim, keyed by source line. Grouping is
/// per physical line; axiom lines must not wrap.
fn collect_theory_lines(c: &mut Cursor, text: &str, sig: &mut Signature) {
    let mut current_line = 0u32;
    let mut span: Option<(usize, usize)> = None;
    let flush = |line: u32, span: Option<(usize, usize)>, sig: &mut Signature| {
        if let Some((s, e)) = span {
            sig.raw_theory.push(RawTheoryLine { line, text: text[s..e].to_string() });
        }
    };
    while let Some(t) = c.peek() {
        if is_section_keyword(t) && !matches!(c.peek_at(1).map(|x| &x.tok), Some(Tok::Colon)) {
            break;
        }
        let t = c.next().unwrap();
        if t.line != current_line {
            flush(current_line, span.take(), sig);
            current_line = t.line;
        }
        span = match span {
            None => Some((t.start, t.end)),
            Some((s, _)) => Some((s, t.end)),
        };
    }
    flush(current_line, span, sig);
}

// ---------------------------------------------------------------------------
// Dump parsing (inverse of dump_signature)
// ---------------------------------------------------------------------------

fn parse_dump(toks: &[Token]) -> Result<Signature, SpecError> {
    let mut sig = Signature::default();
    let mut i = 0usize;
    while i < toks.len() {
        let line_no = toks[i].line;
        let mut j = i;
        while j < toks.len() && toks[j].line == line_no {
            j += 1;
        }
        parse_dump_line(&toks[i..j], &mut sig)?;
        i = j;
    }
    Ok(sig)
}

fn parse_dump_line(line: &[Token], sig: &mut Signature) -> Result<(), SpecError> {
    let mut c = Cursor::new(line);
    let head = c.next().unwrap();
    match &head.tok {
        Tok::Name(k) if k == "ty" => {
            let (line_no, col) = c.here();
            let (name, _, _) = c
                .take_spelling()
                .ok_or(SpecError::Parse { line: line_no, col, msg: "expected name".into() })?;
            let (l2, c2) = c.here();
            let arity = match c.next().map(|t| &t.tok) {
                Some(Tok::Nat(n)) => *n as usize,
                _ => return perr(l2, c2, "expected arity"),
            };
            let notation = parse_dump_notation(&mut c)?;
            if sig.typecon(&name).is_some() {
                return Err(SpecError::DuplicateName { line: line_no, col, name });
            }
            sig.typecons.push(TypeConDecl { name, arity, notation });
            Ok(())
        }
        Tok::Name(k) if k == "op" => {
            let (line_no, col) = c.here();
            let name = match c.next().map(|t| &t.tok) {
                Some(Tok::Name(n)) => n.clone(),
                _ => return perr(line_no, col, "expected operator name"),
            };
            expect_colon(&mut c)?;
            let mut args = Vec::new();
            while matches!(c.peek().map(|t| &t.tok), Some(Tok::LParen)) {
                c.next();
                let mut bound = Vec::new();
                if !matches!(c.peek().map(|t| &t.tok), Some(Tok::Semi)) {
                    loop {
                        bound.push(parse_sortexpr(&mut c, sig)?);
                        if matches!(c.peek().map(|t| &t.tok), Some(Tok::Comma)) {
                            c.next();
                        } else {
                            break;
                        }
                    }
                }
                let (l3, c3) = c.here();
                match c.next().map(|t| &t.tok) {
                    Some(Tok::Semi) => {}
                    _ => return perr(l3, c3, "expected `;` in dump argument"),
                }
                let body = parse_sortexpr(&mut c, sig)?;
                let (l4, c4) = c.here();
                match c.next().map(|t| &t.tok) {
                    Some(Tok::RParen) => {}
                    _ => return perr(l4, c4, "expected `)`"),
                }
                args.push(BoundArity { bound, body });
            }
            let (l5, c5) = c.here();
            match c.next().map(|t| &t.tok) {
                Some(Tok::Arrow) => {}
                _ => return perr(l5, c5, "expected `->`"),
            }
            let result = parse_sortexpr(&mut c, sig)?;
            let notation = parse_dump_notation(&mut c)?;
            let mut sortvars = Vec::new();
            let mut exprs: Vec<&SortExpr> = Vec::new();
            for a in &args {
                exprs.extend(a.bound.iter());
                exprs.push(&a.body);
            }
            exprs.push(&result);
            for e in exprs {
                for v in e.vars() {
                    if !sortvars.contains(&v) {
                        sortvars.push(v);
                    }
                }
            }
            if sig.op(&name).is_some() {
                return Err(SpecError::DuplicateName { line: line_no, col, name });
            }
            sig.ops.push(OperatorDecl { name, sortvars, args, result, notation });
            Ok(())
        }
        _ => perr(head.line, head.col, "expected `ty` or `op` line"),
    }
}

/// Trailing `SYMBOL [fixity]` on a dump line.
fn parse_dump_notation(c: &mut Cursor) -> Result<Option<Notation>, SpecError> {
    if c.at_end() {
        return Ok(None);
    }
    let (symbol, _, _) = c.take_spelling().unwrap();
    let mut notation = Notation { symbol, fixity: Fixity::None, precedence: 0 };
    if let Some(t) = c.peek() {
        let spelled = t.tok.to_string();
        if let Some((fixity, precedence)) = parse_fixity(&spelled) {
            c.next();
            notation.fixity = fixity;
            notation.precedence = precedence;
        }
    }
    if !c.at_end() {
        let (line, col) = c.here();
        return perr(line, col, "trailing tokens after notation");
    }
    Ok(Some(notation))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const STLC_MIN: &str = "
type
  N : 0-ary
  _=>_ : 2-ary | r30
term
  app : (a => b) a -> b | _$_ l20
  lam : a.b -> a => b | λ_ r10
";

    const PD: &str = "
term
  zero : -> * | 0
  one : -> * | 1
  inv : * -> * | -_ r50
  add : * * -> * | _+_ l20
  mult : * * -> * | _*_ l40
  pdiff : *.* * -> *
theory
  'add' commutative
  (pdAdd) a : * |> x : * |- pdiff(w. add(w, a), x) = one
";

    fn nat() -> Sort {
        Sort::base("N")
    }

    fn arrow(a: Sort, b: Sort) -> Sort {
        Sort::app("=>", vec![a, b])
    }

    #[test]
    fn parses_minimal_stlc() {
        let sig = parse_spec(STLC_MIN).unwrap();
        assert_eq!(sig.typecons.len(), 2);
        assert_eq!(sig.ops.len(), 2);
        let lam = sig.op("lam").unwrap();
        assert_eq!(lam.sortvars, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(lam.args.len(), 1);
        assert_eq!(lam.args[0].bound.len(), 1);
        assert_eq!(sig.typecon("=>").unwrap().arity, 2);
    }

    #[test]
    fn parses_unsorted_pd() {
        let sig = parse_spec(PD).unwrap();
        assert!(sig.is_unsorted());
        assert_eq!(sig.ops.len(), 6);
        let names: Vec<_> = sig.ops.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, vec!["zero", "one", "inv", "add", "mult", "pdiff"]);
        let pdiff = sig.op("pdiff").unwrap();
        assert_eq!(pdiff.args.len(), 2);
        assert_eq!(pdiff.args[0].bound.len(), 1);
        assert_eq!(sig.raw_theory.len(), 2);
        assert!(sig.raw_theory[0].text.contains("commutative"));
    }

    #[test]
    fn duplicate_names_rejected() {
        let bad = "term\n zero : -> *\n zero : -> *\n";
        match parse_spec(bad) {
            Err(SpecError::DuplicateName { name, .. }) => assert_eq!(name, "zero"),
            other => panic!("expected duplicate-name error, got {other:?}"),
        }
    }

    #[test]
    fn sortvar_in_unsorted_signature_rejected() {
        let bad = "term\n id : a -> a\n";
        assert!(matches!(parse_spec(bad), Err(SpecError::UndeclaredSortVar { .. })));
    }

    #[test]
    fn instantiate_basics() {
        let mut theta = BTreeMap::new();
        theta.insert("a".to_string(), nat());
        theta.insert("b".to_string(), nat());
        let e = SortExpr::Con("=>".into(), vec![SortExpr::Var("a".into()), SortExpr::Var("b".into())]);
        assert_eq!(instantiate(&e, &theta).unwrap(), arrow(nat(), nat()));
        assert_eq!(instantiate(&SortExpr::Con("N".into(), vec![]), &BTreeMap::new()).unwrap(), nat());
        assert!(matches!(
            instantiate(&SortExpr::Var("a".into()), &BTreeMap::new()),
            Err(SpecError::UnboundSortVar(_))
        ));
    }

    #[test]
    fn unify_basics() {
        // a => b against N => (N => N)
        let e = SortExpr::Con("=>".into(), vec![SortExpr::Var("a".into()), SortExpr::Var("b".into())]);
        let target = arrow(nat(), arrow(nat(), nat()));
        let mut theta = BTreeMap::new();
        unify_sorts(&e, &target, &mut theta).unwrap();
        assert_eq!(theta["a"], nat());
        assert_eq!(theta["b"], arrow(nat(), nat()));
        // consistent rebinding
        let mut theta2 = BTreeMap::new();
        theta2.insert("a".to_string(), nat());
        unify_sorts(&SortExpr::Var("a".into()), &nat(), &mut theta2).unwrap();
        assert_eq!(theta2.len(), 1);
        // constructor clash
        let mut theta3 = BTreeMap::new();
        assert!(matches!(
            unify_sorts(&SortExpr::Con("N".into(), vec![]), &arrow(nat(), nat()), &mut theta3),
            Err(SpecError::ConstructorClash { .. })
        ));
    }

    #[test]
    fn operator_arity_examples() {
        let sig = parse_spec(STLC_MIN).unwrap();
        let mut theta = BTreeMap::new();
        theta.insert("a".to_string(), nat());
        theta.insert("b".to_string(), nat());
        let (args, res) = operator_arity(&sig, "lam", &theta).unwrap();
        assert_eq!(args, vec![(vec![nat()], nat())]);
        assert_eq!(res, arrow(nat(), nat()));
        let (args, res) = operator_arity(&sig, "app", &theta).unwrap();
        assert_eq!(args, vec![(vec![], arrow(nat(), nat())), (vec![], nat())]);
        assert_eq!(res, nat());

        let pd = parse_spec(PD).unwrap();
        let (args, res) = operator_arity(&pd, "pdiff", &BTreeMap::new()).unwrap();
        assert_eq!(args, vec![(vec![Sort::star()], Sort::star()), (vec![], Sort::star())]);
        assert_eq!(res, Sort::star());

        assert!(matches!(
            operator_arity(&sig, "nope", &theta),
            Err(SpecError::UnknownOperator(_))
        ));
        assert!(matches!(
            operator_arity(&sig, "lam", &BTreeMap::new()),
            Err(SpecError::IncompleteInstantiation(_))
        ));
    }

    #[test]
    fn dump_round_trip_and_stability() {
        for text in [STLC_MIN, PD] {
            let sig = parse_spec(text).unwrap();
            let d1 = dump_signature(&sig);
            let sig2 = parse_spec(&d1).unwrap();
            assert_eq!(sig.typecons, sig2.typecons);
            assert_eq!(sig.ops, sig2.ops);
            let d2 = dump_signature(&sig2);
            assert_eq!(d1, d2, "dump must be a fixed point");
        }
    }

    #[test]
    fn unify_minimality_and_soundness() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        let sort_strategy = prop::collection::vec(0u8..4, 1..6).prop_map(|seed| {
            // build a small sort over N and => from a byte seed
            let mut s = nat();
            for b in seed {
                if b % 2 == 0 {
                    s = arrow(nat(), s);
                } else {
                    s = arrow(s, nat());
                }
            }
            s
        });
        runner
            .run(&sort_strategy, |target| {
                let e = SortExpr::Con(
                    "=>".into(),
                    vec![SortExpr::Var("a".into()), SortExpr::Var("b".into())],
                );
                let mut theta = BTreeMap::new();
                if unify_sorts(&e, &target, &mut theta).is_ok() {
                    prop_assert_eq!(instantiate(&e, &theta).unwrap(), target);
                }
                Ok(())
            })
            .unwrap();
    }
}
