//! Equational theories and proof-script checking.
//!
//! The `theory` section of a signature file declares axioms, either
//! explicitly (`(name) mdecls |> vdecls |- lhs = rhs`) or through the
//! algebraic macros `unit of`, `commutative`, `associative`,
//! `distributes over`, and `annihilates`. Macros expand to the
//! left-handed axiom; the right-handed variant is added when the carrier
//! operator is declared commutative.
//!
//! Proof scripts state a goal and a chain of rewrite steps. Every
//! intermediate term is written out; the checker recomputes each step
//! (axiom or previously proved theorem, optionally reversed, instantiated
//! by a metavariable mapping, optionally inside a single marked hole) and
//! compares. Checking a script registers its goal as a theorem for later
//! scripts.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ctx::{concat, inl_ren, Ctx};
use crate::lexer::{lex, Cursor, Tok, Token};
use crate::metasub::{msub, MetaMap};
use crate::signature::{instantiate, parse_sortexpr, render_sort, Signature, Sort, SpecError};
use crate::term::{check, id_sub, parse_term_at, print_term, MCtx, MvarDecl, NamedCtx, Term};
use crate::traverse::ren;

/// A named equation between two terms over a metavariable context and an
/// object-variable context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub name: String,
    pub mctx: MCtx,
    pub ctx: Ctx,
    pub ctx_names: Vec<Option<String>>,
    pub sort: Sort,
    pub lhs: Term,
    pub rhs: Term,
}

/// A signature together with its elaborated axioms and the theorems
/// proved so far. The theorem list is append-only.
#[derive(Clone, Debug)]
pub struct Theory {
    pub sig: Signature,
    pub axioms: Vec<Axiom>,
    pub theorems: Vec<Axiom>,
}

impl Theory {
    pub fn axiom(&self, name: &str) -> Option<&Axiom> {
        self.axioms.iter().find(|a| a.name == name)
    }

    pub fn theorem(&self, name: &str) -> Option<&Axiom> {
        self.theorems.iter().find(|a| a.name == name)
    }

    fn name_taken(&self, name: &str) -> bool {
        self.axiom(name).is_some() || self.theorem(name).is_some()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("{line}: unknown theory macro in `{text}`")]
    UnknownMacro { line: u32, text: String },
    #[error("{line}: macro operator `{op}` is not usable here: {reason}")]
    MacroOperator { line: u32, op: String, reason: String },
    #[error("{line}: duplicate axiom name `{name}`")]
    DuplicateAxiom { line: u32, name: String },
    #[error("{line}: ill-sorted axiom `{name}`: {detail}")]
    IllSorted { line: u32, name: String, detail: String },
    #[error("{0}")]
    Parse(String),
}

/// Interpret the raw theory lines of a signature.
pub fn elaborate_theory(sig: Signature) -> Result<Theory, TheoryError> {
    let mut theory = Theory { sig, axioms: Vec::new(), theorems: Vec::new() };
    let lines = theory.sig.raw_theory.clone();

    // first pass: operators declared commutative anywhere in the block
    let mut commutative: Vec<String> = Vec::new();
    for line in &lines {
        let toks = lex_line(&line.text, line.line)?;
        if let [Token { tok: Tok::Quoted(f), .. }, Token { tok: Tok::Name(kw), .. }] = &toks[..] {
            if kw == "commutative" {
                commutative.push(f.clone());
            }
        }
    }

    for line in &lines {
        let toks = lex_line(&line.text, line.line)?;
        match toks.first().map(|t| &t.tok) {
            Some(Tok::Quoted(_)) => {
                expand_macro(&mut theory, &toks, line.line, &line.text, &commutative)?
            }
            Some(Tok::LParen) => parse_axiom_line(&mut theory, &toks, line.line)?,
            _ => {
                return Err(TheoryError::UnknownMacro { line: line.line, text: line.text.clone() })
            }
        }
    }
    Ok(theory)
}

fn lex_line(text: &str, line: u32) -> Result<Vec<Token>, TheoryError> {
    lex(text, line.saturating_sub(1)).map_err(|e| TheoryError::Parse(e.to_string()))
}

fn nullary(theory: &Theory, name: &str, line: u32) -> Result<(Term, Sort), TheoryError> {
    let decl = theory.sig.op(name).ok_or_else(|| TheoryError::MacroOperator {
        line,
        op: name.to_string(),
        reason: "not declared".into(),
    })?;
    if !decl.args.is_empty() || !decl.sortvars.is_empty() {
        return Err(TheoryError::MacroOperator {
            line,
            op: name.to_string(),
            reason: "must be a constant".into(),
        });
    }
    let sort = instantiate(&decl.result, &BTreeMap::new()).expect("ground");
    Ok((Term::con(name, BTreeMap::new(), Vec::new()), sort))
}

/// A binary operator usable by the macros: two non-binding arguments and
/// no sort variables.
fn binary(theory: &Theory, name: &str, line: u32) -> Result<(Sort, Sort, Sort), TheoryError> {
    let decl = theory.sig.op(name).ok_or_else(|| TheoryError::MacroOperator {
        line,
        op: name.to_string(),
        reason: "not declared".into(),
    })?;
    if decl.args.len() != 2
        || decl.args.iter().any(|a| !a.bound.is_empty())
        || !decl.sortvars.is_empty()
    {
        return Err(TheoryError::MacroOperator {
            line,
            op: name.to_string(),
            reason: "must take two plain arguments without sort variables".into(),
        });
    }
    let empty = BTreeMap::new();
    Ok((
        instantiate(&decl.args[0].body, &empty).expect("ground"),
        instantiate(&decl.args[1].body, &empty).expect("ground"),
        instantiate(&decl.result, &empty).expect("ground"),
    ))
}

fn symbol_or_name(theory: &Theory, op: &str) -> String {
    theory
        .sig
        .op(op)
        .and_then(|d| d.notation.as_ref())
        .map(|n| n.bare_symbol().to_string())
        .unwrap_or_else(|| op.to_string())
}

fn app2(op: &str, a: Term, b: Term) -> Term {
    Term::con(
        op,
        BTreeMap::new(),
        vec![
            crate::term::Arg { bound: Ctx::empty(), body: a },
            crate::term::Arg { bound: Ctx::empty(), body: b },
        ],
    )
}

fn hole(m: usize, sort: &Sort) -> (MvarDecl, Term) {
    let name = ["a", "b", "c"][m].to_string();
    (
        MvarDecl { name, params: Ctx::empty(), sort: sort.clone() },
        Term::mvar(m, crate::term::Sub::empty()),
    )
}

fn push_axiom(
    theory: &mut Theory,
    line: u32,
    name: String,
    mctx: MCtx,
    lhs: Term,
    rhs: Term,
) -> Result<(), TheoryError> {
    if theory.name_taken(&name) {
        return Err(TheoryError::DuplicateAxiom { line, name });
    }
    let ctx = Ctx::empty();
    let ls = check(&theory.sig, &mctx, &ctx, &lhs).map_err(|e| TheoryError::IllSorted {
        line,
        name: name.clone(),
        detail: e.to_string(),
    })?;
    let rs = check(&theory.sig, &mctx, &ctx, &rhs).map_err(|e| TheoryError::IllSorted {
        line,
        name: name.clone(),
        detail: e.to_string(),
    })?;
    if ls != rs {
        return Err(TheoryError::IllSorted {
            line,
            name,
            detail: format!("sides have sorts {} and {}", render_sort(&ls), render_sort(&rs)),
        });
    }
    theory.axioms.push(Axiom { name, mctx, ctx, ctx_names: Vec::new(), sort: ls, lhs, rhs });
    Ok(())
}

fn expand_macro(
    theory: &mut Theory,
    toks: &[Token],
    line: u32,
    text: &str,
    commutative: &[String],
) -> Result<(), TheoryError> {
    let quoted = |i: usize| -> Option<String> {
        match &toks.get(i)?.tok {
            Tok::Quoted(q) => Some(q.clone()),
            _ => None,
        }
    };
    let word = |i: usize| -> Option<&str> {
        match &toks.get(i)?.tok {
            Tok::Name(n) => Some(n.as_str()),
            _ => None,
        }
    };

    match (quoted(0), word(1), word(2)) {
        (Some(z), Some("unit"), Some("of")) => {
            let f = quoted(3)
                .ok_or_else(|| TheoryError::UnknownMacro { line, text: text.to_string() })?;
            let (zt, _) = nullary(theory, &z, line)?;
            let (_, s1, _) = binary(theory, &f, line)?;
            let prefix = symbol_or_name(theory, &z);
            let (decl, a) = hole(0, &s1);
            let mctx = MCtx(vec![decl]);
            push_axiom(
                theory,
                line,
                format!("{prefix}U{f}L"),
                mctx.clone(),
                app2(&f, zt.clone(), a.clone()),
                a.clone(),
            )?;
            if commutative.iter().any(|c| c == &f) {
                push_axiom(theory, line, format!("{prefix}U{f}R"), mctx, app2(&f, a.clone(), zt), a)?;
            }
            Ok(())
        }
        (Some(z), Some("annihilates"), _) => {
            let f = quoted(2)
                .ok_or_else(|| TheoryError::UnknownMacro { line, text: text.to_string() })?;
            let (zt, _) = nullary(theory, &z, line)?;
            let (_, s1, _) = binary(theory, &f, line)?;
            let prefix = symbol_or_name(theory, &z);
            let (decl, a) = hole(0, &s1);
            let mctx = MCtx(vec![decl]);
            push_axiom(
                theory,
                line,
                format!("{prefix}X{f}L"),
                mctx.clone(),
                app2(&f, zt.clone(), a.clone()),
                zt.clone(),
            )?;
            if commutative.iter().any(|c| c == &f) {
                push_axiom(theory, line, format!("{prefix}X{f}R"), mctx, app2(&f, a, zt.clone()), zt)?;
            }
            Ok(())
        }
        (Some(f), Some("commutative"), None) => {
            let (s0, s1, _) = binary(theory, &f, line)?;
            if s0 != s1 {
                return Err(TheoryError::MacroOperator {
                    line,
                    op: f,
                    reason: "argument sorts differ".into(),
                });
            }
            let (da, a) = hole(0, &s0);
            let (db, b) = hole(1, &s1);
            let mctx = MCtx(vec![da, db]);
            push_axiom(
                theory,
                line,
                format!("C{f}"),
                mctx,
                app2(&f, a.clone(), b.clone()),
                app2(&f, b, a),
            )
        }
        (Some(f), Some("associative"), None) => {
            let (s0, _, _) = binary(theory, &f, line)?;
            let (da, a) = hole(0, &s0);
            let (db, b) = hole(1, &s0);
            let (dc, c) = hole(2, &s0);
            let mctx = MCtx(vec![da, db, dc]);
            push_axiom(
                theory,
                line,
                format!("A{f}"),
                mctx,
                app2(&f, app2(&f, a.clone(), b.clone()), c.clone()),
                app2(&f, a, app2(&f, b, c)),
            )
        }
        (Some(f), Some("distributes"), Some("over")) => {
            let g = quoted(3)
                .ok_or_else(|| TheoryError::UnknownMacro { line, text: text.to_string() })?;
            let (s0, s1, _) = binary(theory, &f, line)?;
            let _ = binary(theory, &g, line)?;
            let (da, a) = hole(0, &s0);
            let (db, b) = hole(1, &s1);
            let (dc, c) = hole(2, &s1);
            let mctx = MCtx(vec![da, db, dc]);
            push_axiom(
                theory,
                line,
                format!("0D{g}L"),
                mctx.clone(),
                app2(&f, a.clone(), app2(&g, b.clone(), c.clone())),
                app2(&g, app2(&f, a.clone(), b.clone()), app2(&f, a.clone(), c.clone())),
            )?;
            if commutative.iter().any(|x| x == &f) {
                push_axiom(
                    theory,
                    line,
                    format!("0D{g}R"),
                    mctx,
                    app2(&f, app2(&g, b.clone(), c.clone()), a.clone()),
                    app2(&g, app2(&f, b, a.clone()), app2(&f, c, a)),
                )?;
            }
            Ok(())
        }
        _ => Err(TheoryError::UnknownMacro { line, text: text.to_string() }),
    }
}

/// `mdecls ::= { NAME ":" ["(" sorts ")"] sortexpr }` up to a stop token.
/// The first parameter of a metavariable is de Bruijn index 0 in its
/// environment.
fn parse_mdecls(sig: &Signature, c: &mut Cursor, stop: &Tok) -> Result<MCtx, TheoryError> {
    let mut out = Vec::new();
    while let Some(t) = c.peek() {
        if &t.tok == stop {
            break;
        }
        let name = match &t.tok {
            Tok::Name(n) => n.clone(),
            other => {
                return Err(TheoryError::Parse(format!(
                    "{}:{}: expected metavariable name, found `{other}`",
                    t.line, t.col
                )))
            }
        };
        c.next();
        expect(c, &Tok::Colon)?;
        let mut params = Vec::new();
        if matches!(c.peek().map(|t| &t.tok), Some(Tok::LParen)) {
            c.next();
            loop {
                params.push(ground_sort(sig, c)?);
                match c.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        c.next();
                    }
                    _ => break,
                }
            }
            expect(c, &Tok::RParen)?;
        }
        let sort = ground_sort(sig, c)?;
        out.push(MvarDecl { name, params: Ctx(params), sort });
    }
    Ok(MCtx(out))
}

/// `vdecls ::= { NAME ":" sortexpr }` up to a stop token. The first
/// declaration is de Bruijn index 0.
fn parse_vdecls(
    sig: &Signature,
    c: &mut Cursor,
    stop: &Tok,
) -> Result<(Ctx, Vec<Option<String>>), TheoryError> {
    let mut sorts = Vec::new();
    let mut names = Vec::new();
    while let Some(t) = c.peek() {
        if &t.tok == stop {
            break;
        }
        let name = match &t.tok {
            Tok::Name(n) => n.clone(),
            other => {
                return Err(TheoryError::Parse(format!(
                    "{}:{}: expected variable name, found `{other}`",
                    t.line, t.col
                )))
            }
        };
        c.next();
        expect(c, &Tok::Colon)?;
        sorts.push(ground_sort(sig, c)?);
        names.push(Some(name));
    }
    Ok((Ctx(sorts), names))
}

fn ground_sort(sig: &Signature, c: &mut Cursor) -> Result<Sort, TheoryError> {
    let (line, col) = c.here();
    let e = parse_sortexpr(c, sig).map_err(|e| TheoryError::Parse(e.to_string()))?;
    instantiate(&e, &BTreeMap::new())
        .map_err(|_: SpecError| TheoryError::Parse(format!("{line}:{col}: sort must be ground")))
}

fn expect(c: &mut Cursor, want: &Tok) -> Result<(), TheoryError> {
    let (line, col) = c.here();
    match c.next() {
        Some(t) if &t.tok == want => Ok(()),
        other => Err(TheoryError::Parse(format!(
            "{line}:{col}: expected `{want}`{}",
            other.map(|t| format!(", found `{}`", t.tok)).unwrap_or_default()
        ))),
    }
}

fn parse_axiom_line(theory: &mut Theory, toks: &[Token], line: u32) -> Result<(), TheoryError> {
    let mut c = Cursor::new(toks);
    expect(&mut c, &Tok::LParen)?;
    let name = match c.next().map(|t| t.tok.clone()) {
        Some(Tok::Name(n)) => n,
        _ => return Err(TheoryError::Parse(format!("{line}: expected axiom name"))),
    };
    expect(&mut c, &Tok::RParen)?;
    let mctx = parse_mdecls(&theory.sig, &mut c, &Tok::Triangle)?;
    expect(&mut c, &Tok::Triangle)?;
    let (ctx, ctx_names) = parse_vdecls(&theory.sig, &mut c, &Tok::Turnstile)?;
    expect(&mut c, &Tok::Turnstile)?;
    let named: NamedCtx = ctx_names.iter().cloned().zip(ctx.iter().cloned()).collect();
    let (lhs, sort) = parse_term_at(&theory.sig, &mctx, &named, &mut c, None)
        .map_err(|e| TheoryError::Parse(e.to_string()))?;
    expect(&mut c, &Tok::Equals)?;
    let (rhs, _) = parse_term_at(&theory.sig, &mctx, &named, &mut c, Some(&sort))
        .map_err(|e| TheoryError::Parse(e.to_string()))?;
    if !c.at_end() {
        let (l, co) = c.here();
        return Err(TheoryError::Parse(format!("{l}:{co}: trailing tokens in axiom line")));
    }
    if theory.name_taken(&name) {
        return Err(TheoryError::DuplicateAxiom { line, name });
    }
    // terms come checked out of the parser; re-validate anyway
    check(&theory.sig, &mctx, &ctx, &lhs)
        .and_then(|_| check(&theory.sig, &mctx, &ctx, &rhs))
        .map_err(|e| TheoryError::IllSorted { line, name: name.clone(), detail: e.to_string() })?;
    theory.axioms.push(Axiom { name, mctx, ctx, ctx_names, sort, lhs, rhs });
    Ok(())
}

// ---------------------------------------------------------------------------
// Proof scripts
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Axiom,
    Theorem,
}

/// One rewrite step, already resolved against the theory.
#[derive(Clone, Debug)]
pub enum Step {
    /// Apply a named axiom or theorem, instantiated by `map`; `rev`
    /// applies it right-to-left.
    Rule { kind: RuleKind, name: String, rev: bool, map: MetaMap },
    /// Apply `inner` inside the single occurrence of `hole` in `context`,
    /// a term over the goal metavariables extended by the hole.
    Cong { hole: MvarDecl, context: Term, inner: Box<Step> },
}

#[derive(Clone, Debug)]
pub struct ProofScript {
    pub goal: Axiom,
    pub first: Term,
    pub steps: Vec<(Step, Term)>,
}

#[derive(Debug, Error, Clone)]
pub enum ProofError {
    #[error("{0}")]
    Parse(String),
    #[error("unknown axiom or theorem `{0}`")]
    UnknownRule(String),
    #[error("metavariable `{mvar}` of `{rule}` not instantiated")]
    MissingBinding { rule: String, mvar: String },
    #[error("`{rule}` has no metavariable `{mvar}`")]
    UnknownBinding { rule: String, mvar: String },
    #[error("axiom context {axiom} does not embed into the goal context {goal}")]
    ContextEmbedding { axiom: String, goal: String },
    #[error("the hole `{0}` must occur exactly once in the congruence context, found {1}")]
    HoleCount(String, usize),
    #[error("step {index}: current term does not match the rule's source\n  expected: {expected}\n  found:    {found}")]
    SideMismatch { index: usize, expected: String, found: String },
    #[error("step {index}: stated term differs from the computed one\n  computed: {computed}\n  stated:   {stated}")]
    IntermediateMismatch { index: usize, computed: String, stated: String },
    #[error("chain must start at the goal's left side\n  goal lhs: {expected}\n  found:    {found}")]
    WrongStart { expected: String, found: String },
    #[error("chain ends at `{found}` but the goal's right side is `{expected}`")]
    WrongEnd { expected: String, found: String },
    #[error("duplicate theorem name `{0}`")]
    DuplicateTheorem(String),
    #[error("ill-sorted goal: {0}")]
    IllSortedGoal(String),
    #[error("step {index}: rewritten term fails to re-check: {detail}")]
    StepCheck { index: usize, detail: String },
}

/// The two sides of a step at `(mctx, ctx)`: what the current term must
/// equal, and what it becomes.
fn step_sides(
    theory: &Theory,
    step: &Step,
    mctx: &MCtx,
    ctx: &Ctx,
) -> Result<(Term, Term), ProofError> {
    match step {
        Step::Rule { kind, name, rev, map } => {
            let stmt = match kind {
                RuleKind::Axiom => theory.axiom(name),
                RuleKind::Theorem => theory.theorem(name),
            }
            .ok_or_else(|| ProofError::UnknownRule(name.clone()))?;
            let (lhs, rhs) = instantiate_axiom(stmt, map)?;
            if *rev {
                Ok((rhs, lhs))
            } else {
                Ok((lhs, rhs))
            }
        }
        Step::Cong { hole, context, inner } => {
            let inner_ctx = concat(&hole.params, ctx);
            let (isrc, itgt) = step_sides(theory, inner, mctx, &inner_ctx)?;
            let occurrences = count_mvar(context, mctx.len());
            if occurrences != 1 {
                return Err(ProofError::HoleCount(hole.name.clone(), occurrences));
            }
            let fill = |replacement: Term| -> Term {
                let (extended, _) = mctx.extended(hole.clone());
                let mut entries: Vec<Term> = mctx
                    .0
                    .iter()
                    .enumerate()
                    .map(|(m, d)| Term::mvar(m, id_sub(&d.params)))
                    .collect();
                entries.push(replacement);
                let map = MetaMap::new(extended, mctx.clone(), ctx.clone(), entries)
                    .expect("one entry per metavariable");
                msub(context, &map)
            };
            Ok((fill(isrc), fill(itgt)))
        }
    }
}

fn count_mvar(t: &Term, mvar: usize) -> usize {
    match t {
        Term::Var(_) => 0,
        Term::MVar { mvar: m, env } => {
            usize::from(*m == mvar)
                + env.entries.iter().map(|e| count_mvar(e, mvar)).sum::<usize>()
        }
        Term::Con { args, .. } => args.iter().map(|a| count_mvar(&a.body, mvar)).sum(),
    }
}

/// Instantiate both sides of a statement through a metavariable mapping
/// whose global context extends the statement's context on the right.
pub fn instantiate_axiom(stmt: &Axiom, map: &MetaMap) -> Result<(Term, Term), ProofError> {
    let n = stmt.ctx.len();
    if map.global.len() < n || map.global.0[..n] != stmt.ctx.0[..] {
        return Err(ProofError::ContextEmbedding {
            axiom: stmt.ctx.to_string(),
            goal: map.global.to_string(),
        });
    }
    let pad = Ctx(map.global.0[n..].to_vec());
    let weaken = inl_ren(&stmt.ctx, &pad);
    let lhs = msub(&ren(&stmt.lhs, &weaken), map);
    let rhs = msub(&ren(&stmt.rhs, &weaken), map);
    Ok((lhs, rhs))
}

/// Check one step against the current term and return the rewritten
/// term. The result always re-checks at the ambient sort.
pub fn check_step(
    theory: &Theory,
    index: usize,
    current: &Term,
    step: &Step,
    mctx: &MCtx,
    ctx: &Ctx,
    names: &[Option<String>],
) -> Result<Term, ProofError> {
    let (src, tgt) = step_sides(theory, step, mctx, ctx)?;
    if current != &src {
        return Err(ProofError::SideMismatch {
            index,
            expected: print_term(&theory.sig, mctx, names, &src),
            found: print_term(&theory.sig, mctx, names, current),
        });
    }
    check(&theory.sig, mctx, ctx, &tgt)
        .map_err(|e| ProofError::StepCheck { index, detail: e.to_string() })?;
    Ok(tgt)
}

#[derive(Debug)]
pub struct ProofReport {
    pub name: String,
    pub steps: usize,
}

/// Check a script and, on success, register its goal as a theorem.
pub fn check_proof(theory: &mut Theory, script: &ProofScript) -> Result<ProofReport, ProofError> {
    let goal = &script.goal;
    if theory.name_taken(&goal.name) {
        return Err(ProofError::DuplicateTheorem(goal.name.clone()));
    }
    let names = &goal.ctx_names;
    check(&theory.sig, &goal.mctx, &goal.ctx, &goal.lhs)
        .and_then(|_| check(&theory.sig, &goal.mctx, &goal.ctx, &goal.rhs))
        .map_err(|e| ProofError::IllSortedGoal(e.to_string()))?;
    if script.first != goal.lhs {
        return Err(ProofError::WrongStart {
            expected: print_term(&theory.sig, &goal.mctx, names, &goal.lhs),
            found: print_term(&theory.sig, &goal.mctx, names, &script.first),
        });
    }
    let mut current = script.first.clone();
    for (i, (step, stated)) in script.steps.iter().enumerate() {
        let computed = check_step(theory, i + 1, &current, step, &goal.mctx, &goal.ctx, names)?;
        if &computed != stated {
            return Err(ProofError::IntermediateMismatch {
                index: i + 1,
                computed: print_term(&theory.sig, &goal.mctx, names, &computed),
                stated: print_term(&theory.sig, &goal.mctx, names, stated),
            });
        }
        current = computed;
    }
    if current != goal.rhs {
        return Err(ProofError::WrongEnd {
            expected: print_term(&theory.sig, &goal.mctx, names, &goal.rhs),
            found: print_term(&theory.sig, &goal.mctx, names, &current),
        });
    }
    theory.theorems.push(goal.clone());
    Ok(ProofReport { name: goal.name.clone(), steps: script.steps.len() })
}

// ---------------------------------------------------------------------------
// Proof-script parsing
// ---------------------------------------------------------------------------

/// Parse and check every `theorem` block of a script file in order,
/// registering each proved goal before the next block is resolved.
pub fn check_proof_file(theory: &mut Theory, text: &str) -> Result<Vec<ProofReport>, ProofError> {
    let toks = lex(text, 0).map_err(|e| ProofError::Parse(e.to_string()))?;
    let mut c = Cursor::new(&toks);
    let mut reports = Vec::new();
    while !c.at_end() {
        let script = parse_theorem_block(theory, &mut c)?;
        reports.push(check_proof(theory, &script)?);
    }
    Ok(reports)
}

fn pexpect(c: &mut Cursor, want: &Tok) -> Result<(), ProofError> {
    let (line, col) = c.here();
    match c.next() {
        Some(t) if &t.tok == want => Ok(()),
        other => Err(ProofError::Parse(format!(
            "{line}:{col}: expected `{want}`{}",
            other.map(|t| format!(", found `{}`", t.tok)).unwrap_or_default()
        ))),
    }
}

fn pname(c: &mut Cursor, what: &str) -> Result<String, ProofError> {
    let (line, col) = c.here();
    match c.next().map(|t| t.tok.clone()) {
        Some(Tok::Name(n)) => Ok(n),
        other => Err(ProofError::Parse(format!(
            "{line}:{col}: expected {what}{}",
            other.map(|t| format!(", found `{t}`")).unwrap_or_default()
        ))),
    }
}

/// `theorem NAME : mdecls |> vdecls |- term ~ term` followed by the
/// chain `term { ~[ step ] term }`.
pub fn parse_theorem_block(theory: &Theory, c: &mut Cursor) -> Result<ProofScript, ProofError> {
    let kw = pname(c, "`theorem`")?;
    if kw != "theorem" {
        return Err(ProofError::Parse(format!("expected `theorem`, found `{kw}`")));
    }
    let name = pname(c, "theorem name")?;
    pexpect(c, &Tok::Colon)?;
    let sig = &theory.sig;
    let mctx =
        parse_mdecls(sig, c, &Tok::Triangle).map_err(|e| ProofError::Parse(e.to_string()))?;
    pexpect(c, &Tok::Triangle)?;
    let (ctx, ctx_names) =
        parse_vdecls(sig, c, &Tok::Turnstile).map_err(|e| ProofError::Parse(e.to_string()))?;
    pexpect(c, &Tok::Turnstile)?;
    let named: NamedCtx = ctx_names.iter().cloned().zip(ctx.iter().cloned()).collect();
    let (lhs, sort) =
        parse_term_at(sig, &mctx, &named, c, None).map_err(|e| ProofError::Parse(e.to_string()))?;
    pexpect(c, &Tok::Tilde)?;
    let (rhs, _) = parse_term_at(sig, &mctx, &named, c, Some(&sort))
        .map_err(|e| ProofError::Parse(e.to_string()))?;
    let goal = Axiom { name, mctx, ctx, ctx_names, sort, lhs, rhs };

    let (first, _) = parse_term_at(sig, &goal.mctx, &named, c, Some(&goal.sort))
        .map_err(|e| ProofError::Parse(e.to_string()))?;
    let mut steps = Vec::new();
    while matches!(c.peek().map(|t| &t.tok), Some(Tok::Tilde)) {
        c.next();
        pexpect(c, &Tok::LBrack)?;
        let step = parse_step(theory, c, &goal.mctx, &goal.ctx, &named)?;
        pexpect(c, &Tok::RBrack)?;
        let (stated, _) = parse_term_at(sig, &goal.mctx, &named, c, Some(&goal.sort))
            .map_err(|e| ProofError::Parse(e.to_string()))?;
        steps.push((step, stated));
    }
    Ok(ProofScript { goal, first, steps })
}

/// `("ax"|"thm") NAME ["rev"] ["with" "(" NAME ":=" term {"," ...} ")"]`
/// or `"cong" "(" step ")" "at" term "hole" NAME ":" ["(" sorts ")"] sort`.
fn parse_step(
    theory: &Theory,
    c: &mut Cursor,
    mctx: &MCtx,
    ctx: &Ctx,
    named: &NamedCtx,
) -> Result<Step, ProofError> {
    let kw = pname(c, "`ax`, `thm`, or `cong`")?;
    match kw.as_str() {
        "ax" | "thm" => {
            let kind = if kw == "ax" { RuleKind::Axiom } else { RuleKind::Theorem };
            let name = pname(c, "rule name")?;
            let stmt = match kind {
                RuleKind::Axiom => theory.axiom(&name),
                RuleKind::Theorem => theory.theorem(&name),
            }
            .ok_or_else(|| ProofError::UnknownRule(name.clone()))?
            .clone();
            let mut rev = false;
            if matches!(c.peek().map(|t| &t.tok), Some(Tok::Name(n)) if n == "rev") {
                c.next();
                rev = true;
            }
            let mut bindings: Vec<(String, Term)> = Vec::new();
            if matches!(c.peek().map(|t| &t.tok), Some(Tok::Name(n)) if n == "with") {
                c.next();
                pexpect(c, &Tok::LParen)?;
                loop {
                    let mname = pname(c, "metavariable name")?;
                    pexpect(c, &Tok::Assign)?;
                    let decl = stmt
                        .mctx
                        .0
                        .iter()
                        .find(|d| d.name == mname)
                        .ok_or_else(|| ProofError::UnknownBinding {
                            rule: name.clone(),
                            mvar: mname.clone(),
                        })?;
                    // the entry lives under the metavariable's parameters
                    let mut entry_named: NamedCtx =
                        decl.params.iter().map(|s| (None, s.clone())).collect();
                    entry_named.extend(named.iter().cloned());
                    let (t, _) =
                        parse_term_at(&theory.sig, mctx, &entry_named, c, Some(&decl.sort))
                            .map_err(|e| ProofError::Parse(e.to_string()))?;
                    bindings.push((mname, t));
                    match c.peek().map(|t| &t.tok) {
                        Some(Tok::Comma) => {
                            c.next();
                        }
                        _ => break,
                    }
                }
                pexpect(c, &Tok::RParen)?;
            }
            let entries = stmt
                .mctx
                .0
                .iter()
                .map(|d| {
                    bindings
                        .iter()
                        .find(|(n, _)| n == &d.name)
                        .map(|(_, t)| t.clone())
                        .ok_or_else(|| ProofError::MissingBinding {
                            rule: name.clone(),
                            mvar: d.name.clone(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let map = MetaMap::new(stmt.mctx.clone(), mctx.clone(), ctx.clone(), entries)
                .expect("entries cover the statement metavariables");
            Ok(Step::Rule { kind, name, rev, map })
        }
        "cong" => {
            pexpect(c, &Tok::LParen)?;
            // the inner step's terms live under the hole's parameters,
            // which are declared after the context term: capture the
            // token range now, resolve once the hole is known
            let inner_start = c.pos;
            skip_balanced(c)?;
            let inner_end = c.pos;
            pexpect(c, &Tok::RParen)?;
            let at_kw = pname(c, "`at`")?;
            if at_kw != "at" {
                return Err(ProofError::Parse(format!("expected `at`, found `{at_kw}`")));
            }
            // context term runs up to the `hole` keyword at depth zero
            let ctx_start = c.pos;
            let mut depth = 0i32;
            while let Some(t) = c.peek() {
                match &t.tok {
                    Tok::LParen | Tok::LBrack => depth += 1,
                    Tok::RParen | Tok::RBrack => depth -= 1,
                    Tok::Name(n) if n == "hole" && depth == 0 => break,
                    _ => {}
                }
                c.next();
            }
            let ctx_end = c.pos;
            let hole_kw = pname(c, "`hole`")?;
            debug_assert_eq!(hole_kw, "hole");
            let hole_name = pname(c, "hole name")?;
            pexpect(c, &Tok::Colon)?;
            let mut params = Vec::new();
            if matches!(c.peek().map(|t| &t.tok), Some(Tok::LParen)) {
                c.next();
                loop {
                    params.push(
                        ground_sort(&theory.sig, c)
                            .map_err(|e| ProofError::Parse(e.to_string()))?,
                    );
                    match c.peek().map(|t| &t.tok) {
                        Some(Tok::Comma) => {
                            c.next();
                        }
                        _ => break,
                    }
                }
                pexpect(c, &Tok::RParen)?;
            }
            let hole_sort =
                ground_sort(&theory.sig, c).map_err(|e| ProofError::Parse(e.to_string()))?;
            if mctx.index_of(&hole_name).is_some() {
                return Err(ProofError::Parse(format!(
                    "hole name `{hole_name}` collides with a goal metavariable"
                )));
            }
            let hole = MvarDecl { name: hole_name, params: Ctx(params), sort: hole_sort };

            // resolve the context term over the extended metavariable context
            let (extended, _) = mctx.extended(hole.clone());
            let mut cctx = Cursor::new(&c.toks[..ctx_end]);
            cctx.pos = ctx_start;
            let (context, _) = parse_term_at(&theory.sig, &extended, named, &mut cctx, None)
                .map_err(|e| ProofError::Parse(e.to_string()))?;
            if cctx.pos != ctx_end {
                let (l, co) = cctx.here();
                return Err(ProofError::Parse(format!(
                    "{l}:{co}: trailing tokens in congruence context"
                )));
            }

            // resolve the inner step in the hole's context
            let inner_ctx = concat(&hole.params, ctx);
            let mut inner_named: NamedCtx =
                hole.params.iter().map(|s| (None, s.clone())).collect();
            inner_named.extend(named.iter().cloned());
            let mut ic = Cursor::new(&c.toks[..inner_end]);
            ic.pos = inner_start;
            let inner = parse_step(theory, &mut ic, mctx, &inner_ctx, &inner_named)?;
            if ic.pos != inner_end {
                let (l, co) = ic.here();
                return Err(ProofError::Parse(format!(
                    "{l}:{co}: trailing tokens in congruence step"
                )));
            }
            Ok(Step::Cong { hole, context, inner: Box::new(inner) })
        }
        other => {
            Err(ProofError::Parse(format!("expected `ax`, `thm`, or `cong`, found `{other}`")))
        }
    }
}

/// Advance to the token that closes the current group, leaving the
/// cursor on the `)`.
fn skip_balanced(c: &mut Cursor) -> Result<(), ProofError> {
    let mut depth = 0i32;
    while let Some(t) = c.peek() {
        match &t.tok {
            Tok::LParen | Tok::LBrack => depth += 1,
            Tok::RParen | Tok::RBrack => {
                if depth == 0 {
                    return Ok(());
                }
                depth -= 1;
            }
            _ => {}
        }
        c.next();
    }
    let (line, col) = c.here();
    Err(ProofError::Parse(format!("{line}:{col}: unbalanced parentheses in step")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_spec;
    use crate::term::parse_term;

    fn pd_theory() -> Theory {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/corpus/pd.soas"
        ))
        .unwrap();
        elaborate_theory(parse_spec(&text).unwrap()).unwrap()
    }

    #[test]
    fn macro_expansion_produces_expected_axioms() {
        let theory = pd_theory();
        let names: Vec<&str> = theory.axioms.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "Cadd", "Cmult", "Aadd", "Amult", "0UaddL", "0UaddR", "1UmultL", "1UmultR",
                "0XmultL", "0XmultR", "0DaddL", "0DaddR", "invAdd", "pdAdd", "pdMul", "pdC",
                "pdCh2",
            ]
        );

        // 0UaddL is add(zero, a) = a over one metavariable and no variables
        let unit = theory.axiom("0UaddL").unwrap();
        assert_eq!(unit.mctx.len(), 1);
        assert!(unit.ctx.is_empty());
        let lhs = parse_term(&theory.sig, &unit.mctx, &vec![], "add(zero, a)", None).unwrap();
        assert_eq!(unit.lhs, lhs);
        assert_eq!(unit.rhs, parse_term(&theory.sig, &unit.mctx, &vec![], "a", None).unwrap());

        // distribution: mult(a, add(b, c)) = add(mult(a, b), mult(a, c))
        let dist = theory.axiom("0DaddL").unwrap();
        let lhs =
            parse_term(&theory.sig, &dist.mctx, &vec![], "mult(a, add(b, c))", None).unwrap();
        let rhs = parse_term(
            &theory.sig,
            &dist.mctx,
            &vec![],
            "add(mult(a, b), mult(a, c))",
            None,
        )
        .unwrap();
        assert_eq!(dist.lhs, lhs);
        assert_eq!(dist.rhs, rhs);

        // the explicit differentiation axiom parses to the stated shape
        let pdmul = theory.axiom("pdMul").unwrap();
        assert_eq!(pdmul.ctx.len(), 1);
        let named = vec![(Some("x".to_string()), Sort::star())];
        let lhs = parse_term(&theory.sig, &pdmul.mctx, &named, "pdiff(w. mult(a, w), x)", None)
            .unwrap();
        assert_eq!(pdmul.lhs, lhs);
    }

    #[test]
    fn unknown_macro_rejected() {
        let text = "term\n zero : -> *\ntheory\n 'zero' frobnicates 'zero'\n";
        let sig = parse_spec(text).unwrap();
        assert!(matches!(elaborate_theory(sig), Err(TheoryError::UnknownMacro { .. })));
    }

    #[test]
    fn ill_sorted_axiom_rejected() {
        let text = "
type
  N : 0-ary
  B : 0-ary
term
  tt : -> B
  ze : -> N
theory
  (bad) |> |- tt = ze
";
        let sig = parse_spec(text).unwrap();
        match elaborate_theory(sig) {
            Err(TheoryError::Parse(msg)) => assert!(msg.contains("mismatch"), "{msg}"),
            other => panic!("expected ill-sorted axiom, got {other:?}"),
        }
    }

    #[test]
    fn axiom_instantiation_examples() {
        let theory = pd_theory();
        let star = Sort::star();
        let global = Ctx(vec![star.clone()]);
        let named = vec![(Some("x".to_string()), star.clone())];

        // pdMul with (a := zero) at [x : *]
        let pdmul = theory.axiom("pdMul").unwrap();
        let zero = parse_term(&theory.sig, &MCtx::empty(), &named, "zero", None).unwrap();
        let map =
            MetaMap::new(pdmul.mctx.clone(), MCtx::empty(), global.clone(), vec![zero.clone()])
                .unwrap();
        let (lhs, rhs) = instantiate_axiom(pdmul, &map).unwrap();
        let expected_lhs =
            parse_term(&theory.sig, &MCtx::empty(), &named, "pdiff(w. mult(zero, w), x)", None)
                .unwrap();
        assert_eq!(lhs, expected_lhs);
        assert_eq!(rhs, zero);

        // 0UaddL with (a := x0) at [*]
        let unit = theory.axiom("0UaddL").unwrap();
        let x0 = parse_term(&theory.sig, &MCtx::empty(), &named, "x", None).unwrap();
        let map =
            MetaMap::new(unit.mctx.clone(), MCtx::empty(), global.clone(), vec![x0.clone()])
                .unwrap();
        let (lhs, rhs) = instantiate_axiom(unit, &map).unwrap();
        assert_eq!(
            lhs,
            parse_term(&theory.sig, &MCtx::empty(), &named, "add(zero, x)", None).unwrap()
        );
        assert_eq!(rhs, x0);

        // a context that does not extend the axiom's is rejected
        let bad = MetaMap::new(pdmul.mctx.clone(), MCtx::empty(), Ctx::empty(), vec![zero])
            .unwrap();
        assert!(matches!(
            instantiate_axiom(pdmul, &bad),
            Err(ProofError::ContextEmbedding { .. })
        ));
    }

    #[test]
    fn proof_file_checks_and_registers() {
        let mut theory = pd_theory();
        let script = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/corpus/pd-proofs.eqp"
        ))
        .unwrap();
        let reports = check_proof_file(&mut theory, &script).unwrap();
        let names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, vec!["d0zero", "chain1"]);
        assert_eq!(reports[0].steps, 2);
        assert_eq!(reports[1].steps, 4);
        assert!(theory.theorem("d0zero").is_some());
        assert!(theory.theorem("chain1").is_some());
    }

    #[test]
    fn replay_is_deterministic() {
        let script = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/corpus/pd-proofs.eqp"
        ))
        .unwrap();
        let mut t1 = pd_theory();
        let mut t2 = pd_theory();
        let r1 = check_proof_file(&mut t1, &script).unwrap();
        let r2 = check_proof_file(&mut t2, &script).unwrap();
        assert_eq!(
            r1.iter().map(|r| (&r.name, r.steps)).collect::<Vec<_>>(),
            r2.iter().map(|r| (&r.name, r.steps)).collect::<Vec<_>>()
        );
        assert_eq!(t1.theorems, t2.theorems);
    }

    #[test]
    fn mutated_intermediate_fails_at_the_right_step() {
        let mut theory = pd_theory();
        let script = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/corpus/pd-proofs.eqp"
        ))
        .unwrap();
        // corrupt the first intermediate term of d0zero
        let mutated = script.replacen("pdiff(w. mult(zero, w), x)", "pdiff(w. mult(w, w), x)", 1);
        assert_ne!(script, mutated);
        match check_proof_file(&mut theory, &mutated) {
            Err(ProofError::IntermediateMismatch { index: 1, .. }) => {}
            other => panic!("expected a mismatch at step 1, got {other:?}"),
        }
        assert!(theory.theorem("d0zero").is_none());
    }

    #[test]
    fn reversed_steps_restore_the_term() {
        let theory = pd_theory();
        let star = Sort::star();
        let named = vec![(Some("x".to_string()), star.clone())];
        let ctx = Ctx(vec![star.clone()]);
        let x0 = parse_term(&theory.sig, &MCtx::empty(), &named, "x", None).unwrap();
        let unit = theory.axiom("0UaddL").unwrap();
        let map = MetaMap::new(unit.mctx.clone(), MCtx::empty(), ctx.clone(), vec![x0.clone()])
            .unwrap();
        let fwd = Step::Rule {
            kind: RuleKind::Axiom,
            name: "0UaddL".into(),
            rev: false,
            map: map.clone(),
        };
        let rev =
            Step::Rule { kind: RuleKind::Axiom, name: "0UaddL".into(), rev: true, map };
        let start =
            parse_term(&theory.sig, &MCtx::empty(), &named, "add(zero, x)", None).unwrap();
        let names = vec![Some("x".to_string())];
        let mid =
            check_step(&theory, 1, &start, &fwd, &MCtx::empty(), &ctx, &names).unwrap();
        assert_eq!(mid, x0);
        let back = check_step(&theory, 2, &mid, &rev, &MCtx::empty(), &ctx, &names).unwrap();
        assert_eq!(back, start);
    }

    #[test]
    fn bare_hole_congruence_is_the_inner_step() {
        // cong with context = the hole itself behaves like the plain rule
        let mut theory = pd_theory();
        let script = "
theorem triv : |> x : * |- add(zero, x) ~ x
  add(zero, x)
  ~[ cong (ax 0UaddL with (a := x0)) at o hole o : * ]
  x
";
        let reports = check_proof_file(&mut theory, script).unwrap();
        assert_eq!(reports[0].name, "triv");
    }

    #[test]
    fn side_mismatch_reports_both_terms() {
        let mut theory = pd_theory();
        let script = "
theorem wrong : |> x : * |- add(zero, x) ~ x
  add(zero, x)
  ~[ ax pdMul with (a := zero) ]
  x
";
        match check_proof_file(&mut theory, script) {
            Err(ProofError::SideMismatch { index: 1, expected, found }) => {
                assert!(expected.contains("pdiff"), "{expected}");
                assert!(found.contains('+') || found.contains("add"), "{found}");
            }
            other => panic!("expected side mismatch, got {other:?}"),
        }
    }
}
