//! A signature-generic engine for syntax with variable binding and
//! parametrised metavariables.
//!
//! Given a textual signature declaring sorts and operators with binding
//! arities, the crate provides: nameless well-sorted terms with
//! metavariable holes, renaming and capture-avoiding substitution,
//! capture-permitting metasubstitution, a generic fold into user-defined
//! algebras, an equational theory layer with a proof-script checker, a
//! small-step evaluator for the lambda-calculus corpus, and a registry of
//! randomized law checks over all of the above.

pub mod ctx;
pub mod eqlog;
pub mod laws;
pub mod lexer;
pub mod metasub;
pub mod semantics;
pub mod signature;
pub mod term;
pub mod traverse;
