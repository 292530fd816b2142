//! A reflective higher-order asynchronous process calculus with namespace
//! logic: processes communicate quoted processes over quoted-process
//! channels, policies are logic formulas over namespaces, and program
//! equivalence is barbed bisimulation parameterized by the observable names.
//!
//! Modules:
//! - [`syntax`]: terms, canonical forms, substitution, printing
//! - [`parse`]: the surface language (`.rho`)
//! - [`sugar`]: `def`/`new`/`match` desugaring, replication encodings
//! - [`reduce`]: operational semantics and bounded exploration
//! - [`bisim`]: barbed bisimulation over observable name sets
//! - [`logic`]: namespace-logic formulas, checking, policy presets (`.nsl`)
//! - [`ocap`]: a small JavaScript subset translated via CPS into the calculus
//! - [`gen`]: seeded random term/formula generators for testing
//! - [`cli`]: the command-line front end

pub mod bisim;
pub mod cli;
pub mod gen;
pub mod logic;
pub mod ocap;
pub mod parse;
pub mod reduce;
pub mod sugar;
pub mod syntax;

pub use syntax::{Binder, GroundTerm, InputProc, Name, OutputProc, Proc};
