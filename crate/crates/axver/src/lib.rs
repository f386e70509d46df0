//! axver — a verifier for uninterpreted coherent programs modulo axiom sets.
//!
//! Programs over uninterpreted functions and relations are verified against
//! quantifier-free postconditions, with the data domain constrained by
//! per-symbol axioms: reflexivity, irreflexivity, symmetry and transitivity
//! of relations, strict partial and total orders, and commutativity and
//! idempotence of functions. Axioms other than transitivity are eliminated
//! by instrumenting the execution language with extra assumes; transitivity
//! is tracked by a streaming congruence-closure automaton; strict total
//! orders are first translated into positive branching and their
//! strict-partial-order part. Every automaton verdict is cross-validated
//! against a term-level oracle built on congruence closure and minimal
//! models.

pub mod axioms;
pub mod cli;
pub mod exec;
pub mod instrument;
pub mod oracle;
pub mod scc;
pub mod syntax;
pub mod verifier;
pub mod vocab;

pub use axioms::{validate_axioms, AxiomError, AxiomSet, FnProp, RelProp};
pub use exec::{ExecLetter, Execution};
pub use verifier::{check_coherence, check_trace, verify, ExploreOptions, Outcome, Verdict};
pub use vocab::{Fun, Rel, Var, Vocab};
