//! Executions and their semantics: the alphabet, term evaluation, assumption
//! accumulation, and regular languages of program executions.

pub mod letter;
pub mod nfa;
pub mod term;

pub use letter::{ExecLetter, Execution};
pub use nfa::{append_post_violation, apply_homomorphism, build_exec_nfa, ExecNfa, StateId};
pub use term::{computed_terms, kappa, teval, GroundAtom, Replay, TermArena, TermId, TermNode};
