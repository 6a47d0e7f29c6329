//! Insertion-only `(1 − 1/e − ε)` threshold algorithm under a cardinality
//! constraint, and the OPT-guessing ladder around it.

mod ladder;
mod threshold;

pub use ladder::GuessLadder;
pub use threshold::CardinalityState;
