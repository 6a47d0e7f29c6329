//! Insertion-only dynamic submodular maximization under cardinality and
//! matroid constraints, hard-instance evaluators, and a replay harness with
//! per-round query accounting.
//!
//! Algorithms and evaluators are generic over [`Scalar`]; the aliases at the
//! crate root fix the scalar to `f64`.

// Negated comparisons reject NaN during validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cardinality;
pub mod dynamic_matroid;
pub mod error;
pub mod hard;
pub mod harness;
pub mod matroid;
pub mod objectives;
pub mod oracle;
pub mod scalar;
pub mod stream;

pub use error::{Error, Result};
pub use matroid::MatroidHandle;
pub use oracle::{CountedOracle, Element, SetFunction};
pub use scalar::Scalar;
pub use stream::{Stream, StreamOp};

pub type Coverage = objectives::CoverageFunction<f64>;
pub type Modular = objectives::ModularFunction<f64>;
pub type Point = objectives::FractionalPoint<f64>;
pub type Cardinality = cardinality::CardinalityState<f64>;
pub type Ladder = cardinality::GuessLadder<f64>;
pub type Bipartite = hard::BipartiteInstance<f64>;
pub type Tree = hard::ShuffledTreeInstance<f64>;
pub type SymGap = hard::SymGapParams<f64>;
