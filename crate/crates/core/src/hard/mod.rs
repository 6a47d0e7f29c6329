//! Exact evaluators and stream generators for the two adversarial families:
//! the colored bipartite construction and the shuffled tree construction.

pub mod analytic;
pub mod bipartite;
pub mod descriptor;
pub mod symgap;
pub mod traverse;
pub mod tree;
pub mod verify;

pub use analytic::{analytic_f, analytic_q};
pub use bipartite::{BipartiteInstance, BipartiteShape, SymmetricView, BRUTE_FORCE_MAX_BLOCKS};
pub use descriptor::{BipartiteDescriptor, InstanceDescriptor, ShuffleEntry, TreeDescriptor};
pub use symgap::{LogParams, SymGapParams};
pub use traverse::{traverse_length, traverse_stream, TraverseStream, DEFAULT_STREAM_CAP};
pub use tree::{NodePath, PresetInfo, ShuffledTreeInstance, WeightSequence, FULL_WALK_NODE_LIMIT};
pub use verify::{random_sparse_point, verify_bipartite, verify_instance, verify_tree, CheckOutcome, VerifyOptions};
