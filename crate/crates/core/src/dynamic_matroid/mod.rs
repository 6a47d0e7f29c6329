//! Matroid-constrained insertion-only algorithms: the branch space, the
//! multi-level pruned greedy, its offline L-pass certificate, the `(1/2 − ε)`
//! combinatorial runner and the continuous-greedy amplifier with rounding.

mod amplified;
mod branches;
mod half;
mod lpass;
mod prune_greedy;

pub use amplified::{
    amplified_exhaustive, amplified_guided, guess_grid, AmplifiedBranch, AmplifiedOutcome, AmplifierConfig,
    StagePlan,
};
pub use branches::{branch_count, enumerate_branches, BranchParams, DEFAULT_BRANCH_BUDGET};
pub use half::{CombinatorialHalf, HalfMode};
pub use lpass::{reference_lpass, LPassResult};
pub use prune_greedy::PruneGreedyState;
