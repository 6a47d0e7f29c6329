//! Concrete objectives and the multilinear extension.

mod coverage;
mod modular;
mod multilinear;

pub use coverage::CoverageFunction;
pub use modular::ModularFunction;
pub use multilinear::{
    hoeffding_samples, multilinear_enumerate, multilinear_estimate, multilinear_exact, plus_direction, Estimate, EstimatorBudget,
    FractionalPoint, ResidualMode, ResidualMultilinear, EXACT_SUPPORT_LIMIT,
};
