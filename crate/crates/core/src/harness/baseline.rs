//! Offline greedy baseline and per-round `OPT_t` computation.

use crate::error::{Error, Result};
use crate::harness::config::OptMode;
use crate::oracle::{binomial, brute_force_opt, Constraint, CountedOracle, Element, SetFunction};
use crate::scalar::Scalar;

/// Greedy over `ground`: repeatedly adds the feasible element with the largest
/// positive marginal, ties to the smallest id.
pub fn offline_greedy<F: SetFunction<T>, T: Scalar>(
    oracle: &CountedOracle<F, T>,
    constraint: Constraint<'_>,
    ground: &[Element],
) -> Result<(Vec<Element>, T)> {
    let mut pool = ground.to_vec();
    pool.sort_unstable();
    pool.dedup();
    let mut chosen: Vec<Element> = Vec::new();
    let mut value = T::zero();
    loop {
        if let Constraint::Cardinality(k) = constraint {
            if chosen.len() >= k {
                break;
            }
        }
        let mut best: Option<(usize, T)> = None;
        for (i, &e) in pool.iter().enumerate() {
            if let Constraint::Matroid(m) = constraint {
                if !m.can_add(&chosen, e)? {
                    continue;
                }
            }
            chosen.push(e);
            let v = oracle.eval(&chosen)?;
            chosen.pop();
            if v > value && best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        let Some((i, v)) = best else { break };
        chosen.push(pool.remove(i));
        value = v;
    }
    chosen.sort_unstable();
    Ok((chosen, value))
}

/// Reference value for one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptEstimate {
    pub value: f64,
    /// False when `value` is an upper-bound proxy rather than the optimum.
    pub exact: bool,
}

/// Multiplier turning a greedy value into an upper bound on the optimum.
pub fn greedy_bound_factor(constraint: Constraint<'_>) -> f64 {
    match constraint {
        Constraint::Cardinality(_) => 1.0 / (1.0 - (-1f64).exp()),
        Constraint::Matroid(_) => 2.0,
    }
}

/// Number of candidate subsets the exhaustive optimizer would visit.
pub fn enumeration_size(constraint: Constraint<'_>, live: usize) -> u128 {
    let cap = match constraint {
        Constraint::Cardinality(k) => k,
        Constraint::Matroid(m) => m.rank_bound(),
    }
    .min(live);
    (0..=cap as u64).map(|j| binomial(live as u64, j)).fold(0u128, u128::saturating_add)
}

pub fn opt_for_round<F: SetFunction<f64>>(
    probe: &CountedOracle<F, f64>,
    constraint: Constraint<'_>,
    live: &[Element],
    mode: OptMode,
) -> Result<OptEstimate> {
    let bound = || -> Result<OptEstimate> {
        let (_, v) = offline_greedy(probe, constraint, live)?;
        Ok(OptEstimate { value: v * greedy_bound_factor(constraint), exact: false })
    };
    match mode {
        OptMode::Known(v) => Ok(OptEstimate { value: v, exact: true }),
        OptMode::GreedyBound => bound(),
        OptMode::BruteForce { budget } => {
            let (_, v) = brute_force_opt(probe, constraint, live, budget)?;
            Ok(OptEstimate { value: v, exact: true })
        }
        OptMode::Auto { budget } => {
            if enumeration_size(constraint, live.len()) <= budget {
                let (_, v) = brute_force_opt(probe, constraint, live, budget)?;
                Ok(OptEstimate { value: v, exact: true })
            } else {
                bound()
            }
        }
    }
}

/// `value / opt`, with `0/0 = 1`.
pub fn ratio(value: f64, opt: f64) -> Result<f64> {
    if opt > 0.0 {
        Ok(value / opt)
    } else if value <= 0.0 {
        Ok(1.0)
    } else {
        Err(Error::invariant(format!("solution value {value} exceeds a zero optimum")))
    }
}
