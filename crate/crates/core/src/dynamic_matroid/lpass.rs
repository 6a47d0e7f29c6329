use std::collections::HashSet;

use crate::dynamic_matroid::BranchParams;
use crate::error::{Error, Result};
use crate::matroid::MatroidHandle;
use crate::oracle::{gain_of, CountedOracle, Element, SetFunction};
use crate::scalar::Scalar;

/// Output of the offline L-pass greedy.
#[derive(Debug, Clone, PartialEq)]
pub struct LPassResult<T> {
    /// Elements collected by each pass, in acceptance order.
    pub collected: Vec<Vec<Element>>,
    /// Pruned prefix of each pass that is kept.
    pub kept: Vec<Vec<Element>>,
    /// Floor-rounded budgets `a*_ℓ = ⌊h_T(S_ℓ)/Δ⌋`.
    pub branch: Vec<u32>,
    /// `h` of the union of kept sets.
    pub value: T,
}

impl<T> LPassResult<T> {
    /// Union of the kept sets in pass order.
    pub fn union(&self) -> Vec<Element> {
        self.kept.iter().flatten().copied().collect()
    }
}

/// Offline L-pass greedy over `prefix` certifying a branch for the pruned greedy.
///
/// Pass `ℓ` collects `S_ℓ` against threshold `(1+ε)^{−(ℓ−1)}·OPT` on top of the
/// kept union `T`, then keeps the shortest prefix of `S_ℓ` whose marginals
/// exhaust `a*_ℓ·Δ`, using the same arithmetic as [`PruneGreedyState`].
///
/// [`PruneGreedyState`]: crate::dynamic_matroid::PruneGreedyState
pub fn reference_lpass<F: SetFunction<T>, T: Scalar>(
    prefix: &[Element],
    params: &BranchParams<T>,
    oracle: &CountedOracle<F, T>,
    matroid: &MatroidHandle,
) -> Result<LPassResult<T>> {
    let mut kept_union: Vec<Element> = Vec::new();
    let mut in_kept: HashSet<Element> = HashSet::new();
    let mut kept_value = T::zero();
    let mut result = LPassResult { collected: Vec::new(), kept: Vec::new(), branch: Vec::new(), value: T::zero() };

    for level in 0..params.levels {
        let threshold = params.level_threshold(level);
        let mut current = kept_union.clone();
        let mut in_current = in_kept.clone();
        let mut value = kept_value;
        let mut collected = Vec::new();
        let mut gains = Vec::new();
        for &e in prefix {
            if in_current.contains(&e) || !matroid.can_add(&current, e)? {
                continue;
            }
            let gain = gain_of(oracle, value, &current, e)?;
            if gain.marginal >= threshold {
                current.push(e);
                in_current.insert(e);
                value = gain.value_with;
                collected.push(e);
                gains.push(gain);
            }
        }
        let units = ((value - kept_value) / params.delta).floor();
        let a = if params.delta > T::zero() { units.to_u32().unwrap_or(u32::MAX) } else { 0 };
        let mut budget = T::from_usize_lossy(a as usize) * params.delta;
        let mut kept = Vec::new();
        if budget > T::zero() {
            for (&e, g) in collected.iter().zip(&gains) {
                budget -= g.marginal;
                kept.push(e);
                kept_value = g.value_with;
                if budget <= T::zero() {
                    break;
                }
            }
        }
        for &e in &kept {
            kept_union.push(e);
            in_kept.insert(e);
        }
        result.collected.push(collected);
        result.kept.push(kept);
        result.branch.push(a);
    }
    result.value = kept_value;
    let total: u64 = result.branch.iter().map(|&a| a as u64).sum();
    if total > params.budget_total as u64 {
        return Err(Error::invariant(format!(
            "L-pass budgets sum to {total} > R = {}; the OPT guess is mis-scaled",
            params.budget_total
        )));
    }
    Ok(result)
}
