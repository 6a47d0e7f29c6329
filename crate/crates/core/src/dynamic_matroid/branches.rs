use crate::error::{Error, Result};
use crate::oracle::binomial;
use crate::scalar::Scalar;

/// Default cap on `|𝒜|` for exhaustive enumeration.
pub const DEFAULT_BRANCH_BUDGET: u128 = 200_000;

/// Level count `L`, budget total `R` and unit `Δ` for one OPT guess.
///
/// `Δ = 2·OPT/R₀` where `R₀` is the unrounded budget total, so the floor-rounded
/// level budgets of a run with value at most `2·OPT` always fit in `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchParams<T> {
    pub levels: usize,
    pub budget_total: usize,
    pub epsilon: f64,
    pub opt: T,
    pub delta: T,
}

impl<T: Scalar> BranchParams<T> {
    /// `L = ⌈ln(k/ε)/ε⌉`, `R = ⌈2·ln(k/ε)/ε²⌉`, `Δ = ε²·OPT/ln(k/ε)`.
    pub fn new(rank: usize, epsilon: f64, opt: T) -> Result<Self> {
        if rank == 0 || !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param(format!("invalid branch parameters rank={rank} epsilon={epsilon}")));
        }
        if !(opt >= T::zero()) || !opt.is_finite() {
            return Err(Error::param(format!("OPT guess {opt} must be finite and non-negative")));
        }
        let log = (rank as f64 / epsilon).ln();
        let r0 = 2.0 * log / (epsilon * epsilon);
        Ok(Self {
            levels: (log / epsilon).ceil() as usize,
            budget_total: r0.ceil() as usize,
            epsilon,
            opt,
            delta: T::lit(2.0 / r0) * opt,
        })
    }

    /// Explicit `L` and `R`; `Δ = 2·OPT/R`.
    pub fn with_overrides(epsilon: f64, opt: T, levels: usize, budget_total: usize) -> Result<Self> {
        if levels == 0 || budget_total == 0 || !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("overridden L and R must be positive and epsilon in (0,1)"));
        }
        Ok(Self {
            levels,
            budget_total,
            epsilon,
            opt,
            delta: T::lit(2.0) * opt / T::from_usize_lossy(budget_total),
        })
    }

    /// Same `L`, `R` with a different OPT guess.
    pub fn rescaled(&self, opt: T) -> Self {
        let ratio = if self.opt > T::zero() { self.delta / self.opt } else { T::lit(2.0 / self.budget_total as f64) };
        Self { opt, delta: ratio * opt, ..*self }
    }

    /// Threshold of level `j` (0-based): `(1+ε)^{−j}·OPT`.
    pub fn level_threshold(&self, j: usize) -> T {
        self.opt * T::lit((1.0 + self.epsilon).powi(-(j as i32)))
    }

    /// Budget of level `j` for branch tuple `a`.
    pub fn level_budget(&self, a: &[u32], j: usize) -> T {
        T::from_usize_lossy(a[j] as usize) * self.delta
    }

    pub fn contains(&self, a: &[u32]) -> bool {
        a.len() == self.levels && a.iter().map(|&x| x as u64).sum::<u64>() <= self.budget_total as u64
    }
}

/// `|𝒜| = Σ_{d=0}^{R} C(d+L−1, L−1) = C(R+L, L)`.
pub fn branch_count(levels: usize, budget_total: usize) -> u128 {
    binomial((levels + budget_total) as u64, levels as u64)
}

/// All tuples in `𝒜`, ordered with the last coordinate most significant.
pub fn enumerate_branches(levels: usize, budget_total: usize, budget: u128) -> Result<Vec<Vec<u32>>> {
    let needed = branch_count(levels, budget_total);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget, hint: " (use guided mode)" });
    }
    let mut out = Vec::with_capacity(needed as usize);
    let mut cur = vec![0u32; levels];
    fill(levels, budget_total as u32, &mut cur, &mut out);
    Ok(out)
}

fn fill(pos: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos == 0 {
        out.push(cur.clone());
        return;
    }
    for v in 0..=remaining {
        cur[pos - 1] = v;
        fill(pos - 1, remaining - v, cur, out);
    }
    cur[pos - 1] = 0;
}
