use std::collections::HashSet;

use crate::dynamic_matroid::BranchParams;
use crate::error::{Error, Result};
use crate::matroid::MatroidHandle;
use crate::oracle::{gain_of, CountedOracle, Element, SetFunction};
use crate::scalar::Scalar;

/// Resumable state of the multi-level pruned greedy for one branch tuple.
///
/// Level `j` accepts feasible elements whose marginal clears `(1+ε)^{−j}·OPT`
/// and spends their marginals from budget `c_j = a_j·Δ`. When the active budget
/// is spent the next positive level takes over and rescans the full history.
#[derive(Debug, Clone)]
pub struct PruneGreedyState<T> {
    params: BranchParams<T>,
    branch: Vec<u32>,
    budgets: Vec<T>,
    level: Option<usize>,
    solution: Vec<Element>,
    members: HashSet<Element>,
    value: T,
    history: Vec<Element>,
    terminated: bool,
    tests: u64,
}

impl<T: Scalar> PruneGreedyState<T> {
    pub fn new(params: BranchParams<T>, branch: Vec<u32>) -> Result<Self> {
        if !params.contains(&branch) {
            return Err(Error::param(format!("branch {branch:?} is outside the branch space")));
        }
        let budgets: Vec<T> = (0..params.levels).map(|j| params.level_budget(&branch, j)).collect();
        let level = budgets.iter().position(|&c| c > T::zero());
        Ok(Self {
            params,
            branch,
            budgets,
            level,
            solution: Vec::new(),
            members: HashSet::new(),
            value: T::zero(),
            history: Vec::new(),
            terminated: false,
            tests: 0,
        })
    }

    pub fn params(&self) -> &BranchParams<T> {
        &self.params
    }

    pub fn branch(&self) -> &[u32] {
        &self.branch
    }

    pub fn budgets(&self) -> &[T] {
        &self.budgets
    }

    /// Active level (0-based), `None` once every budget is spent.
    pub fn level(&self) -> Option<usize> {
        self.level
    }

    pub fn solution(&self) -> &[Element] {
        &self.solution
    }

    /// Cached `h(S)`.
    pub fn value(&self) -> T {
        self.value
    }

    pub fn history(&self) -> &[Element] {
        &self.history
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Marginal tests issued; each costs one raw eval and one independence query.
    pub fn marginal_tests(&self) -> u64 {
        self.tests
    }

    /// Processes one insertion; a terminated state ignores further input.
    pub fn insert<F: SetFunction<T>>(
        &mut self,
        oracle: &CountedOracle<F, T>,
        matroid: &MatroidHandle,
        e: Element,
    ) -> Result<()> {
        if self.terminated {
            return Ok(());
        }
        self.history.push(e);
        let Some(level) = self.level else {
            self.terminated = true;
            return Ok(());
        };
        if self.try_add(oracle, matroid, e, level)? && self.budgets[level] <= T::zero() {
            self.revoke(oracle, matroid)?;
        }
        Ok(())
    }

    fn try_add<F: SetFunction<T>>(
        &mut self,
        oracle: &CountedOracle<F, T>,
        matroid: &MatroidHandle,
        e: Element,
        level: usize,
    ) -> Result<bool> {
        if self.members.contains(&e) || !matroid.can_add(&self.solution, e)? {
            return Ok(false);
        }
        self.tests += 1;
        let gain = gain_of(oracle, self.value, &self.solution, e)?;
        if gain.marginal < self.params.level_threshold(level) {
            return Ok(false);
        }
        self.budgets[level] -= gain.marginal;
        self.solution.push(e);
        self.members.insert(e);
        self.value = gain.value_with;
        debug_assert!(matroid.is_independent(&self.solution).unwrap_or(false));
        Ok(true)
    }

    fn revoke<F: SetFunction<T>>(&mut self, oracle: &CountedOracle<F, T>, matroid: &MatroidHandle) -> Result<()> {
        'advance: loop {
            self.level = self.budgets.iter().position(|&c| c > T::zero());
            let Some(level) = self.level else {
                self.terminated = true;
                return Ok(());
            };
            for i in 0..self.history.len() {
                let e = self.history[i];
                if self.try_add(oracle, matroid, e, level)? && self.budgets[level] <= T::zero() {
                    continue 'advance;
                }
            }
            return Ok(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::ModularFunction;

    fn params(levels: usize, r: usize, opt: f64) -> BranchParams<f64> {
        BranchParams::with_overrides(0.5, opt, levels, r).unwrap()
    }

    #[test]
    fn all_zero_branch_terminates_on_first_insert() {
        let o = CountedOracle::new(ModularFunction::new(vec![1.0, 2.0]));
        let m = MatroidHandle::uniform(1, 2);
        let mut st = PruneGreedyState::new(params(3, 4, 2.0), vec![0, 0, 0]).unwrap();
        assert!(!st.is_terminated());
        st.insert(&o, &m, 0).unwrap();
        assert!(st.is_terminated());
        assert!(st.solution().is_empty());
        assert_eq!(o.queries(), 0);
    }

    #[test]
    fn single_heavy_element_exhausts_first_level() {
        // OPT=4, R=2 → Δ=4, a=(1,0): c₁=4; element of value 4 clears OPT and spends it.
        let o = CountedOracle::new(ModularFunction::new(vec![1.0, 4.0, 3.0]));
        let m = MatroidHandle::uniform(1, 3);
        let mut st = PruneGreedyState::new(params(2, 2, 4.0), vec![1, 0]).unwrap();
        st.insert(&o, &m, 0).unwrap();
        assert!(!st.is_terminated());
        st.insert(&o, &m, 1).unwrap();
        assert!(st.is_terminated());
        assert_eq!(st.solution(), &[1]);
        assert!(st.budgets().iter().all(|&c| c <= 0.0));
    }

    #[test]
    fn revoke_rescans_history_at_next_level() {
        // OPT=4, ε=0.5: thresholds 4, 8/3. a=(1,1), Δ=2.
        let o = CountedOracle::new(ModularFunction::new(vec![3.0, 5.0, 0.5]));
        let m = MatroidHandle::uniform(3, 3);
        let mut st = PruneGreedyState::new(params(2, 4, 4.0), vec![1, 1]).unwrap();
        st.insert(&o, &m, 0).unwrap();
        assert!(st.solution().is_empty());
        st.insert(&o, &m, 1).unwrap();
        assert_eq!(st.solution(), &[1, 0]);
        assert!(st.is_terminated());
    }

    #[test]
    fn rejects_branch_outside_space() {
        assert!(PruneGreedyState::new(params(2, 2, 1.0), vec![2, 1]).is_err());
        assert!(PruneGreedyState::new(params(2, 2, 1.0), vec![1]).is_err());
    }
}
