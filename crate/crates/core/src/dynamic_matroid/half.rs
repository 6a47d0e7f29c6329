use std::collections::HashSet;

use crate::dynamic_matroid::{enumerate_branches, reference_lpass, BranchParams, PruneGreedyState};
use crate::error::{Error, Result};
use crate::matroid::MatroidHandle;
use crate::oracle::{CountedOracle, Element, SetFunction};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfMode {
    /// One pruned greedy per branch tuple, refused above `budget` branches.
    Exhaustive { budget: u128 },
    /// Only the branch certified by the L-pass greedy on the current prefix.
    Guided,
}

/// `(1/2 − ε)` runner over an insertion-only stream.
pub struct CombinatorialHalf<'a, F, T> {
    oracle: &'a CountedOracle<F, T>,
    matroid: &'a MatroidHandle,
    params: BranchParams<T>,
    mode: HalfMode,
    branches: Vec<PruneGreedyState<T>>,
    prefix: Vec<Element>,
    seen: HashSet<Element>,
    best: (Vec<Element>, T),
    best_branch: Option<Vec<u32>>,
}

impl<'a, F: SetFunction<T>, T: Scalar> CombinatorialHalf<'a, F, T> {
    pub fn new(
        oracle: &'a CountedOracle<F, T>,
        matroid: &'a MatroidHandle,
        params: BranchParams<T>,
        mode: HalfMode,
    ) -> Result<Self> {
        let branches = match mode {
            HalfMode::Exhaustive { budget } => enumerate_branches(params.levels, params.budget_total, budget)?
                .into_iter()
                .map(|a| PruneGreedyState::new(params, a))
                .collect::<Result<Vec<_>>>()?,
            HalfMode::Guided => Vec::new(),
        };
        Ok(Self {
            oracle,
            matroid,
            params,
            mode,
            branches,
            prefix: Vec::new(),
            seen: HashSet::new(),
            best: (Vec::new(), T::zero()),
            best_branch: None,
        })
    }

    pub fn params(&self) -> &BranchParams<T> {
        &self.params
    }

    pub fn insert(&mut self, e: Element) -> Result<()> {
        if !self.seen.insert(e) {
            return Err(Error::DuplicateInsert(e));
        }
        self.prefix.push(e);
        match self.mode {
            HalfMode::Exhaustive { .. } => {
                let mut best: (Vec<Element>, T) = (Vec::new(), T::zero());
                let mut best_branch = None;
                for st in &mut self.branches {
                    st.insert(self.oracle, self.matroid, e)?;
                    if st.value() > best.1 {
                        best = (st.solution().to_vec(), st.value());
                        best_branch = Some(st.branch().to_vec());
                    }
                }
                self.best = best;
                self.best_branch = best_branch;
            }
            HalfMode::Guided => {
                let cert = reference_lpass(&self.prefix, &self.params, self.oracle, self.matroid)?;
                let mut st = PruneGreedyState::new(self.params, cert.branch)?;
                for &x in &self.prefix {
                    st.insert(self.oracle, self.matroid, x)?;
                }
                self.best = (st.solution().to_vec(), st.value());
                self.best_branch = Some(st.branch().to_vec());
            }
        }
        Ok(())
    }

    /// Best solution and its cached value after the latest round.
    pub fn solution(&self) -> (&[Element], T) {
        (&self.best.0, self.best.1)
    }

    /// Branch tuple that produced the current best solution.
    pub fn best_branch(&self) -> Option<&[u32]> {
        self.best_branch.as_deref()
    }

    pub fn branch_states(&self) -> &[PruneGreedyState<T>] {
        &self.branches
    }
}
