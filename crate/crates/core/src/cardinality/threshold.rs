use std::collections::{BTreeMap, HashSet};

use log::debug;

use crate::error::{Error, Result};
use crate::oracle::{gain_of, CountedOracle, Element, SetFunction};
use crate::scalar::Scalar;

/// Lazy-bucket threshold state for a fixed guess of OPT.
///
/// `S` only grows. Rejected elements wait in bucket `⌊f_S(e)/Δ⌋` with their
/// filing-time marginal and are re-tested when the residual threshold drops.
#[derive(Debug, Clone)]
pub struct CardinalityState<T> {
    k: usize,
    epsilon: f64,
    opt: T,
    delta: T,
    solution: Vec<Element>,
    value: T,
    buckets: Vec<BTreeMap<Element, T>>,
    seen: HashSet<Element>,
    tests: u64,
    tolerance: T,
}

impl<T: Scalar> CardinalityState<T> {
    pub fn new(k: usize, epsilon: f64, opt: T) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param(format!("epsilon {epsilon} outside (0,1)")));
        }
        if !(opt > T::zero()) || !opt.is_finite() {
            return Err(Error::param(format!("OPT guess {opt} must be positive")));
        }
        let delta = T::lit(epsilon) * opt / T::from_usize_lossy(k);
        let top = (1.0 / epsilon).floor() as usize;
        Ok(Self {
            k,
            epsilon,
            opt,
            delta,
            solution: Vec::new(),
            value: T::zero(),
            buckets: vec![BTreeMap::new(); top + 1],
            seen: HashSet::new(),
            tests: 0,
            tolerance: T::lit(1e-9) * opt.max(T::one()),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn opt_guess(&self) -> T {
        self.opt
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Current solution in acceptance order.
    pub fn solution(&self) -> &[Element] {
        &self.solution
    }

    /// Cached `f(S)`.
    pub fn value(&self) -> T {
        self.value
    }

    /// Number of marginal tests issued; each is one raw eval.
    pub fn marginal_tests(&self) -> u64 {
        self.tests
    }

    /// Queries under the two-per-marginal convention.
    pub fn charged_queries(&self) -> u64 {
        2 * self.tests
    }

    /// Upper bound `2(⌊1/ε⌋+2)` on charged queries per inserted element.
    pub fn charged_budget_per_element(&self) -> u64 {
        2 * (self.buckets.len() as u64 + 1)
    }

    /// Bucket `ℓ` as `(element, filing-time marginal)` pairs.
    pub fn bucket(&self, level: usize) -> impl Iterator<Item = (Element, T)> + '_ {
        self.buckets[level].iter().map(|(&e, &m)| (e, m))
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    fn threshold(&self) -> T {
        (self.opt - self.value) / T::from_usize_lossy(self.k) - self.delta
    }

    fn bucket_index(&self, marginal: T, cap: usize) -> usize {
        let raw = (marginal / self.delta).floor().to_i64().unwrap_or(i64::MAX).max(0) as usize;
        if raw > cap {
            debug!("marginal {marginal} maps to bucket {raw}, clamped to {cap}");
            cap
        } else {
            raw
        }
    }

    fn test<F: SetFunction<T>>(&mut self, oracle: &CountedOracle<F, T>, e: Element) -> Result<(T, T)> {
        self.tests += 1;
        let gain = gain_of(oracle, self.value, &self.solution, e)?;
        if gain.marginal < -self.tolerance {
            return Err(Error::OracleIntegrity { element: e, marginal: gain.marginal.as_f64() });
        }
        Ok((gain.marginal, gain.value_with))
    }

    /// Processes one insertion.
    pub fn insert<F: SetFunction<T>>(&mut self, oracle: &CountedOracle<F, T>, e: Element) -> Result<()> {
        if e >= oracle.ground_size() {
            return Err(Error::UnknownElement { element: e, ground: oracle.ground_size() });
        }
        if !self.seen.insert(e) {
            return Err(Error::DuplicateInsert(e));
        }
        let (marginal, with) = self.test(oracle, e)?;
        if self.solution.len() < self.k && marginal >= self.threshold() {
            self.accept(e, with);
            self.revoke(oracle)
        } else {
            let level = self.bucket_index(marginal, self.buckets.len() - 1);
            self.buckets[level].insert(e, marginal);
            Ok(())
        }
    }

    fn accept(&mut self, e: Element, with: T) {
        self.solution.push(e);
        self.value = with;
    }

    fn revoke<F: SetFunction<T>>(&mut self, oracle: &CountedOracle<F, T>) -> Result<()> {
        while self.solution.len() < self.k {
            let ratio = (self.opt - self.value) / (T::from_usize_lossy(self.k) * self.delta);
            let r = ratio.floor().to_i64().unwrap_or(0).max(0) as usize;
            let Some(level) = (r..self.buckets.len()).rev().find(|&l| !self.buckets[l].is_empty()) else {
                break;
            };
            let (e, _) = self.buckets[level].pop_first().expect("bucket is non-empty");
            let (marginal, with) = self.test(oracle, e)?;
            if marginal >= self.threshold() {
                self.accept(e, with);
            } else {
                let lower = self.bucket_index(marginal, r.saturating_sub(1));
                self.buckets[lower].insert(e, marginal);
            }
        }
        Ok(())
    }
}
