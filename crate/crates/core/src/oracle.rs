//! Ground-set model, the counted value oracle and generic test oracles
//! (submodularity sampler, exhaustive optimizer).
//!
//! Every algorithm in this crate sees the objective only through a
//! [`CountedOracle`], whose counter is the single source of truth for query
//! complexity.

use std::marker::PhantomData;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matroid::MatroidHandle;
use crate::objectives::FractionalPoint;
use crate::scalar::Scalar;

/// Element identifier. Ground sets are the dense range `0..ground_size`.
pub type Element = usize;

/// A normalized set function `f: 2^V -> R` with `f(∅) = 0`.
///
/// `value` receives distinct element ids in arbitrary order and must return
/// the same bits regardless of that order.
pub trait SetFunction<T: Scalar>: Send + Sync {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &[Element]) -> T;

    /// Closed-form multilinear extension, when the function admits one.
    fn multilinear_closed_form(&self, _x: &FractionalPoint<T>) -> Option<T> {
        None
    }
}

impl<T: Scalar, F: SetFunction<T> + ?Sized> SetFunction<T> for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, set: &[Element]) -> T {
        (**self).value(set)
    }
    fn multilinear_closed_form(&self, x: &FractionalPoint<T>) -> Option<T> {
        (**self).multilinear_closed_form(x)
    }
}

impl<T: Scalar, F: SetFunction<T> + ?Sized> SetFunction<T> for Box<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, set: &[Element]) -> T {
        (**self).value(set)
    }
    fn multilinear_closed_form(&self, x: &FractionalPoint<T>) -> Option<T> {
        (**self).multilinear_closed_form(x)
    }
}

/// Checks that every id lies inside a ground set of size `ground`.
pub fn validate_elements(set: &[Element], ground: usize) -> Result<()> {
    match set.iter().find(|&&e| e >= ground) {
        Some(&element) => Err(Error::UnknownElement { element, ground }),
        None => Ok(()),
    }
}

/// Set-function evaluator with a monotone query counter.
///
/// The counter is atomic so one oracle may be shared by parallel readers.
pub struct CountedOracle<F, T> {
    inner: F,
    count: AtomicU64,
    _scalar: PhantomData<fn() -> T>,
}

impl<F: SetFunction<T>, T: Scalar> CountedOracle<F, T> {
    pub fn new(inner: F) -> Self {
        Self { inner, count: AtomicU64::new(0), _scalar: PhantomData }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    /// Number of evaluations issued so far.
    pub fn queries(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    /// Evaluates `f(set)`, charging exactly one query.
    pub fn eval(&self, set: &[Element]) -> Result<T> {
        validate_elements(set, self.inner.ground_size())?;
        self.count.fetch_add(1, Ordering::Relaxed);
        if set.is_empty() {
            return Ok(T::zero());
        }
        Ok(self.inner.value(set))
    }
}

/// Outcome of a marginal evaluation against a cached base value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain<T> {
    /// `f(S ∪ T) − f(S)`.
    pub marginal: T,
    /// `f(S ∪ T)`, reusable as the next cached base value.
    pub value_with: T,
}

fn union(s: &[Element], t: &[Element]) -> Vec<Element> {
    let mut u = Vec::with_capacity(s.len() + t.len());
    u.extend_from_slice(s);
    u.extend_from_slice(t);
    u.sort_unstable();
    u.dedup();
    u
}

/// `f_S(T) = f(S ∪ T) − f(S)`, charging two queries.
pub fn marginal<F: SetFunction<T>, T: Scalar>(
    oracle: &CountedOracle<F, T>,
    s: &[Element],
    t: &[Element],
) -> Result<T> {
    let base = oracle.eval(s)?;
    let with = oracle.eval(&union(s, t))?;
    Ok(with - base)
}

/// `f_S(T)` given a caller-cached `f(S)`, charging one query.
pub fn marginal_cached<F: SetFunction<T>, T: Scalar>(
    oracle: &CountedOracle<F, T>,
    f_s: T,
    s: &[Element],
    t: &[Element],
) -> Result<Gain<T>> {
    let with = oracle.eval(&union(s, t))?;
    Ok(Gain { marginal: with - f_s, value_with: with })
}

/// Single-element marginal `f_S(e)` given cached `f(S)`; `s` must not contain `e`.
pub fn gain_of<F: SetFunction<T>, T: Scalar>(
    oracle: &CountedOracle<F, T>,
    f_s: T,
    s: &[Element],
    e: Element,
) -> Result<Gain<T>> {
    let mut with = Vec::with_capacity(s.len() + 1);
    with.extend_from_slice(s);
    with.push(e);
    let value_with = oracle.eval(&with)?;
    Ok(Gain { marginal: value_with - f_s, value_with })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Submodularity,
    Monotonicity,
}

/// A sampled triple `(S ⊆ T, e ∉ T)` that breaks diminishing returns or monotonicity.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub s: Vec<Element>,
    pub t: Vec<Element>,
    pub e: Element,
    pub gain_s: f64,
    pub gain_t: f64,
}

#[derive(Debug, Clone, Default)]
pub struct PropertyReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `trials` triples `(S ⊆ T, e ∉ T)` and records every triple with
/// `f_S(e) < f_T(e) − tol` or `f_S(e) < −tol` (also `f_T(e) < −tol`).
///
/// `|T|` is uniform on `0..=min(max_size, n−1)`, `S` is a uniform-size random
/// subset of `T`. Deterministic given `seed`.
pub fn check_submodular_monotone<F: SetFunction<T>, T: Scalar>(
    oracle: &CountedOracle<F, T>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<PropertyReport> {
    check_submodular_monotone_capped(oracle, trials, seed, tol, usize::MAX)
}

pub fn check_submodular_monotone_capped<F: SetFunction<T>, T: Scalar>(
    oracle: &CountedOracle<F, T>,
    trials: usize,
    seed: u64,
    tol: f64,
    max_size: usize,
) -> Result<PropertyReport> {
    let n = oracle.ground_size();
    if n == 0 {
        return Err(Error::param("submodularity check needs a non-empty ground set"));
    }
    if !(tol >= 0.0) {
        return Err(Error::param("tolerance must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<Element> = (0..n).collect();
    let mut report = PropertyReport { trials, violations: Vec::new() };
    let t_cap = max_size.min(n - 1);
    for _ in 0..trials {
        perm.shuffle(&mut rng);
        let t_len = rng.gen_range(0..=t_cap);
        let t: Vec<Element> = perm[..t_len].to_vec();
        let e = perm[t_len];
        let s_len = rng.gen_range(0..=t_len);
        let mut s = t.clone();
        s.shuffle(&mut rng);
        s.truncate(s_len);

        let fs = oracle.eval(&s)?;
        let ft = oracle.eval(&t)?;
        let gs = gain_of(oracle, fs, &s, e)?.marginal.as_f64();
        let gt = gain_of(oracle, ft, &t, e)?.marginal.as_f64();
        let mut record = |kind| {
            report.violations.push(Violation {
                kind,
                s: s.clone(),
                t: t.clone(),
                e,
                gain_s: gs,
                gain_t: gt,
            })
        };
        if gs < gt - tol {
            record(ViolationKind::Submodularity);
        }
        if gs < -tol || gt < -tol {
            record(ViolationKind::Monotonicity);
        }
    }
    Ok(report)
}

/// Feasibility constraint for exhaustive optimization.
#[derive(Clone, Copy)]
pub enum Constraint<'a> {
    Cardinality(usize),
    Matroid(&'a MatroidHandle),
}

/// Default cap on the number of candidate subsets enumerated by [`brute_force_opt`].
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 5_000_000;

/// Binomial coefficient as `u128`, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Exact maximizer of `f` over feasible subsets of `ground`.
///
/// Ties resolve to the lexicographically smallest sorted id vector. Refuses
/// (never approximates) when the candidate count exceeds `budget`.
pub fn brute_force_opt<F: SetFunction<T>, T: Scalar>(
    oracle: &CountedOracle<F, T>,
    constraint: Constraint<'_>,
    ground: &[Element],
    budget: u128,
) -> Result<(Vec<Element>, T)> {
    let mut ground = ground.to_vec();
    ground.sort_unstable();
    ground.dedup();
    validate_elements(&ground, oracle.ground_size())?;
    let n = ground.len() as u64;
    let cap = match constraint {
        Constraint::Cardinality(k) => k.min(ground.len()),
        Constraint::Matroid(m) => m.rank_bound().min(ground.len()),
    };
    let needed: u128 = (0..=cap as u64).map(|j| binomial(n, j)).fold(0u128, |a, b| a.saturating_add(b));
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget, hint: "" });
    }

    let mut best = (Vec::new(), T::zero());
    let mut current = Vec::with_capacity(cap);
    let mut search = Search { oracle, constraint, ground: &ground, cap, best: &mut best };
    search.dfs(0, &mut current)?;
    Ok(best)
}

struct Search<'a, 'b, F, T> {
    oracle: &'a CountedOracle<F, T>,
    constraint: Constraint<'a>,
    ground: &'a [Element],
    cap: usize,
    best: &'b mut (Vec<Element>, T),
}

impl<F: SetFunction<T>, T: Scalar> Search<'_, '_, F, T> {
    fn dfs(&mut self, start: usize, current: &mut Vec<Element>) -> Result<()> {
        if current.len() == self.cap {
            return Ok(());
        }
        for i in start..self.ground.len() {
            current.push(self.ground[i]);
            let feasible = match self.constraint {
                Constraint::Cardinality(_) => true,
                Constraint::Matroid(m) => m.is_independent(current)?,
            };
            if feasible {
                let v = self.oracle.eval(current)?;
                if v > self.best.1 {
                    *self.best = (current.clone(), v);
                }
                self.dfs(i + 1, current)?;
            }
            current.pop();
        }
        Ok(())
    }
}
