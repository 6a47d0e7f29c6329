use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{validate_elements, CountedOracle, Element, SetFunction};
use crate::scalar::Scalar;

/// Largest support enumerated by [`multilinear_exact`] for functions without a closed form.
pub const EXACT_SUPPORT_LIMIT: usize = 20;

/// Sparse point of `[0,1]^V`; omitted coordinates are zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FractionalPoint<T> {
    coords: BTreeMap<Element, T>,
}

impl<T: Scalar> FractionalPoint<T> {
    pub fn zero() -> Self {
        Self { coords: BTreeMap::new() }
    }

    pub fn indicator(set: &[Element]) -> Self {
        Self { coords: set.iter().map(|&e| (e, T::one())).collect() }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Element, T)>) -> Result<Self> {
        let mut x = Self::zero();
        for (e, v) in pairs {
            x.set(e, v)?;
        }
        Ok(x)
    }

    pub fn set(&mut self, e: Element, v: T) -> Result<()> {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::param(format!("coordinate {e} = {v} outside [0,1]")));
        }
        if v == T::zero() {
            self.coords.remove(&e);
        } else {
            self.coords.insert(e, v);
        }
        Ok(())
    }

    pub fn get(&self, e: Element) -> T {
        self.coords.get(&e).copied().unwrap_or_else(T::zero)
    }

    /// Non-zero coordinates in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (Element, T)> + '_ {
        self.coords.iter().map(|(&e, &v)| (e, v))
    }

    pub fn support(&self) -> Vec<Element> {
        self.coords.keys().copied().collect()
    }

    /// True when every coordinate is 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.coords.values().all(|&v| v == T::one())
    }

    pub fn leq(&self, other: &Self) -> bool {
        self.iter().all(|(e, v)| v <= other.get(e))
    }
}

/// `x'` with `x'_e = min(x_e + step, 1)` for `e ∈ S`.
pub fn plus_direction<T: Scalar>(x: &FractionalPoint<T>, set: &[Element], step: T) -> Result<FractionalPoint<T>> {
    if !(step > T::zero() && step <= T::one()) {
        return Err(Error::param(format!("step {step} outside (0,1]")));
    }
    let mut out = x.clone();
    for &e in set {
        let v = (x.get(e) + step).min(T::one());
        out.coords.insert(e, v);
    }
    Ok(out)
}

/// Exact `F(x)`: closed form when available, otherwise enumeration of the support.
pub fn multilinear_exact<F: SetFunction<T>, T: Scalar>(f: &F, x: &FractionalPoint<T>) -> Result<T> {
    validate_elements(&x.support(), f.ground_size())?;
    if let Some(v) = f.multilinear_closed_form(x) {
        return Ok(v);
    }
    multilinear_enumerate(f, x)
}

/// Literal subset sum over the support of `x`.
pub fn multilinear_enumerate<F: SetFunction<T>, T: Scalar>(f: &F, x: &FractionalPoint<T>) -> Result<T> {
    let support: Vec<(Element, T)> = x.iter().collect();
    if support.len() > EXACT_SUPPORT_LIMIT {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << support.len(),
            budget: 1u128 << EXACT_SUPPORT_LIMIT,
            hint: " (support too large for exact multilinear evaluation)",
        });
    }
    let mut total = T::zero();
    let mut set = Vec::with_capacity(support.len());
    for mask in 1u64..(1u64 << support.len()) {
        set.clear();
        let mut p = T::one();
        for (bit, &(e, xe)) in support.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                set.push(e);
                p *= xe;
            } else {
                p *= T::one() - xe;
            }
        }
        if p != T::zero() {
            total += p * f.value(&set);
        }
    }
    Ok(total)
}

/// Sample budget for [`multilinear_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorBudget<T> {
    /// Hoeffding count for error `kappa` with confidence `1 − delta`. `range`
    /// bounds `f`; when absent it is taken as `f(V)` at the cost of one query.
    Hoeffding { kappa: f64, delta: f64, range: Option<T> },
    Samples(usize),
}

/// `⌈range²/(2κ²)·ln(2/δ)⌉`.
pub fn hoeffding_samples(range: f64, kappa: f64, delta: f64) -> Result<usize> {
    if !(kappa > 0.0) || !(delta > 0.0 && delta < 1.0) || !(range >= 0.0) {
        return Err(Error::param(format!("invalid estimator budget kappa={kappa} delta={delta} range={range}")));
    }
    Ok((range * range / (2.0 * kappa * kappa) * (2.0 / delta).ln()).ceil() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub samples: usize,
}

/// Mean of `f` over independent draws `S ∼ x`, one counted query per draw.
pub fn multilinear_estimate<F: SetFunction<T>, T: Scalar>(
    oracle: &CountedOracle<F, T>,
    x: &FractionalPoint<T>,
    budget: EstimatorBudget<T>,
    seed: u64,
) -> Result<Estimate<T>> {
    validate_elements(&x.support(), oracle.ground_size())?;
    let samples = match budget {
        EstimatorBudget::Samples(n) => n,
        EstimatorBudget::Hoeffding { kappa, delta, range } => {
            let range = match range {
                Some(r) => r,
                None => oracle.eval(&(0..oracle.ground_size()).collect::<Vec<_>>())?,
            };
            hoeffding_samples(range.as_f64(), kappa, delta)?
        }
    };
    let support: Vec<(Element, T)> = x.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = T::zero();
    let mut set = Vec::with_capacity(support.len());
    for i in 0..samples {
        set.clear();
        for &(e, xe) in &support {
            let u: f64 = rng.gen();
            if T::lit(u) < xe {
                set.push(e);
            }
        }
        let v = oracle.eval(&set)?;
        mean += (v - mean) / T::from_usize_lossy(i + 1);
    }
    Ok(Estimate { value: mean, samples })
}

/// How [`ResidualMultilinear`] evaluates the base extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualMode {
    Exact,
    /// Common-random-number estimate with a fixed number of draws.
    Sampled { samples: usize, seed: u64 },
}

/// `g(S) = F(x + S/m) − F(x)` for a fixed point `x` and step `1/m`.
pub struct ResidualMultilinear<F, T> {
    base: F,
    x: FractionalPoint<T>,
    step: T,
    base_value: T,
    mode: ResidualMode,
    base_queries: AtomicU64,
}

impl<F: SetFunction<T>, T: Scalar> ResidualMultilinear<F, T> {
    pub fn new(base: F, x: FractionalPoint<T>, step: T, mode: ResidualMode) -> Result<Self> {
        if !(step > T::zero() && step <= T::one()) {
            return Err(Error::param(format!("step {step} outside (0,1]")));
        }
        validate_elements(&x.support(), base.ground_size())?;
        if mode == ResidualMode::Exact
            && base.multilinear_closed_form(&x).is_none()
            && base.ground_size() > EXACT_SUPPORT_LIMIT
        {
            return Err(Error::param("exact residual needs a closed form or a ground set of at most 20"));
        }
        let mut g = Self { base, x, step, base_value: T::zero(), mode, base_queries: AtomicU64::new(0) };
        g.base_value = g.extension(&g.x.clone());
        Ok(g)
    }

    pub fn point(&self) -> &FractionalPoint<T> {
        &self.x
    }

    /// `F(x)` as seen by this residual.
    pub fn base_value(&self) -> T {
        self.base_value
    }

    /// Base-function evaluations spent by sampled mode.
    pub fn base_queries(&self) -> u64 {
        self.base_queries.load(Ordering::Relaxed)
    }

    fn extension(&self, y: &FractionalPoint<T>) -> T {
        match self.mode {
            ResidualMode::Exact => multilinear_exact(&self.base, y).expect("exact extension checked at construction"),
            ResidualMode::Sampled { samples, seed } => {
                let n = self.base.ground_size();
                let mut mean = T::zero();
                let mut set = Vec::new();
                for i in 0..samples {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    set.clear();
                    for e in 0..n {
                        let u: f64 = rng.gen();
                        if T::lit(u) < y.get(e) {
                            set.push(e);
                        }
                    }
                    self.base_queries.fetch_add(1, Ordering::Relaxed);
                    let v = if set.is_empty() { T::zero() } else { self.base.value(&set) };
                    mean += (v - mean) / T::from_usize_lossy(i + 1);
                }
                mean
            }
        }
    }
}

impl<F: SetFunction<T>, T: Scalar> SetFunction<T> for ResidualMultilinear<F, T> {
    fn ground_size(&self) -> usize {
        self.base.ground_size()
    }

    fn value(&self, set: &[Element]) -> T {
        let y = plus_direction(&self.x, set, self.step).expect("step validated at construction");
        self.extension(&y) - self.base_value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{CoverageFunction, ModularFunction};

    fn shared_item() -> CoverageFunction<f64> {
        CoverageFunction::unit(1, vec![vec![0], vec![0]])
    }

    #[test]
    fn exact_examples() {
        let f = shared_item();
        assert_eq!(multilinear_exact(&f, &FractionalPoint::zero()).unwrap(), 0.0);
        let x = FractionalPoint::from_pairs([(0, 0.5), (1, 0.5)]).unwrap();
        assert!((multilinear_exact(&f, &x).unwrap() - 0.75).abs() < 1e-15);
        assert!((multilinear_enumerate(&f, &x).unwrap() - 0.75).abs() < 1e-15);
        let v = FractionalPoint::indicator(&[1]);
        assert_eq!(multilinear_enumerate(&f, &v).unwrap(), 1.0);
    }

    #[test]
    fn enumeration_refuses_large_support() {
        struct Flat(usize);
        impl SetFunction<f64> for Flat {
            fn ground_size(&self) -> usize {
                self.0
            }
            fn value(&self, _: &[Element]) -> f64 {
                1.0
            }
        }
        let x = FractionalPoint::from_pairs((0..21).map(|e| (e, 0.5))).unwrap();
        assert!(matches!(multilinear_exact(&Flat(21), &x), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn estimate_degenerate_points() {
        let o = CountedOracle::new(CoverageFunction::<f64>::new(vec![0.1, 0.7], vec![vec![0], vec![1]]).unwrap());
        let x = FractionalPoint::indicator(&[0, 1]);
        let est = multilinear_estimate(&o, &x, EstimatorBudget::Samples(37), 5).unwrap();
        assert_eq!(est.value, o.inner().value(&[0, 1]));
        assert_eq!(o.queries(), 37);
        let zero = multilinear_estimate(&o, &FractionalPoint::zero(), EstimatorBudget::Samples(10), 5).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn hoeffding_count_and_range_query() {
        assert_eq!(hoeffding_samples(1.0, 0.05, 0.01).unwrap(), 1060);
        let o = CountedOracle::new(shared_item());
        let x = FractionalPoint::from_pairs([(0, 0.5), (1, 0.5)]).unwrap();
        let budget = EstimatorBudget::Hoeffding { kappa: 0.05, delta: 0.01, range: None };
        let est = multilinear_estimate(&o, &x, budget, 9).unwrap();
        assert_eq!(est.samples, 1060);
        assert_eq!(o.queries(), 1061);
        assert!((est.value - 0.75).abs() < 0.05);
    }

    #[test]
    fn plus_direction_clamps() {
        let x = FractionalPoint::from_pairs([(0, 0.8)]).unwrap();
        let y = plus_direction(&x, &[0, 2], 0.5).unwrap();
        assert_eq!(y.get(0), 1.0);
        assert_eq!(y.get(2), 0.5);
        assert_eq!(plus_direction(&x, &[], 0.5).unwrap(), x);
        assert!(plus_direction(&x, &[0], 0.0).is_err());
        let e = plus_direction(&FractionalPoint::<f64>::zero(), &[3], 1.0).unwrap();
        assert_eq!(e, FractionalPoint::indicator(&[3]));
    }

    #[test]
    fn residual_matches_definition() {
        let f = ModularFunction::new(vec![2.0, 4.0]);
        let x = FractionalPoint::from_pairs([(0, 0.5)]).unwrap();
        let g = ResidualMultilinear::new(&f, x, 0.25, ResidualMode::Exact).unwrap();
        assert_eq!(g.base_value(), 1.0);
        assert_eq!(g.value(&[0, 1]), 0.5 + 1.0);
        let s = ResidualMultilinear::new(&f, FractionalPoint::zero(), 1.0, ResidualMode::Sampled { samples: 8, seed: 1 })
            .unwrap();
        assert_eq!(s.value(&[1]), 4.0);
        assert!(s.base_queries() > 0);
    }
}
