//! Symmetric-gap smoothing of the probabilistic OR over `w` coordinates.
//!
//! `f(x) = 1 − ∏(1 − x_i)` is blended with its symmetrization
//! `g(x) = 1 − (1 − x̄)^w` so that the smoothed `f̂` equals `g` on balanced
//! inputs while staying within `ε` of `f` everywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smoothing parameters.
///
/// `phi_alpha` is the curvature of the concave ramp on `[eps1, eps2]`;
/// `gamma` is the balancedness tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymGapParams<T> {
    pub w: usize,
    pub eps: T,
    pub gamma: T,
    pub eps1: T,
    pub eps2: T,
    pub phi_alpha: T,
}

/// Natural logarithms of the asymptotic parameters, which underflow `f64`
/// for all but the smallest `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogParams {
    pub ln_gamma: f64,
    pub ln_eps1: f64,
    pub ln_eps2: f64,
    pub phi_alpha: f64,
}

impl LogParams {
    pub fn new(w: usize, eps: f64) -> Self {
        let w6 = (w as f64).powi(6);
        let ln_gamma = -(w as f64).ln() - 4.0 * w6 / eps;
        LogParams {
            ln_gamma,
            ln_eps1: (w as f64).ln() + ln_gamma,
            ln_eps2: -2.0 * w6 / eps,
            phi_alpha: eps / (2.0 * w6),
        }
    }

    /// Slope of the ramp at `eps2`.
    pub fn slope_at_eps2(&self) -> f64 {
        1.0 - self.phi_alpha * (self.ln_eps2 - self.ln_eps1)
    }
}

fn check_shape<T: Scalar>(w: usize, eps: T) -> Result<()> {
    if w < 2 {
        return Err(Error::param(format!("w must be at least 2, got {w}")));
    }
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::param(format!("eps must lie in (0,1), got {eps}")));
    }
    Ok(())
}

impl<T: Scalar> SymGapParams<T> {
    /// Asymptotic parameters evaluated directly. They may underflow to zero;
    /// see [`SymGapParams::is_representable`].
    pub fn asymptotic(w: usize, eps: T) -> Result<Self> {
        check_shape(w, eps)?;
        let lp = LogParams::new(w, eps.as_f64());
        Ok(SymGapParams {
            w,
            eps,
            gamma: T::lit(lp.ln_gamma.exp()),
            eps1: T::lit(lp.ln_eps1.exp()),
            eps2: T::lit(lp.ln_eps2.exp()),
            phi_alpha: T::lit(lp.phi_alpha),
        })
    }

    /// Parameters usable at desk scale: `eps1 = 0.01`, `eps2 = 0.3`, the
    /// ramp flattens exactly at `eps2`, and `gamma = eps1 / w`.
    pub fn test_friendly(w: usize, eps: T) -> Result<Self> {
        let eps1 = T::lit(0.01);
        let eps2 = T::lit(0.3);
        let phi_alpha = T::one() / (eps2 / eps1).ln();
        Self::with_overrides(w, eps, eps1, eps2, phi_alpha, eps1 / T::from_usize_lossy(w))
    }

    pub fn with_overrides(w: usize, eps: T, eps1: T, eps2: T, phi_alpha: T, gamma: T) -> Result<Self> {
        check_shape(w, eps)?;
        if !(eps1 > T::zero() && eps1 < eps2 && eps2 < T::one()) {
            return Err(Error::param(format!("need 0 < eps1 < eps2 < 1, got eps1={eps1}, eps2={eps2}")));
        }
        if !(phi_alpha > T::zero()) {
            return Err(Error::param("phi_alpha must be positive"));
        }
        let slope = T::one() - phi_alpha * (eps2 / eps1).ln();
        if slope < -T::lit(1e-12) {
            return Err(Error::param(format!("ramp slope at eps2 is negative ({slope})")));
        }
        if !(gamma >= T::zero()) {
            return Err(Error::param("gamma must be non-negative"));
        }
        Ok(SymGapParams { w, eps, gamma, eps1, eps2, phi_alpha })
    }

    pub fn is_representable(&self) -> bool {
        self.eps1 > T::zero() && self.eps1 < self.eps2 && self.eps2 < T::one() && self.gamma > T::zero()
    }

    /// Concave ramp: identity up to `eps1`, slope `1 − α·ln(t/eps1)` up to
    /// `eps2`, constant afterwards.
    pub fn phi(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::param(format!("phi is defined on [0,1], got {t}")));
        }
        Ok(self.phi_in_domain(t))
    }

    fn phi_in_domain(&self, t: T) -> T {
        if t <= self.eps1 {
            return t;
        }
        let s = t.min(self.eps2);
        s - self.phi_alpha * (s * (s / self.eps1).ln() - s + self.eps1)
    }

    /// Derivative of [`SymGapParams::phi`] on the open pieces.
    pub fn phi_slope(&self, t: T) -> T {
        if t <= self.eps1 {
            T::one()
        } else if t < self.eps2 {
            T::one() - self.phi_alpha * (t / self.eps1).ln()
        } else {
            T::zero()
        }
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.w {
            return Err(Error::param(format!("expected {} coordinates, got {}", self.w, x.len())));
        }
        Ok(())
    }

    /// Probabilistic OR `1 − ∏(1 − x_i)`.
    pub fn f(&self, x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        Ok(or_value(x))
    }

    /// Symmetrized OR `1 − (1 − x̄)^w`.
    pub fn g(&self, x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        Ok(symmetric_value(x))
    }

    /// Smoothed function `(f − φ(f − g) + ε·g)/(1 + ε)`; returns `g` exactly
    /// whenever `f − g ≤ eps1`.
    pub fn fhat(&self, x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        if let Some(bad) = x.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::param(format!("coordinates must lie in [0,1], got {bad}")));
        }
        Ok(self.fhat_in_domain(x))
    }

    pub(crate) fn fhat_in_domain(&self, x: &[T]) -> T {
        let f = or_value(x);
        let g = symmetric_value(x);
        let h = (f - g).max(T::zero()).min(T::one());
        if h <= self.eps1 {
            return g;
        }
        let v = (f - self.phi_in_domain(h) + self.eps * g) / (T::one() + self.eps);
        v.max(T::zero()).min(T::one())
    }

    /// True when all coordinates lie within `gamma` of each other.
    pub fn is_balanced_point(&self, x: &[T]) -> bool {
        let (lo, hi) = x.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        x.is_empty() || hi - lo <= self.gamma
    }
}

pub(crate) fn or_value<T: Scalar>(x: &[T]) -> T {
    let mut miss: Vec<T> = x.iter().map(|&v| T::one() - v).collect();
    T::one() - crate::scalar::canonical_product(&mut miss)
}

pub(crate) fn symmetric_value<T: Scalar>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mean = sorted.iter().copied().sum::<T>() / T::from_usize_lossy(x.len());
    T::one() - (T::one() - mean).powi(x.len() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn friendly() -> SymGapParams<f64> {
        SymGapParams::test_friendly(2, 0.5).unwrap()
    }

    #[test]
    fn phi_is_identity_below_eps1() {
        let p = friendly();
        assert_eq!(p.phi(0.0).unwrap(), 0.0);
        for t in [1e-5, 0.003, 0.0099, 0.01] {
            assert_eq!(p.phi(t).unwrap(), t);
        }
    }

    #[test]
    fn phi_is_continuous_concave_and_flat_after_eps2() {
        let p = friendly();
        let left = p.phi(p.eps1).unwrap();
        let right = p.phi(p.eps1 * (1.0 + 1e-12)).unwrap();
        assert!((left - right).abs() < 1e-12);
        assert_eq!(p.phi(0.5).unwrap(), p.phi(p.eps2).unwrap());
        assert_eq!(p.phi(1.0).unwrap(), p.phi(p.eps2).unwrap());
        assert!(p.phi_slope(p.eps2 * (1.0 - 1e-12)).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let s = p.phi_slope(i as f64 / 100.0);
            assert!(s <= prev + 1e-15 && s >= -1e-12);
            prev = s;
        }
    }

    #[test]
    fn phi_rejects_out_of_domain() {
        let p = friendly();
        assert!(p.phi(-0.1).is_err());
        assert!(p.phi(1.5).is_err());
    }

    #[test]
    fn asymptotic_slope_vanishes_at_eps2() {
        for (w, eps) in [(2, 0.5), (3, 0.25), (5, 0.1)] {
            assert!(LogParams::new(w, eps).slope_at_eps2().abs() < 1e-12);
        }
        let p = SymGapParams::<f64>::asymptotic(2, 0.5).unwrap();
        assert!(p.is_representable());
        assert!(p.phi_slope(p.eps2 * (1.0 - 1e-9)).abs() < 1e-6);
        assert!(!SymGapParams::<f64>::asymptotic(3, 0.5).unwrap().is_representable());
    }

    #[test]
    fn fhat_basic_values() {
        let p = friendly();
        assert_eq!(p.fhat(&[0.0, 0.0]).unwrap(), 0.0);
        for c in [0.1, 0.37, 0.9, 1.0] {
            assert_eq!(p.fhat(&[c, c]).unwrap(), 1.0 - (1.0 - c) * (1.0 - c));
        }
        assert!(p.fhat(&[0.1]).is_err());
        assert!(p.fhat(&[0.1, 1.2]).is_err());
    }

    #[test]
    fn fhat_is_sandwiched_and_matches_g_when_balanced() {
        for w in [2usize, 3, 4] {
            let p = SymGapParams::<f64>::test_friendly(w, 0.5).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(w as u64);
            for _ in 0..2000 {
                let x: Vec<f64> = (0..w).map(|_| rng.gen::<f64>()).collect();
                let fh = p.fhat(&x).unwrap();
                let f = p.f(&x).unwrap();
                assert!(fh <= f + 1e-12 && fh >= f - p.eps - 1e-12, "{x:?}");
                let c = rng.gen::<f64>() * (1.0 - p.gamma);
                let bal: Vec<f64> = (0..w).map(|_| c + rng.gen::<f64>() * p.gamma).collect();
                assert!(p.is_balanced_point(&bal));
                assert_eq!(p.fhat(&bal).unwrap(), p.g(&bal).unwrap());
            }
        }
    }

    #[test]
    fn overrides_are_validated() {
        assert!(SymGapParams::with_overrides(2, 0.5, 0.3, 0.01, 0.3, 0.001).is_err());
        assert!(SymGapParams::with_overrides(2, 0.5, 0.01, 0.3, 1.0, 0.001).is_err());
        assert!(SymGapParams::with_overrides(1, 0.5, 0.01, 0.3, 0.2, 0.001).is_err());
        assert!(SymGapParams::with_overrides(2, 0.5, 0.01, 0.3, 0.2, 0.001).is_ok());
    }
}
