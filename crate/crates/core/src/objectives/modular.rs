use crate::error::{Error, Result};
use crate::objectives::FractionalPoint;
use crate::oracle::{Element, SetFunction};
use crate::scalar::Scalar;

/// `f(S) = Σ_{e∈S} w_e` with non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularFunction<T> {
    weights: Vec<T>,
}

impl<T: Scalar> ModularFunction<T> {
    pub fn new(weights: Vec<T>) -> Self {
        Self::try_new(weights).expect("modular weights must be finite and non-negative")
    }

    pub fn try_new(weights: Vec<T>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return Err(Error::param(format!("modular weight {w} must be finite and non-negative")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

impl<T: Scalar> SetFunction<T> for ModularFunction<T> {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &[Element]) -> T {
        let mut ids = set.to_vec();
        ids.sort_unstable();
        ids.iter().map(|&e| self.weights[e]).sum()
    }

    fn multilinear_closed_form(&self, x: &FractionalPoint<T>) -> Option<T> {
        Some(x.iter().map(|(e, xe)| self.weights[e] * xe).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_weights() {
        let f = ModularFunction::new(vec![3.0, 1.0, 2.0]);
        assert_eq!(f.value(&[2, 0]), 5.0);
        let x = FractionalPoint::from_pairs([(0, 0.5), (2, 1.0)]).unwrap();
        assert_eq!(f.multilinear_closed_form(&x), Some(3.5));
        assert!(ModularFunction::try_new(vec![f64::NAN]).is_err());
    }
}
