use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matroid::MatroidHandle;
use crate::objectives::FractionalPoint;
use crate::oracle::Element;
use crate::scalar::Scalar;

/// Convex combination `Σ λ_i·1_{S_i}` of independent sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCombo<T> {
    parts: Vec<(T, Vec<Element>)>,
}

impl<T: Scalar> ConvexCombo<T> {
    pub fn new(parts: Vec<(T, Vec<Element>)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::param("convex combination needs at least one part"));
        }
        let mut total = 0.0;
        let mut clean = Vec::with_capacity(parts.len());
        for (w, mut s) in parts {
            if !(w > T::zero()) {
                return Err(Error::param(format!("part weight {w} must be positive")));
            }
            s.sort_unstable();
            if s.windows(2).any(|p| p[0] == p[1]) {
                return Err(Error::param("part contains a repeated element"));
            }
            total += w.as_f64();
            clean.push((w, s));
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("part weights sum to {total}, not 1")));
        }
        Ok(Self { parts: clean })
    }

    pub fn parts(&self) -> &[(T, Vec<Element>)] {
        &self.parts
    }

    /// The induced point `Σ λ_i·1_{S_i}`.
    pub fn point(&self) -> FractionalPoint<T> {
        let mut acc = std::collections::BTreeMap::<Element, T>::new();
        for (w, s) in &self.parts {
            for &e in s {
                *acc.entry(e).or_insert_with(T::zero) += *w;
            }
        }
        FractionalPoint::from_pairs(acc.into_iter().map(|(e, v)| (e, v.min(T::one()))))
            .expect("convex combination coordinates lie in [0,1]")
    }
}

/// Rounds a convex combination to one independent set by pairwise swap merges.
///
/// Parts are padded to a common size `r` with phantom ids `n..n+r`, which are
/// free in the rank-`r` truncation of `M ⊕ free`; phantoms are dropped at the end.
pub fn swap_round<T: Scalar>(matroid: &MatroidHandle, combo: &ConvexCombo<T>, seed: u64) -> Result<Vec<Element>> {
    for (_, s) in &combo.parts {
        if !matroid.is_independent(s)? {
            return Err(Error::param(format!("part {s:?} is not independent")));
        }
    }
    let n = matroid.ground_size();
    let r = combo.parts.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let mut pool: Vec<(f64, Vec<Element>)> = combo
        .parts
        .iter()
        .map(|(w, s)| {
            let mut b = s.clone();
            b.extend(n..n + (r - s.len()));
            b.sort_unstable();
            (w.as_f64(), b)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    while pool.len() > 1 {
        let first = smallest(&pool, None);
        let second = smallest(&pool, Some(first));
        let (hi, lo) = (first.max(second), first.min(second));
        let b_hi = pool.remove(hi);
        let b_lo = pool.remove(lo);
        let (p1, p2) = if first < second { (b_lo, b_hi) } else { (b_hi, b_lo) };
        let merged = merge(matroid, n, p1, p2, &mut rng)?;
        pool.push(merged);
    }
    let (_, base) = pool.pop().expect("at least one part");
    Ok(base.into_iter().filter(|&e| e < n).collect())
}

fn smallest(pool: &[(f64, Vec<Element>)], skip: Option<usize>) -> usize {
    (0..pool.len())
        .filter(|&i| Some(i) != skip)
        .min_by(|&a, &b| pool[a].0.total_cmp(&pool[b].0).then(a.cmp(&b)))
        .expect("pool has two parts")
}

fn real_independent(matroid: &MatroidHandle, n: usize, base: &[Element]) -> Result<bool> {
    let real: Vec<Element> = base.iter().copied().filter(|&e| e < n).collect();
    matroid.is_independent(&real)
}

fn exchange(base: &[Element], out: Element, inn: Element) -> Vec<Element> {
    let mut b: Vec<Element> = base.iter().copied().filter(|&x| x != out).collect();
    b.push(inn);
    b.sort_unstable();
    b
}

fn merge(
    matroid: &MatroidHandle,
    n: usize,
    (w1, mut b1): (f64, Vec<Element>),
    (w2, mut b2): (f64, Vec<Element>),
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<Element>)> {
    let keep_first = w1 / (w1 + w2);
    while let Some(&i) = b1.iter().find(|e| b2.binary_search(e).is_err()) {
        let mut chosen = None;
        for &j in b2.iter().filter(|e| b1.binary_search(e).is_err()) {
            let c1 = exchange(&b1, i, j);
            let c2 = exchange(&b2, j, i);
            let ok = (i >= n && j >= n)
                || (real_independent(matroid, n, &c1)? && real_independent(matroid, n, &c2)?);
            if ok {
                chosen = Some((c1, c2));
                break;
            }
        }
        let (c1, c2) = chosen.ok_or_else(|| Error::invariant("swap rounding found no symmetric exchange"))?;
        if rng.gen::<f64>() < keep_first {
            b2 = c2;
        } else {
            b1 = c1;
        }
    }
    Ok((w1 + w2, b1))
}
