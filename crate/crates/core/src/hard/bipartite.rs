//! Bipartite hard family: blocks `A_1..A_m` and `B_1..B_m` whose elements
//! carry a proper `w`-coloring, matched by a hidden bijection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hard::symgap::{symmetric_value, SymGapParams};
use crate::oracle::{Element, SetFunction};
use crate::scalar::{canonical_product, Scalar};
use crate::stream::{Stream, StreamOp};

/// Largest block count accepted by the literal `2^m` summation.
pub const BRUTE_FORCE_MAX_BLOCKS: usize = 12;

/// Block shape shared by every instance of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteShape<T> {
    pub m: usize,
    pub k: usize,
    pub part_alpha: T,
    pub beta: T,
    pub params: SymGapParams<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    A,
    B,
}

/// One instance `𝓕_{c,π}` of the family.
#[derive(Debug, Clone)]
pub struct BipartiteInstance<T> {
    shape: BipartiteShape<T>,
    a_per_color: usize,
    b_per_color: usize,
    coloring: Vec<u32>,
    pi: Vec<usize>,
}

fn integral_part<T: Scalar>(frac: T, k: usize, what: &str) -> Result<usize> {
    let exact = frac.as_f64() * k as f64;
    let rounded = exact.round();
    if rounded < 1.0 || (exact - rounded).abs() > 1e-9 {
        return Err(Error::param(format!("{what}·k = {exact} must be a positive integer")));
    }
    Ok(rounded as usize)
}

impl<T: Scalar> BipartiteInstance<T> {
    /// Builds an instance from an explicit coloring and bijection.
    pub fn new(shape: BipartiteShape<T>, coloring: Vec<u32>, pi: Vec<usize>) -> Result<Self> {
        let BipartiteShape { m, k, part_alpha, beta, params } = shape;
        if m == 0 || k == 0 {
            return Err(Error::param("m and k must be positive"));
        }
        if !(part_alpha > T::zero() && part_alpha < T::one()) {
            return Err(Error::param("part_alpha must lie in (0,1)"));
        }
        if !(beta > T::zero() && beta < T::one()) {
            return Err(Error::param("beta must lie in (0,1)"));
        }
        if !params.is_representable() {
            return Err(Error::param("smoothing parameters underflow the scalar type; use explicit overrides"));
        }
        let a_per_color = integral_part(part_alpha, k, "alpha")?;
        let b_per_color = integral_part(T::one() - part_alpha, k, "(1-alpha)")?;
        if a_per_color + b_per_color != k {
            return Err(Error::param("alpha·k and (1-alpha)·k must sum to k"));
        }
        let inst = BipartiteInstance { shape, a_per_color, b_per_color, coloring, pi };
        inst.validate()?;
        Ok(inst)
    }

    /// Random proper coloring and bijection drawn by Fisher–Yates from `seed`.
    pub fn random(shape: BipartiteShape<T>, seed: u64) -> Result<Self> {
        let a_per_color = integral_part(shape.part_alpha, shape.k, "alpha")?;
        let b_per_color = integral_part(T::one() - shape.part_alpha, shape.k, "(1-alpha)")?;
        let w = shape.params.w;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coloring = Vec::with_capacity(shape.m * shape.k * w);
        for per_color in [a_per_color, b_per_color] {
            for _ in 0..shape.m {
                let mut block: Vec<u32> = (0..w as u32).flat_map(|c| std::iter::repeat_n(c, per_color)).collect();
                block.shuffle(&mut rng);
                coloring.extend(block);
            }
        }
        let mut pi: Vec<usize> = (0..shape.m).collect();
        pi.shuffle(&mut rng);
        Self::new(shape, coloring, pi)
    }

    fn validate(&self) -> Result<()> {
        let m = self.shape.m;
        let w = self.shape.params.w;
        if self.coloring.len() != self.ground() {
            return Err(Error::param(format!(
                "coloring has {} entries, layout needs {}",
                self.coloring.len(),
                self.ground()
            )));
        }
        for (block, side) in (0..m).map(|i| (i, Side::A)).chain((0..m).map(|i| (i, Side::B))) {
            let (start, len, per_color) = self.block_range(side, block);
            let mut counts = vec![0usize; w];
            for &c in &self.coloring[start..start + len] {
                let c = c as usize;
                if c >= w {
                    return Err(Error::param(format!("color {c} outside [0,{w})")));
                }
                counts[c] += 1;
            }
            if counts.iter().any(|&c| c != per_color) {
                return Err(Error::param(format!("coloring of block {side:?}{block} is not proper: {counts:?}")));
            }
        }
        check_bijection(&self.pi, m)
    }

    pub fn shape(&self) -> &BipartiteShape<T> {
        &self.shape
    }

    pub fn params(&self) -> &SymGapParams<T> {
        &self.shape.params
    }

    pub fn coloring(&self) -> &[u32] {
        &self.coloring
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    /// Same coloring under a different bijection.
    pub fn with_pi(&self, pi: Vec<usize>) -> Result<Self> {
        check_bijection(&pi, self.shape.m)?;
        Ok(BipartiteInstance { pi, ..self.clone() })
    }

    pub fn a_per_color(&self) -> usize {
        self.a_per_color
    }

    pub fn b_per_color(&self) -> usize {
        self.b_per_color
    }

    pub fn ground(&self) -> usize {
        self.shape.m * self.shape.k * self.shape.params.w
    }

    fn a_block_len(&self) -> usize {
        self.a_per_color * self.shape.params.w
    }

    fn b_block_len(&self) -> usize {
        self.b_per_color * self.shape.params.w
    }

    fn block_range(&self, side: Side, block: usize) -> (usize, usize, usize) {
        match side {
            Side::A => (block * self.a_block_len(), self.a_block_len(), self.a_per_color),
            Side::B => (
                self.shape.m * self.a_block_len() + block * self.b_block_len(),
                self.b_block_len(),
                self.b_per_color,
            ),
        }
    }

    fn locate(&self, e: Element) -> (Side, usize) {
        let a_total = self.shape.m * self.a_block_len();
        if e < a_total {
            (Side::A, e / self.a_block_len())
        } else {
            (Side::B, (e - a_total) / self.b_block_len())
        }
    }

    /// Elements of `A_block`.
    pub fn a_block(&self, block: usize) -> Vec<Element> {
        let (start, len, _) = self.block_range(Side::A, block);
        (start..start + len).collect()
    }

    /// Elements of `B_block`.
    pub fn b_block(&self, block: usize) -> Vec<Element> {
        let (start, len, _) = self.block_range(Side::B, block);
        (start..start + len).collect()
    }

    /// Elements of `A_block` with the given color.
    pub fn a_color_class(&self, block: usize, color: u32) -> Vec<Element> {
        self.a_block(block).into_iter().filter(|&e| self.coloring[e] == color).collect()
    }

    /// Elements of `B_block` with the given color.
    pub fn b_color_class(&self, block: usize, color: u32) -> Vec<Element> {
        self.b_block(block).into_iter().filter(|&e| self.coloring[e] == color).collect()
    }

    /// Normalized per-color counts `(y, z)`, each `m` rows of `w` entries.
    pub fn coordinates(&self, set: &[Element]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
        let (m, w) = (self.shape.m, self.shape.params.w);
        let mut ya = vec![vec![0usize; w]; m];
        let mut zb = vec![vec![0usize; w]; m];
        for &e in set {
            let c = self.coloring[e] as usize;
            match self.locate(e) {
                (Side::A, i) => ya[i][c] += 1,
                (Side::B, i) => zb[i][c] += 1,
            }
        }
        let scale = |rows: Vec<Vec<usize>>, per: usize| -> Vec<Vec<T>> {
            let d = T::from_usize_lossy(per);
            rows.into_iter().map(|r| r.into_iter().map(|c| T::from_usize_lossy(c) / d).collect()).collect()
        };
        (scale(ya, self.a_per_color), scale(zb, self.b_per_color))
    }

    /// True when every block's per-color coordinates lie within `gamma`.
    pub fn is_balanced(&self, set: &[Element]) -> bool {
        let (y, z) = self.coordinates(set);
        y.iter().chain(z.iter()).all(|row| self.shape.params.is_balanced_point(row))
    }

    fn combine(&self, set_len: usize, mut factors: Vec<T>) -> T {
        let shape = &self.shape;
        let product = canonical_product(&mut factors);
        let bonus = shape.params.eps * T::from_usize_lossy(set_len) / T::from_usize_lossy(shape.k);
        (T::one() - product + bonus).max(T::zero()).min(T::one())
    }

    fn factors_with(&self, set: &[Element], block_value: impl Fn(&[T]) -> T) -> Vec<T> {
        let (y, z) = self.coordinates(set);
        let beta = self.shape.beta;
        let ya: Vec<T> = y.iter().map(|r| block_value(r)).collect();
        (0..self.shape.m)
            .map(|i| beta * (T::one() - ya[self.pi[i]]) + (T::one() - beta) * (T::one() - block_value(&z[i])))
            .collect()
    }

    /// Exact `𝓕_{c,π}(S)` through the per-block factorization.
    pub fn eval(&self, set: &[Element]) -> T {
        let params = self.shape.params;
        let factors = self.factors_with(set, |x| params.fhat_in_domain(x));
        self.combine(set.len(), factors)
    }

    /// `𝒢_π(S)`: the same formula with the symmetrized OR in place of `f̂`.
    pub fn eval_symmetric(&self, set: &[Element]) -> T {
        let factors = self.factors_with(set, |x| symmetric_value(x));
        self.combine(set.len(), factors)
    }

    /// Literal weighted sum over all `I ⊆ [m]`.
    pub fn eval_bruteforce(&self, set: &[Element]) -> Result<T> {
        let m = self.shape.m;
        if m > BRUTE_FORCE_MAX_BLOCKS {
            return Err(Error::param(format!("literal sum supports m ≤ {BRUTE_FORCE_MAX_BLOCKS}, got {m}")));
        }
        let (y, z) = self.coordinates(set);
        let params = &self.shape.params;
        let beta = self.shape.beta;
        let fy: Vec<T> = y.iter().map(|r| params.fhat_in_domain(r)).collect();
        let fz: Vec<T> = z.iter().map(|r| params.fhat_in_domain(r)).collect();
        let mut total = T::zero();
        for mask in 0u32..(1u32 << m) {
            let mut weight = T::one();
            let mut miss = T::one();
            for i in 0..m {
                if mask >> i & 1 == 1 {
                    weight *= beta;
                    miss *= T::one() - fy[self.pi[i]];
                } else {
                    weight *= T::one() - beta;
                    miss *= T::one() - fz[i];
                }
            }
            total += weight * (T::one() - miss);
        }
        let bonus = params.eps * T::from_usize_lossy(set.len()) / T::from_usize_lossy(self.shape.k);
        Ok((total + bonus).min(T::one()))
    }

    /// All of `A`, then for each block `t`: insert `B_t`, delete `B_t`.
    pub fn stream(&self) -> Result<Stream> {
        let m = self.shape.m;
        let a_total = m * self.a_block_len();
        let mut ops: Vec<StreamOp> = (0..a_total).map(StreamOp::Insert).collect();
        for t in 0..m {
            let block = self.b_block(t);
            ops.extend(block.iter().map(|&e| StreamOp::Insert(e)));
            ops.extend(block.iter().map(|&e| StreamOp::Delete(e)));
        }
        Stream::new(ops, Some(self.ground()))
    }

    /// True when `pi` and `other` agree on every block `i` with
    /// `S ∩ B_i ≠ ∅` and `S ∩ (A_{π(i)} ∪ A_{π'(i)}) ≠ ∅`.
    pub fn agreement_holds(&self, set: &[Element], other: &[usize]) -> bool {
        let (a_hit, b_hit) = self.touched_blocks(set);
        (0..self.shape.m)
            .all(|i| !(b_hit[i] && (a_hit[self.pi[i]] || a_hit[other[i]])) || self.pi[i] == other[i])
    }

    fn touched_blocks(&self, set: &[Element]) -> (Vec<bool>, Vec<bool>) {
        let m = self.shape.m;
        let mut a_hit = vec![false; m];
        let mut b_hit = vec![false; m];
        for &e in set {
            match self.locate(e) {
                (Side::A, i) => a_hit[i] = true,
                (Side::B, i) => b_hit[i] = true,
            }
        }
        (a_hit, b_hit)
    }

    /// Uniformly random bijection satisfying [`BipartiteInstance::agreement_holds`]
    /// with respect to `set`.
    pub fn sample_agreeing_pi(&self, set: &[Element], rng: &mut impl rand::Rng) -> Vec<usize> {
        let m = self.shape.m;
        let (a_hit, b_hit) = self.touched_blocks(set);
        let mut out = vec![usize::MAX; m];
        let mut used = vec![false; m];
        for i in 0..m {
            if b_hit[i] && a_hit[self.pi[i]] {
                out[i] = self.pi[i];
                used[self.pi[i]] = true;
            }
        }
        let mut quiet: Vec<usize> = (0..m).filter(|&j| !used[j] && !a_hit[j]).collect();
        quiet.shuffle(rng);
        for i in 0..m {
            if out[i] == usize::MAX && b_hit[i] {
                let j = quiet.pop().expect("untouched targets outnumber touched-B blocks");
                out[i] = j;
                used[j] = true;
            }
        }
        let mut rest: Vec<usize> = (0..m).filter(|&j| !used[j]).collect();
        rest.shuffle(rng);
        for slot in out.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = rest.pop().expect("bijection completes");
        }
        out
    }
}

pub(crate) fn check_bijection(pi: &[usize], m: usize) -> Result<()> {
    if pi.len() != m {
        return Err(Error::param(format!("bijection has {} entries, expected {m}", pi.len())));
    }
    let mut seen = vec![false; m];
    for &j in pi {
        if j >= m || std::mem::replace(&mut seen[j], true) {
            return Err(Error::param(format!("{pi:?} is not a bijection on [0,{m})")));
        }
    }
    Ok(())
}

impl<T: Scalar> SetFunction<T> for BipartiteInstance<T> {
    fn ground_size(&self) -> usize {
        self.ground()
    }

    fn value(&self, set: &[Element]) -> T {
        self.eval(set)
    }
}

/// Wrapper evaluating `𝒢_π` as a set function.
pub struct SymmetricView<'a, T>(pub &'a BipartiteInstance<T>);

impl<T: Scalar> SetFunction<T> for SymmetricView<'_, T> {
    fn ground_size(&self) -> usize {
        self.0.ground()
    }

    fn value(&self, set: &[Element]) -> T {
        self.0.eval_symmetric(set)
    }
}
