//! Tree hard family: a rooted tree of depth `L` whose nodes own `k/L`
//! elements each, a depth-dependent antichain distribution, and per-node
//! child shufflings that hide the high-value path.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{Element, SetFunction};
use crate::scalar::{canonical_product, Scalar};

/// Root-to-node path of 0-based child indices; the root is the empty path.
pub type NodePath = Vec<u32>;

/// Largest node count walked by [`ShuffledTreeInstance::sample`] and the
/// exhaustive shuffle/leaf helpers.
pub const FULL_WALK_NODE_LIMIT: u128 = 1 << 20;

/// Depth-indexed stopping weights of the antichain distribution.
///
/// Every vector has `L + 1` entries indexed by depth; entries at depth 0 are
/// zero except `tail[0]`, which holds the total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence<T> {
    pub delta: Vec<T>,
    pub mass: Vec<T>,
    pub tail: Vec<T>,
    pub weight: Vec<T>,
    pub stop: Vec<T>,
}

impl<T: Scalar> WeightSequence<T> {
    pub fn new(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::param("tree depth must be at least 1"));
        }
        let l = levels;
        let one = T::one();
        let mut delta = vec![T::zero(); l + 1];
        delta[l] = one;
        for j in (1..l).rev() {
            let next = delta[j + 1];
            delta[j] = one + (one + (one + T::lit(4.0) / next).sqrt()) / T::lit(2.0) * next;
        }
        let mut mass = vec![T::zero(); l + 1];
        let mut acc = one;
        for j in 1..=l {
            mass[j] = acc;
            acc /= one - one / delta[j];
        }
        let mut tail = vec![T::zero(); l + 1];
        let mut suffix = T::zero();
        for j in (1..=l).rev() {
            suffix += mass[j];
            tail[j] = suffix;
        }
        tail[0] = suffix;
        let weight: Vec<T> = (0..=l).map(|j| if j == 0 { T::zero() } else { mass[j] / suffix }).collect();
        let mut stop: Vec<T> = (0..=l).map(|j| if j == 0 { T::zero() } else { mass[j] / tail[j] }).collect();
        stop[l] = one;
        Ok(WeightSequence { delta, mass, tail, weight, stop })
    }

    pub fn levels(&self) -> usize {
        self.delta.len() - 1
    }
}

/// One instance `𝓕_π` of the tree family.
#[derive(Debug, Clone)]
pub struct ShuffledTreeInstance<T> {
    arities: Vec<usize>,
    k: usize,
    per_node: usize,
    eps: T,
    weights: WeightSequence<T>,
    level_offsets: Vec<usize>,
    level_counts: Vec<usize>,
    ground: usize,
    shuffle: HashMap<NodePath, Vec<u32>>,
    inverse: HashMap<NodePath, Vec<u32>>,
}

/// Parameters produced by [`ShuffledTreeInstance::preset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetInfo {
    pub stream_len: usize,
    pub explore: usize,
}

fn exact_root(n: usize, levels: usize) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / levels as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&d| (d as u128).checked_pow(levels as u32) == Some(n as u128))
}

impl<T: Scalar> ShuffledTreeInstance<T> {
    /// Tree with child counts `arities = [m_1, .., m_L]` (`m_L = 1`) and
    /// `k/L` elements per node, unshuffled.
    pub fn new(arities: Vec<usize>, k: usize) -> Result<Self> {
        let l = arities.len();
        if l == 0 {
            return Err(Error::param("tree needs at least one level"));
        }
        if arities.contains(&0) {
            return Err(Error::param("arities must be positive"));
        }
        if arities[l - 1] != 1 {
            return Err(Error::param("the last arity must be 1"));
        }
        if k == 0 || !k.is_multiple_of(l) {
            return Err(Error::param(format!("k = {k} must be a positive multiple of the depth {l}")));
        }
        let per_node = k / l;
        let mut level_counts = Vec::with_capacity(l + 1);
        let mut level_offsets = Vec::with_capacity(l + 1);
        let mut count = 1usize;
        let mut offset = 0usize;
        let overflow = || Error::param("tree is too large to index");
        level_counts.push(1);
        level_offsets.push(0);
        for &m in &arities {
            count = count.checked_mul(m).ok_or_else(overflow)?;
            level_offsets.push(offset);
            level_counts.push(count);
            offset = offset.checked_add(count).ok_or_else(overflow)?;
        }
        let ground = offset.checked_mul(per_node).ok_or_else(overflow)?;
        Ok(ShuffledTreeInstance {
            eps: T::one() / T::from_usize_lossy(l),
            weights: WeightSequence::new(l)?,
            arities,
            k,
            per_node,
            level_offsets,
            level_counts,
            ground,
            shuffle: HashMap::new(),
            inverse: HashMap::new(),
        })
    }

    /// Stream-length-`n` parameterization: `d = n^{1/L}` children explored,
    /// `m_ℓ = d^{L−ℓ+1}/(2k)`, `m_L = 1`.
    pub fn preset(n: usize, k: usize, levels: usize) -> Result<(Self, PresetInfo)> {
        if levels == 0 {
            return Err(Error::param("tree needs at least one level"));
        }
        let d = exact_root(n, levels).ok_or_else(|| Error::param(format!("{n} is not a perfect {levels}-th power")))?;
        if k * k > d {
            return Err(Error::param(format!("k² = {} exceeds n^(1/L) = {d}", k * k)));
        }
        let mut arities = Vec::with_capacity(levels);
        for l in 1..levels {
            let num = (d as u128).pow((levels - l + 1) as u32);
            if !num.is_multiple_of(2 * k as u128) {
                return Err(Error::param(format!("m_{l} = {num}/(2k) is not an integer")));
            }
            arities.push(usize::try_from(num / (2 * k as u128)).map_err(|_| Error::param("arity overflows"))?);
        }
        arities.push(1);
        let inst = Self::new(arities, k)?;
        let len = crate::hard::traverse::traverse_length(&inst.arities, d, inst.per_node)
            .ok_or_else(|| Error::param("explore count exceeds an arity"))?;
        if len > n as u128 {
            return Err(Error::param(format!("stream length {len} exceeds n = {n}")));
        }
        Ok((inst, PresetInfo { stream_len: len as usize, explore: d }))
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn levels(&self) -> usize {
        self.arities.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn per_node(&self) -> usize {
        self.per_node
    }

    pub fn weights(&self) -> &WeightSequence<T> {
        &self.weights
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn node_count(&self) -> usize {
        self.level_counts[1..].iter().sum()
    }

    /// Non-identity shufflings keyed by parent path.
    pub fn shufflings(&self) -> &HashMap<NodePath, Vec<u32>> {
        &self.shuffle
    }

    fn check_node(&self, path: &[u32]) -> Result<()> {
        if path.len() > self.levels() {
            return Err(Error::param(format!("node {path:?} is deeper than the tree")));
        }
        for (depth, &c) in path.iter().enumerate() {
            if c as usize >= self.arities[depth] {
                return Err(Error::param(format!("node {path:?} has child index {c} ≥ {}", self.arities[depth])));
            }
        }
        Ok(())
    }

    /// Installs the child bijection of the internal node `parent`.
    pub fn set_shuffle(&mut self, parent: &[u32], perm: Vec<u32>) -> Result<()> {
        self.check_node(parent)?;
        if parent.len() >= self.levels() {
            return Err(Error::param("leaves have no children to shuffle"));
        }
        let m = self.arities[parent.len()];
        let as_usize: Vec<usize> = perm.iter().map(|&c| c as usize).collect();
        crate::hard::bipartite::check_bijection(&as_usize, m)?;
        let mut inv = vec![0u32; m];
        for (i, &p) in perm.iter().enumerate() {
            inv[p as usize] = i as u32;
        }
        if perm.iter().enumerate().all(|(i, &p)| i as u32 == p) {
            self.shuffle.remove(parent);
            self.inverse.remove(parent);
        } else {
            self.shuffle.insert(parent.to_vec(), perm);
            self.inverse.insert(parent.to_vec(), inv);
        }
        Ok(())
    }

    pub fn clear_shuffle(&mut self) {
        self.shuffle.clear();
        self.inverse.clear();
    }

    /// Draws an independent uniform bijection for every internal node.
    pub fn randomize_shuffle(&mut self, seed: u64) -> Result<()> {
        let internal: u128 = self.level_counts[..self.levels()].iter().map(|&c| c as u128).sum();
        if internal > FULL_WALK_NODE_LIMIT {
            return Err(Error::param(format!("{internal} internal nodes exceed the walk limit")));
        }
        self.clear_shuffle();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stack: Vec<NodePath> = vec![Vec::new()];
        while let Some(node) = stack.pop() {
            if node.len() >= self.levels() {
                continue;
            }
            let m = self.arities[node.len()];
            let mut perm: Vec<u32> = (0..m as u32).collect();
            perm.shuffle(&mut rng);
            for c in (0..m as u32).rev() {
                let mut child = node.clone();
                child.push(c);
                stack.push(child);
            }
            self.set_shuffle(&node, perm)?;
        }
        Ok(())
    }

    /// `π(u)`: permutes only the last coordinate, through the parent's bijection.
    pub fn shuffle_node(&self, node: &[u32]) -> NodePath {
        self.map_last(node, &self.shuffle)
    }

    /// `π⁻¹(u)`.
    pub fn unshuffle_node(&self, node: &[u32]) -> NodePath {
        self.map_last(node, &self.inverse)
    }

    fn map_last(&self, node: &[u32], table: &HashMap<NodePath, Vec<u32>>) -> NodePath {
        let mut out = node.to_vec();
        if let Some((last, parent)) = node.split_last() {
            if let Some(perm) = table.get(parent) {
                out[parent.len()] = perm[*last as usize];
            }
        }
        out
    }

    fn node_index(&self, node: &[u32]) -> usize {
        let depth = node.len();
        let mut idx = 0usize;
        for (d, &c) in node.iter().enumerate() {
            idx = idx * self.arities[d] + c as usize;
        }
        self.level_offsets[depth] + idx
    }

    /// Elements `a_{u,0..w}` of node `u`.
    pub fn node_elements(&self, node: &[u32]) -> Vec<Element> {
        debug_assert!(!node.is_empty());
        let base = self.node_index(node) * self.per_node;
        (base..base + self.per_node).collect()
    }

    /// Node owning element `e`.
    pub fn node_of(&self, e: Element) -> NodePath {
        let idx = e / self.per_node;
        let depth = (1..=self.levels()).rev().find(|&d| self.level_offsets[d] <= idx).unwrap_or(1);
        let mut rem = idx - self.level_offsets[depth];
        let mut path = vec![0u32; depth];
        for d in (0..depth).rev() {
            path[d] = (rem % self.arities[d]) as u32;
            rem /= self.arities[d];
        }
        path
    }

    /// `ρ_π(S)` grouped by image node: node → multiplicity.
    fn preimage_counts(&self, set: &[Element]) -> BTreeMap<NodePath, usize> {
        let mut counts = BTreeMap::new();
        for &e in set {
            *counts.entry(self.unshuffle_node(&self.node_of(e))).or_insert(0) += 1;
        }
        counts
    }

    /// Exact `𝒢(x) = E_R[1 − ∏_{u∈R}(1 − x_u)]` for sparse `x` on nodes of
    /// the unshuffled tree.
    pub fn g_exact(&self, x: &BTreeMap<NodePath, T>) -> T {
        let entries: Vec<(&NodePath, T)> = x.iter().map(|(k, v)| (k, *v)).collect();
        T::one() - self.survival(&entries, 0)
    }

    /// `E(v)` for the node at `depth` whose subtree support is `entries`,
    /// sorted with `v` itself first when present.
    fn survival(&self, entries: &[(&NodePath, T)], depth: usize) -> T {
        if entries.is_empty() {
            return T::one();
        }
        let (own, rest) = match entries.first() {
            Some((p, v)) if p.len() == depth => (*v, &entries[1..]),
            _ => (T::zero(), entries),
        };
        let mut children = Vec::new();
        let mut start = 0;
        while start < rest.len() {
            let c = rest[start].0[depth];
            let end = start + rest[start..].iter().take_while(|(p, _)| p[depth] == c).count();
            children.push(self.survival(&rest[start..end], depth + 1));
            start = end;
        }
        let below = canonical_product(&mut children);
        let stop = self.weights.stop[depth];
        stop * (T::one() - own) + (T::one() - stop) * below
    }

    /// `𝓕_π(S) = min(𝒢(x^{ρ_π(S)}) + ε|S|/k, 1)`.
    pub fn eval(&self, set: &[Element]) -> T {
        let denom = T::from_usize_lossy(self.per_node);
        let x: BTreeMap<NodePath, T> =
            self.preimage_counts(set).into_iter().map(|(u, c)| (u, T::from_usize_lossy(c) / denom)).collect();
        let bonus = self.eps * T::from_usize_lossy(set.len()) / T::from_usize_lossy(self.k);
        (self.g_exact(&x) + bonus).min(T::one())
    }

    fn check_walkable(&self) -> Result<()> {
        if self.node_count() as u128 > FULL_WALK_NODE_LIMIT {
            return Err(Error::param(format!("{} nodes exceed the walk limit", self.node_count())));
        }
        Ok(())
    }

    /// Draws an antichain `R` from the stopping distribution.
    pub fn sample(&self, seed: u64) -> Result<Vec<NodePath>> {
        self.check_walkable()?;
        Ok(self.sample_with(&mut ChaCha8Rng::seed_from_u64(seed)))
    }

    pub(crate) fn sample_with(&self, rng: &mut impl Rng) -> Vec<NodePath> {
        let mut out = Vec::new();
        let mut stack: Vec<NodePath> = vec![Vec::new()];
        while let Some(node) = stack.pop() {
            let depth = node.len();
            if depth > 0 && (depth == self.levels() || rng.gen::<f64>() < self.weights.stop[depth].as_f64()) {
                out.push(node);
                continue;
            }
            for c in (0..self.arities[depth] as u32).rev() {
                let mut child = node.clone();
                child.push(c);
                stack.push(child);
            }
        }
        out
    }

    /// Monte-Carlo estimate of [`ShuffledTreeInstance::g_exact`].
    pub fn g_monte_carlo(&self, x: &BTreeMap<NodePath, T>, samples: usize, seed: u64) -> Result<f64> {
        self.check_walkable()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut total = 0.0;
        for _ in 0..samples {
            let miss: f64 =
                self.sample_with(&mut rng).iter().filter_map(|u| x.get(u)).map(|v| 1.0 - v.as_f64()).product();
            total += 1.0 - miss;
        }
        Ok(total / samples.max(1) as f64)
    }

    /// Every leaf in lexicographic order.
    pub fn leaves(&self) -> Result<Vec<NodePath>> {
        self.check_walkable()?;
        let mut out: Vec<NodePath> = vec![Vec::new()];
        for &m in &self.arities {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..m as u32).map(move |c| {
                        let mut q = p.clone();
                        q.push(c);
                        q
                    })
                })
                .collect();
        }
        Ok(out)
    }

    /// `𝒜^π_u ∪ A_u`: the shuffled ancestors' elements plus the leaf's own.
    pub fn path_set(&self, leaf: &[u32]) -> Result<Vec<Element>> {
        self.check_node(leaf)?;
        if leaf.len() != self.levels() {
            return Err(Error::param(format!("{leaf:?} is not a leaf")));
        }
        let mut out = Vec::with_capacity(self.k);
        for depth in 1..self.levels() {
            out.extend(self.node_elements(&self.shuffle_node(&leaf[..depth])));
        }
        out.extend(self.node_elements(leaf));
        Ok(out)
    }

    /// `W_u`: elements of every child of every node on the root-to-`u` path.
    pub fn w_set(&self, leaf: &[u32]) -> Result<Vec<Element>> {
        self.check_node(leaf)?;
        let mut out = Vec::new();
        for depth in 0..leaf.len() {
            let mut child = leaf[..depth].to_vec();
            child.push(0);
            for c in 0..self.arities[depth] as u32 {
                child[depth] = c;
                out.extend(self.node_elements(&child));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// True when, for every pair of touched nodes, the LCA depth of their
    /// preimages is the same under `self` and `other`.
    pub fn lca_depths_agree(&self, other: &Self, set: &[Element]) -> bool {
        let mut touched: Vec<NodePath> = set.iter().map(|&e| self.node_of(e)).collect();
        touched.sort();
        touched.dedup();
        let mine: Vec<NodePath> = touched.iter().map(|u| self.unshuffle_node(u)).collect();
        let theirs: Vec<NodePath> = touched.iter().map(|u| other.unshuffle_node(u)).collect();
        let lca = |a: &NodePath, b: &NodePath| a.iter().zip(b).take_while(|(x, y)| x == y).count();
        (0..touched.len())
            .all(|i| (i + 1..touched.len()).all(|j| lca(&mine[i], &mine[j]) == lca(&theirs[i], &theirs[j])))
    }
}

impl<T: Scalar> SetFunction<T> for ShuffledTreeInstance<T> {
    fn ground_size(&self) -> usize {
        self.ground
    }

    fn value(&self, set: &[Element]) -> T {
        self.eval(set)
    }
}
