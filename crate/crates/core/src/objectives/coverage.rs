use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objectives::FractionalPoint;
use crate::oracle::{Element, SetFunction};
use crate::scalar::Scalar;

/// Weighted coverage: `f(S) = Σ w_u` over items `u` covered by some element of `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageFunction<T> {
    weights: Vec<T>,
    covers: Vec<Vec<usize>>,
    covered_by: Vec<Vec<Element>>,
}

impl<T: Scalar> CoverageFunction<T> {
    /// `covers[e]` lists the items covered by element `e`.
    pub fn new(weights: Vec<T>, covers: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return Err(Error::param(format!("coverage weight {w} must be finite and non-negative")));
        }
        let items = weights.len();
        let mut covered_by = vec![Vec::new(); items];
        let mut clean = Vec::with_capacity(covers.len());
        for (e, mut c) in covers.into_iter().enumerate() {
            c.sort_unstable();
            c.dedup();
            if let Some(&u) = c.iter().find(|&&u| u >= items) {
                return Err(Error::param(format!("element {e} covers item {u} outside universe of {items}")));
            }
            for &u in &c {
                covered_by[u].push(e);
            }
            clean.push(c);
        }
        Ok(Self { weights, covers: clean, covered_by })
    }

    /// Unit-weight coverage over `items` universe items.
    pub fn unit(items: usize, covers: Vec<Vec<usize>>) -> Self {
        Self::new(vec![T::one(); items], covers).expect("unit coverage is valid")
    }

    /// Random instance: each (element, item) pair is covered independently with
    /// probability `density`; weights are uniform integers in `1..=max_weight`.
    pub fn random(n: usize, items: usize, density: f64, max_weight: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..items).map(|_| T::lit(rng.gen_range(1..=max_weight.max(1)) as f64)).collect();
        let covers = (0..n).map(|_| (0..items).filter(|_| rng.gen_bool(density)).collect()).collect();
        Self::new(weights, covers).expect("generated coverage is valid")
    }

    pub fn items(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn covers(&self, e: Element) -> &[usize] {
        &self.covers[e]
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Parses `coverage <n> <items>`, `e <id> : <item>...` and `w <item> <weight>` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty coverage file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let (n, items) = match head.as_slice() {
            ["coverage", n, m] => (
                n.parse::<usize>().map_err(|_| Error::parse(hl, "bad element count"))?,
                m.parse::<usize>().map_err(|_| Error::parse(hl, "bad item count"))?,
            ),
            _ => return Err(Error::parse(hl, "expected header `coverage <n_elements> <n_items>`")),
        };
        let mut covers = vec![Vec::new(); n];
        let mut weights = vec![T::one(); items];
        for (ln, line) in lines {
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("e") => {
                    let id: usize = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::parse(ln, "expected element id"))?;
                    if id >= n {
                        return Err(Error::parse(ln, format!("element {id} outside 0..{n}")));
                    }
                    if tok.next() != Some(":") {
                        return Err(Error::parse(ln, "expected `:` after element id"));
                    }
                    for t in tok {
                        let u: usize = t.parse().map_err(|_| Error::parse(ln, format!("bad item `{t}`")))?;
                        if u >= items {
                            return Err(Error::parse(ln, format!("item {u} outside 0..{items}")));
                        }
                        covers[id].push(u);
                    }
                }
                Some("w") => {
                    let u: usize = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .filter(|&u| u < items)
                        .ok_or_else(|| Error::parse(ln, "expected item id in range"))?;
                    let w: f64 = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::parse(ln, "expected weight"))?;
                    weights[u] = T::lit(w);
                }
                _ => return Err(Error::parse(ln, "expected `e` or `w` line")),
            }
        }
        Self::new(weights, covers)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("coverage {} {}\n", self.covers.len(), self.items());
        for (e, c) in self.covers.iter().enumerate() {
            let _ = write!(out, "e {e} :");
            for u in c {
                let _ = write!(out, " {u}");
            }
            out.push('\n');
        }
        for (u, w) in self.weights.iter().enumerate() {
            if *w != T::one() {
                let _ = writeln!(out, "w {u} {w}");
            }
        }
        out
    }
}

impl<T: Scalar> SetFunction<T> for CoverageFunction<T> {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &[Element]) -> T {
        let mut hit = vec![0u64; self.items().div_ceil(64)];
        for &e in set {
            for &u in &self.covers[e] {
                hit[u / 64] |= 1 << (u % 64);
            }
        }
        let mut total = T::zero();
        for (u, w) in self.weights.iter().enumerate() {
            if hit[u / 64] >> (u % 64) & 1 == 1 {
                total += *w;
            }
        }
        total
    }

    fn multilinear_closed_form(&self, x: &FractionalPoint<T>) -> Option<T> {
        let mut total = T::zero();
        for (u, w) in self.weights.iter().enumerate() {
            let miss = self.covered_by[u].iter().fold(T::one(), |acc, &e| acc * (T::one() - x.get(e)));
            total += *w * (T::one() - miss);
        }
        Some(total)
    }
}
