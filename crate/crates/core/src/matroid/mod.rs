//! Uniform and partition matroids with counted independence queries.
//!
//! Partition matroid text format:
//!
//! ```text
//! partition
//! b 0 cap 1
//! b 1 cap 2
//! e 0 block 0
//! e 1 block 1
//! ```

mod swap;

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::oracle::{validate_elements, Element};

pub use swap::{swap_round, ConvexCombo};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatroidKind {
    Uniform { k: usize },
    Partition { block_of: Vec<usize>, caps: Vec<usize> },
}

/// Matroid over the ground set `0..ground_size` with an independence-query counter.
#[derive(Debug)]
pub struct MatroidHandle {
    kind: MatroidKind,
    ground: usize,
    queries: AtomicU64,
}

impl Clone for MatroidHandle {
    fn clone(&self) -> Self {
        Self { kind: self.kind.clone(), ground: self.ground, queries: AtomicU64::new(self.queries()) }
    }
}

impl MatroidHandle {
    pub fn uniform(k: usize, ground: usize) -> Self {
        Self { kind: MatroidKind::Uniform { k }, ground, queries: AtomicU64::new(0) }
    }

    /// `block_of[e]` is the block of element `e`; `caps[b]` its capacity.
    pub fn partition(block_of: Vec<usize>, caps: Vec<usize>) -> Result<Self> {
        if let Some((e, &b)) = block_of.iter().enumerate().find(|(_, &b)| b >= caps.len()) {
            return Err(Error::param(format!("element {e} assigned to unknown block {b}")));
        }
        let ground = block_of.len();
        Ok(Self { kind: MatroidKind::Partition { block_of, caps }, ground, queries: AtomicU64::new(0) })
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Whether `set` (distinct ids) is independent; one counted query.
    pub fn is_independent(&self, set: &[Element]) -> Result<bool> {
        validate_elements(set, self.ground)?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.independent_uncounted(set))
    }

    /// Whether `set ∪ {e}` is independent; one counted query.
    pub fn can_add(&self, set: &[Element], e: Element) -> Result<bool> {
        let mut with = Vec::with_capacity(set.len() + 1);
        with.extend_from_slice(set);
        with.push(e);
        self.is_independent(&with)
    }

    fn independent_uncounted(&self, set: &[Element]) -> bool {
        match &self.kind {
            MatroidKind::Uniform { k } => set.len() <= *k,
            MatroidKind::Partition { block_of, caps } => {
                let mut used = vec![0usize; caps.len()];
                set.iter().all(|&e| {
                    let b = block_of[e];
                    used[b] += 1;
                    used[b] <= caps[b]
                })
            }
        }
    }

    /// Rank of `ground` by greedy augmentation, counting its queries.
    pub fn rank(&self, ground: &[Element]) -> Result<usize> {
        let mut basis = Vec::new();
        for &e in ground {
            if !basis.contains(&e) && self.can_add(&basis, e)? {
                basis.push(e);
            }
        }
        Ok(basis.len())
    }

    /// Rank of the whole ground set from the structure alone (no queries).
    pub fn rank_bound(&self) -> usize {
        match &self.kind {
            MatroidKind::Uniform { k } => (*k).min(self.ground),
            MatroidKind::Partition { block_of, caps } => {
                let mut sizes = vec![0usize; caps.len()];
                for &b in block_of {
                    sizes[b] += 1;
                }
                sizes.iter().zip(caps).map(|(&s, &c)| s.min(c)).sum()
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, "partition")) => {}
            Some((ln, _)) => return Err(Error::parse(ln, "expected header `partition`")),
            None => return Err(Error::parse(1, "empty matroid file")),
        }
        let mut caps: Vec<Option<usize>> = Vec::new();
        let mut block_of: Vec<Option<usize>> = Vec::new();
        let grow = |v: &mut Vec<Option<usize>>, i: usize| {
            if v.len() <= i {
                v.resize(i + 1, None);
            }
        };
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(ln, format!("bad integer `{s}`")));
            match tok.as_slice() {
                ["b", b, "cap", c] => {
                    let b = num(b)?;
                    grow(&mut caps, b);
                    caps[b] = Some(num(c)?);
                }
                ["e", e, "block", b] => {
                    let e = num(e)?;
                    grow(&mut block_of, e);
                    block_of[e] = Some(num(b)?);
                }
                _ => return Err(Error::parse(ln, "expected `b <block> cap <c>` or `e <id> block <block>`")),
            }
        }
        let caps = caps
            .into_iter()
            .enumerate()
            .map(|(b, c)| c.ok_or_else(|| Error::param(format!("block {b} has no capacity"))))
            .collect::<Result<Vec<_>>>()?;
        let block_of = block_of
            .into_iter()
            .enumerate()
            .map(|(e, b)| b.ok_or_else(|| Error::param(format!("element {e} has no block"))))
            .collect::<Result<Vec<_>>>()?;
        Self::partition(block_of, caps)
    }

    /// Text form; uniform matroids are written as a single-block partition.
    pub fn to_text(&self) -> String {
        let (block_of, caps) = match &self.kind {
            MatroidKind::Uniform { k } => (vec![0; self.ground], vec![*k]),
            MatroidKind::Partition { block_of, caps } => (block_of.clone(), caps.clone()),
        };
        let mut out = String::from("partition\n");
        for (b, c) in caps.iter().enumerate() {
            let _ = writeln!(out, "b {b} cap {c}");
        }
        for (e, b) in block_of.iter().enumerate() {
            let _ = writeln!(out, "e {e} block {b}");
        }
        out
    }
}
