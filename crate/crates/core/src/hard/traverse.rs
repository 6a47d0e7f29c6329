//! Limited depth-first stream over the tree family.

use crate::error::{Error, Result};
use crate::hard::tree::{NodePath, ShuffledTreeInstance};
use crate::scalar::Scalar;
use crate::stream::{Stream, StreamOp};

/// Default cap on generated stream length.
pub const DEFAULT_STREAM_CAP: usize = 10_000_000;

/// Generated stream plus, for each visited leaf, the number of operations
/// applied when that leaf's set finished arriving.
#[derive(Debug, Clone)]
pub struct TraverseStream {
    pub stream: Stream,
    pub leaf_visits: Vec<(NodePath, usize)>,
}

/// `Σ_{ℓ<L−1} d^ℓ·m_{ℓ+1}·2w + d^{L−1}·2w`, or `None` when `explore`
/// exceeds an internal arity.
pub fn traverse_length(arities: &[usize], explore: usize, per_node: usize) -> Option<u128> {
    let l = arities.len();
    if l == 0 || explore == 0 || arities[..l - 1].iter().any(|&m| m < explore) {
        return None;
    }
    let d = explore as u128;
    let w2 = 2 * per_node as u128;
    let mut total = 0u128;
    for (depth, &m) in arities[..l - 1].iter().enumerate() {
        total = total.checked_add(d.checked_pow(depth as u32)?.checked_mul(m as u128)?.checked_mul(w2)?)?;
    }
    total.checked_add(d.checked_pow((l - 1) as u32)?.checked_mul(w2)?)
}

/// Inserts every child set of a node, explores its first `explore` children,
/// then deletes the child sets; nodes at depth `L−1` insert and delete their
/// single child's set.
pub fn traverse_stream<T: Scalar>(inst: &ShuffledTreeInstance<T>, explore: usize, cap: usize) -> Result<TraverseStream> {
    let len = traverse_length(inst.arities(), explore, inst.per_node())
        .ok_or_else(|| Error::param(format!("explore count {explore} must lie in [1, min internal arity]")))?;
    if len > cap as u128 {
        return Err(Error::param(format!("stream length {len} exceeds the cap {cap}")));
    }
    let mut walk = Walk { inst, explore, ops: Vec::with_capacity(len as usize), leaf_visits: Vec::new() };
    walk.visit(&mut Vec::new());
    debug_assert_eq!(walk.ops.len() as u128, len);
    let stream = Stream::new(walk.ops, Some(inst.ground()))?;
    Ok(TraverseStream { stream, leaf_visits: walk.leaf_visits })
}

struct Walk<'a, T> {
    inst: &'a ShuffledTreeInstance<T>,
    explore: usize,
    ops: Vec<StreamOp>,
    leaf_visits: Vec<(NodePath, usize)>,
}

impl<T: Scalar> Walk<'_, T> {
    fn visit(&mut self, node: &mut NodePath) {
        let depth = node.len();
        let arity = self.inst.arities()[depth];
        let children: Vec<NodePath> = (0..arity as u32)
            .map(|c| {
                let mut child = node.clone();
                child.push(c);
                child
            })
            .collect();
        for child in &children {
            self.ops.extend(self.inst.node_elements(child).into_iter().map(StreamOp::Insert));
        }
        if depth + 1 == self.inst.levels() {
            self.leaf_visits.push((children[0].clone(), self.ops.len()));
        } else {
            for c in 0..self.explore as u32 {
                node.push(c);
                self.visit(node);
                node.pop();
            }
        }
        for child in &children {
            self.ops.extend(self.inst.node_elements(child).into_iter().map(StreamOp::Delete));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn live_at(stream: &Stream, prefix: usize) -> Vec<usize> {
        let mut live = std::collections::BTreeSet::new();
        for op in &stream.ops()[..prefix] {
            match op {
                StreamOp::Insert(e) => live.insert(*e),
                StreamOp::Delete(e) => live.remove(e),
            };
        }
        live.into_iter().collect()
    }

    #[test]
    fn single_level() {
        let t = ShuffledTreeInstance::<f64>::new(vec![1], 2).unwrap();
        let out = traverse_stream(&t, 1, 100).unwrap();
        let expect = vec![StreamOp::Insert(0), StreamOp::Insert(1), StreamOp::Delete(0), StreamOp::Delete(1)];
        assert_eq!(out.stream.ops(), expect.as_slice());
    }

    #[test]
    fn two_levels_count_and_snapshots() {
        let t = ShuffledTreeInstance::<f64>::new(vec![2, 1], 2).unwrap();
        let out = traverse_stream(&t, 2, 100).unwrap();
        assert_eq!(out.stream.len(), 8);
        assert_eq!(traverse_length(&[2, 1], 2, 1), Some(8));
        for (leaf, at) in &out.leaf_visits {
            assert_eq!(live_at(&out.stream, *at), t.w_set(leaf).unwrap());
        }
    }

    #[test]
    fn leaves_visited_in_order() {
        let t = ShuffledTreeInstance::<f64>::new(vec![4, 3, 1], 3).unwrap();
        let out = traverse_stream(&t, 2, 10_000).unwrap();
        let leaves: Vec<NodePath> = out.leaf_visits.iter().map(|(u, _)| u.clone()).collect();
        assert_eq!(leaves, vec![vec![0, 0, 0], vec![0, 1, 0], vec![1, 0, 0], vec![1, 1, 0]]);
        assert_eq!(out.stream.len() as u128, traverse_length(&[4, 3, 1], 2, 1).unwrap());
        for (leaf, at) in &out.leaf_visits {
            assert_eq!(live_at(&out.stream, *at), t.w_set(leaf).unwrap());
        }
    }

    #[test]
    fn rejects_bad_explore_and_cap() {
        let t = ShuffledTreeInstance::<f64>::new(vec![2, 1], 2).unwrap();
        assert!(traverse_stream(&t, 3, 100).is_err());
        assert!(traverse_stream(&t, 0, 100).is_err());
        assert!(traverse_stream(&t, 2, 7).is_err());
    }
}
