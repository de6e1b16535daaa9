//! Vertex programs in gather/combine/apply form, plus in-memory oracles.

pub mod algo;
pub mod bfs;
pub mod oracle;
pub mod pagerank;
pub mod scc;
pub mod wcc;

use std::fmt::Debug;

use crate::graph_model::{IntervalRange, VertexId};
use crate::storage::{FixedWidth, ShardSetKind};

pub use algo::{AlgoKind, AlgoRun, Algorithm, Values};
pub use bfs::Bfs;
pub use pagerank::PageRank;
pub use scc::{scc, SccAttr, SccResult};
pub use wcc::Wcc;

/// Sentinel for unreached or unlabelled vertices.
pub const UNREACHED: u32 = u32::MAX;

/// How a destination's value starts each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seed<A> {
    /// Start from the previous iteration's value.
    CopyForward,
    /// Start from a constant.
    Reset(A),
}

/// One vertex program.
///
/// For every destination the engine seeds the value, then for each source
/// interval in ascending order folds that interval's gathers into one
/// contribution and applies it.
pub trait Kernel: Sync {
    type Attr: FixedWidth + PartialEq + Debug;
    type Contrib: FixedWidth;

    fn name(&self) -> &'static str;

    fn shard_set(&self) -> ShardSetKind {
        ShardSetKind::Forward
    }

    fn init(&self, v: VertexId, n: u64) -> Self::Attr;

    fn initially_active(&self, range: &IntervalRange) -> bool {
        let _ = range;
        true
    }

    fn seed(&self, n: u64) -> Seed<Self::Attr>;

    fn gather(&self, src_attr: &Self::Attr, src_out_degree: u32) -> Option<Self::Contrib>;

    fn combine(&self, a: Self::Contrib, b: Self::Contrib) -> Self::Contrib;

    fn apply(&self, cur: &Self::Attr, c: Self::Contrib) -> Self::Attr;

    fn changed(&self, old: &Self::Attr, new: &Self::Attr) -> bool {
        old != new
    }

    /// Every vertex counts as changed every iteration.
    fn fixed_iterations(&self) -> bool {
        false
    }

    /// Whether rows whose source interval is inactive can be skipped.
    fn skips_inactive_sources(&self) -> bool {
        true
    }

    fn needs_out_degrees(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::scc::{SccBackward, SccForward};
    use super::*;

    fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }

    /// Folds gathered contributions into `cur` one interval at a time.
    fn fold<K: Kernel<Contrib = u32>>(k: &K, cur: K::Attr, order: &[u32], split: usize) -> K::Attr {
        let mut value = cur;
        for chunk in order.chunks(split.max(1)) {
            let c = chunk.iter().copied().reduce(|a, b| k.combine(a, b)).unwrap();
            value = k.apply(&value, c);
        }
        value
    }

    fn order_free<K: Kernel<Contrib = u32>>(k: &K, cur: K::Attr, contribs: &[u32]) -> bool
    where
        K::Attr: Copy,
    {
        let want = fold(k, cur, contribs, contribs.len());
        permutations(contribs)
            .iter()
            .all(|p| (1..=p.len()).all(|s| fold(k, cur, p, s) == want))
    }

    /// Backward senders never carry a colour above the receiver's.
    fn at_most(cur: u32, contribs: &[u32]) -> Vec<u32> {
        contribs.iter().map(|&c| c.min(cur)).collect()
    }

    fn scc_attr(fwd: u32) -> scc::SccAttr {
        scc::SccAttr {
            comp: UNREACHED,
            fwd,
            bwd: UNREACHED,
        }
    }

    #[test]
    fn integer_kernels_ignore_combine_order_exhaustively() {
        let lists: [&[u32]; 4] = [&[3], &[5, 1], &[4, 4, 2, 9], &[7, 0, 3, 3, 8, 1]];
        for contribs in lists {
            for cur in [0, 2, 5, UNREACHED] {
                assert!(order_free(&Bfs::new(0), cur, contribs));
                assert!(order_free(&Wcc, cur, contribs));
                assert!(order_free(&SccForward, scc_attr(cur), contribs));
                assert!(order_free(&SccBackward, scc_attr(cur), &at_most(cur, contribs)));
            }
        }
    }

    proptest! {
        #[test]
        fn integer_kernels_ignore_combine_order(
            contribs in prop::collection::vec(0u32..16, 1..6),
            cur in 0u32..16,
        ) {
            prop_assert!(order_free(&Bfs::new(0), cur, &contribs));
            prop_assert!(order_free(&Wcc, cur, &contribs));
            prop_assert!(order_free(&SccForward, scc_attr(cur), &contribs));
            prop_assert!(order_free(&SccBackward, scc_attr(cur), &at_most(cur, &contribs)));
        }
    }
}
