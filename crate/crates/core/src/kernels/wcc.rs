//! Weakly connected components by min-label propagation.

use std::collections::BTreeSet;

use super::{Kernel, Seed};
use crate::graph_model::VertexId;
use crate::storage::ShardSetKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Wcc;

impl Wcc {
    /// Distinct labels, ascending.
    pub fn output(labels: &[u32]) -> BTreeSet<u32> {
        labels.iter().copied().collect()
    }
}

impl Kernel for Wcc {
    type Attr = u32;
    type Contrib = u32;

    fn name(&self) -> &'static str {
        "wcc"
    }

    fn shard_set(&self) -> ShardSetKind {
        ShardSetKind::Symmetric
    }

    fn init(&self, v: VertexId, _n: u64) -> u32 {
        v
    }

    fn seed(&self, _n: u64) -> Seed<u32> {
        Seed::CopyForward
    }

    #[inline]
    fn gather(&self, label: &u32, _out_degree: u32) -> Option<u32> {
        Some(*label)
    }

    #[inline]
    fn combine(&self, a: u32, b: u32) -> u32 {
        a.min(b)
    }

    #[inline]
    fn apply(&self, cur: &u32, c: u32) -> u32 {
        (*cur).min(c)
    }
}
