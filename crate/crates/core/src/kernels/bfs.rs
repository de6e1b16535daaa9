//! Breadth-first depths from one root.

use super::{Kernel, Seed, UNREACHED};
use crate::graph_model::{IntervalRange, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bfs {
    root: VertexId,
}

impl Bfs {
    pub fn new(root: VertexId) -> Self {
        Bfs { root }
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    /// Largest finite depth.
    pub fn output(depths: &[u32]) -> u32 {
        depths.iter().copied().filter(|&d| d != UNREACHED).max().unwrap_or(0)
    }
}

impl Kernel for Bfs {
    type Attr = u32;
    type Contrib = u32;

    fn name(&self) -> &'static str {
        "bfs"
    }

    fn init(&self, v: VertexId, _n: u64) -> u32 {
        if v == self.root {
            0
        } else {
            UNREACHED
        }
    }

    fn initially_active(&self, range: &IntervalRange) -> bool {
        range.contains(self.root)
    }

    fn seed(&self, _n: u64) -> Seed<u32> {
        Seed::CopyForward
    }

    #[inline]
    fn gather(&self, depth: &u32, _out_degree: u32) -> Option<u32> {
        (*depth != UNREACHED).then(|| depth + 1)
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
