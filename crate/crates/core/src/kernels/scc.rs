//! Strongly connected components by repeated forward/backward labelling.
//!
//! Each round colours every unassigned vertex with the smallest unassigned id
//! that reaches it. The vertex whose id equals its colour is the root; the
//! vertices of that colour that reach the root (found on the transposed
//! edges) form its component. Assigned vertices take no further part.

use std::collections::BTreeSet;

use super::{Kernel, Seed, UNREACHED};
use crate::engine::{Engine, IterationStats};
use crate::error::Result;
use crate::graph_model::VertexId;
use crate::storage::{FixedWidth, ShardSetKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SccAttr {
    /// Component label, or [`UNREACHED`] while unassigned.
    pub comp: u32,
    /// Forward colour.
    pub fwd: u32,
    /// Equals `fwd` once the vertex is known to reach its root.
    pub bwd: u32,
}

impl SccAttr {
    fn assigned(&self) -> bool {
        self.comp != UNREACHED
    }
}

impl FixedWidth for SccAttr {
    const WIDTH: usize = 12;

    fn encode(&self, out: &mut [u8]) {
        out[..4].copy_from_slice(&self.comp.to_le_bytes());
        out[4..8].copy_from_slice(&self.fwd.to_le_bytes());
        out[8..12].copy_from_slice(&self.bwd.to_le_bytes());
    }

    fn decode(bytes: &[u8]) -> Self {
        let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
        SccAttr {
            comp: word(0),
            fwd: word(4),
            bwd: word(8),
        }
    }
}

/// Forward colouring over unassigned vertices.
#[derive(Debug, Clone, Copy, Default)]
pub struct SccForward;

impl Kernel for SccForward {
    type Attr = SccAttr;
    type Contrib = u32;

    fn name(&self) -> &'static str {
        "scc-forward"
    }

    fn init(&self, v: VertexId, _n: u64) -> SccAttr {
        SccAttr {
            comp: UNREACHED,
            fwd: v,
            bwd: UNREACHED,
        }
    }

    fn seed(&self, _n: u64) -> Seed<SccAttr> {
        Seed::CopyForward
    }

    fn gather(&self, src: &SccAttr, _out_degree: u32) -> Option<u32> {
        (!src.assigned()).then_some(src.fwd)
    }

    fn combine(&self, a: u32, b: u32) -> u32 {
        a.min(b)
    }

    fn apply(&self, cur: &SccAttr, c: u32) -> SccAttr {
        if cur.assigned() || c >= cur.fwd {
            return *cur;
        }
        SccAttr { fwd: c, ..*cur }
    }
}

/// Backward confirmation within each colour, on the transposed edges.
///
/// A confirmed source sends its colour. Along a reversed edge the sender's
/// colour never exceeds the receiver's, so the largest colour received equals
/// the receiver's own colour exactly when some confirmed sender shares it.
#[derive(Debug, Clone, Copy, Default)]
pub struct SccBackward;

impl Kernel for SccBackward {
    type Attr = SccAttr;
    type Contrib = u32;

    fn name(&self) -> &'static str {
        "scc-backward"
    }

    fn shard_set(&self) -> ShardSetKind {
        ShardSetKind::Transpose
    }

    fn init(&self, v: VertexId, _n: u64) -> SccAttr {
        SccAttr {
            comp: UNREACHED,
            fwd: v,
            bwd: v,
        }
    }

    fn seed(&self, _n: u64) -> Seed<SccAttr> {
        Seed::CopyForward
    }

    fn gather(&self, src: &SccAttr, _out_degree: u32) -> Option<u32> {
        (!src.assigned() && src.bwd == src.fwd).then_some(src.fwd)
    }

    fn combine(&self, a: u32, b: u32) -> u32 {
        a.max(b)
    }

    fn apply(&self, cur: &SccAttr, c: u32) -> SccAttr {
        if cur.assigned() || cur.bwd == cur.fwd || c != cur.fwd {
            return *cur;
        }
        SccAttr { bwd: cur.fwd, ..*cur }
    }
}

#[derive(Debug, Clone)]
pub struct SccResult {
    /// Component label per vertex: the smallest id in the component.
    pub labels: Vec<u32>,
    pub rounds: u32,
    pub stats: Vec<IterationStats>,
}

impl SccResult {
    pub fn component_count(&self) -> usize {
        self.labels.iter().copied().collect::<BTreeSet<_>>().len()
    }
}

/// Runs rounds until every vertex is assigned. Each phase runs to
/// quiescence regardless of the engine's iteration cap.
pub fn scc(engine: &Engine) -> Result<SccResult> {
    let graph = engine.graph();
    graph.shard_set(ShardSetKind::Forward)?;
    graph.shard_set(ShardSetKind::Transpose)?;
    let mut stats = Vec::new();
    let mut rounds = 0;
    let mut forward = engine.run_until(&SccForward, u32::MAX)?;
    loop {
        stats.append(&mut forward.stats);
        rounds += 1;
        let backward = engine.resume_until(
            &SccBackward,
            |v, a| {
                if !a.assigned() && a.fwd == v {
                    a.bwd = v;
                    true
                } else {
                    false
                }
            },
            u32::MAX,
        )?;
        stats.extend(backward.stats);
        forward = engine.resume_until(
            &SccForward,
            |v, a| {
                if !a.assigned() && a.bwd == a.fwd {
                    a.comp = a.fwd;
                }
                if a.assigned() {
                    return false;
                }
                a.fwd = v;
                a.bwd = UNREACHED;
                true
            },
            u32::MAX,
        )?;
        if forward.initially_active_vertices == 0 {
            break;
        }
    }
    let labels = engine.read_attrs::<SccAttr>()?.into_iter().map(|a| a.comp).collect();
    Ok(SccResult { labels, rounds, stats })
}
