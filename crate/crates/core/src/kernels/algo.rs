//! Uniform entry point over the built-in kernels.

use std::fmt;
use std::str::FromStr;

use super::{oracle, scc, Bfs, PageRank, Wcc, UNREACHED};
use crate::engine::{Engine, Graph, IterationStats};
use crate::error::{Error, Result};
use crate::graph_model::VertexId;
use crate::storage::{ShardSetKind, Storage};

/// Largest per-vertex rank difference accepted against the oracle.
pub const PAGERANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoKind {
    PageRank,
    Bfs,
    Wcc,
    Scc,
}

impl AlgoKind {
    pub const ALL: [AlgoKind; 4] = [AlgoKind::PageRank, AlgoKind::Bfs, AlgoKind::Wcc, AlgoKind::Scc];

    pub fn name(self) -> &'static str {
        match self {
            AlgoKind::PageRank => "pagerank",
            AlgoKind::Bfs => "bfs",
            AlgoKind::Wcc => "wcc",
            AlgoKind::Scc => "scc",
        }
    }
}

impl fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgoKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm `{s}`")))
    }
}

/// A kernel with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    PageRank {
        alpha: f64,
        epsilon: f64,
        iterations: u32,
    },
    /// Root as a dense id.
    Bfs {
        root: VertexId,
    },
    Wcc,
    Scc,
}

impl Algorithm {
    pub fn kind(&self) -> AlgoKind {
        match self {
            Algorithm::PageRank { .. } => AlgoKind::PageRank,
            Algorithm::Bfs { .. } => AlgoKind::Bfs,
            Algorithm::Wcc => AlgoKind::Wcc,
            Algorithm::Scc => AlgoKind::Scc,
        }
    }

    /// Every shard set the kernel reads.
    pub fn shard_sets(&self) -> &'static [ShardSetKind] {
        match self {
            Algorithm::Wcc => &[ShardSetKind::Symmetric],
            Algorithm::Scc => &[ShardSetKind::Forward, ShardSetKind::Transpose],
            _ => &[ShardSetKind::Forward],
        }
    }

    /// Bytes per vertex attribute.
    pub fn attr_bytes(&self) -> u64 {
        match self {
            Algorithm::PageRank { .. } => 8,
            Algorithm::Scc => 12,
            _ => 4,
        }
    }

    pub fn check_graph(&self, graph: &Graph) -> Result<()> {
        for &kind in self.shard_sets() {
            graph.shard_set(kind)?;
        }
        if let Algorithm::Bfs { root } = *self {
            if root as u64 >= graph.vertex_count() {
                return Err(Error::VertexOutOfRange {
                    vertex: root as u64,
                    n: graph.vertex_count(),
                });
            }
        }
        Ok(())
    }

    pub fn run(&self, engine: &Engine) -> Result<AlgoRun> {
        self.check_graph(engine.graph())?;
        match *self {
            Algorithm::PageRank {
                alpha,
                epsilon,
                iterations,
            } => {
                let out = engine.run_until(&PageRank::new(alpha, epsilon)?, iterations)?;
                Ok(AlgoRun {
                    values: Values::Ranks(engine.read_attrs()?),
                    iterations: out.iterations,
                    stats: out.stats,
                })
            }
            Algorithm::Bfs { root } => {
                let out = engine.run(&Bfs::new(root))?;
                Ok(AlgoRun {
                    values: Values::Labels(engine.read_attrs()?),
                    iterations: out.iterations,
                    stats: out.stats,
                })
            }
            Algorithm::Wcc => {
                let out = engine.run(&Wcc)?;
                Ok(AlgoRun {
                    values: Values::Labels(engine.read_attrs()?),
                    iterations: out.iterations,
                    stats: out.stats,
                })
            }
            Algorithm::Scc => {
                let out = scc(engine)?;
                Ok(AlgoRun {
                    values: Values::Labels(out.labels),
                    iterations: out.stats.len() as u32,
                    stats: out.stats,
                })
            }
        }
    }

    /// In-memory reference answer. PageRank runs `iterations` steps.
    pub fn oracle(&self, graph: &Graph, storage: &Storage, iterations: u32) -> Result<Values> {
        self.check_graph(graph)?;
        let n = graph.vertex_count() as usize;
        let edges = graph.load_edges(storage, ShardSetKind::Forward)?;
        Ok(match *self {
            Algorithm::PageRank { alpha, .. } => Values::Ranks(oracle::pagerank(n, &edges, alpha, iterations)?),
            Algorithm::Bfs { root } => Values::Labels(oracle::bfs(n, &edges, root)?),
            Algorithm::Wcc => Values::Labels(oracle::wcc(n, &edges)?),
            Algorithm::Scc => Values::Labels(oracle::scc(n, &edges)?),
        })
    }

    /// One-line summary of a result, e.g. `max_depth=2`.
    pub fn summary(&self, values: &Values) -> String {
        match values {
            Values::Ranks(r) => format!("rank_sum={}", PageRank::output(r)),
            Values::Labels(l) => match self {
                Algorithm::Bfs { .. } => {
                    let reached = l.iter().filter(|&&d| d != UNREACHED).count();
                    format!("max_depth={} reached={reached}", Bfs::output(l))
                }
                _ => format!("components={}", Wcc::output(l).len()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Ranks(Vec<f64>),
    /// Depths or component labels; [`UNREACHED`] marks no value.
    Labels(Vec<u32>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Ranks(r) => r.len(),
            Values::Labels(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact equality, bit for bit.
    pub fn identical(&self, other: &Values) -> bool {
        match (self, other) {
            (Values::Ranks(a), Values::Ranks(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Values::Labels(a), Values::Labels(b)) => a == b,
            _ => false,
        }
    }

    /// First vertex that differs from a reference: exact for labels, within
    /// [`PAGERANK_TOLERANCE`] for ranks.
    pub fn mismatch(&self, reference: &Values) -> Option<usize> {
        match (self, reference) {
            (Values::Ranks(a), Values::Ranks(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .position(|(x, y)| (x - y).abs().is_nan() || (x - y).abs() > PAGERANK_TOLERANCE),
            (Values::Labels(a), Values::Labels(b)) if a.len() == b.len() => a.iter().zip(b).position(|(x, y)| x != y),
            _ => Some(0),
        }
    }
}

pub struct AlgoRun {
    pub values: Values,
    pub iterations: u32,
    pub stats: Vec<IterationStats>,
}
