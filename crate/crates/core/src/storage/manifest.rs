use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::graph_model::{IntervalRange, Partition, SubShardId};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// Which edge multiset a shard set stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShardSetKind {
    Forward,
    /// Every edge reversed; used by the backward pass of SCC.
    Transpose,
    /// Every edge plus its reverse; used by WCC.
    Symmetric,
}

impl ShardSetKind {
    pub fn name(self) -> &'static str {
        match self {
            ShardSetKind::Forward => "forward",
            ShardSetKind::Transpose => "transpose",
            ShardSetKind::Symmetric => "symmetric",
        }
    }

    pub fn dir_name(self) -> &'static str {
        match self {
            ShardSetKind::Forward => "shards",
            ShardSetKind::Transpose => "shards_t",
            ShardSetKind::Symmetric => "shards_sym",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubShardInfo {
    pub src: u32,
    pub dst: u32,
    pub edges: u64,
    pub dsts: u64,
    pub bytes: u64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardSetInfo {
    pub dir: String,
    pub edges: u64,
    /// Row-major, `P²` entries.
    pub subshards: Vec<SubShardInfo>,
}

impl ShardSetInfo {
    pub fn get(&self, id: SubShardId, p: u32) -> &SubShardInfo {
        &self.subshards[(id.src_interval * p + id.dst_interval) as usize]
    }

    pub fn total_bytes(&self) -> u64 {
        self.subshards.iter().map(|s| s.bytes).sum()
    }

    pub fn max_subshard_bytes(&self) -> u64 {
        self.subshards.iter().map(|s| s.bytes).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub map: String,
    pub reverse_map: String,
    pub degrees: String,
}

impl Default for ManifestFiles {
    fn default() -> Self {
        ManifestFiles {
            map: "map.bin".into(),
            reverse_map: "rmap.bin".into(),
            degrees: "deg.bin".into(),
        }
    }
}

/// `manifest.json`: everything needed to reopen a preprocessed graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    /// First dense id; always 0.
    pub id_base: u32,
    #[serde(rename = "n")]
    pub vertex_count: u64,
    #[serde(rename = "m")]
    pub edge_count: u64,
    #[serde(rename = "P")]
    pub partitions: u32,
    pub vertex_id_bytes: u32,
    /// Attribute width used for planning when no kernel is specified.
    pub attr_width: u32,
    pub intervals: Vec<IntervalRange>,
    pub files: ManifestFiles,
    pub shard_sets: BTreeMap<String, ShardSetInfo>,
}

impl Manifest {
    pub fn partition(&self) -> Result<Partition> {
        let partition = Partition::new(self.vertex_count, self.partitions)?;
        if partition.ranges() != self.intervals.as_slice() {
            return Err(Error::InvalidInput(
                "manifest interval boundaries disagree with the equal split".into(),
            ));
        }
        Ok(partition)
    }

    pub fn shard_set(&self, kind: ShardSetKind) -> Result<&ShardSetInfo> {
        self.shard_sets
            .get(kind.name())
            .ok_or(Error::MissingShardSet(kind.name()))
    }

    pub fn has_shard_set(&self, kind: ShardSetKind) -> bool {
        self.shard_sets.contains_key(kind.name())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = std::fs::read(&path).at(&path)?;
        let manifest: Manifest = serde_json::from_slice(&bytes).map_err(|source| Error::Manifest {
            path: path.clone(),
            source,
        })?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported manifest version {}",
                manifest.version
            )));
        }
        Ok(manifest)
    }

    pub fn store(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(self).map_err(|source| Error::Manifest {
            path: path.clone(),
            source,
        })?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).at(&path)
    }
}
