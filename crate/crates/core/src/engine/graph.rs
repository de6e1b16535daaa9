use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph_model::{Edge, Partition, SubShardId, VertexId};
use crate::preprocess::{load_degrees, IdMap};
use crate::storage::{subshard_path, Manifest, ShardSetInfo, ShardSetKind, Storage, SubShardBlock, SubShardGeometry};

/// Edge limit above which in-memory loading is refused.
pub const IN_MEMORY_EDGE_LIMIT: u64 = 10_000_000;

/// A preprocessed graph directory.
#[derive(Debug, Clone)]
pub struct Graph {
    dir: PathBuf,
    manifest: Manifest,
    partition: Partition,
}

impl Graph {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let manifest = Manifest::load(&dir)?;
        let partition = manifest.partition()?;
        for (name, set) in &manifest.shard_sets {
            if set.subshards.len() != partition.ranges().len().pow(2) {
                return Err(Error::InvalidInput(format!(
                    "shard set `{name}` lists {} sub-shards for P = {}",
                    set.subshards.len(),
                    manifest.partitions
                )));
            }
        }
        Ok(Graph {
            dir,
            manifest,
            partition,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn vertex_count(&self) -> u64 {
        self.manifest.vertex_count
    }

    pub fn edge_count(&self) -> u64 {
        self.manifest.edge_count
    }

    pub fn partitions(&self) -> u32 {
        self.manifest.partitions
    }

    pub fn shard_set(&self, kind: ShardSetKind) -> Result<&ShardSetInfo> {
        self.manifest.shard_set(kind)
    }

    pub fn subshard_path(&self, kind: ShardSetKind, id: SubShardId) -> PathBuf {
        subshard_path(&self.dir, kind, id)
    }

    pub fn geometry(&self, id: SubShardId) -> SubShardGeometry {
        SubShardGeometry {
            src: self.partition.range(id.src_interval).ids(),
            dst: self.partition.range(id.dst_interval).ids(),
        }
    }

    pub fn read_subshard(&self, storage: &Storage, kind: ShardSetKind, id: SubShardId) -> Result<SubShardBlock> {
        storage.read_subshard(&self.subshard_path(kind, id), Some(&self.geometry(id)))
    }

    pub fn out_degrees(&self, storage: &Storage) -> Result<Vec<u32>> {
        Ok(load_degrees(&self.dir, &self.manifest, storage)?
            .into_iter()
            .map(|d| d.1)
            .collect())
    }

    pub fn id_map(&self, storage: &Storage) -> Result<IdMap> {
        IdMap::load(&self.dir, &self.manifest, storage)
    }

    /// Raw index of every dense id.
    pub fn raw_indices(&self, storage: &Storage) -> Result<Vec<u64>> {
        Ok(self.id_map(storage)?.reverse().to_vec())
    }

    /// Dense id for a raw index.
    pub fn dense_id(&self, raw: u64) -> Result<Option<VertexId>> {
        crate::preprocess::lookup_raw(&self.dir, &self.manifest, raw)
    }

    /// Every edge of a shard set, in row-major sub-shard order.
    pub fn load_edges(&self, storage: &Storage, kind: ShardSetKind) -> Result<Vec<Edge>> {
        let set = self.shard_set(kind)?;
        if set.edges > IN_MEMORY_EDGE_LIMIT {
            return Err(Error::Oversize {
                edges: set.edges,
                limit: IN_MEMORY_EDGE_LIMIT,
            });
        }
        let mut edges = Vec::with_capacity(set.edges as usize);
        for id in self.partition.subshards() {
            edges.extend(self.read_subshard(storage, kind, id)?.edges());
        }
        Ok(edges)
    }
}
