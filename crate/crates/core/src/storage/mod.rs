//! On-disk layout, counted file access, and streaming readers.
//!
//! Every transfer is whole-file and strictly sequential: files are read front
//! to back in one pass and written in one pass, so the counters equal the sum
//! of the touched file sizes.
//!
//! Directory layout of a preprocessed graph:
//! ```text
//! manifest.json  map.bin  rmap.bin  deg.bin
//! shards/ss_<i>_<j>.nxss     (shards_t/, shards_sym/ for derived sets)
//! ```
//! and of an engine work directory (the graph directory by default):
//! ```text
//! hubs/h_<i>_<j>.nxhb  intervals/iv_<j>.nxiv
//! ```

pub mod counters;
pub mod format;
pub mod manifest;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use counters::{IoCategory, IoCounters, IoSnapshot, Tally};
pub use format::{FixedWidth, SubShardBlock, SubShardGeometry};
pub use manifest::{Manifest, ShardSetInfo, ShardSetKind, SubShardInfo};

use crate::error::{Error, IoContext, Result};
use crate::graph_model::{Edge, IntervalRange, SubShardId, VertexId};

pub const HUB_DIR: &str = "hubs";
pub const INTERVAL_DIR: &str = "intervals";

pub fn subshard_file_name(id: SubShardId) -> String {
    format!("ss_{}_{}.nxss", id.src_interval, id.dst_interval)
}

pub fn subshard_path(graph_dir: &Path, kind: ShardSetKind, id: SubShardId) -> PathBuf {
    graph_dir.join(kind.dir_name()).join(subshard_file_name(id))
}

pub fn hub_path(work_dir: &Path, id: SubShardId) -> PathBuf {
    work_dir
        .join(HUB_DIR)
        .join(format!("h_{}_{}.nxhb", id.src_interval, id.dst_interval))
}

pub fn interval_path(work_dir: &Path, index: u32) -> PathBuf {
    work_dir.join(INTERVAL_DIR).join(format!("iv_{index}.nxiv"))
}

/// A loaded interval: attributes plus the id of its first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<A> {
    pub first: VertexId,
    pub attrs: Vec<A>,
}

/// Counted access to graph and engine files.
#[derive(Debug, Clone, Default)]
pub struct Storage {
    io: Arc<IoCounters>,
}

impl Storage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_counters(io: Arc<IoCounters>) -> Self {
        Storage { io }
    }

    pub fn counters(&self) -> &Arc<IoCounters> {
        &self.io
    }

    pub fn io_counters(&self) -> IoSnapshot {
        self.io.snapshot()
    }

    /// Reads a whole file in one forward pass.
    pub fn read_file(&self, path: &Path, category: IoCategory) -> Result<Vec<u8>> {
        let mut file = File::open(path).at(path)?;
        let mut bytes = Vec::with_capacity(file.metadata().map(|m| m.len() as usize).unwrap_or(0));
        file.read_to_end(&mut bytes).at(path)?;
        self.io.record_read(category, bytes.len() as u64);
        Ok(bytes)
    }

    pub fn write_file(&self, path: &Path, category: IoCategory, bytes: &[u8]) -> Result<u64> {
        fs::write(path, bytes).at(path)?;
        self.io.record_write(category, bytes.len() as u64);
        Ok(bytes.len() as u64)
    }

    /// Encodes `(dst, src)`-sorted edges and writes them; returns the byte count.
    pub fn write_subshard(&self, path: &Path, edges: &[Edge]) -> Result<u64> {
        let bytes = format::encode_subshard(edges)?;
        self.write_file(path, IoCategory::SubShard, &bytes)
    }

    pub fn read_subshard(&self, path: &Path, geometry: Option<&SubShardGeometry>) -> Result<SubShardBlock> {
        let bytes = self.read_file(path, IoCategory::SubShard)?;
        SubShardBlock::decode(Arc::new(bytes), geometry, path)
    }

    /// Streams `(dst, src)`-ordered edges without materializing the block.
    pub fn read_subshard_stream(&self, path: &Path) -> Result<SubShardStream> {
        SubShardStream::open(path, Arc::clone(&self.io))
    }

    pub fn load_interval<A: FixedWidth>(&self, path: &Path, range: &IntervalRange) -> Result<Interval<A>> {
        if range.count == 0 {
            return Err(Error::InvalidInput("intervals cannot be empty".into()));
        }
        let bytes = self.read_file(path, IoCategory::Interval)?;
        let attrs = format::decode_interval(&bytes, range.first, range.count, path)?;
        Ok(Interval {
            first: range.first,
            attrs,
        })
    }

    pub fn save_interval<A: FixedWidth>(&self, path: &Path, range: &IntervalRange, attrs: &[A]) -> Result<u64> {
        if attrs.is_empty() || attrs.len() != range.count as usize {
            return Err(Error::InvalidInput(format!(
                "interval {} holds {} vertices, got {} attributes",
                range.index,
                range.count,
                attrs.len()
            )));
        }
        let bytes = format::encode_interval(range.first, attrs);
        self.write_file(path, IoCategory::Interval, &bytes)
    }

    pub fn write_hub<C: FixedWidth>(
        &self,
        path: &Path,
        dst: &Range<VertexId>,
        records: &[(VertexId, C)],
    ) -> Result<u64> {
        let bytes = format::encode_hub(records, dst)?;
        self.write_file(path, IoCategory::Hub, &bytes)
    }

    pub fn read_hub<C: FixedWidth>(&self, path: &Path, dst: &Range<VertexId>) -> Result<Vec<(VertexId, C)>> {
        let bytes = self.read_file(path, IoCategory::Hub)?;
        format::decode_hub(&bytes, dst, path)
    }

    pub(crate) fn write_metadata<T, F>(&self, path: &Path, items: &[T], mut encode: F) -> Result<u64>
    where
        F: FnMut(&T, &mut Vec<u8>),
    {
        let file = File::create(path).at(path)?;
        let mut w = BufWriter::new(file);
        let mut buf = Vec::with_capacity(16);
        let mut total = 0u64;
        for item in items {
            buf.clear();
            encode(item, &mut buf);
            w.write_all(&buf).at(path)?;
            total += buf.len() as u64;
        }
        w.flush().at(path)?;
        self.io.record_write(IoCategory::Metadata, total);
        Ok(total)
    }
}

/// Forward-only reader over one sub-shard file.
///
/// Validates ordering as it goes and checks the trailing byte count at the end.
pub struct SubShardStream {
    reader: BufReader<File>,
    path: PathBuf,
    io: Arc<IoCounters>,
    edge_count: u64,
    records_left: u64,
    srcs_left: u32,
    dst: Option<VertexId>,
    prev_src: VertexId,
    edges_seen: u64,
    finished: bool,
}

impl SubShardStream {
    fn open(path: &Path, io: Arc<IoCounters>) -> Result<Self> {
        let file = File::open(path).at(path)?;
        io.add_file_read(IoCategory::SubShard);
        let mut stream = SubShardStream {
            reader: BufReader::with_capacity(1 << 16, file),
            path: path.to_path_buf(),
            io,
            edge_count: 0,
            records_left: 0,
            srcs_left: 0,
            dst: None,
            prev_src: 0,
            edges_seen: 0,
            finished: false,
        };
        let mut header = [0u8; format::SUBSHARD_HEADER_BYTES];
        stream.fill(&mut header)?;
        if header[..4] != format::SUBSHARD_MAGIC {
            return Err(stream.bad("bad magic"));
        }
        stream.edge_count = u64::from_le_bytes(header[4..12].try_into().unwrap());
        stream.records_left = u64::from_le_bytes(header[12..20].try_into().unwrap());
        if stream.records_left > stream.edge_count {
            return Err(stream.bad("more destinations than edges"));
        }
        Ok(stream)
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    fn bad(&self, reason: &str) -> Error {
        Error::corrupt("sub-shard", &self.path, reason)
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        self.reader.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                self.bad("truncated")
            } else {
                Error::io(&self.path, e)
            }
        })?;
        self.io.add_read_bytes(IoCategory::SubShard, buf.len() as u64);
        Ok(())
    }

    fn next_edge(&mut self) -> Result<Option<Edge>> {
        while self.srcs_left == 0 {
            if self.records_left == 0 {
                if self.edges_seen != self.edge_count {
                    return Err(self.bad("edge count mismatch"));
                }
                let mut probe = [0u8; 1];
                match self.reader.read(&mut probe) {
                    Ok(0) => return Ok(None),
                    Ok(_) => return Err(self.bad("trailing bytes")),
                    Err(e) => return Err(Error::io(&self.path, e)),
                }
            }
            let mut rec = [0u8; 8];
            self.fill(&mut rec)?;
            let dst = u32::from_le_bytes(rec[..4].try_into().unwrap());
            let count = u32::from_le_bytes(rec[4..].try_into().unwrap());
            if self.dst.is_some_and(|d| d >= dst) {
                return Err(self.bad("destinations not strictly ascending"));
            }
            if count == 0 {
                return Err(self.bad("empty destination record"));
            }
            self.dst = Some(dst);
            self.srcs_left = count;
            self.records_left -= 1;
            self.prev_src = 0;
        }
        let mut s = [0u8; 4];
        self.fill(&mut s)?;
        let src = u32::from_le_bytes(s);
        if src < self.prev_src {
            return Err(self.bad("sources not ascending"));
        }
        self.prev_src = src;
        self.srcs_left -= 1;
        self.edges_seen += 1;
        if self.edges_seen > self.edge_count {
            return Err(self.bad("edge count mismatch"));
        }
        Ok(Some(Edge::new(src, self.dst.expect("record open"))))
    }
}

impl Iterator for SubShardStream {
    type Item = Result<Edge>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.next_edge() {
            Ok(Some(e)) => Some(Ok(e)),
            Ok(None) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}

pub(crate) fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).at(path)
}
