//! Bit-exact little-endian layouts for sub-shards, intervals, and hubs.
//!
//! Sub-shard (`.nxss`):
//! ```text
//! magic "NXSS" | edge_count u64 | dst_count u64
//! dst_count × ( dst u32 | src_count u32 | src_count × src u32 )
//! ```
//! Interval (`.nxiv`): `first u32 | count u32 | width u32 | count × width bytes`.
//!
//! Hub (`.nxhb`): `record_count u64 | record_count × ( dst u32 | width bytes )`.

use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph_model::{Edge, VertexId};

pub const SUBSHARD_MAGIC: [u8; 4] = *b"NXSS";
pub const SUBSHARD_HEADER_BYTES: usize = 20;
pub const SUBSHARD_RECORD_HEADER_BYTES: usize = 8;
pub const INTERVAL_HEADER_BYTES: usize = 12;
pub const HUB_HEADER_BYTES: usize = 8;
pub const VERTEX_ID_BYTES: usize = 4;

/// A value with a fixed little-endian encoding.
pub trait FixedWidth: Copy + Send + Sync + 'static {
    const WIDTH: usize;
    fn encode(&self, out: &mut [u8]);
    fn decode(bytes: &[u8]) -> Self;
}

impl FixedWidth for u32 {
    const WIDTH: usize = 4;
    fn encode(&self, out: &mut [u8]) {
        out.copy_from_slice(&self.to_le_bytes());
    }
    fn decode(bytes: &[u8]) -> Self {
        u32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl FixedWidth for u64 {
    const WIDTH: usize = 8;
    fn encode(&self, out: &mut [u8]) {
        out.copy_from_slice(&self.to_le_bytes());
    }
    fn decode(bytes: &[u8]) -> Self {
        u64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

impl FixedWidth for f64 {
    const WIDTH: usize = 8;
    fn encode(&self, out: &mut [u8]) {
        out.copy_from_slice(&self.to_le_bytes());
    }
    fn decode(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

impl FixedWidth for (u32, u32) {
    const WIDTH: usize = 8;
    fn encode(&self, out: &mut [u8]) {
        out[..4].copy_from_slice(&self.0.to_le_bytes());
        out[4..].copy_from_slice(&self.1.to_le_bytes());
    }
    fn decode(bytes: &[u8]) -> Self {
        (u32::decode(&bytes[..4]), u32::decode(&bytes[4..8]))
    }
}

#[inline]
fn le_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

#[inline]
fn le_u64(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

// ---------------------------------------------------------------- sub-shards

/// Size in bytes of an encoded sub-shard.
pub const fn subshard_size(dst_count: u64, edge_count: u64) -> u64 {
    SUBSHARD_HEADER_BYTES as u64 + SUBSHARD_RECORD_HEADER_BYTES as u64 * dst_count + VERTEX_ID_BYTES as u64 * edge_count
}

/// Encodes edges already sorted by `(dst, src)`.
pub fn encode_subshard(edges: &[Edge]) -> Result<Vec<u8>> {
    if let Some(w) = edges.windows(2).find(|w| (w[0].dst, w[0].src) > (w[1].dst, w[1].src)) {
        return Err(Error::Invariant(format!(
            "sub-shard edges out of (dst, src) order: {:?} before {:?}",
            w[0], w[1]
        )));
    }
    let mut dst_count = 0u64;
    let mut prev = None;
    for e in edges {
        if prev != Some(e.dst) {
            dst_count += 1;
            prev = Some(e.dst);
        }
    }
    let mut out = Vec::with_capacity(subshard_size(dst_count, edges.len() as u64) as usize);
    out.extend_from_slice(&SUBSHARD_MAGIC);
    out.extend_from_slice(&(edges.len() as u64).to_le_bytes());
    out.extend_from_slice(&dst_count.to_le_bytes());
    for group in edges.chunk_by(|a, b| a.dst == b.dst) {
        out.extend_from_slice(&group[0].dst.to_le_bytes());
        out.extend_from_slice(&(group.len() as u32).to_le_bytes());
        for e in group {
            out.extend_from_slice(&e.src.to_le_bytes());
        }
    }
    Ok(out)
}

/// One destination record inside a decoded sub-shard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DstRecord {
    pub dst: VertexId,
    /// Byte offset of the first source id.
    offset: u32,
    pub src_count: u32,
}

/// Expected id ranges for validation against the partition.
#[derive(Debug, Clone)]
pub struct SubShardGeometry {
    pub src: Range<VertexId>,
    pub dst: Range<VertexId>,
}

/// A validated sub-shard held as its on-disk byte image plus a record index.
#[derive(Debug, Clone)]
pub struct SubShardBlock {
    bytes: Arc<Vec<u8>>,
    records: Vec<DstRecord>,
    edge_count: u64,
}

impl SubShardBlock {
    /// Validates `bytes` and indexes its destination records.
    pub fn decode(bytes: Arc<Vec<u8>>, geometry: Option<&SubShardGeometry>, path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::corrupt("sub-shard", path, reason);
        let b = bytes.as_slice();
        if b.len() < SUBSHARD_HEADER_BYTES {
            return Err(bad(format!("{} bytes is shorter than the header", b.len())));
        }
        if b[..4] != SUBSHARD_MAGIC {
            return Err(bad("bad magic".into()));
        }
        let edge_count = le_u64(b, 4);
        let dst_count = le_u64(b, 12);
        if dst_count > edge_count {
            return Err(bad(format!("{dst_count} destinations for {edge_count} edges")));
        }
        if edge_count > b.len() as u64 {
            return Err(bad(format!("{edge_count} edges cannot fit in {} bytes", b.len())));
        }
        let expected = subshard_size(dst_count, edge_count);
        if expected != b.len() as u64 {
            return Err(bad(format!("header implies {expected} bytes, file has {}", b.len())));
        }
        let mut records = Vec::with_capacity(dst_count as usize);
        let mut at = SUBSHARD_HEADER_BYTES;
        let mut edges_seen = 0u64;
        let mut prev_dst: Option<VertexId> = None;
        for _ in 0..dst_count {
            if at + SUBSHARD_RECORD_HEADER_BYTES > b.len() {
                return Err(bad("truncated record header".into()));
            }
            let dst = le_u32(b, at);
            let src_count = le_u32(b, at + 4);
            at += SUBSHARD_RECORD_HEADER_BYTES;
            if prev_dst.is_some_and(|p| p >= dst) {
                return Err(bad(format!("destination {dst} not strictly ascending")));
            }
            prev_dst = Some(dst);
            if src_count == 0 {
                return Err(bad(format!("destination {dst} has no sources")));
            }
            let end = at + src_count as usize * VERTEX_ID_BYTES;
            if end > b.len() {
                return Err(bad(format!("record for {dst} runs past end of file")));
            }
            if let Some(g) = geometry {
                if !g.dst.contains(&dst) {
                    return Err(bad(format!("destination {dst} outside {:?}", g.dst)));
                }
            }
            let mut prev_src = 0u32;
            for k in 0..src_count as usize {
                let src = le_u32(b, at + k * VERTEX_ID_BYTES);
                if k > 0 && src < prev_src {
                    return Err(bad(format!("sources of {dst} not ascending")));
                }
                if let Some(g) = geometry {
                    if !g.src.contains(&src) {
                        return Err(bad(format!("source {src} outside {:?}", g.src)));
                    }
                }
                prev_src = src;
            }
            records.push(DstRecord {
                dst,
                offset: at as u32,
                src_count,
            });
            edges_seen += src_count as u64;
            at = end;
        }
        if edges_seen != edge_count || at != b.len() {
            return Err(bad(format!(
                "records hold {edges_seen} edges, header says {edge_count}"
            )));
        }
        Ok(SubShardBlock {
            bytes,
            records,
            edge_count,
        })
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn records(&self) -> &[DstRecord] {
        &self.records
    }

    pub fn byte_len(&self) -> u64 {
        self.bytes.len() as u64
    }

    pub fn bytes(&self) -> &Arc<Vec<u8>> {
        &self.bytes
    }

    /// Source ids of one record, ascending.
    #[inline]
    pub fn sources(&self, record: &DstRecord) -> impl Iterator<Item = VertexId> + '_ {
        let start = record.offset as usize;
        let end = start + record.src_count as usize * VERTEX_ID_BYTES;
        self.bytes[start..end]
            .chunks_exact(VERTEX_ID_BYTES)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
    }

    /// All edges in stored order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.records
            .iter()
            .flat_map(move |r| self.sources(r).map(move |s| Edge::new(s, r.dst)))
    }
}

// ----------------------------------------------------------------- intervals

pub const fn interval_size(count: u64, width: u64) -> u64 {
    INTERVAL_HEADER_BYTES as u64 + count * width
}

pub fn encode_interval<A: FixedWidth>(first: VertexId, attrs: &[A]) -> Vec<u8> {
    let mut out = vec![0u8; interval_size(attrs.len() as u64, A::WIDTH as u64) as usize];
    out[0..4].copy_from_slice(&first.to_le_bytes());
    out[4..8].copy_from_slice(&(attrs.len() as u32).to_le_bytes());
    out[8..12].copy_from_slice(&(A::WIDTH as u32).to_le_bytes());
    for (a, slot) in attrs
        .iter()
        .zip(out[INTERVAL_HEADER_BYTES..].chunks_exact_mut(A::WIDTH))
    {
        a.encode(slot);
    }
    out
}

/// Decodes an interval, checking it against the expected geometry.
pub fn decode_interval<A: FixedWidth>(bytes: &[u8], first: VertexId, count: u32, path: &Path) -> Result<Vec<A>> {
    let bad = |reason: String| Error::corrupt("interval", path, reason);
    if bytes.len() < INTERVAL_HEADER_BYTES {
        return Err(bad("shorter than the header".into()));
    }
    let (f, c, w) = (le_u32(bytes, 0), le_u32(bytes, 4), le_u32(bytes, 8));
    if f != first || c != count {
        return Err(bad(format!(
            "geometry ({f}, {c}) does not match manifest ({first}, {count})"
        )));
    }
    if w as usize != A::WIDTH {
        return Err(bad(format!("attribute width {w}, expected {}", A::WIDTH)));
    }
    if bytes.len() as u64 != interval_size(c as u64, w as u64) {
        return Err(bad(format!("{} bytes for {c} attributes", bytes.len())));
    }
    Ok(bytes[INTERVAL_HEADER_BYTES..]
        .chunks_exact(A::WIDTH)
        .map(A::decode)
        .collect())
}

// ---------------------------------------------------------------------- hubs

pub const fn hub_size(records: u64, width: u64) -> u64 {
    HUB_HEADER_BYTES as u64 + records * (VERTEX_ID_BYTES as u64 + width)
}

pub fn encode_hub<C: FixedWidth>(records: &[(VertexId, C)], dst: &Range<VertexId>) -> Result<Vec<u8>> {
    let rec = VERTEX_ID_BYTES + C::WIDTH;
    let mut out = vec![0u8; hub_size(records.len() as u64, C::WIDTH as u64) as usize];
    out[..8].copy_from_slice(&(records.len() as u64).to_le_bytes());
    let mut prev: Option<VertexId> = None;
    for ((v, c), slot) in records.iter().zip(out[HUB_HEADER_BYTES..].chunks_exact_mut(rec)) {
        if !dst.contains(v) {
            return Err(Error::Invariant(format!(
                "hub destination {v} outside interval {dst:?}"
            )));
        }
        if prev.is_some_and(|p| p >= *v) {
            return Err(Error::Invariant(format!("hub destination {v} not ascending")));
        }
        prev = Some(*v);
        slot[..4].copy_from_slice(&v.to_le_bytes());
        c.encode(&mut slot[4..]);
    }
    Ok(out)
}

pub fn decode_hub<C: FixedWidth>(bytes: &[u8], dst: &Range<VertexId>, path: &Path) -> Result<Vec<(VertexId, C)>> {
    let bad = |reason: String| Error::corrupt("hub", path, reason);
    if bytes.len() < HUB_HEADER_BYTES {
        return Err(bad("shorter than the header".into()));
    }
    let count = le_u64(bytes, 0);
    if count > bytes.len() as u64 || bytes.len() as u64 != hub_size(count, C::WIDTH as u64) {
        return Err(bad(format!("{} bytes for {count} records", bytes.len())));
    }
    let rec = VERTEX_ID_BYTES + C::WIDTH;
    let mut out = Vec::with_capacity(count as usize);
    let mut prev: Option<VertexId> = None;
    for chunk in bytes[HUB_HEADER_BYTES..].chunks_exact(rec) {
        let v = le_u32(chunk, 0);
        if !dst.contains(&v) {
            return Err(bad(format!("destination {v} outside {dst:?}")));
        }
        if prev.is_some_and(|p| p >= v) {
            return Err(bad(format!("destination {v} not ascending")));
        }
        prev = Some(v);
        out.push((v, C::decode(&chunk[4..])));
    }
    Ok(out)
}
