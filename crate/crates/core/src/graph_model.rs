//! Vertex ids, equal-split interval partitioning, and sub-shard addressing.
//!
//! Vertex ids are dense and 0-based. `P` intervals split `[0, n)` into
//! contiguous ranges whose sizes differ by at most one; the larger ranges
//! come first, so `n = 7, P = 4` yields sizes `{2, 2, 2, 1}`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense vertex identifier assigned during preprocessing.
pub type VertexId = u32;

/// Number of intervals used when the caller does not pick one.
pub const DEFAULT_PARTITIONS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
}

impl Edge {
    pub const fn new(src: VertexId, dst: VertexId) -> Self {
        Edge { src, dst }
    }

    pub const fn reversed(self) -> Self {
        Edge {
            src: self.dst,
            dst: self.src,
        }
    }
}

/// One contiguous interval of vertex ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalRange {
    pub index: u32,
    pub first: VertexId,
    pub count: u32,
}

impl IntervalRange {
    pub fn end(&self) -> VertexId {
        self.first + self.count
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v >= self.first && v < self.end()
    }

    pub fn ids(&self) -> Range<VertexId> {
        self.first..self.end()
    }

    /// Offset of `v` inside this interval's attribute array.
    #[inline]
    pub fn offset(&self, v: VertexId) -> usize {
        debug_assert!(self.contains(v), "vertex {v} outside interval {self:?}");
        (v - self.first) as usize
    }
}

/// Address of the sub-shard holding edges from `src_interval` into `dst_interval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubShardId {
    pub src_interval: u32,
    pub dst_interval: u32,
}

impl SubShardId {
    pub const fn new(src_interval: u32, dst_interval: u32) -> Self {
        SubShardId {
            src_interval,
            dst_interval,
        }
    }
}

impl std::fmt::Display for SubShardId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SS({}.{})", self.src_interval, self.dst_interval)
    }
}

/// The equal-split partition of `[0, n)` into `P` intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: u64,
    ranges: Vec<IntervalRange>,
    /// Size of the leading (larger) intervals.
    big: u64,
    /// Number of intervals of size `big`; the remainder have size `big - 1`.
    big_count: u64,
}

impl Partition {
    pub fn new(n: u64, p: u32) -> Result<Self> {
        let ranges = partition_vertices(n, p)?;
        let p64 = p as u64;
        let rem = n % p64;
        let (big, big_count) = if rem == 0 { (n / p64, p64) } else { (n / p64 + 1, rem) };
        Ok(Partition {
            n,
            ranges,
            big,
            big_count,
        })
    }

    pub fn vertex_count(&self) -> u64 {
        self.n
    }

    pub fn interval_count(&self) -> u32 {
        self.ranges.len() as u32
    }

    pub fn ranges(&self) -> &[IntervalRange] {
        &self.ranges
    }

    pub fn range(&self, index: u32) -> &IntervalRange {
        &self.ranges[index as usize]
    }

    /// Size of the largest interval.
    pub fn max_interval_len(&self) -> u64 {
        self.big
    }

    /// Constant-time interval lookup.
    #[inline]
    pub fn locate(&self, v: VertexId) -> Result<u32> {
        let v = v as u64;
        if v >= self.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
        }
        let head = self.big * self.big_count;
        let index = if v < head {
            v / self.big
        } else {
            self.big_count + (v - head) / (self.big - 1)
        };
        Ok(index as u32)
    }

    pub fn subshard_of(&self, e: Edge) -> Result<SubShardId> {
        Ok(SubShardId::new(self.locate(e.src)?, self.locate(e.dst)?))
    }

    /// Sub-shard ids in row-major order.
    pub fn subshards(&self) -> impl Iterator<Item = SubShardId> + '_ {
        let p = self.interval_count();
        (0..p).flat_map(move |i| (0..p).map(move |j| SubShardId::new(i, j)))
    }
}

/// Splits `[0, n)` into `p` equal-sized contiguous ranges, larger ranges first.
pub fn partition_vertices(n: u64, p: u32) -> Result<Vec<IntervalRange>> {
    if n == 0 {
        return Err(Error::InvalidPartition("graph has no vertices".into()));
    }
    if p == 0 {
        return Err(Error::InvalidPartition("interval count must be at least 1".into()));
    }
    if p as u64 > n {
        return Err(Error::InvalidPartition(format!(
            "{p} intervals requested for only {n} vertices"
        )));
    }
    if n > u32::MAX as u64 {
        return Err(Error::InvalidPartition(format!(
            "{n} vertices exceed the 32-bit id space"
        )));
    }
    let p64 = p as u64;
    let (base, rem) = (n / p64, n % p64);
    let mut first = 0u64;
    let ranges = (0..p)
        .map(|index| {
            let count = base + u64::from((index as u64) < rem);
            let range = IntervalRange {
                index,
                first: first as VertexId,
                count: count as u32,
            };
            first += count;
            range
        })
        .collect();
    Ok(ranges)
}

/// Looks up the interval holding `v`.
pub fn locate_interval(v: VertexId, partition: &Partition) -> Result<u32> {
    partition.locate(v)
}

pub fn subshard_of(e: Edge, partition: &Partition) -> Result<SubShardId> {
    partition.subshard_of(e)
}
