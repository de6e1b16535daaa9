//! Splitting a sub-shard into destination-disjoint work units.

use std::ops::Range;

use crate::graph_model::SubShardId;
use crate::storage::format::DstRecord;

/// Edges below which a sub-shard is never split.
pub const MIN_UNIT_EDGES: u64 = 4096;

/// A contiguous run of destination records inside one sub-shard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkUnit {
    pub subshard: SubShardId,
    /// Indices into the sub-shard's record list.
    pub records: Range<usize>,
    pub edges: u64,
}

/// Cuts `records` into at most `target` units balanced by edge count.
///
/// Each cut sits on the record boundary nearest to `k·total/target`. A record
/// is never split, so a single-destination sub-shard is always one unit.
pub fn partition_work(subshard: SubShardId, records: &[DstRecord], target: usize) -> Vec<WorkUnit> {
    let mut prefix = Vec::with_capacity(records.len() + 1);
    prefix.push(0u64);
    for r in records {
        prefix.push(prefix.last().unwrap() + r.src_count as u64);
    }
    let total = *prefix.last().unwrap();
    let target = target.max(1).min(records.len().max(1));

    let mut cuts = vec![0usize];
    for k in 1..target {
        let ideal = (total as u128 * k as u128) as f64 / target as f64;
        let at = prefix.partition_point(|&x| (x as f64) < ideal);
        let best = if at == 0 {
            0
        } else if at >= prefix.len() {
            prefix.len() - 1
        } else if ideal - prefix[at - 1] as f64 <= prefix[at] as f64 - ideal {
            at - 1
        } else {
            at
        };
        if best > *cuts.last().unwrap() && best < records.len() {
            cuts.push(best);
        }
    }
    cuts.push(records.len());
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| WorkUnit {
            subshard,
            records: w[0]..w[1],
            edges: prefix[w[1]] - prefix[w[0]],
        })
        .collect()
}

/// Unit count for a sub-shard of `edges` edges on `threads` workers.
pub fn unit_target(edges: u64, threads: usize) -> usize {
    if threads <= 1 {
        return 1;
    }
    ((edges / MIN_UNIT_EDGES) as usize).clamp(1, threads * 4)
}
