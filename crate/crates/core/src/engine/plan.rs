//! Update-strategy selection from a memory budget.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph_model::SubShardId;
use crate::storage::ShardSetInfo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Spu,
    Dpu,
    Mpu,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Spu => "spu",
            StrategyKind::Dpu => "dpu",
            StrategyKind::Mpu => "mpu",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How row-ordered updates to one destination interval are serialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SyncMode {
    /// The completing unit of a batch releases the next batch for the same target.
    #[default]
    Callback,
    /// Workers take a per-target ticket lock before running a unit.
    Lock,
}

impl SyncMode {
    pub fn name(self) -> &'static str {
        match self {
            SyncMode::Callback => "callback",
            SyncMode::Lock => "lock",
        }
    }
}

impl FromStr for SyncMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "callback" => Ok(SyncMode::Callback),
            "lock" => Ok(SyncMode::Lock),
            other => Err(Error::InvalidInput(format!("unknown sync mode `{other}`"))),
        }
    }
}

/// Which intervals stay resident and which sub-shards are cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyPlan {
    pub kind: StrategyKind,
    /// Number of resident intervals; always the first `resident` ones.
    pub resident: u32,
    pub partitions: u32,
    pub sync_mode: SyncMode,
    /// Sub-shards kept in memory after their first read (SPU only).
    pub cached: Vec<SubShardId>,
}

impl StrategyPlan {
    pub fn spu(p: u32) -> Self {
        Self::with_resident(p, p)
    }

    pub fn dpu(p: u32) -> Self {
        Self::with_resident(p, 0)
    }

    /// MPU with `q` resident intervals; `q = 0` and `q = P` collapse to DPU and SPU.
    pub fn mpu(p: u32, q: u32) -> Result<Self> {
        if q > p {
            return Err(Error::InvalidInput(format!("Q = {q} exceeds P = {p}")));
        }
        Ok(Self::with_resident(p, q))
    }

    fn with_resident(p: u32, q: u32) -> Self {
        let kind = if q == p {
            StrategyKind::Spu
        } else if q == 0 {
            StrategyKind::Dpu
        } else {
            StrategyKind::Mpu
        };
        StrategyPlan {
            kind,
            resident: q,
            partitions: p,
            sync_mode: SyncMode::default(),
            cached: Vec::new(),
        }
    }

    pub fn with_sync(mut self, mode: SyncMode) -> Self {
        self.sync_mode = mode;
        self
    }

    pub fn is_resident(&self, interval: u32) -> bool {
        interval < self.resident
    }
}

impl fmt::Display for StrategyPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StrategyKind::Mpu => write!(f, "mpu({})", self.resident),
            k => f.write_str(k.name()),
        }
    }
}

/// Sizes that drive planning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanInputs {
    pub n: u64,
    pub partitions: u32,
    pub attr_bytes: u64,
    /// Largest interval length, `⌈n/P⌉`.
    pub max_interval: u64,
    /// Largest sub-shard file in the shard set used by the run.
    pub max_subshard_bytes: u64,
}

impl PlanInputs {
    pub fn new(n: u64, partitions: u32, attr_bytes: u64, max_subshard_bytes: u64) -> Self {
        PlanInputs {
            n,
            partitions,
            attr_bytes,
            max_interval: n.div_ceil(partitions as u64),
            max_subshard_bytes,
        }
    }

    /// Bytes for every interval held twice.
    pub fn ping_pong_bytes(&self) -> u128 {
        2 * self.n as u128 * self.attr_bytes as u128
    }

    /// Smallest workable budget: one interval plus one streamed sub-shard.
    pub fn min_budget(&self) -> u128 {
        self.max_interval as u128 * self.attr_bytes as u128 + self.max_subshard_bytes as u128
    }
}

/// Picks SPU when all intervals fit twice, otherwise MPU with
/// `Q = ⌊B_M·P / (2n·B_a)⌋`, which degenerates to DPU at `Q = 0`.
pub fn select_strategy(inputs: &PlanInputs, budget: u64, shards: Option<&ShardSetInfo>) -> Result<StrategyPlan> {
    if budget == 0 {
        return Err(Error::InvalidInput("memory budget must be positive".into()));
    }
    let b = budget as u128;
    if b < inputs.min_budget() {
        return Err(Error::InfeasibleBudget {
            budget,
            required: inputs.min_budget().min(u64::MAX as u128) as u64,
        });
    }
    let p = inputs.partitions;
    let ping_pong = inputs.ping_pong_bytes();
    if b >= ping_pong {
        let mut plan = StrategyPlan::spu(p);
        if let Some(set) = shards {
            plan.cached = cache_prefix(set, (b - ping_pong).min(u64::MAX as u128) as u64);
        }
        return Ok(plan);
    }
    let q = (b * p as u128 / ping_pong) as u32;
    StrategyPlan::mpu(p, q)
}

/// Row-major prefix of sub-shards whose total size fits in `leftover`.
pub fn cache_prefix(set: &ShardSetInfo, leftover: u64) -> Vec<SubShardId> {
    let mut used = 0u64;
    let mut out = Vec::new();
    for s in &set.subshards {
        match used.checked_add(s.bytes) {
            Some(total) if total <= leftover => {
                used = total;
                out.push(SubShardId::new(s.src, s.dst));
            }
            _ => break,
        }
    }
    out
}

/// Checks an explicitly requested residency against a budget.
pub fn check_budget(inputs: &PlanInputs, budget: u64, plan: &StrategyPlan) -> Result<()> {
    let b = budget as u128;
    if b < inputs.min_budget() {
        return Err(Error::InfeasibleBudget {
            budget,
            required: inputs.min_budget().min(u64::MAX as u128) as u64,
        });
    }
    let allowed = if b >= inputs.ping_pong_bytes() {
        inputs.partitions
    } else {
        (b * inputs.partitions as u128 / inputs.ping_pong_bytes()) as u32
    };
    if plan.resident > allowed {
        let per = inputs.ping_pong_bytes().div_ceil(inputs.partitions as u128);
        return Err(Error::InfeasibleBudget {
            budget,
            required: (per * plan.resident as u128).min(u64::MAX as u128) as u64,
        });
    }
    Ok(())
}
