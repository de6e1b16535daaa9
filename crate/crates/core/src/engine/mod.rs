//! Iteration driver for the three update schedules.
//!
//! One generic mixed-phase iteration covers all of them. With `Q` resident
//! intervals, rows `0..Q` update the resident block in memory; rows `Q..P`
//! load their source interval once, update resident destinations directly
//! and write hubs for the rest; columns `Q..P` then apply resident-source
//! sub-shards followed by their hubs and save the interval. SPU is `Q = P`
//! and DPU is `Q = 0`.

pub mod executor;
pub mod graph;
pub mod plan;
pub mod shared;
pub mod work;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::ops::{Deref, Range};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

pub use graph::{Graph, IN_MEMORY_EDGE_LIMIT};
pub use plan::{cache_prefix, check_budget, select_strategy, PlanInputs, StrategyKind, StrategyPlan, SyncMode};
pub use work::{partition_work, WorkUnit};

use crate::error::{Error, IoContext, Result};
use crate::graph_model::{IntervalRange, SubShardId, VertexId};
use crate::kernels::{Kernel, Seed};
use crate::storage::{
    ensure_dir, hub_path, interval_path, FixedWidth, IoSnapshot, ShardSetKind, Storage, SubShardBlock, HUB_DIR,
    INTERVAL_DIR,
};
use executor::{Batch, Executor};
use shared::DisjointSlice;

/// Hub records per FromHub work unit, at minimum.
const MIN_HUB_UNIT: usize = 4096;

type HubRecords<C> = Vec<(VertexId, C)>;

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub plan: StrategyPlan,
    pub threads: usize,
    pub max_iters: u32,
    /// Keep hub files after they are read, for inspection.
    pub retain_hubs: bool,
}

impl EngineConfig {
    pub fn new(plan: StrategyPlan) -> Self {
        EngineConfig {
            plan,
            threads: 1,
            max_iters: u32::MAX,
            retain_hubs: false,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_max_iters(mut self, max_iters: u32) -> Self {
        self.max_iters = max_iters;
        self
    }
}

/// Counters for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    pub iter: u32,
    pub strategy: String,
    /// Active intervals at the start of the iteration.
    pub active_intervals: u32,
    pub changed_vertices: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub wall_ms: f64,
    /// Per-category traffic of this iteration.
    pub io: IoSnapshot,
    /// Sub-shards visited, in visit order.
    pub visits: Vec<SubShardId>,
    /// Sub-shards applied straight into an in-memory destination.
    pub in_memory_updates: u64,
    /// Sub-shards routed through a hub.
    pub hub_subshards: u64,
    /// Activity of each interval for the next iteration.
    pub active_after: Vec<bool>,
}

impl fmt::Display for IterationStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter={} strategy={} active_intervals={} changed_vertices={} bytes_read={} bytes_written={} wall_ms={:.3}",
            self.iter,
            self.strategy,
            self.active_intervals,
            self.changed_vertices,
            self.bytes_read,
            self.bytes_written,
            self.wall_ms
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stats: Vec<IterationStats>,
    pub iterations: u32,
    /// All intervals inactive at exit.
    pub converged: bool,
    /// Vertices flagged active when the run started.
    pub initially_active_vertices: u64,
}

/// Resident buffers, activity flags and the sub-shard cache of one run.
pub struct EngineState<A> {
    prev: Vec<Vec<A>>,
    cur: Vec<Vec<A>>,
    active: Vec<bool>,
    iteration: u32,
    kind: ShardSetKind,
    cache: HashMap<SubShardId, Arc<SubShardBlock>>,
    cacheable: HashSet<SubShardId>,
    degrees: Vec<u32>,
    initially_active_vertices: u64,
}

impl<A> EngineState<A> {
    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    /// Committed attributes of a resident interval.
    pub fn resident(&self, interval: u32) -> Option<&[A]> {
        self.prev.get(interval as usize).map(Vec::as_slice)
    }

    pub fn cached_subshards(&self) -> usize {
        self.cache.len()
    }
}

#[derive(Clone)]
enum SrcRef<'a, A> {
    Borrowed(&'a [A]),
    Owned(Arc<Vec<A>>),
}

impl<A> Deref for SrcRef<'_, A> {
    type Target = [A];
    fn deref(&self) -> &[A] {
        match self {
            SrcRef::Borrowed(s) => s,
            SrcRef::Owned(v) => v,
        }
    }
}

pub struct Engine {
    graph: Graph,
    work_dir: PathBuf,
    storage: Storage,
    config: EngineConfig,
}

impl Engine {
    pub fn new(graph: Graph, work_dir: impl AsRef<Path>, storage: Storage, config: EngineConfig) -> Result<Self> {
        if config.plan.partitions != graph.partitions() {
            return Err(Error::InvalidInput(format!(
                "plan built for P = {}, graph has P = {}",
                config.plan.partitions,
                graph.partitions()
            )));
        }
        let work_dir = work_dir.as_ref().to_path_buf();
        ensure_dir(&work_dir.join(HUB_DIR))?;
        ensure_dir(&work_dir.join(INTERVAL_DIR))?;
        let config = EngineConfig {
            threads: config.threads.max(1),
            ..config
        };
        Ok(Engine {
            graph,
            work_dir,
            storage,
            config,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn work_dir(&self) -> &Path {
        &self.work_dir
    }

    /// Initializes from the kernel and iterates until quiescence or `max_iters`.
    pub fn run<K: Kernel>(&self, kernel: &K) -> Result<RunOutput> {
        self.run_until(kernel, self.config.max_iters)
    }

    /// Like [`Engine::run`] with an explicit iteration cap.
    pub fn run_until<K: Kernel>(&self, kernel: &K, max_iters: u32) -> Result<RunOutput> {
        let state = self.start(kernel)?;
        self.drive(kernel, state, max_iters)
    }

    /// Like [`Engine::run`], but starts from the attributes left on disk by a
    /// previous run, passed through `prepare`; a `true` return marks the
    /// vertex active.
    pub fn resume<K, F>(&self, kernel: &K, prepare: F) -> Result<RunOutput>
    where
        K: Kernel,
        F: Fn(VertexId, &mut K::Attr) -> bool,
    {
        self.resume_until(kernel, prepare, self.config.max_iters)
    }

    pub fn resume_until<K, F>(&self, kernel: &K, prepare: F, max_iters: u32) -> Result<RunOutput>
    where
        K: Kernel,
        F: Fn(VertexId, &mut K::Attr) -> bool,
    {
        let state = self.start_from_files(kernel, prepare)?;
        self.drive(kernel, state, max_iters)
    }

    fn drive<K: Kernel>(&self, kernel: &K, mut state: EngineState<K::Attr>, max_iters: u32) -> Result<RunOutput> {
        let mut stats = Vec::new();
        while state.iteration < max_iters && state.active.iter().any(|&a| a) {
            stats.push(self.iterate(kernel, &mut state)?);
        }
        let out = RunOutput {
            iterations: state.iteration,
            converged: !state.active.iter().any(|&a| a),
            initially_active_vertices: state.initially_active_vertices,
            stats,
        };
        self.finish(state)?;
        Ok(out)
    }

    pub fn start<K: Kernel>(&self, kernel: &K) -> Result<EngineState<K::Attr>> {
        let n = self.graph.vertex_count();
        self.build_state(kernel, |range| {
            let attrs = range.ids().map(|v| kernel.init(v, n)).collect();
            let active = kernel.initially_active(range);
            Ok((attrs, if active { range.count as u64 } else { 0 }))
        })
    }

    pub fn start_from_files<K, F>(&self, kernel: &K, prepare: F) -> Result<EngineState<K::Attr>>
    where
        K: Kernel,
        F: Fn(VertexId, &mut K::Attr) -> bool,
    {
        self.build_state(kernel, |range| {
            let mut attrs: Vec<K::Attr> = self.load_interval(range.index)?;
            let mut active = 0u64;
            for (v, a) in range.ids().zip(attrs.iter_mut()) {
                active += prepare(v, a) as u64;
            }
            Ok((attrs, active))
        })
    }

    fn build_state<K, F>(&self, kernel: &K, mut make: F) -> Result<EngineState<K::Attr>>
    where
        K: Kernel,
        F: FnMut(&IntervalRange) -> Result<(Vec<K::Attr>, u64)>,
    {
        let kind = kernel.shard_set();
        self.graph.shard_set(kind)?;
        self.clear_hubs()?;
        let q = self.config.plan.resident;
        let mut prev = Vec::new();
        let mut active = Vec::new();
        let mut total_active = 0;
        for range in self.graph.partition().ranges() {
            let (attrs, live) = make(range)?;
            active.push(live > 0);
            total_active += live;
            if range.index < q {
                prev.push(attrs);
            } else {
                self.save_interval(range.index, &attrs)?;
            }
        }
        let cur = prev.clone();
        let degrees = if kernel.needs_out_degrees() {
            self.graph.out_degrees(&self.storage)?
        } else {
            Vec::new()
        };
        let cacheable = match self.config.plan.kind {
            StrategyKind::Spu => self.config.plan.cached.iter().copied().collect(),
            _ => HashSet::new(),
        };
        Ok(EngineState {
            prev,
            cur,
            active,
            iteration: 0,
            kind,
            cache: HashMap::new(),
            cacheable,
            degrees,
            initially_active_vertices: total_active,
        })
    }

    /// Persists resident intervals so every interval file holds final values.
    pub fn finish<A: FixedWidth>(&self, state: EngineState<A>) -> Result<()> {
        for (j, attrs) in state.prev.iter().enumerate() {
            self.save_interval(j as u32, attrs)?;
        }
        Ok(())
    }

    /// All attributes from the interval files, in id order.
    pub fn read_attrs<A: FixedWidth>(&self) -> Result<Vec<A>> {
        let mut out = Vec::with_capacity(self.graph.vertex_count() as usize);
        for j in 0..self.graph.partitions() {
            out.extend(self.load_interval::<A>(j)?);
        }
        Ok(out)
    }

    fn load_interval<A: FixedWidth>(&self, j: u32) -> Result<Vec<A>> {
        let range = self.graph.partition().range(j);
        Ok(self
            .storage
            .load_interval::<A>(&interval_path(&self.work_dir, j), range)?
            .attrs)
    }

    fn save_interval<A: FixedWidth>(&self, j: u32, attrs: &[A]) -> Result<()> {
        let range = self.graph.partition().range(j);
        self.storage
            .save_interval(&interval_path(&self.work_dir, j), range, attrs)
            .map(|_| ())
    }

    fn clear_hubs(&self) -> Result<()> {
        let dir = self.work_dir.join(HUB_DIR);
        for entry in fs::read_dir(&dir).at(&dir)? {
            let path = entry.at(&dir)?.path();
            if path.extension().is_some_and(|e| e == "nxhb") {
                fs::remove_file(&path).at(&path)?;
            }
        }
        Ok(())
    }

    fn fetch(
        &self,
        cache: &mut HashMap<SubShardId, Arc<SubShardBlock>>,
        cacheable: &HashSet<SubShardId>,
        kind: ShardSetKind,
        id: SubShardId,
    ) -> Result<Arc<SubShardBlock>> {
        if let Some(b) = cache.get(&id) {
            return Ok(Arc::clone(b));
        }
        let block = Arc::new(self.graph.read_subshard(&self.storage, kind, id)?);
        if cacheable.contains(&id) {
            cache.insert(id, Arc::clone(&block));
        }
        Ok(block)
    }

    /// Runs one iteration under the configured plan.
    pub fn iterate<K: Kernel>(&self, kernel: &K, st: &mut EngineState<K::Attr>) -> Result<IterationStats> {
        let clock = Instant::now();
        let before = self.storage.io_counters();
        let p = self.graph.partitions();
        let q = self.config.plan.resident;
        let n = self.graph.vertex_count();
        let partition = self.graph.partition();
        let set = self.graph.shard_set(st.kind)?;
        let threads = self.config.threads;
        let mode = self.config.plan.sync_mode;
        let seed = kernel.seed(n);
        let active = st.active.clone();
        let skip = |i: u32| kernel.skips_inactive_sources() && !active[i as usize];

        let mut visits = Vec::new();
        let mut in_memory = 0u64;
        let mut hubbed = 0u64;

        for (cur, prev) in st.cur.iter_mut().zip(&st.prev) {
            seed_buffer(cur, prev, seed);
        }

        let hub_written = Mutex::new(vec![false; (p * p) as usize]);
        {
            let prev: &[Vec<K::Attr>] = &st.prev;
            let degrees: &[u32] = &st.degrees;
            let writers: Vec<DisjointSlice<K::Attr>> = st
                .cur
                .iter_mut()
                .map(|b| DisjointSlice::new(b.as_mut_slice()))
                .collect();
            let cache = &mut st.cache;
            let cacheable = &st.cacheable;
            let kind = st.kind;
            let hub_written = &hub_written;
            executor::scoped(threads, mode, |ex| {
                for i in 0..p {
                    if skip(i) {
                        continue;
                    }
                    let src_range = partition.range(i);
                    let src = if i < q {
                        SrcRef::Borrowed(prev[i as usize].as_slice())
                    } else {
                        SrcRef::Owned(Arc::new(self.load_interval::<K::Attr>(i)?))
                    };
                    for j in 0..p {
                        if i < q && j >= q {
                            continue;
                        }
                        let id = SubShardId::new(i, j);
                        let block = self.fetch(cache, cacheable, kind, id)?;
                        visits.push(id);
                        if j < q {
                            in_memory += 1;
                            self.submit_apply(
                                ex,
                                kernel,
                                block,
                                src.clone(),
                                src_range.first,
                                degrees,
                                &writers[j as usize],
                                partition.range(j).first,
                                id,
                            )?;
                        } else {
                            hubbed += 1;
                            self.submit_tohub(
                                ex,
                                kernel,
                                block,
                                src.clone(),
                                src_range.first,
                                degrees,
                                id,
                                hub_written,
                            )?;
                        }
                    }
                }
                ex.drain()
            })?;
        }

        let written = hub_written.into_inner().unwrap_or_else(|e| e.into_inner());
        let copy_forward = matches!(seed, Seed::CopyForward);
        let need_prev = copy_forward || !kernel.fixed_iterations();
        let mut next_active = vec![false; p as usize];
        let mut changed_total = 0u64;

        for j in q..p {
            let range = partition.range(j);
            let rows: Vec<u32> = (0..q).filter(|&i| !skip(i)).collect();
            let hubs: Vec<u32> = (q..p).filter(|&i| written[(i * p + j) as usize]).collect();
            let untouched = hubs.is_empty() && rows.iter().all(|&i| set.get(SubShardId::new(i, j), p).edges == 0);
            if copy_forward && untouched {
                continue;
            }
            let old: Option<Vec<K::Attr>> = if need_prev { Some(self.load_interval(j)?) } else { None };
            let mut cur = match (seed, &old) {
                (Seed::Reset(base), _) => vec![base; range.count as usize],
                (Seed::CopyForward, Some(o)) => o.clone(),
                (Seed::CopyForward, None) => unreachable!("copy-forward always loads"),
            };
            {
                let writer = DisjointSlice::new(cur.as_mut_slice());
                let prev: &[Vec<K::Attr>] = &st.prev;
                let degrees: &[u32] = &st.degrees;
                let cache = &mut st.cache;
                let cacheable = &st.cacheable;
                let kind = st.kind;
                let writer = &writer;
                executor::scoped(threads, mode, |ex| {
                    for &i in &rows {
                        let id = SubShardId::new(i, j);
                        let block = self.fetch(cache, cacheable, kind, id)?;
                        visits.push(id);
                        in_memory += 1;
                        self.submit_apply(
                            ex,
                            kernel,
                            block,
                            SrcRef::Borrowed(prev[i as usize].as_slice()),
                            partition.range(i).first,
                            degrees,
                            writer,
                            range.first,
                            id,
                        )?;
                    }
                    for &i in &hubs {
                        let path = hub_path(&self.work_dir, SubShardId::new(i, j));
                        let records = self.storage.read_hub::<K::Contrib>(&path, &range.ids())?;
                        if !self.config.retain_hubs {
                            fs::remove_file(&path).at(&path)?;
                        }
                        self.submit_fromhub(ex, kernel, Arc::new(records), writer, range.first, j)?;
                    }
                    ex.drain()
                })?;
            }
            let changed = count_changed(kernel, old.as_deref(), &cur);
            self.save_interval(j, &cur)?;
            next_active[j as usize] = changed > 0;
            changed_total += changed;
        }

        for j in 0..q as usize {
            let changed = count_changed(kernel, Some(&st.prev[j]), &st.cur[j]);
            next_active[j] = changed > 0;
            changed_total += changed;
        }
        std::mem::swap(&mut st.prev, &mut st.cur);
        st.active = next_active;
        st.iteration += 1;

        let io = self.storage.io_counters().since(&before);
        Ok(IterationStats {
            iter: st.iteration,
            strategy: self.config.plan.to_string(),
            active_intervals: active.iter().filter(|&&a| a).count() as u32,
            changed_vertices: changed_total,
            bytes_read: io.bytes_read(),
            bytes_written: io.bytes_written(),
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
            io,
            visits,
            in_memory_updates: in_memory,
            hub_subshards: hubbed,
            active_after: st.active.clone(),
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn submit_apply<'env, K: Kernel>(
        &'env self,
        ex: &Executor<'_, 'env>,
        kernel: &'env K,
        block: Arc<SubShardBlock>,
        src: SrcRef<'env, K::Attr>,
        src_first: VertexId,
        degrees: &'env [u32],
        dst: &'env DisjointSlice<'_, K::Attr>,
        dst_first: VertexId,
        id: SubShardId,
    ) -> Result<()> {
        if block.edge_count() == 0 {
            return Ok(());
        }
        let units = partition_work(
            id,
            block.records(),
            work::unit_target(block.edge_count(), self.config.threads),
        );
        let mut batch = Batch::new(Some(id.dst_interval as u64));
        for unit in units {
            let block = Arc::clone(&block);
            let src = src.clone();
            batch.push(move || {
                apply_records(kernel, &block, unit.records, &src, src_first, degrees, dst, dst_first);
                Ok(())
            });
        }
        ex.submit(batch)
    }

    #[allow(clippy::too_many_arguments)]
    fn submit_tohub<'env, K: Kernel>(
        &'env self,
        ex: &Executor<'_, 'env>,
        kernel: &'env K,
        block: Arc<SubShardBlock>,
        src: SrcRef<'env, K::Attr>,
        src_first: VertexId,
        degrees: &'env [u32],
        id: SubShardId,
        written: &'env Mutex<Vec<bool>>,
    ) -> Result<()> {
        if block.edge_count() == 0 {
            return Ok(());
        }
        let units = partition_work(
            id,
            block.records(),
            work::unit_target(block.edge_count(), self.config.threads),
        );
        let parts: Arc<Mutex<Vec<HubRecords<K::Contrib>>>> = Arc::new(Mutex::new(vec![Vec::new(); units.len()]));
        let mut batch = Batch::new(None);
        for (slot, unit) in units.into_iter().enumerate() {
            let block = Arc::clone(&block);
            let src = src.clone();
            let parts = Arc::clone(&parts);
            batch.push(move || {
                let mut out = Vec::new();
                for r in &block.records()[unit.records] {
                    if let Some(c) = fold_record(kernel, &block, r, &src, src_first, degrees) {
                        out.push((r.dst, c));
                    }
                }
                parts.lock().unwrap_or_else(|e| e.into_inner())[slot] = out;
                Ok(())
            });
        }
        let p = self.graph.partitions();
        let dst = self.graph.partition().range(id.dst_interval).ids();
        let batch = batch.then(move || {
            let parts = std::mem::take(&mut *parts.lock().unwrap_or_else(|e| e.into_inner()));
            let records: Vec<(VertexId, K::Contrib)> = parts.into_iter().flatten().collect();
            if records.is_empty() {
                return Ok(());
            }
            self.storage.write_hub(&hub_path(&self.work_dir, id), &dst, &records)?;
            written.lock().unwrap_or_else(|e| e.into_inner())[(id.src_interval * p + id.dst_interval) as usize] = true;
            Ok(())
        });
        ex.submit(batch)
    }

    fn submit_fromhub<'env, K: Kernel>(
        &'env self,
        ex: &Executor<'_, 'env>,
        kernel: &'env K,
        records: Arc<Vec<(VertexId, K::Contrib)>>,
        dst: &'env DisjointSlice<'_, K::Attr>,
        dst_first: VertexId,
        target: u32,
    ) -> Result<()> {
        let threads = self.config.threads;
        let chunk = if threads <= 1 {
            records.len().max(1)
        } else {
            records.len().div_ceil(threads * 4).max(MIN_HUB_UNIT)
        };
        let mut batch = Batch::new(Some(target as u64));
        let mut start = 0;
        while start < records.len() {
            let end = (start + chunk).min(records.len());
            let records = Arc::clone(&records);
            batch.push(move || {
                let part = &records[start..end];
                let lo = (part[0].0 - dst_first) as usize;
                let hi = (part[part.len() - 1].0 - dst_first) as usize + 1;
                // SAFETY: hub records are strictly ascending, so chunks cover disjoint ranges,
                // and batches on one target never overlap in time.
                let mut out = unsafe { dst.claim(lo..hi) };
                for &(v, c) in part {
                    let slot = &mut out[(v - dst_first) as usize - lo];
                    *slot = kernel.apply(slot, c);
                }
                Ok(())
            });
            start = end;
        }
        ex.submit(batch)
    }
}

/// One iteration, refusing to run under a different schedule than requested.
pub fn run_iteration_spu<K: Kernel>(
    engine: &Engine,
    state: &mut EngineState<K::Attr>,
    kernel: &K,
) -> Result<IterationStats> {
    expect_kind(engine, StrategyKind::Spu)?;
    engine.iterate(kernel, state)
}

pub fn run_iteration_dpu<K: Kernel>(
    engine: &Engine,
    state: &mut EngineState<K::Attr>,
    kernel: &K,
) -> Result<IterationStats> {
    expect_kind(engine, StrategyKind::Dpu)?;
    engine.iterate(kernel, state)
}

/// Accepts any residency, since MPU spans both extremes.
pub fn run_iteration_mpu<K: Kernel>(
    engine: &Engine,
    state: &mut EngineState<K::Attr>,
    kernel: &K,
) -> Result<IterationStats> {
    engine.iterate(kernel, state)
}

fn expect_kind(engine: &Engine, kind: StrategyKind) -> Result<()> {
    if engine.config.plan.kind != kind {
        return Err(Error::InvalidInput(format!(
            "engine plan is {}, not {}",
            engine.config.plan, kind
        )));
    }
    Ok(())
}

fn seed_buffer<A: Copy>(cur: &mut [A], prev: &[A], seed: Seed<A>) {
    match seed {
        Seed::CopyForward => cur.copy_from_slice(prev),
        Seed::Reset(base) => cur.fill(base),
    }
}

fn count_changed<K: Kernel>(kernel: &K, old: Option<&[K::Attr]>, new: &[K::Attr]) -> u64 {
    match old {
        _ if kernel.fixed_iterations() => new.len() as u64,
        Some(old) => old.iter().zip(new).filter(|(o, n)| kernel.changed(o, n)).count() as u64,
        None => new.len() as u64,
    }
}

#[inline]
fn fold_record<K: Kernel>(
    kernel: &K,
    block: &SubShardBlock,
    record: &crate::storage::format::DstRecord,
    src: &[K::Attr],
    src_first: VertexId,
    degrees: &[u32],
) -> Option<K::Contrib> {
    let mut acc: Option<K::Contrib> = None;
    for s in block.sources(record) {
        let degree = degrees.get(s as usize).copied().unwrap_or(0);
        if let Some(c) = kernel.gather(&src[(s - src_first) as usize], degree) {
            acc = Some(match acc {
                Some(a) => kernel.combine(a, c),
                None => c,
            });
        }
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn apply_records<K: Kernel>(
    kernel: &K,
    block: &SubShardBlock,
    records: Range<usize>,
    src: &[K::Attr],
    src_first: VertexId,
    degrees: &[u32],
    dst: &DisjointSlice<'_, K::Attr>,
    dst_first: VertexId,
) {
    let records = &block.records()[records];
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return;
    };
    let lo = (first.dst - dst_first) as usize;
    let hi = (last.dst - dst_first) as usize + 1;
    // SAFETY: units of one sub-shard hold disjoint destination records, and
    // batches on one target run one at a time.
    let mut out = unsafe { dst.claim(lo..hi) };
    for r in records {
        if let Some(c) = fold_record(kernel, block, r, src, src_first, degrees) {
            let slot = &mut out[(r.dst - dst_first) as usize - lo];
            *slot = kernel.apply(slot, c);
        }
    }
}

#[cfg(test)]
mod tests;
