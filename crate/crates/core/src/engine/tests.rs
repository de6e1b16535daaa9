use std::path::Path;

use tempfile::TempDir;

use super::*;
use crate::graph_model::tests::example_cells;
use crate::graph_model::Edge;
use crate::kernels::{oracle, Bfs, PageRank, Wcc};
use crate::preprocess::{preprocess_edges, PreprocessOptions};
use crate::storage::IoCategory;

fn example_edges() -> Vec<(u64, u64)> {
    example_cells()
        .into_iter()
        .flat_map(|(_, es)| es)
        .map(|(s, d)| (s as u64, d as u64))
        .collect()
}

fn build(dir: &Path, edges: &[(u64, u64)], p: u32) -> Graph {
    let opts = PreprocessOptions {
        partitions: p,
        symmetrize: true,
        transpose: true,
        spill_dir: Some(dir.to_path_buf()),
    };
    preprocess_edges(edges.iter().copied().map(Ok), &dir.join("g"), &opts, &Storage::new()).unwrap();
    Graph::open(dir.join("g")).unwrap()
}

fn engine(tmp: &TempDir, graph: &Graph, plan: StrategyPlan, threads: usize) -> Engine {
    let work = tmp
        .path()
        .join(format!("work-{plan}-{threads}-{}", plan.sync_mode.name()));
    Engine::new(
        graph.clone(),
        work,
        Storage::new(),
        EngineConfig::new(plan).with_threads(threads),
    )
    .unwrap()
}

fn dense(edges: &[(u64, u64)]) -> Vec<Edge> {
    edges.iter().map(|&(s, d)| Edge::new(s as u32, d as u32)).collect()
}

#[test]
fn bfs_waves_under_spu() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &example_edges(), 4);
    let e = engine(&tmp, &g, StrategyPlan::spu(4), 1);
    let bfs = Bfs::new(0);
    let mut st = e.start(&bfs).unwrap();
    assert_eq!(st.active(), &[true, false, false, false]);

    let first = e.iterate(&bfs, &mut st).unwrap();
    let depth = |st: &EngineState<u32>, v: u32| {
        let j = g.partition().locate(v).unwrap();
        st.resident(j).unwrap()[g.partition().range(j).offset(v)]
    };
    assert_eq!((depth(&st, 3), depth(&st, 6)), (1, 1));
    assert_eq!(first.active_after, vec![false, true, false, true]);
    assert_eq!(first.visits.len(), 4);
    assert!(first.visits.iter().all(|id| id.src_interval == 0));

    let mut iters = 1;
    while st.active().iter().any(|&a| a) {
        e.iterate(&bfs, &mut st).unwrap();
        iters += 1;
    }
    assert_eq!(iters, 3);
    e.finish(st).unwrap();
    assert_eq!(e.read_attrs::<u32>().unwrap(), vec![0, 2, 2, 1, 2, 2, 1]);
}

#[test]
fn spu_visits_every_subshard_when_all_active() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &example_edges(), 4);
    let e = engine(&tmp, &g, StrategyPlan::spu(4), 1);
    let pr = PageRank::new(0.85, 0.0).unwrap();
    let mut st = e.start(&pr).unwrap();
    let s = e.iterate(&pr, &mut st).unwrap();
    assert_eq!(s.visits.len(), 16);
    assert_eq!((s.in_memory_updates, s.hub_subshards), (16, 0));
    assert_eq!(s.io.get(IoCategory::Hub), Default::default());
    assert_eq!(s.io.get(IoCategory::Interval), Default::default());
}

#[test]
fn dpu_hubs_hold_folded_contributions() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &example_edges(), 4);
    let mut config = EngineConfig::new(StrategyPlan::dpu(4));
    config.retain_hubs = true;
    let e = Engine::new(g.clone(), tmp.path().join("w"), Storage::new(), config).unwrap();
    let bfs = Bfs::new(0);
    let mut st = e.start(&bfs).unwrap();
    let s = e.iterate(&bfs, &mut st).unwrap();
    assert_eq!(s.hub_subshards, 4);
    let read = |i: u32, j: u32| {
        let path = hub_path(e.work_dir(), SubShardId::new(i, j));
        path.exists().then(|| {
            e.storage()
                .read_hub::<u32>(&path, &g.partition().range(j).ids())
                .unwrap()
        })
    };
    assert_eq!(read(0, 1), Some(vec![(3, 1)]));
    assert_eq!(read(0, 3), Some(vec![(6, 1)]));
    assert_eq!(read(0, 2), None);
    assert_eq!(read(0, 0), None);
    assert_eq!(s.active_after, vec![false, true, false, true]);
}

#[test]
fn dpu_touches_each_interval_once_for_fixed_iterations() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &example_edges(), 4);
    let e = engine(&tmp, &g, StrategyPlan::dpu(4), 1);
    let pr = PageRank::new(0.85, 0.0).unwrap();
    let mut st = e.start(&pr).unwrap();
    let s = e.iterate(&pr, &mut st).unwrap();
    let t = s.io.get(IoCategory::Interval);
    assert_eq!((t.files_read, t.files_written), (4, 4));
    assert_eq!(s.io.get(IoCategory::SubShard).files_read, 16);
    let hubs = s.io.get(IoCategory::Hub);
    assert_eq!(hubs.files_read, hubs.files_written);
    assert!(std::fs::read_dir(e.work_dir().join(HUB_DIR)).unwrap().next().is_none());
}

#[test]
fn mpu_hubs_only_non_resident_cells() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &example_edges(), 4);
    let pr = PageRank::new(0.85, 0.0).unwrap();
    let e = engine(&tmp, &g, StrategyPlan::mpu(4, 2).unwrap(), 1);
    let mut st = e.start(&pr).unwrap();
    let s = e.iterate(&pr, &mut st).unwrap();
    assert_eq!(s.hub_subshards, 4);
    assert_eq!(s.visits.len(), 16);

    let full = engine(&tmp, &g, StrategyPlan::mpu(4, 4).unwrap(), 1);
    let mut st = full.start(&pr).unwrap();
    let s = full.iterate(&pr, &mut st).unwrap();
    assert_eq!(s.hub_subshards, 0);
    assert_eq!(s.io.get(IoCategory::Hub), Default::default());
}

#[test]
fn strategies_threads_and_sync_modes_agree() {
    let tmp = TempDir::new().unwrap();
    let edges = crate::synth::rmat(300, 3000, 11);
    let g = build(tmp.path(), &edges, 5);
    let n = g.vertex_count() as usize;
    let d = dense(&edges);
    let pr = PageRank::new(0.85, 0.0).unwrap();
    let plans = [
        StrategyPlan::spu(5),
        StrategyPlan::dpu(5),
        StrategyPlan::mpu(5, 2).unwrap(),
        StrategyPlan::mpu(5, 2).unwrap().with_sync(SyncMode::Lock),
        StrategyPlan::dpu(5).with_sync(SyncMode::Lock),
    ];
    let bfs_truth = oracle::bfs(n, &d, 0).unwrap();
    let wcc_truth = oracle::wcc(n, &d).unwrap();
    let pr_truth = oracle::pagerank(n, &d, 0.85, 10).unwrap();
    let mut reference: Option<Vec<f64>> = None;
    for plan in &plans {
        for threads in [1, 2, 8] {
            let e = Engine::new(
                g.clone(),
                tmp.path().join(format!("w-{plan}-{}-{threads}", plan.sync_mode.name())),
                Storage::new(),
                EngineConfig::new(plan.clone()).with_threads(threads).with_max_iters(10),
            )
            .unwrap();
            e.run(&Bfs::new(0)).unwrap();
            assert_eq!(e.read_attrs::<u32>().unwrap(), bfs_truth, "bfs {plan} t={threads}");
            e.run(&Wcc).unwrap();
            assert_eq!(e.read_attrs::<u32>().unwrap(), wcc_truth, "wcc {plan} t={threads}");
            let out = e.run(&pr).unwrap();
            assert_eq!(out.iterations, 10);
            let ranks = e.read_attrs::<f64>().unwrap();
            for (a, b) in ranks.iter().zip(&pr_truth) {
                assert!((a - b).abs() <= 1e-12, "pagerank {plan} t={threads}: {a} vs {b}");
            }
            match &reference {
                None => reference = Some(ranks),
                Some(r) => assert_eq!(&ranks, r, "bitwise drift under {plan} t={threads}"),
            }
        }
    }
}

#[test]
fn full_cache_stops_subshard_reads() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &example_edges(), 4);
    let mut plan = StrategyPlan::spu(4);
    plan.cached = g.partition().subshards().collect();
    let e = engine(&tmp, &g, plan, 2);
    let pr = PageRank::new(0.85, 0.0).unwrap();
    let mut st = e.start(&pr).unwrap();
    let first = e.iterate(&pr, &mut st).unwrap();
    assert_eq!(first.io.get(IoCategory::SubShard).files_read, 16);
    assert_eq!(st.cached_subshards(), 16);
    for _ in 0..3 {
        let s = e.iterate(&pr, &mut st).unwrap();
        assert_eq!(s.io.get(IoCategory::SubShard).bytes_read, 0);
        assert_eq!(s.visits.len(), 16);
    }
}

#[test]
fn resume_starts_from_disk() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &example_edges(), 4);
    let e = engine(&tmp, &g, StrategyPlan::mpu(4, 1).unwrap(), 1);
    e.run(&Bfs::new(0)).unwrap();
    let out = e.resume(&Bfs::new(0), |_, _| false).unwrap();
    assert_eq!((out.iterations, out.initially_active_vertices), (0, 0));
    assert_eq!(e.read_attrs::<u32>().unwrap(), vec![0, 2, 2, 1, 2, 2, 1]);
}

#[test]
fn schedule_checks() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &example_edges(), 4);
    let e = engine(&tmp, &g, StrategyPlan::dpu(4), 1);
    let bfs = Bfs::new(0);
    let mut st = e.start(&bfs).unwrap();
    assert!(run_iteration_spu(&e, &mut st, &bfs).is_err());
    assert!(run_iteration_dpu(&e, &mut st, &bfs).is_ok());
    assert!(run_iteration_mpu(&e, &mut st, &bfs).is_ok());
    let wrong = EngineConfig::new(StrategyPlan::spu(3));
    assert!(Engine::new(g, tmp.path().join("x"), Storage::new(), wrong).is_err());
}

/// Attributes after `k` iterations, for each `k` up to `limit`.
fn snapshots<K: Kernel>(e: &Engine, kernel: &K, pick: impl Fn(&K::Attr) -> u32, limit: u32) -> Vec<Vec<u32>> {
    (1..=limit)
        .map(|k| {
            e.run_until(kernel, k).unwrap();
            e.read_attrs::<K::Attr>().unwrap().iter().map(&pick).collect()
        })
        .collect()
}

#[test]
fn integer_values_never_increase() {
    let tmp = TempDir::new().unwrap();
    let g = build(tmp.path(), &crate::synth::rmat(300, 3000, 11), 5);
    let e = engine(&tmp, &g, StrategyPlan::mpu(5, 2).unwrap(), 2);
    let runs = [
        snapshots(&e, &Bfs::new(0), |&d| d, 8),
        snapshots(&e, &Wcc, |&l| l, 8),
        snapshots(&e, &crate::kernels::scc::SccForward, |a| a.fwd, 8),
    ];
    for snaps in runs {
        for w in snaps.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(a, b)| b <= a));
        }
    }
}
