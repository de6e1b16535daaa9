use nxcore::engine::{Engine, EngineConfig, Graph, StrategyPlan, SyncMode, IN_MEMORY_EDGE_LIMIT};
use nxcore::kernels::{AlgoKind, Algorithm, Values};
use nxcore::preprocess::{preprocess_edges, PreprocessOptions};
use nxcore::storage::Storage;
use nxcore::{synth, Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tempfile::TempDir;

use crate::{AlgoArg, VerifyArgs};

#[derive(Default)]
struct Report {
    passed: u32,
    failed: u32,
}

pub fn verify(a: &VerifyArgs) -> Result<bool> {
    if a.graph.is_none() && a.trials == 0 {
        return Err(Error::InvalidInput("verify needs --graph or --trials".into()));
    }
    let scratch = TempDir::new().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let mut report = Report::default();
    if let Some(dir) = &a.graph {
        let graph = Graph::open(dir)?;
        verify_graph(&graph, &dir.display().to_string(), a, &scratch, &mut report)?;
    }
    let mut rng = StdRng::seed_from_u64(a.seed);
    for t in 0..a.trials {
        let n = rng.random_range(8..=400u64);
        let m = n * rng.random_range(1..=8u64);
        let p = rng.random_range(1..=8u32.min(n as u32));
        let edges = synth::rmat(n, m, rng.random());
        let dir = scratch.path().join(format!("trial-{t}"));
        let opts = PreprocessOptions {
            partitions: p,
            symmetrize: true,
            transpose: true,
            spill_dir: Some(scratch.path().to_path_buf()),
        };
        preprocess_edges(edges.into_iter().map(Ok), &dir, &opts, &Storage::new())?;
        let label = format!("trial-{t}(n={n},m={m},P={p})");
        verify_graph(&Graph::open(&dir)?, &label, a, &scratch, &mut report)?;
    }
    println!("verify: {} passed, {} failed", report.passed, report.failed);
    Ok(report.failed == 0)
}

/// Every schedule tried on a graph with `P` intervals.
fn schedules(p: u32, threads: usize, graph: &Graph) -> Vec<(StrategyPlan, usize)> {
    let mut cached = StrategyPlan::spu(p);
    cached.cached = graph.partition().subshards().collect();
    let mut out = vec![(StrategyPlan::spu(p), 1), (cached, threads), (StrategyPlan::dpu(p), 1)];
    out.push((StrategyPlan::dpu(p), threads));
    out.push((StrategyPlan::dpu(p).with_sync(SyncMode::Lock), threads));
    for q in 1..p {
        let plan = StrategyPlan::mpu(p, q).expect("q < p");
        out.push((plan.clone(), 1));
        out.push((plan, threads));
    }
    out
}

fn verify_graph(graph: &Graph, label: &str, a: &VerifyArgs, scratch: &TempDir, report: &mut Report) -> Result<()> {
    if graph.edge_count() > IN_MEMORY_EDGE_LIMIT {
        return Err(Error::Oversize {
            edges: graph.edge_count(),
            limit: IN_MEMORY_EDGE_LIMIT,
        });
    }
    let kinds: Vec<AlgoKind> = match a.algo {
        Some(AlgoArg::Pagerank) => vec![AlgoKind::PageRank],
        Some(AlgoArg::Bfs) => vec![AlgoKind::Bfs],
        Some(AlgoArg::Wcc) => vec![AlgoKind::Wcc],
        Some(AlgoArg::Scc) => vec![AlgoKind::Scc],
        None => AlgoKind::ALL.to_vec(),
    };
    let storage = Storage::new();
    for kind in kinds {
        let algo = match kind {
            AlgoKind::PageRank => Algorithm::PageRank {
                alpha: nxcore::kernels::pagerank::DEFAULT_DAMPING,
                epsilon: 0.0,
                iterations: 10,
            },
            AlgoKind::Bfs => Algorithm::Bfs { root: 0 },
            AlgoKind::Wcc => Algorithm::Wcc,
            AlgoKind::Scc => Algorithm::Scc,
        };
        match algo.check_graph(graph) {
            Err(Error::MissingShardSet(set)) if a.algo.is_none() => {
                println!("SKIP {label} {kind}: no {set} shard set");
                continue;
            }
            other => other?,
        }
        let truth = match algo.oracle(graph, &storage, 10) {
            Ok(v) => v,
            Err(e) => {
                fail(report, format!("{label} {kind} oracle: {}", describe(&e)));
                continue;
            }
        };
        let mut first: Option<(String, Values)> = None;
        let mut ok = true;
        let runs = schedules(graph.partitions(), a.threads.max(1), graph);
        let total = runs.len();
        for (k, (plan, threads)) in runs.into_iter().enumerate() {
            let name = format!("{plan}/{}/t={threads}", plan.sync_mode.name());
            let work = scratch.path().join(format!("work-{}-{kind}-{k}", label.len()));
            let outcome = Engine::new(
                graph.clone(),
                &work,
                Storage::new(),
                EngineConfig::new(plan).with_threads(threads),
            )
            .and_then(|e| algo.run(&e));
            let _ = std::fs::remove_dir_all(&work);
            let values = match outcome {
                Ok(r) => r.values,
                Err(e) => {
                    ok = false;
                    fail(report, format!("{label} {kind} {name}: {}", describe(&e)));
                    continue;
                }
            };
            if let Some(v) = values.mismatch(&truth) {
                ok = false;
                fail(
                    report,
                    format!("{label} {kind} {name}: vertex {v} disagrees with the oracle"),
                );
                continue;
            }
            match &first {
                None => first = Some((name, values)),
                Some((base, v)) if !v.identical(&values) => {
                    ok = false;
                    fail(report, format!("{label} {kind} {name}: output differs from {base}"));
                }
                Some(_) => {}
            }
        }
        if ok {
            report.passed += 1;
            println!("PASS {label} {kind} ({total} schedules)");
        }
    }
    Ok(())
}

fn describe(e: &Error) -> String {
    match e {
        Error::Corrupt { .. } => format!("decode error: {e}"),
        _ => e.to_string(),
    }
}

fn fail(report: &mut Report, line: String) {
    report.failed += 1;
    println!("FAIL {line}");
}
