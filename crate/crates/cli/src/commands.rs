use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use nxcore::cost_model::{self, BudgetGrid, CostParams};
use nxcore::engine::{
    check_budget, select_strategy, Engine, EngineConfig, Graph, IterationStats, PlanInputs, StrategyPlan,
};
use nxcore::kernels::{Algorithm, Values, UNREACHED};
use nxcore::preprocess::{preprocess_file, PreprocessOptions};
use nxcore::storage::{ShardSetKind, Storage};
use nxcore::{Error, Result};

use crate::{AlgoArg, CostArgs, PreprocessArgs, RunArgs, StrategyArg};

pub fn preprocess(a: &PreprocessArgs) -> Result<()> {
    let opts = PreprocessOptions {
        partitions: a.partitions,
        symmetrize: a.symmetrize,
        transpose: a.transpose,
        spill_dir: a.spill_dir.clone(),
    };
    let manifest = preprocess_file(&a.input, &a.out, &opts, &Storage::new())?;
    let mut out = io::stdout().lock();
    let w = |e: io::Error| Error::io("<stdout>", e);
    writeln!(
        out,
        "n={} m={} P={}",
        manifest.vertex_count, manifest.edge_count, manifest.partitions
    )
    .map_err(w)?;
    for (name, set) in &manifest.shard_sets {
        for ss in &set.subshards {
            writeln!(out, "{name} SS({}.{}) edges={}", ss.src, ss.dst, ss.edges).map_err(w)?;
        }
    }
    Ok(())
}

/// Resolves the algorithm, mapping a raw BFS root to its dense id.
fn algorithm(a: &RunArgs, graph: &Graph) -> Result<Algorithm> {
    Ok(match a.algo {
        AlgoArg::Pagerank => {
            let iterations = a
                .iterations
                .or(a.max_iters)
                .unwrap_or(if a.epsilon == 0.0 { 10 } else { u32::MAX });
            Algorithm::PageRank {
                alpha: a.alpha,
                epsilon: a.epsilon,
                iterations,
            }
        }
        AlgoArg::Bfs => {
            let raw = a.root.ok_or_else(|| Error::InvalidInput("bfs needs --root".into()))?;
            let root = graph.dense_id(raw)?.ok_or(Error::VertexOutOfRange {
                vertex: raw,
                n: graph.vertex_count(),
            })?;
            Algorithm::Bfs { root }
        }
        AlgoArg::Wcc => Algorithm::Wcc,
        AlgoArg::Scc => Algorithm::Scc,
    })
}

/// Picks the schedule from the strategy flag, `--q` and the budget.
pub fn plan(
    graph: &Graph,
    algo: &Algorithm,
    strategy: StrategyArg,
    q: Option<u32>,
    budget: Option<u64>,
) -> Result<StrategyPlan> {
    let p = graph.partitions();
    let mut max_subshard = 0;
    for &kind in algo.shard_sets() {
        max_subshard = max_subshard.max(graph.shard_set(kind)?.max_subshard_bytes());
    }
    let inputs = PlanInputs::new(graph.vertex_count(), p, algo.attr_bytes(), max_subshard);
    if q.is_some() && strategy != StrategyArg::Mpu {
        return Err(Error::InvalidInput("--q only applies to --strategy mpu".into()));
    }
    let forward = graph.shard_set(ShardSetKind::Forward)?;
    let plan = match (strategy, budget) {
        (StrategyArg::Auto, Some(b)) => return select_strategy(&inputs, b, Some(forward)),
        (StrategyArg::Auto | StrategyArg::Spu, None) => StrategyPlan::spu(p),
        (StrategyArg::Spu, Some(b)) => {
            let mut plan = StrategyPlan::spu(p);
            check_budget(&inputs, b, &plan)?;
            plan.cached = select_strategy(&inputs, b, Some(forward))?.cached;
            plan
        }
        (StrategyArg::Dpu, _) => StrategyPlan::dpu(p),
        (StrategyArg::Mpu, _) => {
            let q = match (q, budget) {
                (Some(q), _) => q,
                (None, Some(b)) => select_strategy(&inputs, b, None)?.resident,
                (None, None) => return Err(Error::InvalidInput("mpu needs --q or --budget".into())),
            };
            StrategyPlan::mpu(p, q)?
        }
    };
    if let Some(b) = budget {
        check_budget(&inputs, b, &plan)?;
    }
    Ok(plan)
}

pub fn run(a: &RunArgs) -> Result<()> {
    let graph = Graph::open(&a.graph)?;
    let algo = algorithm(a, &graph)?;
    algo.check_graph(&graph)?;
    let plan = plan(&graph, &algo, a.strategy, a.q, a.budget)?.with_sync(a.sync.into());
    let work_dir = a.work_dir.clone().unwrap_or_else(|| a.graph.clone());
    let mut config = EngineConfig::new(plan).with_threads(a.threads);
    if let Some(m) = a.max_iters {
        config = config.with_max_iters(m);
    }
    let storage = Storage::new();
    let engine = Engine::new(graph.clone(), &work_dir, storage.clone(), config)?;
    let result = algo.run(&engine)?;

    write_stats(a.stats.as_deref(), &result.stats)?;
    let out_path = a
        .out
        .clone()
        .unwrap_or_else(|| work_dir.join(format!("{}.tsv", algo.kind())));
    let raw = graph.raw_indices(&storage)?;
    let vertex_labels = matches!(algo, Algorithm::Wcc | Algorithm::Scc);
    write_results(&out_path, &raw, &result.values, vertex_labels)?;
    println!(
        "algo={} strategy={} iterations={} {} results={}",
        algo.kind(),
        engine.config().plan,
        result.iterations,
        algo.summary(&result.values),
        out_path.display()
    );
    Ok(())
}

fn write_stats(path: Option<&Path>, stats: &[IterationStats]) -> Result<()> {
    let mut text = String::new();
    for s in stats {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => io::stderr()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stderr>", e)),
    }
}

/// One `raw_index<TAB>value` line per vertex. With `vertex_labels`, each
/// value is a vertex and is printed as its raw index; unreached values print
/// as `inf`.
pub fn write_results(path: &Path, raw: &[u64], values: &Values, vertex_labels: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let res = (|| -> io::Result<()> {
        match values {
            Values::Ranks(r) => {
                for (v, x) in r.iter().enumerate() {
                    writeln!(out, "{}\t{x}", raw[v])?;
                }
            }
            Values::Labels(l) => {
                for (v, &x) in l.iter().enumerate() {
                    if x == UNREACHED {
                        writeln!(out, "{}\tinf", raw[v])?;
                    } else if vertex_labels {
                        writeln!(out, "{}\t{}", raw[v], raw[x as usize])?;
                    } else {
                        writeln!(out, "{}\t{x}", raw[v])?;
                    }
                }
            }
        }
        out.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn costmodel(a: &CostArgs) -> Result<()> {
    let base = CostParams {
        n: a.n,
        m: a.m,
        b_a: a.ba,
        b_v: a.bv,
        b_e: a.be,
        b_m: 0.0,
        d: a.d,
        p: a.partitions.unwrap_or(1),
        q: 0,
    };
    base.validate()?;
    let grid = match (&a.budget_grid, a.full_grid) {
        (Some(g), _) => Some(g.parse::<BudgetGrid>()?),
        (None, Some(steps)) if steps > 0 => Some(BudgetGrid::up_to_ping_pong(&base, steps)),
        (None, Some(_)) => return Err(Error::InvalidInput("--full-grid needs at least one step".into())),
        (None, None) => None,
    };
    let mut out = io::stdout().lock();
    let w = |e: io::Error| Error::io("<stdout>", e);
    if let Some(grid) = grid {
        let points = cost_model::ratio_curve(&base, &grid)?;
        return out.write_all(cost_model::curve_csv(&points).as_bytes()).map_err(w);
    }
    let b_m = a
        .budget
        .ok_or_else(|| Error::InvalidInput("costmodel needs --budget, --budget-grid or --full-grid".into()))?;
    let at = CostParams {
        b_m: b_m as f64,
        ..base
    };
    for (name, row) in cost_model::table_rows(&at) {
        match row {
            Ok(c) => writeln!(out, "{name} read={:.0} write={:.0}", c.read, c.write).map_err(w)?,
            Err(e) => writeln!(out, "{name} infeasible: {e}").map_err(w)?,
        }
    }
    if a.partitions.is_some() {
        let q = at.resident_intervals();
        let c = cost_model::io_mpu(&CostParams { q, ..at })?;
        writeln!(out, "mpu(Q={q}/P={}) read={:.0} write={:.0}", at.p, c.read, c.write).map_err(w)?;
    }
    Ok(())
}
