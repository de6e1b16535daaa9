//! `nxcore` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad arguments or input,
//! 3 I/O or corrupt files, 4 infeasible memory budget, 5 missing shard set,
//! 6 graph too large for the oracles, 7 internal error.

mod commands;
mod verify;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nxcore::engine::SyncMode;
use nxcore::Error;

#[derive(Debug, Parser)]
#[command(
    name = "nxcore",
    version,
    about = "Out-of-core graph processing on destination-sorted sub-shards"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a text edge list into a sharded graph directory.
    Preprocess(PreprocessArgs),
    /// Run one algorithm on a preprocessed graph.
    Run(RunArgs),
    /// Evaluate the I/O cost formulas.
    Costmodel(CostArgs),
    /// Compare every feasible schedule against the in-memory oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Whitespace-separated `src dst` pairs, `#` comments allowed.
    #[arg(long)]
    pub input: std::path::PathBuf,
    #[arg(long)]
    pub out: std::path::PathBuf,
    #[arg(long, default_value_t = nxcore::graph_model::DEFAULT_PARTITIONS)]
    pub partitions: u32,
    /// Also build the symmetrized shard set (needed by wcc).
    #[arg(long)]
    pub symmetrize: bool,
    /// Also build the transposed shard set (needed by scc).
    #[arg(long)]
    pub transpose: bool,
    /// Directory for spill files; defaults to $NXCORE_TMPDIR or the system temp dir.
    #[arg(long)]
    pub spill_dir: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Pagerank,
    Bfs,
    Wcc,
    Scc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Spu,
    Dpu,
    Mpu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SyncArg {
    Callback,
    Lock,
}

impl From<SyncArg> for SyncMode {
    fn from(s: SyncArg) -> Self {
        match s {
            SyncArg::Callback => SyncMode::Callback,
            SyncArg::Lock => SyncMode::Lock,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub graph: std::path::PathBuf,
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// BFS root as a raw index from the input file.
    #[arg(long)]
    pub root: Option<u64>,
    /// PageRank iterations; defaults to 10 when epsilon is 0.
    #[arg(long)]
    pub iterations: Option<u32>,
    /// PageRank convergence threshold; 0 runs a fixed number of iterations.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = nxcore::kernels::pagerank::DEFAULT_DAMPING)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    /// Resident intervals for mpu.
    #[arg(long)]
    pub q: Option<u32>,
    /// Memory budget in bytes; K, M and G suffixes are powers of 1024.
    #[arg(long, value_parser = parse_bytes)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = SyncArg::Callback)]
    pub sync: SyncArg,
    #[arg(long)]
    pub max_iters: Option<u32>,
    /// Write per-iteration stats here instead of stderr.
    #[arg(long)]
    pub stats: Option<std::path::PathBuf>,
    /// Result file; defaults to `<work-dir>/<algo>.tsv`.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Scratch directory for intervals and hubs; defaults to the graph directory.
    #[arg(long)]
    pub work_dir: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long, default_value_t = 720_000_000)]
    pub n: u64,
    #[arg(long, default_value_t = 6_630_000_000)]
    pub m: u64,
    #[arg(long, default_value_t = 8)]
    pub ba: u64,
    #[arg(long, default_value_t = 4)]
    pub bv: u64,
    #[arg(long, default_value_t = 4)]
    pub be: u64,
    #[arg(long, default_value_t = 15.0)]
    pub d: f64,
    /// Budget for the table; K, M and G suffixes are powers of 1024.
    #[arg(long, value_parser = parse_bytes)]
    pub budget: Option<u64>,
    /// Also print the integral MPU row for this many intervals.
    #[arg(long)]
    pub partitions: Option<u32>,
    /// Print the ratio curve over `LO:HI:STEPS` as CSV instead of the table.
    #[arg(long)]
    pub budget_grid: Option<String>,
    /// Grid over (0, 2n·B_a] with this many steps.
    #[arg(long, conflicts_with = "budget_grid")]
    pub full_grid: Option<u32>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Graph to verify; omit to use only random graphs.
    #[arg(long)]
    pub graph: Option<std::path::PathBuf>,
    /// One algorithm, or every algorithm the graph supports.
    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,
    /// Number of random graphs to generate and verify.
    #[arg(long, default_value_t = 0)]
    pub trials: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Thread count tried besides 1.
    #[arg(long, default_value_t = 4)]
    pub threads: usize,
}

/// Parses `123`, `64K`, `512M` or `2G` into bytes.
pub fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (digits, shift) = match s.char_indices().last() {
        Some((i, 'K' | 'k')) => (&s[..i], 10),
        Some((i, 'M' | 'm')) => (&s[..i], 20),
        Some((i, 'G' | 'g')) => (&s[..i], 30),
        _ => (s, 0),
    };
    let base: u64 = digits
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a byte count"))?;
    let bytes = base
        .checked_mul(1u64 << shift)
        .ok_or_else(|| format!("`{s}` overflows"))?;
    if bytes == 0 {
        return Err("budget must be positive".into());
    }
    Ok(bytes)
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidPartition(_)
        | Error::VertexOutOfRange { .. }
        | Error::EmptyGraph
        | Error::Parse { .. }
        | Error::InvalidInput(_) => 2,
        Error::Io { .. } | Error::Corrupt { .. } | Error::Manifest { .. } => 3,
        Error::InfeasibleBudget { .. } => 4,
        Error::MissingShardSet(_) => 5,
        Error::Oversize { .. } => 6,
        Error::Invariant(_) | Error::Internal(_) => 7,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess(a) => commands::preprocess(&a).map(|_| 0),
        Command::Run(a) => commands::run(&a).map(|_| 0),
        Command::Costmodel(a) => commands::costmodel(&a).map(|_| 0),
        Command::Verify(a) => verify::verify(&a).map(|ok| if ok { 0 } else { 1 }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
