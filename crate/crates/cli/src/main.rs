//! `vcreg` — build and audit regular partitions of bounded-VC bipartite
//! graphs.
//!
//! Subcommands:
//! - `generate`: write a seeded family instance as a `.big` file.
//! - `partition`: run the refinement loop; writes partition JSON, an
//!   energy-trace CSV, and a run manifest. Exit code 0 = regular,
//!   2 = iteration-capped, 3 = stagnated.
//! - `check`: independently re-verify a stored partition.
//! - `vcdim`: exact primal/dual/symmetric VC dimension (cap-saturated).
//! - `replay`: rerun a previous run from its manifest; with `--ci` runs
//!   the outputs are byte-identical.
//!
//! Thread count follows rayon's `RAYON_NUM_THREADS` when the crate is
//! built with the default `parallel` feature.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vcreg::formats::{
    self, parse_rational, PartitionJson, RationalJson, ReportJson,
};
use vcreg::generators::{generate, Family, FamilySpec};
use vcreg::refine::{regularize, LoopConfig, RunOutcome};
use vcreg::regularity::{partition_regularity, TesterConfig, TesterMode};
use vcreg::vc::{vc_dimension, vc_dimension_of_relation, TraceFamily};

#[derive(Parser)]
#[command(name = "vcreg", version, about = "Regular partitions of bounded-VC bipartite graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded graph family instance (.big file).
    Generate(GenerateArgs),
    /// Build a 1/r-regular partition and write partition/trace/manifest.
    Partition(PartitionArgs),
    /// Re-verify a stored partition against a graph.
    Check(CheckArgs),
    /// Exact VC dimension report (primal, dual, symmetric), cap-saturated.
    Vcdim(VcdimArgs),
    /// Rerun a previous `partition` run from its manifest.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// complete | matching | block-diagonal | erdos-renyi |
    /// interval-incidence | box-incidence | threshold | powerset
    #[arg(long)]
    family: String,
    #[arg(long)]
    nx: usize,
    #[arg(long)]
    ny: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge probability for erdos-renyi.
    #[arg(short = 'p', long)]
    p: Option<f64>,
    /// Diagonal block count for block-diagonal.
    #[arg(long, default_value_t = 2)]
    blocks: usize,
    /// Weight-sum threshold for the threshold family.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct PartitionArgs {
    /// Target quality: stop at a 1/r-regular partition.
    #[arg(short = 'r', long)]
    r: u64,
    /// Assumed VC dimension of the relation.
    #[arg(short = 'd', long)]
    d: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration cap (default: the theoretical 1000·r^7).
    #[arg(long)]
    max_iters: Option<u64>,
    /// Net sizing constant.
    #[arg(long, default_value_t = 8.0)]
    c0: f64,
    /// Resample rounds per net build before the full-block fallback.
    #[arg(long, default_value_t = 6)]
    net_max_rounds: usize,
    /// Blocks up to this size get the exact regularity tester.
    #[arg(long, default_value_t = 14)]
    exact_cap: usize,
    /// Random restarts for the sampled refuter.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Audit mode: per-round VC spot-checks and block-count forecasts.
    #[arg(long, default_value_t = false)]
    audit: bool,
    /// CI mode: requires an explicit --seed and zeroes wall-clock columns
    /// so outputs are byte-reproducible.
    #[arg(long, default_value_t = false)]
    ci: bool,
    /// Input graph (.big).
    input: PathBuf,
    /// Partition JSON output.
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Energy-trace CSV output.
    #[arg(long)]
    trace: PathBuf,
    /// Manifest path (default: <output>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Optional regularity report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Regularity parameter, e.g. "1/2" or "0.25".
    #[arg(long)]
    epsilon: String,
    #[arg(long, default_value_t = 14)]
    exact_cap: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    graph: PathBuf,
    partition: PathBuf,
    /// Report JSON output (stdout when omitted).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VcdimArgs {
    /// Saturation cap for the exact search.
    #[arg(long, default_value_t = 6)]
    cap: usize,
    input: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Override the partition JSON output path.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Override the trace CSV output path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Override the manifest output path.
    #[arg(long)]
    manifest_out: Option<PathBuf>,
    /// Override the report JSON output path.
    #[arg(long)]
    report: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Manifest

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestCfg {
    r: u64,
    d: usize,
    seed: u64,
    max_iters: u64,
    c0: f64,
    net_max_rounds: usize,
    exact_cap: usize,
    trials: usize,
    ci: bool,
    audit: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestOutputs {
    partition: PathBuf,
    trace: PathBuf,
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunManifest {
    version: String,
    command: String,
    input: PathBuf,
    /// FNV-1a of the input bytes, hex; an integrity marker for replays.
    input_fnv64: String,
    cfg: ManifestCfg,
    outcome: String,
    iterations: u64,
    energy: RationalJson,
    outputs: ManifestOutputs,
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> anyhow::Result<u8> {
    match Cli::parse().cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Partition(args) => cmd_partition(args),
        Cmd::Check(args) => cmd_check(args),
        Cmd::Vcdim(args) => cmd_vcdim(args),
        Cmd::Replay(args) => cmd_replay(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<u8> {
    let family = match args.family.as_str() {
        "complete" => Family::Complete,
        "matching" => Family::Matching,
        "block-diagonal" => Family::BlockDiagonal {
            blocks: args.blocks,
        },
        "erdos-renyi" => Family::ErdosRenyi {
            p: args
                .p
                .context("erdos-renyi requires an edge probability (-p)")?,
        },
        "interval-incidence" => Family::IntervalIncidence,
        "box-incidence" => Family::BoxIncidence,
        "threshold" => Family::Threshold { t: args.threshold },
        "powerset" => Family::PowerSet,
        other => bail!("unknown family {other:?}"),
    };
    let spec = FamilySpec {
        family,
        n_x: args.nx,
        n_y: args.ny,
        seed: args.seed,
    };
    let g = generate(&spec)?;
    let comment = format!(
        "family={} nx={} ny={} seed={}",
        spec.family.name(),
        spec.n_x,
        spec.n_y,
        spec.seed
    );
    formats::write_big(&args.output, &g, Some(&comment))?;
    println!(
        "wrote {} ({}x{}, {} edges)",
        args.output.display(),
        g.n_x(),
        g.n_y(),
        g.edge_count()
    );
    Ok(0)
}

fn loop_config(cfg: &ManifestCfg) -> LoopConfig {
    let mut lc = LoopConfig::new(cfg.r, cfg.d);
    lc.seed = cfg.seed;
    lc.c0 = cfg.c0;
    lc.net_max_rounds = cfg.net_max_rounds;
    lc.max_iters = cfg.max_iters;
    lc.audit = cfg.audit;
    lc.tester = TesterConfig {
        size_cap: cfg.exact_cap,
        trials: cfg.trials,
        seed: cfg.seed,
        mode: TesterMode::Auto,
    };
    lc
}

fn run_partition(
    command: &str,
    input: &Path,
    cfg: ManifestCfg,
    outputs: ManifestOutputs,
    manifest_path: &Path,
) -> anyhow::Result<u8> {
    let bytes = std::fs::read(input)
        .with_context(|| format!("reading graph {}", input.display()))?;
    let g = formats::read_big_from(bytes.as_slice())?;
    let lc = loop_config(&cfg);
    let result = regularize(&g, &lc)?;

    for w in &result.audit_warnings {
        eprintln!("audit: {w}");
    }

    let eps = lc.epsilon();
    let pj = PartitionJson::from_parts(&g, &result.partition, &result.nets, &eps);
    std::fs::write(&outputs.partition, serde_json::to_string_pretty(&pj)?)?;
    formats::write_trace_csv(&outputs.trace, &result.trace, cfg.ci)?;
    if let Some(report_path) = &outputs.report {
        let rj = ReportJson::from_report(&result.report);
        std::fs::write(report_path, serde_json::to_string_pretty(&rj)?)?;
    }

    let final_rho = vcreg::partition::energy(&g, &result.partition);
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        input: input.to_path_buf(),
        input_fnv64: format!("{:016x}", fnv64(&bytes)),
        cfg,
        outcome: result.outcome.as_str().to_string(),
        iterations: result.iterations,
        energy: RationalJson::from_rat(&final_rho),
        outputs,
    };
    std::fs::write(manifest_path, serde_json::to_string_pretty(&manifest)?)?;

    println!(
        "{}: {} after {} iteration(s), {} x {} blocks, energy {}/{}",
        input.display(),
        result.outcome.as_str(),
        result.iterations,
        result.partition.x_blocks().len(),
        result.partition.y_blocks().len(),
        final_rho.numer(),
        final_rho.denom(),
    );

    Ok(match result.outcome {
        RunOutcome::Regular => 0,
        RunOutcome::IterationCapped => 2,
        RunOutcome::Stagnated => 3,
    })
}

fn cmd_partition(args: PartitionArgs) -> anyhow::Result<u8> {
    if args.ci && args.seed.is_none() {
        bail!("--ci requires an explicit --seed");
    }
    let seed = args.seed.unwrap_or(0);
    let default_iters = LoopConfig::new(args.r, args.d).max_iters;
    let cfg = ManifestCfg {
        r: args.r,
        d: args.d,
        seed,
        max_iters: args.max_iters.unwrap_or(default_iters),
        c0: args.c0,
        net_max_rounds: args.net_max_rounds,
        exact_cap: args.exact_cap,
        trials: args.trials,
        ci: args.ci,
        audit: args.audit,
    };
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| manifest_default(&args.output));
    let outputs = ManifestOutputs {
        partition: args.output.clone(),
        trace: args.trace.clone(),
        report: args.report.clone(),
    };
    run_partition("partition", &args.input, cfg, outputs, &manifest_path)
}

fn manifest_default(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn cmd_replay(args: ReplayArgs) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text).context("parsing manifest")?;

    let bytes = std::fs::read(&manifest.input)
        .with_context(|| format!("reading graph {}", manifest.input.display()))?;
    let fnv = format!("{:016x}", fnv64(&bytes));
    if fnv != manifest.input_fnv64 {
        bail!(
            "input {} changed since the original run (fnv64 {} != {})",
            manifest.input.display(),
            fnv,
            manifest.input_fnv64
        );
    }

    let outputs = ManifestOutputs {
        partition: args.output.unwrap_or(manifest.outputs.partition.clone()),
        trace: args.trace.unwrap_or(manifest.outputs.trace.clone()),
        report: args.report.or(manifest.outputs.report.clone()),
    };
    let manifest_path = args
        .manifest_out
        .unwrap_or_else(|| manifest_default(&outputs.partition));
    run_partition("replay", &manifest.input, manifest.cfg, outputs, &manifest_path)
}

fn cmd_check(args: CheckArgs) -> anyhow::Result<u8> {
    let eps = parse_rational(&args.epsilon)?;
    let g = formats::read_big(&args.graph)?;
    let text = std::fs::read_to_string(&args.partition)
        .with_context(|| format!("reading partition {}", args.partition.display()))?;
    let pj: PartitionJson = serde_json::from_str(&text).context("parsing partition JSON")?;
    let (partition, _nets) = pj.to_parts(&g)?;
    let cfg = TesterConfig {
        size_cap: args.exact_cap,
        trials: args.trials,
        seed: args.seed,
        mode: TesterMode::Auto,
    };
    let report = partition_regularity(&g, &partition, &eps, &cfg)?;
    let rj = ReportJson::from_report(&report);
    let text = serde_json::to_string_pretty(&rj)?;
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    eprintln!(
        "partition is {}ε-regular at ε = {}/{} (irregular mass {}/{})",
        if report.regular { "" } else { "NOT " },
        report.epsilon.numer(),
        report.epsilon.denom(),
        report.irregular_mass.numer(),
        report.irregular_mass.denom(),
    );
    Ok(0)
}

fn cmd_vcdim(args: VcdimArgs) -> anyhow::Result<u8> {
    let g = formats::read_big(&args.input)?;
    let primal = vc_dimension(&TraceFamily::Rows(&g), args.cap);
    let dual = vc_dimension(&TraceFamily::Cols(&g), args.cap);
    let symmetric = vc_dimension_of_relation(&g, args.cap);
    println!("primal VC:    {primal}");
    println!("dual VC:      {dual}");
    println!("symmetric VC: {symmetric}");
    Ok(0)
}
