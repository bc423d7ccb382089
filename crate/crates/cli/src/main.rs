//! `smilp` command line: generate instances, report theoretical bounds,
//! estimate or exactly compute sparse cut closures, verify the known-gap
//! families, and run seeded ratio experiments.
//!
//! Exit codes: 0 = all checks hold, 1 = a bound or tightness violation,
//! 2 = usage error.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use smilp::bounds::theoretical_bound;
use smilp::estimator::{estimate_zcut, EstimatorConfig};
use smilp::experiment::{
    run_experiment, verify_tightness, ExperimentConfig, SupportsMode, TightFamily,
};
use smilp::graph::{
    build_covering_graph, build_packing_graph, natural_sparse_list, super_sparse_list,
    support_columns, InteractionGraph, SupportList,
};
use smilp::instance::{format_rational, load_instance, parse_rational, save_instance};
use smilp::constructions::{gen_random_instance, GenParams};
use smilp::kernel::{exact_closure_value, solve_milp, OracleConfig, SolveStatus, DEFAULT_POINT_CAP};
use smilp::{Axis, BlockPartition, Instance, Kind, Q};
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "smilp", version, about = "sparse cut closure toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Packing,
    Covering,
    General,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Packing => Kind::Packing,
            KindArg::Covering => Kind::Covering,
            KindArg::General => Kind::General,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Super-sparse supports: one per graph node.
    Ss,
    /// Natural supports: one per constraint row.
    Ns,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random block-structured instance and save it.
    Gen(GenArgs),
    /// Print the theoretical closure/integer ratio bound of an instance.
    Bounds(BoundsArgs),
    /// Estimate (or exactly compute) the sparse closure value.
    Closure(ClosureArgs),
    /// Verify the families with known closure/integer gaps.
    Tight(TightArgs),
    /// Run a seeded multi-instance ratio experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of graph nodes (variable blocks).
    #[arg(long, default_value_t = 3)]
    nv: usize,
    /// Side length of each matrix block.
    #[arg(long, default_value_t = 2)]
    sqr: usize,
    /// Edge probability as p/q.
    #[arg(long, default_value = "1/2")]
    p: String,
    /// Use a fixed star topology (node 0 as the shared first stage).
    #[arg(long)]
    two_stage: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Ns)]
    mode: ModeArg,
}

#[derive(Args)]
struct ClosureArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Ns)]
    mode: ModeArg,
    /// Also compute the exact closure value and report the gap.
    #[arg(long)]
    oracle: bool,
    /// Violation tolerance for generated cuts, as p/q.
    #[arg(long)]
    eps: Option<String>,
    /// Lattice cap for integer point enumeration.
    #[arg(long, default_value_t = DEFAULT_POINT_CAP)]
    cap: u64,
    /// Write the cut trace CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TightArgs {
    /// Family name; verifies all families when omitted.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Ns)]
    mode: ModeArg,
    #[arg(long, default_value_t = 3)]
    nv: usize,
    #[arg(long, default_value_t = 2)]
    sqr: usize,
    #[arg(long, default_value = "1/2")]
    p: String,
    #[arg(long)]
    two_stage: bool,
    /// Use the exact hull oracle instead of the cutting-plane estimator.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = DEFAULT_POINT_CAP)]
    cap: u64,
    /// Write the per-instance ratio CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn rational_arg(text: &str, what: &str) -> Result<Q> {
    parse_rational(text).ok_or_else(|| anyhow!("{what}: expected a rational like 3/4, got {text}"))
}

fn gen_params(kind: Kind, seed: u64, nv: usize, sqr: usize, p: &str, two_stage: bool) -> Result<GenParams> {
    Ok(GenParams {
        nv,
        p: rational_arg(p, "--p")?,
        sqr,
        coeff_max: 5,
        eps_max: 3,
        obj_max: 10,
        seed,
        kind,
        two_stage,
    })
}

/// Interaction graph of a loaded instance: column blocks for packing and
/// general kinds, row blocks for covering.
fn graph_of(instance: &Instance, partitions: &[BlockPartition]) -> Result<InteractionGraph> {
    let axis = if instance.kind == Kind::Covering { Axis::Rows } else { Axis::Columns };
    let partition = partitions
        .iter()
        .find(|p| p.axis == axis)
        .ok_or_else(|| anyhow!("instance file lacks a {axis:?} partition"))?;
    let graph = if instance.kind == Kind::Covering {
        build_covering_graph(instance, partition)?
    } else {
        build_packing_graph(instance, partition)?
    };
    Ok(graph)
}

fn list_of(instance: &Instance, graph: &InteractionGraph, mode: ModeArg) -> SupportList {
    match mode {
        ModeArg::Ss => super_sparse_list(graph),
        ModeArg::Ns => natural_sparse_list(instance, graph),
    }
}

fn column_supports(graph: &InteractionGraph, list: &SupportList) -> Vec<BTreeSet<usize>> {
    list.members.iter().map(|m| support_columns(graph, m)).collect()
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode> {
    let params = gen_params(args.kind.into(), args.seed, args.nv, args.sqr, &args.p, args.two_stage)?;
    let (instance, partition) = gen_random_instance(&params)?;
    save_instance(&instance, std::slice::from_ref(&partition), &args.out)?;
    println!(
        "wrote {} ({} vars, {} rows)",
        args.out.display(),
        instance.num_vars,
        instance.rows.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(args: &BoundsArgs) -> Result<ExitCode> {
    let (instance, partitions) =
        load_instance(&args.instance).with_context(|| format!("loading {}", args.instance.display()))?;
    let graph = graph_of(&instance, &partitions)?;
    let list = list_of(&instance, &graph, args.mode);
    let report = theoretical_bound(instance.kind, &graph, &list)?;
    println!("{}", report.csv_row());
    println!("bound = {}", format_rational(&report.value));
    Ok(ExitCode::SUCCESS)
}

fn cmd_closure(args: &ClosureArgs) -> Result<ExitCode> {
    let (instance, partitions) =
        load_instance(&args.instance).with_context(|| format!("loading {}", args.instance.display()))?;
    let graph = graph_of(&instance, &partitions)?;
    let list = list_of(&instance, &graph, args.mode);
    let supports = column_supports(&graph, &list);
    let mut config = EstimatorConfig { point_cap: args.cap, ..EstimatorConfig::default() };
    if let Some(eps) = &args.eps {
        config.epsilon = rational_arg(eps, "--eps")?;
    }
    let run = estimate_zcut(&instance, &supports, &config)?;
    println!(
        "estimate = {} ({} cuts, {} rounds, {:?})",
        format_rational(&run.z_estimate),
        run.cuts_added.len(),
        run.rounds,
        run.termination
    );
    if let Some(path) = &args.out {
        std::fs::write(path, run.trace_csv())?;
    }
    if args.oracle {
        let flat: Vec<Vec<usize>> = supports.iter().map(|s| s.iter().copied().collect()).collect();
        let exact = exact_closure_value(&instance, &flat, OracleConfig { point_cap: args.cap })?;
        if exact.status != SolveStatus::Optimal {
            bail!("exact closure solve ended {:?}", exact.status);
        }
        let gap = if instance.sense == smilp::Sense::Maximize {
            &run.z_estimate - &exact.value
        } else {
            &exact.value - &run.z_estimate
        };
        println!("exact = {}", format_rational(&exact.value));
        println!("gap = {}", format_rational(&gap));
        let milp = solve_milp(&instance, &[])?;
        if milp.status == SolveStatus::Optimal {
            println!("zI = {}", format_rational(&milp.value));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_tight(args: &TightArgs) -> Result<ExitCode> {
    let families: Vec<TightFamily> = match &args.family {
        Some(name) => {
            vec![TightFamily::parse(name).ok_or_else(|| anyhow!("unknown family: {name}"))?]
        }
        None => TightFamily::ALL.to_vec(),
    };
    let mut all_pass = true;
    for family in families {
        let outcome = verify_tightness(family)?;
        println!(
            "{}: {} — relaxed {}, integer {} ({})",
            family.as_str(),
            if outcome.pass { "pass" } else { "FAIL" },
            format_rational(&outcome.z_relaxed),
            format_rational(&outcome.z_int),
            outcome.detail
        );
        all_pass &= outcome.pass;
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    let kind: Kind = args.kind.into();
    let config = ExperimentConfig {
        kind,
        count: args.count,
        base_seed: args.seed,
        gen: gen_params(kind, 0, args.nv, args.sqr, &args.p, args.two_stage)?,
        supports: match args.mode {
            ModeArg::Ss => SupportsMode::SuperSparse,
            ModeArg::Ns => SupportsMode::NaturalSparse,
        },
        estimator: EstimatorConfig { point_cap: args.cap, ..EstimatorConfig::default() },
        use_oracle: args.oracle,
    };
    let report = run_experiment(&config)?;
    if let Some(path) = &args.out {
        std::fs::write(path, report.csv())?;
    } else {
        print!("{}", report.csv());
    }
    print!("{}", report.markdown());
    Ok(if report.all_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Closure(args) => cmd_closure(args),
        Command::Tight(args) => cmd_tight(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
