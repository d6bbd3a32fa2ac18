use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use qcut_core::coverage::CoverMode;
use qcut_core::experiment::{rows_to_csv, run_sweep, Algorithm, InstanceParams, SweepConfig, SweepParam};
use qcut_core::generators::{gen_circuit, gen_network, CircuitGenParams, NetworkGenParams};
use qcut_core::oracle::{oracle_dqc, oracle_dqcm, OracleLimits};
use qcut_core::planner::validate_plan;
use qcut_core::{fixtures, Circuit, Error, Network, Plan};

const SEED_VAR: &str = "QCUT_SEED";

#[derive(Parser)]
#[command(name = "qcut", version, about = "Distribute CZ+unary circuits over quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random (or fixture) circuit and network.
    Generate(GenerateArgs),
    /// Plan one instance and print its cost.
    Solve(SolveArgs),
    /// Check a plan file against its instance.
    Validate(ValidateArgs),
    /// Run a parameter sweep and emit CSV.
    Sweep(SweepArgs),
    /// Exact optimum of a tiny instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 20)]
    qubits: usize,
    #[arg(long, default_value_t = 5)]
    nodes: usize,
    #[arg(long, default_value_t = 20)]
    gates_per_qubit: usize,
    #[arg(long, default_value_t = 0.5)]
    binary_fraction: f64,
    #[arg(long, default_value_t = 0.5)]
    edge_probability: f64,
    /// Fixed execution memory per node instead of drawing it.
    #[arg(long)]
    exec_mem: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Emit a built-in instance instead: two-phase or two-phase-broken.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long, default_value = "circuit.json")]
    circuit: PathBuf,
    #[arg(long, default_value = "network.json")]
    network: PathBuf,
}

#[derive(Args)]
struct Instance {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    network: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: Instance,
    /// dqcm, dqcm_greedy, sequence, split or overall.
    #[arg(long, default_value = "overall")]
    algo: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Plan output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long)]
    plan: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with sweep settings; repeat to concatenate several sweeps.
    /// Flags given here override every file.
    #[arg(long)]
    config: Vec<PathBuf>,
    #[arg(long)]
    param: Option<String>,
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    /// Explicit seed list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Seeds 0..n.
    #[arg(long, conflicts_with = "seeds")]
    num_seeds: Option<u64>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    gates_per_qubit: Option<usize>,
    /// Divide qubit and gate counts by this factor.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall-clock runtime per cell (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    plans_dir: Option<PathBuf>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: Instance,
    /// Also report the optimum with up to this many teleportation cuts.
    #[arg(long)]
    max_cuts: Option<usize>,
    #[arg(long)]
    home_only: bool,
    #[arg(long, default_value_t = 14)]
    max_gates: usize,
}

enum Failure {
    Usage(String),
    Infeasible(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Uncoverable(_)
            | Error::InsufficientStorage { .. }
            | Error::IrreparableCapacity { .. }
            | Error::Disconnected => Failure::Infeasible(e.to_string()),
            Error::InvalidParams(_)
            | Error::Io(_)
            | Error::Parse(_)
            | Error::LimitExceeded(_)
            | Error::InvalidNetwork(_)
            | Error::OperandOutOfRange { .. }
            | Error::DuplicateBinaryOperand(_)
            | Error::BadArity(_)
            | Error::InvalidAssignment(_)
            | Error::OddCut(_)
            | Error::CutOutOfRange { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Invariant(e.to_string()),
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_VAR}={v:?} is not an integer"))),
        Err(_) => Ok(SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64)),
    }
}

fn load(instance: &Instance) -> Result<(Circuit, Network), Failure> {
    Ok((Circuit::load(&instance.circuit)?, Network::load(&instance.network)?))
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let (circuit, network) = match args.fixture.as_deref() {
        Some("two-phase") => fixtures::two_phase(),
        Some("two-phase-broken") => fixtures::two_phase_broken(),
        Some(other) => return Err(Failure::Usage(format!("unknown fixture {other:?}"))),
        None => {
            if args.qubits == 0 || args.nodes == 0 {
                return Err(Failure::Usage("--qubits and --nodes must be positive".into()));
            }
            let seed = resolve_seed(args.seed)?;
            println!("seed={seed}");
            let circuit = gen_circuit(&CircuitGenParams {
                num_qubits: args.qubits,
                gates_per_qubit: args.gates_per_qubit,
                binary_fraction: args.binary_fraction,
                seed,
            })?;
            let network = gen_network(&NetworkGenParams {
                num_nodes: args.nodes,
                edge_probability: args.edge_probability,
                exec_override: args.exec_mem,
                num_qubits: args.qubits,
                seed,
                ..NetworkGenParams::default()
            })?;
            (circuit, network)
        }
    };
    circuit.save(&args.circuit)?;
    network.save(&args.network)?;
    Ok(())
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let algo: Algorithm = args.algo.parse()?;
    let seed = match args.seed {
        Some(s) => s,
        None => std::env::var(SEED_VAR).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0),
    };
    let (circuit, network) = load(&args.instance)?;
    network.check_capacity(circuit.num_qubits())?;
    let plan = algo.run(&circuit, &network, seed)?;
    let violations = validate_plan(&plan, &circuit, &network);
    if let Some(v) = violations.first() {
        return Err(Failure::Invariant(format!("planner produced an invalid plan: {v}")));
    }
    if let Some(out) = &args.out {
        plan.save(out)?;
    }
    println!(
        "cost={} migrations={} teleports={}",
        plan.total_cost,
        plan.migrations.len(),
        plan.teleports.len()
    );
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let (circuit, network) = load(&args.instance)?;
    let plan = Plan::load(&args.plan)?;
    let violations = validate_plan(&plan, &circuit, &network);
    if violations.is_empty() {
        println!("ok cost={}", plan.total_cost);
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(Failure::Invariant(format!("{} violation(s)", violations.len())))
}

fn apply_overrides(cfg: &mut SweepConfig, args: &SweepArgs) -> Result<(), Failure> {
    if let Some(p) = &args.param {
        cfg.varying = p.parse::<SweepParam>()?;
        if args.values.is_none() {
            return Err(Failure::Usage("--param needs --values".into()));
        }
    }
    if let Some(v) = &args.values {
        cfg.values = v.clone();
    }
    if let Some(a) = &args.algos {
        cfg.algorithms = a.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    }
    if let Some(s) = &args.seeds {
        cfg.seeds = s.clone();
    }
    if let Some(n) = args.num_seeds {
        cfg.seeds = (0..n).collect();
    }
    let fixed: &mut InstanceParams = &mut cfg.fixed;
    if let Some(q) = args.qubits {
        fixed.num_qubits = q;
    }
    if let Some(n) = args.nodes {
        fixed.num_nodes = n;
    }
    if let Some(g) = args.gates_per_qubit {
        fixed.gates_per_qubit = g;
    }
    if args.scale.is_some() {
        cfg.scale_factor = args.scale;
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    cfg.timing |= args.timing;
    if args.plans_dir.is_some() {
        cfg.plans_dir = args.plans_dir.clone();
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut configs = Vec::new();
    for path in &args.config {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        configs.push(SweepConfig::from_toml(&text)?);
    }
    if configs.is_empty() {
        configs.push(SweepConfig::default());
    }
    let mut rows = Vec::new();
    for cfg in &mut configs {
        apply_overrides(cfg, &args)?;
        rows.extend(run_sweep(cfg)?);
    }
    let csv = rows_to_csv(&rows)?;
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(Error::from)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<(), Failure> {
    let (circuit, network) = load(&args.instance)?;
    let limits = OracleLimits {
        max_gates: args.max_gates,
        ..OracleLimits::default()
    };
    let mode = if args.home_only {
        CoverMode::HomeOnly
    } else {
        CoverMode::General
    };
    let sol = oracle_dqcm(circuit.view(), &network, mode, &limits)?;
    println!("k*={} assignment={:?}", sol.cost, sol.assignment.homes());
    if let Some(k) = args.max_cuts {
        println!("dqc={}", oracle_dqc(&circuit, &network, k, &limits)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Validate(a) => validate(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("infeasible: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant failure: {m}");
            ExitCode::from(4)
        }
    }
}
