use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use hsle::harness::{self, ExperimentSpec, Tolerances, EXPERIMENTS};
use hsle::interfaces::{embed_interface, trace_fk_exploration, trace_spin_interface, TurnRule};
use hsle::lattice::{
    beta_critical, p_critical, write_pbm, write_snapshot, FkBoundaryCondition, FkSampler, IsingSampler, LatticeQuad,
    Snapshot, SpinBoundaryCondition, SpinLabel,
};
use hsle::loewner::{
    extract_driving, extract_driving_coarse, forward_trace_strided, read_curve_csv, read_driving_csv, write_curve_csv,
    write_driving_csv,
};
use hsle::resampler::{run_chain, PairState, ResampleParams, Side};
use hsle::rng::RngSeed;
use hsle::sde::{simulate_hsle, simulate_sle, HsleParams, RunManifest, StepControl, StepRule};
use hsle::{Error, Result};

/// Hypergeometric SLE and critical lattice interfaces.
///
/// Options can also come from a JSON object given with --config; its keys are
/// option names of the chosen subcommand and flags on the command line win.
/// HSLE_THREADS sets the number of worker threads.
#[derive(Parser)]
#[command(version, args_override_self = true)]
struct Cli {
    /// JSON file with option values for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the driving function of SLE_κ.
    SimSle(SimSle),
    /// Simulate hypergeometric SLE_κ(ρ) with marked points x < y.
    SimHsle(SimHsle),
    /// Trace the curve of a driving function (CSV t,w → CSV x,y).
    Trace(Trace),
    /// Recover the driving function of a curve (CSV x,y → CSV t,w).
    Unzip(Unzip),
    /// Sample critical Ising on a rectangle and write its interface.
    Ising(Ising),
    /// Sample critical FK-Ising with Dobrushin boundary and write the exploration path.
    Fk(Fk),
    /// Run the Gibbs chain on pairs of Ising interfaces.
    PairChain(PairChain),
    /// Run a registered experiment; `list` prints the registry.
    Experiment(Experiment),
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl Output {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }
}

#[derive(Args)]
struct SimSle {
    #[arg(long, default_value_t = 3.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Fixed,
    Capped,
    ScaleFree,
}

#[derive(Args)]
struct SimHsle {
    #[arg(long, default_value_t = 3.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    x: f64,
    #[arg(long, default_value_t = 2.0)]
    y: f64,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = Rule::Capped)]
    step_rule: Rule,
    /// Keep integrating after x is swallowed.
    #[arg(long)]
    continue_after_tx: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct Trace {
    /// Driving function CSV.
    input: PathBuf,
    /// Keep every stride-th vertex.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct Unzip {
    /// Curve CSV.
    input: PathBuf,
    /// Stop at this capacity.
    #[arg(long)]
    horizon: Option<f64>,
    /// Skip vertices closer than this to ℝ.
    #[arg(long, default_value_t = 0.0)]
    min_height: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpinBc {
    Dobrushin,
    Alternating,
}

#[derive(Args)]
struct Lattice {
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    /// Swendsen–Wang sweeps.
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Binary snapshot of the final configuration.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Also embed the interface in ℍ and write the curve here.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct Ising {
    #[command(flatten)]
    lattice: Lattice,
    #[arg(long, value_enum, default_value_t = SpinBc::Dobrushin)]
    bc: SpinBc,
    /// Inverse temperature; critical by default.
    #[arg(long)]
    beta: Option<f64>,
    /// Portable bitmap of the final configuration.
    #[arg(long)]
    pbm: Option<PathBuf>,
}

#[derive(Args)]
struct Fk {
    #[command(flatten)]
    lattice: Lattice,
}

#[derive(Args)]
struct PairChain {
    #[arg(long, default_value_t = 32)]
    size: usize,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Start from the pair squeezed against the left or right side.
    #[arg(long, value_enum, default_value_t = Start::Left)]
    start: Start,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Start {
    Left,
    Right,
}

#[derive(Args)]
struct Experiment {
    /// Experiment id, or `list`.
    id: String,
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parameters as a JSON object.
    #[arg(long)]
    params: Option<String>,
    #[arg(long, default_value = "out")]
    out_root: PathBuf,
    #[arg(long)]
    tag: Option<String>,
    /// Tolerance profile overriding the bundled one, entry by entry.
    #[arg(long)]
    tolerances: Option<PathBuf>,
}

/// Turns the --config object into `--key value` pairs placed right after the
/// subcommand name, so that later command-line flags override them.
fn expand_config(mut argv: Vec<String>) -> Result<Vec<String>> {
    let pos = argv.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else { return Ok(argv) };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv.get(pos + 1).cloned().ok_or_else(|| Error::Domain("--config needs a path".into()))?,
    };
    let cfg: Value = serde_json::from_reader(BufReader::new(File::open(&path)?))?;
    let Value::Object(map) = cfg else {
        return Err(Error::Domain(format!("{path}: config must be a JSON object")));
    };
    let names = ["sim-sle", "sim-hsle", "trace", "unzip", "ising", "fk", "pair-chain", "experiment"];
    let at = argv
        .iter()
        .position(|a| names.contains(&a.as_str()))
        .ok_or_else(|| Error::Domain("--config needs a subcommand".into()))?;
    let mut extra = Vec::new();
    for (k, v) in map {
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Bool(true) => extra.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => extra.extend([flag, s]),
            other => extra.extend([flag, other.to_string()]),
        }
    }
    argv.splice(at + 1..at + 1, extra);
    Ok(argv)
}

fn spin_curve(q: &LatticeQuad, path: &hsle::interfaces::InterfacePath, out: &Option<PathBuf>) -> Result<()> {
    if let Some(p) = out {
        write_curve_csv(&embed_interface(path, q)?, BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::SimSle(a) => {
            let d = simulate_sle(a.kappa, a.horizon, a.dt, RngSeed::new(a.seed, 0))?;
            write_driving_csv(&d, a.out.writer()?)
        }
        Cmd::SimHsle(a) => {
            let started = Instant::now();
            let rule = match a.step_rule {
                Rule::Fixed => StepRule::Fixed,
                Rule::Capped => StepRule::Capped,
                Rule::ScaleFree => StepRule::ScaleFree,
            };
            let mut p = HsleParams::new(a.kappa, a.rho, a.x, a.y, a.horizon, a.dt);
            p.step = StepControl::new(a.dt, rule);
            p.continue_after_tx = a.continue_after_tx;
            let seed = RngSeed::new(a.seed, 0);
            let run = simulate_hsle(&p, seed)?;
            write_driving_csv(&run.path, a.out.writer()?)?;
            if let Some(m) = a.manifest {
                let mut man = RunManifest::new("hsle", &p, seed, run.stop, run.path.len(), started)?;
                man.flagged = run.flagged();
                serde_json::to_writer_pretty(File::create(m)?, &man)?;
            }
            Ok(())
        }
        Cmd::Trace(a) => {
            let d = read_driving_csv(BufReader::new(File::open(&a.input)?))?;
            write_curve_csv(&forward_trace_strided(&d, a.stride)?, a.out.writer()?)
        }
        Cmd::Unzip(a) => {
            let c = read_curve_csv(BufReader::new(File::open(&a.input)?))?;
            let d = match (a.horizon, a.min_height) {
                (None, h) if h == 0.0 => extract_driving(&c)?,
                (horizon, h) => extract_driving_coarse(&c, horizon.unwrap_or(f64::INFINITY), h)?,
            };
            write_driving_csv(&d, a.out.writer()?)
        }
        Cmd::Ising(a) => {
            let l = &a.lattice;
            let seed = RngSeed::new(l.seed, 0);
            let (q, bc) = match a.bc {
                SpinBc::Dobrushin => (LatticeQuad::dobrushin(l.width, l.height)?, SpinBoundaryCondition::dobrushin()),
                SpinBc::Alternating => (
                    LatticeQuad::rectangle(l.width, l.height)?,
                    SpinBoundaryCondition::alternating(SpinLabel::Plus, SpinLabel::Plus),
                ),
            };
            let mut s = IsingSampler::new(&q, &bc, a.beta.unwrap_or_else(beta_critical), seed)?;
            s.run_cluster(l.sweeps);
            let cfg = s.config();
            if let Some(p) = &l.snapshot {
                write_snapshot(BufWriter::new(File::create(p)?), &Snapshot::Spin(cfg.clone()))?;
            }
            if let Some(p) = &a.pbm {
                write_pbm(BufWriter::new(File::create(p)?), &cfg)?;
            }
            let path = trace_spin_interface(&q, &cfg, 0, TurnRule::Left)?;
            spin_curve(&q, &path, &l.curve)?;
            path.write_csv(l.out.writer()?)
        }
        Cmd::Fk(a) => {
            let l = &a.lattice;
            let q = LatticeQuad::dobrushin(l.width, l.height)?;
            let bc = FkBoundaryCondition::dobrushin();
            let mut s = FkSampler::new(&q, &bc, p_critical(2.0), 2.0, RngSeed::new(l.seed, 0))?;
            for _ in 0..l.sweeps {
                s.cluster_sweep()?;
            }
            let cfg = s.config();
            if let Some(p) = &l.snapshot {
                write_snapshot(BufWriter::new(File::create(p)?), &Snapshot::Bond(cfg.clone()))?;
            }
            let path = trace_fk_exploration(&q, &cfg, &bc)?;
            spin_curve(&q, &path, &l.curve)?;
            path.write_csv(l.out.writer()?)
        }
        Cmd::PairChain(a) => {
            let q = LatticeQuad::rectangle(a.size, a.size)?;
            let bc = SpinBoundaryCondition::alternating(SpinLabel::Plus, SpinLabel::Plus);
            let side = match a.start {
                Start::Left => Side::Left,
                Start::Right => Side::Right,
            };
            let params = ResampleParams { epsilon: a.epsilon, ..ResampleParams::default() };
            let init = PairState::extreme(&q, &bc, side)?;
            let out = run_chain(&init, a.steps, a.thin, &params, RngSeed::new(a.seed, 0))?;
            eprintln!("mean attempts per step: {:.2}", out.mean_attempts());
            out.write_log(a.out.writer()?)
        }
        Cmd::Experiment(a) => {
            if a.id == "list" {
                for (id, what) in EXPERIMENTS {
                    println!("{id:22} {what}");
                }
                return Ok(());
            }
            let spec = ExperimentSpec {
                id: a.id,
                params: a.params.as_deref().map(serde_json::from_str).transpose()?.unwrap_or(Value::Null),
                ensemble: a.ensemble,
                seed: a.seed,
                out_root: Some(a.out_root),
                tag: a.tag,
                tolerances: a.tolerances.as_deref().map(Tolerances::load).transpose()?,
            };
            let report = harness::run(&spec)?;
            for c in &report.checks {
                println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.describe());
            }
            for n in &report.notes {
                println!("note: {n}");
            }
            println!("{} {} ({:.1} s)", report.id, if report.pass { "PASS" } else { "FAIL" }, report.runtime_secs);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(Cli::parse_from(argv)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
