//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 unreadable, invalid or infeasible
//! scenario, 3 solver or output failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rus::{RusConfig, SolverConfig};
use crate::scenario::{load_scenario, write_scenario, Scenario, SynthesisOptions};
use crate::sim::{self, EpisodeResult, Mode, RunConfig, SweepParam, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "uavd2d", version, about = "UAV relay trajectory and resource allocation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one episode per mode and write the result tables.
    Run(RunArgs),
    /// Sweep UAV power or user count over seeds and write a summary table.
    Sweep(SweepArgs),
    /// Write a synthesized scenario as JSON.
    Synth(SynthArgs),
    /// Check a scenario file and print its digest.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Proposed,
    Uniform,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeArg::Proposed => vec![Mode::Proposed],
            ModeArg::Uniform => vec![Mode::Uniform],
            ModeArg::Both => vec![Mode::Proposed, Mode::Uniform],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    PlDbm,
    Users,
}

/// Scenario synthesis knobs shared by several subcommands.
#[derive(Debug, Clone, Args)]
pub struct SynthKnobs {
    /// Slot length, s.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of slots.
    #[arg(long)]
    pub slots: Option<usize>,
    /// User peak power, dBm.
    #[arg(long)]
    pub pu_dbm: Option<f64>,
    /// UAV peak transmit power, dBm.
    #[arg(long)]
    pub pl_dbm: Option<f64>,
}

impl SynthKnobs {
    fn options(&self) -> SynthesisOptions {
        let mut o = SynthesisOptions::default();
        if let Some(t) = self.tau {
            o.slot_duration = t;
        }
        if let Some(n) = self.slots {
            o.num_slots = n;
        }
        if let Some(p) = self.pu_dbm {
            o.user_power_dbm = p;
        }
        if let Some(p) = self.pl_dbm {
            o.uav_power_dbm = p;
        }
        o
    }
}

/// Solver overrides shared by `run` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct SolverKnobs {
    /// Relative tolerance of the solver loops.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads for candidate evaluation (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl SolverKnobs {
    fn config(&self) -> RunConfig {
        let mut solver = SolverConfig::default();
        if let Some(t) = self.tol {
            solver.tol = t;
        }
        RunConfig {
            rus: RusConfig::default(),
            solver,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["scenario", "synthesize"])))]
pub struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Synthesize N direct pairs, M relay pairs and L UAVs, as `N,M,L`.
    #[arg(long, value_parser = parse_triple)]
    pub synthesize: Option<(usize, usize, usize)>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Output directory (default `results/<run-id>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the solver trace and the waypoint search log.
    #[arg(long)]
    pub dump_solver_trace: bool,
    #[command(flatten)]
    pub synth: SynthKnobs,
    #[command(flatten)]
    pub solver: SolverKnobs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: ParamArg,
    /// Inclusive range `A:B:STEP`, or a comma-separated list.
    #[arg(long, value_parser = parse_values)]
    pub values: ValueList,
    /// Total user counts for a power sweep, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "40")]
    pub users: Vec<usize>,
    /// Number of seeds, counted up from `--seed`.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub uavs: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Output directory (default `results/sweep-<param>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub synth: SynthKnobs,
    #[command(flatten)]
    pub solver: SolverKnobs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Direct pairs, relay pairs and UAVs, as `N,M,L`.
    #[arg(long, value_parser = parse_triple)]
    pub synthesize: (usize, usize, usize),
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Destination file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub synth: SynthKnobs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
}

fn parse_triple(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [n, m, l] = parts.as_slice() else {
        return Err(format!("expected N,M,L, got `{s}`"));
    };
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((num(n)?, num(m)?, num(l)?))
}

/// Parsed `--values` argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueList(pub Vec<f64>);

fn parse_values(s: &str) -> std::result::Result<ValueList, String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(format!("expected A:B:STEP, got `{s}`"));
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) || b < a {
            return Err("range needs A <= B and STEP > 0".into());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        Ok(ValueList((0..count).map(|i| a + step * i as f64).collect()))
    } else {
        s.split(',').map(num).collect::<std::result::Result<_, _>>().map(ValueList)
    }
}

/// Everything needed to reproduce a run, defaults included.
#[derive(Serialize)]
struct ConfigEcho<'a> {
    command: &'a str,
    scenario_source: String,
    scenario_digest: String,
    seed: u64,
    modes: Vec<Mode>,
    synthesis: Option<SynthesisOptions>,
    run: RunConfig,
    dump_solver_trace: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Validation { .. } | Error::Geometry(_) | Error::Io { .. } | Error::Infeasible(_) => 2,
        _ => 3,
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Solver(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn summary(ep: &EpisodeResult) -> String {
    let a = &ep.aggregates;
    format!(
        "{}: mean efficiency {:.6e} bit/J, min-throughput {:.6e} bit/s, energy {:.6e} J/s",
        ep.mode.as_str(),
        a.mean_efficiency,
        a.mean_min_rate,
        a.mean_energy_rate
    )
}

fn run(args: &RunArgs) -> Result<()> {
    let (scenario, source, synthesis): (Scenario, String, Option<SynthesisOptions>) =
        match (&args.scenario, args.synthesize) {
            (Some(path), _) => {
                let mut s = load_scenario(path)?;
                if let Some(t) = args.synth.tau {
                    s.time.slot_duration = t;
                    s.validate()?;
                }
                (s, path.display().to_string(), None)
            }
            (None, Some((n, m, l))) => {
                let opts = args.synth.options();
                (opts.build(n, m, l, args.seed)?, format!("synthesize {n},{m},{l}"), Some(opts))
            }
            (None, None) => unreachable!("clap requires a source"),
        };
    let cfg = args.solver.config();
    let modes = args.mode.modes();
    let episodes = with_jobs(args.solver.jobs, || {
        modes.iter().map(|&m| sim::run_episode(&scenario, m, &cfg)).collect::<Result<Vec<_>>>()
    })?;
    let digest = scenario.digest();
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(format!("{}-s{}", &digest[..12], scenario.seed)));
    sim::write_episodes(&out, &episodes, args.dump_solver_trace)?;
    write_scenario(&scenario, out.join("scenario.json"))?;
    let echo = ConfigEcho {
        command: "run",
        scenario_source: source,
        scenario_digest: digest,
        seed: scenario.seed,
        modes,
        synthesis,
        run: cfg,
        dump_solver_trace: args.dump_solver_trace,
    };
    write_json(&out.join("config-echo.json"), &echo)?;
    for ep in &episodes {
        println!("{}", summary(ep));
    }
    println!("results in {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct SweepEcho<'a> {
    command: &'a str,
    param: SweepParam,
    values: &'a [f64],
    users: &'a [usize],
    seeds: &'a [u64],
    uavs: usize,
    modes: &'a [Mode],
    synthesis: &'a SynthesisOptions,
    run: RunConfig,
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let param = match args.param {
        ParamArg::PlDbm => SweepParam::PlDbm,
        ParamArg::Users => SweepParam::Users,
    };
    let spec = SweepSpec {
        param,
        values: args.values.0.clone(),
        users: args.users.clone(),
        seeds: (0..args.seeds).map(|i| args.seed + i).collect(),
        uavs: args.uavs,
        base: args.synth.options(),
        modes: args.mode.modes(),
    };
    let cfg = args.solver.config();
    let rows = with_jobs(args.solver.jobs, || sim::sweep(&spec, &cfg))?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(format!("sweep-{}", param.as_str())));
    sim::write_sweep(&out.join("sweep.csv"), &rows)?;
    let echo = SweepEcho {
        command: "sweep",
        param,
        values: &spec.values,
        users: &spec.users,
        seeds: &spec.seeds,
        uavs: spec.uavs,
        modes: &spec.modes,
        synthesis: &spec.base,
        run: cfg,
    };
    write_json(&out.join("config-echo.json"), &echo)?;
    for r in &rows {
        println!(
            "{}={} users={} {}: efficiency {:.6e} bit/J, min-throughput {:.6e} bit/s, energy {:.6e} J/s",
            r.param, r.value, r.users, r.mode, r.efficiency_mean, r.min_rate_mean, r.energy_rate_mean
        );
    }
    println!("results in {}", out.display());
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let (n, m, l) = args.synthesize;
    let scenario = args.synth.options().build(n, m, l, args.seed)?;
    match &args.out {
        Some(path) => write_scenario(&scenario, path),
        None => {
            let text = serde_json::to_string_pretty(&scenario)?;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}

fn validate(args: &ValidateArgs) -> Result<()> {
    let s = load_scenario(&args.scenario)?;
    println!(
        "ok: {} direct pairs, {} relay pairs, {} UAVs, {} slots, digest {}",
        s.num_direct(),
        s.num_relay(),
        s.uavs.len(),
        s.num_slots(),
        s.digest()
    );
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth(a),
        Command::Validate(a) => validate(a),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
