use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use readyrules::ensemble::{
    run_ensemble_with, run_trajectory, write_histogram_csv, write_outcomes_csv, write_summary_json, write_trace_csv,
    EnsembleOptions, EnsembleStats, TrajectoryOptions,
};
use readyrules::pulse::{dissolve, drift_history, write_pulse_csv, PulseSetup, ResolutionKernel};
use readyrules::rules::RuleMode;
use readyrules::scenarios::{self, Scenario, ScenarioParams};
use readyrules::{verify, Error};

/// Stochastic state-reduction simulator with ready-state selection rules.
#[derive(Parser)]
#[command(name = "readyrules", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble of trajectories and write statistics.
    Run(RunArgs),
    /// Run the acceptance suite.
    Verify,
    /// List the built-in scenarios.
    ListScenarios,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Standard,
    Objective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Stats,
    Histogram,
    Trace,
    Pulse,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["scenario", "file"])))]
struct RunArgs {
    /// Built-in scenario name.
    #[arg(long)]
    scenario: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "standard")]
    mode: Mode,
    /// Number of trajectories.
    #[arg(short = 'N', default_value_t = 1000)]
    n: usize,
    /// Seed of the first trajectory; trajectory k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed integration step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, env = "READYRULES_OUT", default_value = "out")]
    out: PathBuf,
    /// Never apply the ready-state transition mask.
    #[arg(long)]
    no_rule4: bool,
    /// Tune a built-in's capture window to leave this square modulus in the capture branch.
    #[arg(long)]
    capture_modulus: Option<f64>,
    /// Check the single-conscious-state invariant after every step.
    #[arg(long)]
    audit: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "stats,histogram")]
    emit: Vec<Emit>,
    /// Drift rate per step for the pulse series.
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
}

fn load_scenario(args: &RunArgs) -> Result<Scenario, Error> {
    if let Some(path) = &args.file {
        return scenarios::load(path);
    }
    let name = args.scenario.as_deref().unwrap_or_default();
    let mut params = ScenarioParams::default();
    if let Some(p) = args.capture_modulus {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("capture modulus must lie in [0, 1], got {p}")));
        }
        params = params.with_capture_modulus(p);
    }
    scenarios::build(name, &params)
}

fn prepare_out(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
    let probe = dir.join(".write-test");
    fs::write(&probe, b"")
        .map_err(|e| Error::Config(format!("output directory {} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

fn print_stats(stats: &EnsembleStats) {
    println!(
        "scenario {} ({} mode, rule 4 {}), N = {}, seeds {}..{}",
        stats.scenario,
        stats.mode.variant,
        if stats.mode.rule4_enabled { "on" } else { "off" },
        stats.n,
        stats.base_seed,
        stats.base_seed + stats.n
    );
    for (outcome, o) in &stats.outcomes {
        println!("  {:>8}  {:.5}  {outcome}", o.count, o.frequency);
    }
    match stats.mean_hit_time {
        Some(m) => println!("hits {} ({:.5}), mean t_sc {m:.6} s", stats.hits, stats.hit_fraction()),
        None => println!("hits 0"),
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    let scenario = load_scenario(&args)?;
    let mut mode = match args.mode {
        Mode::Standard => RuleMode::standard(),
        Mode::Objective => RuleMode::objective(),
    };
    if args.no_rule4 {
        mode = mode.without_rule4();
    }
    let trajectory = TrajectoryOptions { dt: args.dt, audit: args.audit, ..TrajectoryOptions::default() };
    let opts = EnsembleOptions { trajectory, ..EnsembleOptions::default() };
    let stats = run_ensemble_with(&scenario, mode, args.n, args.seed, &opts)?;
    prepare_out(&args.out)?;
    let out = &args.out;
    if args.emit.contains(&Emit::Stats) {
        write_summary_json(&stats, out.join("summary.json"))?;
        write_outcomes_csv(&stats, out.join("outcomes.csv"))?;
    }
    if args.emit.contains(&Emit::Histogram) {
        write_histogram_csv(&stats, out.join("histogram.csv"))?;
    }
    if args.emit.contains(&Emit::Trace) {
        let record =
            run_trajectory(&scenario, mode, args.seed, &TrajectoryOptions { record_trace: true, ..trajectory })?;
        write_trace_csv(&record, out.join("trace.csv"))?;
    }
    if args.emit.contains(&Emit::Pulse) {
        let setup = PulseSetup::default();
        let pulse = dissolve(1.0, &ResolutionKernel::gaussian(setup.width)?, setup.center, setup.bins)?;
        let history = drift_history(&pulse, args.eta, setup.steps, 10)?;
        write_pulse_csv(&history, fs::File::create(out.join("pulse.csv"))?)?;
    }
    print_stats(&stats);
    if stats.forbidden > 0 {
        eprintln!("**********************************************************************");
        eprintln!("WARNING: {} of {} trajectories were reduced onto a component fed by a", stats.forbidden, stats.n);
        eprintln!("transition between components sharing a ready state. Rule 4 forbids this.");
        eprintln!("**********************************************************************");
    }
    Ok(())
}

fn exit_code(e: &Error) -> ExitCode {
    if e.is_numerical() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::ListScenarios => {
            for name in scenarios::catalog_names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Verify => {
            let results = verify::run_all();
            for r in &results {
                println!("{r}");
            }
            let passed = results.iter().filter(|r| r.pass).count();
            println!("{passed}/{} criteria passed", results.len());
            return if passed == results.len() { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
