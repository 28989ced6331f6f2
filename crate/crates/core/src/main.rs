use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use extrapolate::bounds::{full_lb_with, separation_report, BoundOptions};
use extrapolate::experiment::{
    compare_files, preset, run_experiment, ArraySpec, CompareMetric, ExperimentConfig, FreqGrid, Setup,
};
use extrapolate::pathset_io::{load_pathset, ScenarioSpec, BUNDLED_SCENARIOS};
use extrapolate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "extrapolate",
    version,
    about = "Channel extrapolation bounds and Monte-Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config or a bundled preset.
    Run {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// fig3, fig4, fig5 or fig6.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Full and simplified lower bounds for one scenario.
    Bounds(BoundsArgs),
    /// Path-set file utilities.
    Pathset {
        #[command(subcommand)]
        command: PathsetCommand,
    },
    /// Compare two curve CSVs on the same frequency grid.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "max-ratio-db")]
        metric: CompareMetric,
    },
}

#[derive(Subcommand)]
enum PathsetCommand {
    /// Load a path-set CSV and print a summary.
    Validate { file: PathBuf },
}

#[derive(Args)]
struct BoundsArgs {
    /// Bundled scenario name or path-set CSV file.
    #[arg(long, default_value = "fig2")]
    scenario: String,
    /// `siso` or `ROWSxCOLS`.
    #[arg(long, default_value = "4x8")]
    array: String,
    #[arg(long, default_value_t = 20e6)]
    bandwidth_hz: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    #[arg(long, default_value_t = 20.0)]
    snr_db: f64,
    #[arg(long, default_value_t = 0.0)]
    f_start: f64,
    #[arg(long, default_value_t = 3.0)]
    f_stop: f64,
    #[arg(long, default_value_t = 0.1)]
    f_step: f64,
    /// Seed for path phases when the file has none.
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    #[arg(long)]
    allow_ill_conditioned: bool,
    /// Output CSV (`f_hz,f_norm,lb_full,lb_simplified`); stdout when unset.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the separation report to this CSV.
    #[arg(long)]
    separation: Option<PathBuf>,
}

fn parse_array(s: &str) -> Result<ArraySpec> {
    if s.eq_ignore_ascii_case("siso") {
        return Ok(ArraySpec::Siso);
    }
    let parsed = s
        .split_once(['x', 'X'])
        .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)));
    match parsed {
        Some((rows, cols)) => Ok(ArraySpec::Planar { rows, cols }),
        None => Err(Error::Config(format!("array `{s}` is neither `siso` nor ROWSxCOLS"))),
    }
}

fn scenario(s: &str, seed: u64) -> ScenarioSpec {
    if BUNDLED_SCENARIOS.contains(&s) {
        ScenarioSpec::bundled(s, seed)
    } else {
        ScenarioSpec::file(s, seed)
    }
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let mut config = ExperimentConfig::new(
        "bounds",
        scenario(&args.scenario, args.seed),
        parse_array(&args.array)?,
        args.bandwidth_hz,
    );
    config.beta = args.beta;
    config.snr_db = args.snr_db;
    config.freq_grid = FreqGrid {
        start: args.f_start,
        stop: args.f_stop,
        step: args.f_step,
    };
    let setup = Setup::new(&config)?;
    if let Some(path) = &args.separation {
        separation_report(&setup.paths, &setup.array, &setup.pulse)?.write_csv(path)?;
    }
    let freqs: Vec<f64> = config.freq_grid.points().iter().map(|x| x / config.period()).collect();
    let options = BoundOptions {
        allow_ill_conditioned: args.allow_ill_conditioned,
        ..BoundOptions::default()
    };
    let curve = full_lb_with(
        &setup.paths,
        &setup.array,
        &setup.pulse,
        setup.noise_var,
        &freqs,
        &options,
    )?;
    match &args.out {
        Some(path) => curve.write_csv(path)?,
        None => {
            println!("f_hz,f_norm,lb_full,lb_simplified");
            for (i, f) in curve.freqs.iter().enumerate() {
                println!(
                    "{f},{},{},{}",
                    f * curve.period,
                    curve.lb_full[i],
                    curve.lb_simplified[i]
                );
            }
        }
    }
    eprintln!(
        "condition number {:.3e}, truncated directions {}",
        curve.condition_number, curve.truncated_directions
    );
    Ok(())
}

fn run(config: Option<PathBuf>, preset_name: Option<String>, out: PathBuf) -> Result<()> {
    let configs = match (config, preset_name) {
        (Some(path), _) => vec![ExperimentConfig::load(path)?],
        (None, Some(name)) => preset(&name)?,
        (None, None) => unreachable!("clap requires one of --config/--preset"),
    };
    for config in &configs {
        let output = run_experiment(config)?;
        for path in output.write(&out)? {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, preset, out } => run(config, preset, out),
        Command::Bounds(args) => bounds(args),
        Command::Pathset {
            command: PathsetCommand::Validate { file },
        } => {
            let paths = load_pathset(&ScenarioSpec::file(&file, 0))?;
            println!(
                "{}: {} paths, delays [{:.6e}, {:.6e}] s, gain sum {:.16}",
                file.display(),
                paths.len(),
                paths.min_delay(),
                paths.max_delay(),
                paths.total_gain()
            );
            Ok(())
        }
        Command::Compare { a, b, metric } => {
            println!("{}", compare_files(a, b, metric)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Unresolvable { report, .. } = &e {
                for p in report.pairs.iter().filter(|p| p.residual() > 0.5) {
                    eprintln!(
                        "  paths {} and {}: residual cross term {:.3}",
                        p.first,
                        p.second,
                        p.residual()
                    );
                }
            }
            ExitCode::FAILURE
        }
    }
}
