use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use weakmeas_cli::config::SEED_ENV;
use weakmeas_cli::experiments::load_config;
use weakmeas_cli::{run_experiment, CliError, Experiment, Overrides};

#[derive(Parser, Debug)]
#[command(name = "weakmeas", version = env!("WEAKMEAS_VERSION"), about = "Sequential unsharp qubit measurement experiments")]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Debug)]
struct Flags {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file and the WEAKMEAS_SEED variable).
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; the sidecar goes next to it with a .json extension.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Measurement precision; replaces any `deltas` sweep in the file.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let f = cli.flags;
    let mut config = load_config(f.config.as_deref())?;
    match config.experiment {
        Some(e) if e != cli.experiment => {
            return Err(CliError::Validation(format!(
                "config file is for experiment '{}', not '{}'",
                e.name(),
                cli.experiment.name()
            )))
        }
        _ => config.experiment = Some(cli.experiment),
    }
    let overrides = Overrides {
        seed: f.seed,
        out: f.out,
        trajectories: f.trajectories,
        samples: f.samples,
        delta: f.delta,
        dt: f.dt,
        t_end: f.t_end,
        n_steps: f.n_steps,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let config = config.with_overrides(&overrides, env_seed.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(f.workers)
        .build()
        .map_err(|e| CliError::Validation(format!("--workers: {e}")))?;
    let report = pool.install(|| run_experiment(&config))?;
    eprintln!(
        "wrote {} rows to {} ({})",
        report.rows,
        report.csv_path.display(),
        report.sidecar_path.display()
    );
    eprintln!("summary: {}", report.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
