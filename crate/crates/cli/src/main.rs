//! `floqlab <experiment> --config <file> [--set key=value ...] --out <dir>`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use floqlab::lab::{self, ExperimentConfig, ExperimentKind};

#[derive(Debug, Parser)]
#[command(name = "floqlab", version, about = "Kicked long-range Ising chain experiments")]
struct Cli {
    /// time_series, alpha_scan, spectral_scan, deff_scan, oracle_compare or reference_values
    #[arg(value_parser = parse_kind)]
    experiment: ExperimentKind,

    /// TOML configuration; built-in defaults are used when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,

    /// Overrides one configuration key, e.g. `--set alpha_list=[0.5,1.5]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory for CSV tables and the manifest.
    #[arg(long, short)]
    out: PathBuf,

    /// Worker threads (0 lets the pool decide).
    #[arg(long, env = "FLOQLAB_THREADS", default_value_t = 0)]
    threads: usize,

    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|e: floqlab::Error| e.to_string())
}

fn configure_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if threads > 1 {
        log::warn!("built without the parallel feature; ignoring {threads} threads");
    }
}

fn resolve(cli: &Cli) -> floqlab::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    for o in &cli.overrides {
        config.apply_override(o)?;
    }
    if let Some(k) = config.experiment {
        if k != cli.experiment {
            log::warn!("configuration names experiment {k}; running {} instead", cli.experiment);
        }
    }
    config.experiment = Some(cli.experiment);
    config.validate(cli.experiment)?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    configure_threads(cli.threads);

    let outcome = resolve(&cli).and_then(|config| {
        if cli.dry_run {
            print!("{}", config.to_toml_string());
            return Ok(None);
        }
        lab::run(cli.experiment, &config, &cli.out).map(Some)
    });
    match outcome {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(summary)) => {
            for flag in &summary.flags {
                log::warn!("{flag}");
            }
            log::info!(
                "wrote {} files; manifest {}",
                summary.files.len(),
                summary.manifest.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("floqlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
