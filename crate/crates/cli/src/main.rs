use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use galpat_cli::{
    cmd_analyze_basis, cmd_compare, cmd_reconstruct, cmd_simulate, cmd_sweep_s, CliError,
    ExperimentConfig, Method,
};

#[derive(Debug, Parser)]
#[command(
    name = "galpat",
    version,
    about = "Galerkin photoacoustic reconstruction experiments"
)]
struct Cli {
    /// JSON configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// galerkin | galerkin-cg | dd-cg | fbp | pixel
    #[arg(long, global = true)]
    method: Option<String>,
    /// Noise level as a fraction, e.g. 0.05.
    #[arg(long, global = true)]
    noise: Option<f64>,
    /// Worker threads; computations currently run on one thread.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate data of the configured phantom.
    Simulate,
    /// Reconstruct from a binary sinogram cache.
    Reconstruct {
        /// Defaults to `<out>/sinogram.bin`.
        #[arg(long)]
        sinogram: Option<PathBuf>,
    },
    /// Galerkin error over shift values at fixed N.
    SweepS {
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
    },
    /// Error table over noise levels and methods.
    Compare {
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
    },
    /// Riesz bounds, saturation error and partition-of-unity defect.
    AnalyzeBasis {
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
    },
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(name) = &cli.method {
        config.method = Method::parse(name)?;
    }
    if let Some(noise) = cli.noise {
        config.noise = noise;
    }
    match &cli.command {
        Some(Command::SweepS { s: Some(s) }) => config.sweep_s = Some(s.clone()),
        Some(Command::AnalyzeBasis { s: Some(s) }) => config.analyze_s = s.clone(),
        Some(Command::Compare { levels, methods }) => {
            if let Some(levels) = levels {
                config.noise_levels = levels.clone();
            }
            if let Some(methods) = methods {
                config.methods = methods
                    .iter()
                    .map(|m| Method::parse(m))
                    .collect::<Result<_, _>>()?;
            }
        }
        _ => {}
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    if cli.threads > 1 {
        log::info!(
            "running on one thread; --threads {} has no effect",
            cli.threads
        );
    }
    let config = effective_config(&cli)?;
    if cli.print_config {
        println!("{}", config.to_json());
        return Ok(());
    }
    config.validate()?;
    let out = config.output.clone();
    match cli.command {
        None => Err(CliError::Config("no subcommand given (see --help)".into())),
        Some(Command::Simulate) => {
            let path = cmd_simulate(&config, &out)?;
            println!("{}", path.display());
            Ok(())
        }
        Some(Command::Reconstruct { sinogram }) => {
            let path = sinogram.unwrap_or_else(|| out.join("sinogram.bin"));
            let report = cmd_reconstruct(&config, &path, &out)?;
            println!("{} relative_l2 {:.6e}", report.method, report.relative_l2);
            Ok(())
        }
        Some(Command::SweepS { .. }) => {
            for row in cmd_sweep_s(&config, &out)? {
                println!("s {:.4}  T {:.4}  e {:.4}", row.s, row.t, row.error);
            }
            Ok(())
        }
        Some(Command::Compare { .. }) => {
            for r in cmd_compare(&config, &out)? {
                println!("{:>6.3}  {:<12} {:.4}", r.noise, r.method, r.relative_l2);
            }
            Ok(())
        }
        Some(Command::AnalyzeBasis { .. }) => {
            for r in cmd_analyze_basis(&config, &out)? {
                println!(
                    "s {:.4}  riesz [{:.4e}, {:.4e}]  saturation {:.4e}  pou {:.4e}",
                    r.s, r.riesz_lower, r.riesz_upper, r.saturation, r.partition_defect
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
