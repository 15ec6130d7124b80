use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cme_cli::{compare_dirs, dump_generator, run_experiment, CliError, ExperimentConfig, Method, Result};

/// Chemical master equation densities and samplers.
#[derive(Parser, Debug)]
#[command(name = "cme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one method and write density or ensemble, marginals and report.json.
    ///
    /// Ensembles use all cores unless CME_THREADS is set.
    Run {
        /// Built-in model (isomer, schlogl) or path to a model file.
        #[arg(long)]
        model: String,
        /// exact, frozen-sum, lie-product, strang, column-split,
        /// reaction-product, ssa, tau-leap, accelerated, accelerated-split
        /// or symmetric.
        #[arg(long)]
        method: Method,
        /// Step size for splittings and tau methods.
        #[arg(long)]
        tau: Option<f64>,
        /// Final time; defaults to the model's horizon.
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory [default: runs/<model>-<method>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Lie product: refreeze propensities at the running mode each step.
        #[arg(long)]
        refreeze: bool,
        /// Strang: weight the diagonal factor by tau/2 as sometimes printed.
        #[arg(long)]
        paper_strang: bool,
    },
    /// Compare the outputs of two runs; prints a JSON report.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
    /// Print the dense generator of a small box.
    DumpGenerator {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 100)]
        max_size: usize,
        /// Override caps, comma separated, e.g. 2,2.
        #[arg(long, value_delimiter = ',')]
        caps: Option<Vec<u32>>,
    },
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("CME_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("CME_THREADS must be a positive integer, got '{v}'"))),
        _ => Ok(None),
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            model,
            method,
            tau,
            horizon,
            samples,
            seed,
            out,
            refreeze,
            paper_strang,
        } => {
            let out = out.unwrap_or_else(|| {
                let stem = PathBuf::from(&model)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| model.clone());
                PathBuf::from("runs").join(format!("{stem}-{method}"))
            });
            let cfg = ExperimentConfig {
                tau,
                horizon,
                samples,
                seed,
                refreeze,
                paper_strang,
                threads: threads_from_env()?,
                ..ExperimentConfig::new(model, method, out)
            };
            let started = std::time::Instant::now();
            let report = run_experiment(&cfg)?;
            eprintln!("wrote {} in {:.2} s", cfg.out.display(), started.elapsed().as_secs_f64());
            if let Some(r) = &report.reference {
                eprintln!("TV to exact density: {:.4}", r.tv);
            }
        }
        Command::Compare { dir_a, dir_b } => {
            let report = compare_dirs(&dir_a, &dir_b)?;
            emit(&(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
        }
        Command::DumpGenerator { model, max_size, caps } => {
            emit(&dump_generator(&model, caps, max_size)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
