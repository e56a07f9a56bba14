use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use guided_mh_bench::{emit_table, validate_config, BenchResult, Metric};

#[derive(Parser)]
#[command(
    name = "guided-bench",
    version,
    about = "Run guided Metropolis-Haar experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write traces and aggregates.
    Run {
        config: PathBuf,
        /// Output directory, overriding `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed, overriding `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Only run kernels with this label or registry name (repeatable).
        #[arg(long = "kernel")]
        kernels: Vec<String>,
        #[arg(long)]
        quiet: bool,
    },
    /// Check a config and its kernel/target compatibility without running it.
    Validate { config: PathBuf },
    /// List the registered kernels.
    Kernels,
}

fn run(cli: Cli) -> BenchResult<()> {
    match cli.command {
        Command::Validate { config } => {
            let (c, target) = validate_config(&config)?;
            println!(
                "ok: {} kernel(s) on {} (d = {}), {} replication(s)",
                c.kernels.len(),
                target.name(),
                target.dim(),
                c.replications
            );
        }
        Command::Run {
            config,
            out,
            seed,
            threads,
            kernels,
            quiet,
        } => {
            let mut c = guided_mh_bench::load_config(&config)?;
            if let Some(out) = out {
                c.out = out;
            }
            if let Some(seed) = seed {
                c.seed = seed;
            }
            if threads.is_some() {
                c.threads = threads;
            }
            c.retain_kernels(&kernels);
            let base = config.parent().unwrap_or(std::path::Path::new("."));
            let target = c.validate(base)?;
            let result = guided_mh_bench::run_experiment(&c, &target)?;
            if !quiet {
                for sweep in &result.sweeps {
                    println!("{}", sweep.dir.join("aggregate.csv").display());
                }
                print!("{}", emit_table(&result, Metric::EssPerSec));
            }
        }
        Command::Kernels => {
            let registry = guided_mh::samplers::KernelRegistry::standard();
            for name in registry.names() {
                let entry = registry.get(name)?;
                println!("{name:<10} {}", entry.description);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
