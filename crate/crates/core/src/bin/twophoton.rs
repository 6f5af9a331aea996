use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twophoton::scenarios::{self, Format, RunOptions, Scenario};
use twophoton::{Error, Result};

#[derive(Parser)]
#[command(name = "twophoton", version, about = "Run one- and two-photon imaging scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in demo by name.
    Run {
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset of csv,pgm,json.
        #[arg(long, value_delimiter = ',')]
        format: Option<Vec<Format>>,
        /// Seed for every sampling measurement.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Parse and validate a scenario file.
    Validate { file: PathBuf },
    /// Print the names of the built-in demos.
    ListDemos,
}

fn load(arg: &str) -> Result<Scenario> {
    let path = PathBuf::from(arg);
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path, source: e })?;
        scenarios::parse_scenario(&text)
    } else {
        scenarios::demo(arg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            format,
            seed,
            jobs,
        } => load(&scenario).and_then(|s| {
            let summary = scenarios::run_scenario(&s, &out, &RunOptions { formats: format, seed, jobs })?;
            println!("{}: {} items written to {}", summary.scenario, summary.files.len(), out.display());
            for (k, v) in &summary.metrics {
                println!("  {k} = {v:.6e}");
            }
            println!("finished in {:.3} s", summary.duration.as_secs_f64());
            Ok(())
        }),
        Command::Validate { file } => {
            let text = std::fs::read_to_string(&file).map_err(|e| Error::Io { path: file.clone(), source: e });
            text.and_then(|t| scenarios::parse_scenario(&t)).map(|s| println!("{}: ok", s.name))
        }
        Command::ListDemos => {
            for n in scenarios::demo_names() {
                println!("{n}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
