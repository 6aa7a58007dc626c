mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::{execute, Failure};
use output::{unix_now, OutputDir, RunManifest};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more criteria failed");
            ExitCode::from(1)
        }
        Err(failure) => {
            eprintln!("dimerlab: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let started = unix_now();
    let mut out = OutputDir::create(&cli.out)?;
    let report = execute(&cli.command, &mut out)?;
    let manifest = RunManifest {
        subcommand: cli.command.name(),
        config: serde_json::to_value(&cli.command).map_err(|e| Failure::Io(e.to_string()))?,
        seeds: report.seeds,
        version: env!("CARGO_PKG_VERSION"),
        library_version: dimerlab::VERSION,
        started_unix: started,
        finished_unix: 0,
        threads: rayon::current_num_threads(),
        outputs: Vec::new(),
    };
    let path = out.finish(manifest)?;
    eprintln!("wrote {}", path.display());
    Ok(report.passed)
}
