//! Batch experiment runner for the aplab workbench.
//!
//! Subcommands: count3ap, bootstrap, iterate, increment-int, bohr, behrend,
//! verify. All randomness flows from explicit seeds, so a config plus a
//! seed reproduces a run byte for byte. Exit codes are a stable contract:
//! 0 = pass, 1 = falsified assertion or failed search, 2 = usage/format
//! error. `APLAB_THREADS` caps instance-level parallelism.

use aplab::bohr::{bohr_set, find_regular, is_regular};
use aplab::density::{behrend_set, count_3aps};
use aplab::error::Error;
use aplab::grp::Group;
use aplab::io::{read_set, write_records, write_set, ExperimentConfig};
use aplab::verify::{run_config, run_suite, SUITE_NAMES};
use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "aplab",
    about = "Density-increment workbench on finite abelian groups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct RunFlags {
    /// Serialized ExperimentConfig JSON file; other flags are ignored
    #[arg(long)]
    config: Option<PathBuf>,
    /// Group descriptor, v:q:n or z:N
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// bootstrap ambient: ffq | bohr
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    instances: Option<u32>,
    #[arg(long)]
    codim0: Option<u32>,
    #[arg(long)]
    noise: Option<f64>,
    /// ambient Bohr rank for planted instances
    #[arg(long)]
    rank: Option<u32>,
    #[arg(long)]
    max_steps: Option<u32>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    k: Option<u64>,
    /// sift strategy: planted | randomized | exhaustive
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    trials: Option<u32>,
    /// Write the JSON record stream here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Count ordered 3APs of a set file (raw includes d = 0)
    Count3ap { set_file: PathBuf },
    /// Run planted bootstrap instances (subspace or Bohr ambient)
    Bootstrap(RunFlags),
    /// Iterate the subspace increment dichotomy on a planted instance
    Iterate(RunFlags),
    /// Single integer-case increment step on a planted instance
    IncrementInt(RunFlags),
    /// Construct a Bohr set and report size and regularity
    Bohr {
        #[arg(long)]
        group: String,
        /// Comma-separated frequency list
        #[arg(long, value_delimiter = ',')]
        freqs: Vec<u32>,
        #[arg(long)]
        width: f64,
        /// Scan [ρ/2, ρ] for a verified-regular width first
        #[arg(long)]
        find_regular: bool,
    },
    /// Emit a progression-free subset of {1,…,N} as a set file over z:(2N+1)
    Behrend {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite (or `all`)
    Verify {
        suite: String,
        #[arg(long, default_value_t = 2026)]
        seed: u64,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::AssertionFailed { .. }
        | Error::SiftFailure { .. }
        | Error::BootstrapFailure(_)
        | Error::RegularSearchFailure { .. }
        | Error::GenerationFailure { .. } => 1,
        _ => 2,
    }
}

fn flags_to_config(cmd: &str, flags: &RunFlags) -> Result<ExperimentConfig, Error> {
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)?;
        return ExperimentConfig::from_json(&text);
    }
    let group = flags
        .group
        .clone()
        .ok_or_else(|| Error::Parse("--group (or --config) is required".into()))?;
    let eps = flags
        .eps
        .ok_or_else(|| Error::Parse("--eps (or --config) is required".into()))?;
    Ok(ExperimentConfig {
        cmd: cmd.into(),
        group,
        eps,
        seed: flags.seed,
        mode: flags.mode.clone(),
        instances: flags.instances,
        codim0: flags.codim0,
        noise: flags.noise,
        rank: flags.rank,
        max_steps: flags.max_steps,
        p: flags.p,
        k: flags.k,
        strategy: flags.strategy.clone(),
        trials: flags.trials,
    })
}

fn emit_records(
    records: &[aplab::increment::TraceStep],
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut f = File::create(path)?;
            write_records(&mut f, records)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_records(&mut lock, records)?;
        }
    }
    Ok(())
}

fn run_batch(cmd: &str, flags: &RunFlags) -> Result<(), Error> {
    let cfg = flags_to_config(cmd, flags)?;
    let records = run_config(&cfg)?;
    emit_records(&records, &flags.out)?;
    eprintln!(
        "{}: {} records, all hard assertions passed",
        cfg.cmd,
        records.len()
    );
    Ok(())
}

fn real_main() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Count3ap { set_file } => {
            let set = read_set(BufReader::new(File::open(&set_file)?))?;
            let report = count_3aps(&set)?;
            println!(
                "group {} |A| {} {report}",
                set.group().descriptor(),
                set.len()
            );
            Ok(())
        }
        Command::Bootstrap(flags) => run_batch("bootstrap", &flags),
        Command::Iterate(flags) => run_batch("iterate", &flags),
        Command::IncrementInt(flags) => run_batch("increment-int", &flags),
        Command::Bohr {
            group,
            freqs,
            width,
            find_regular: scan,
        } => {
            let g = Group::parse(&group)?;
            let mut b = bohr_set(g, &freqs, width)?;
            if scan {
                b = find_regular(&b)?;
            }
            let rep = is_regular(&b);
            println!(
                "{} rank {} |B| {} mu {:.6} regular {} worst_ratio {:.4}",
                b.descriptor(),
                b.rank(),
                b.len(),
                b.mu(),
                rep.regular,
                rep.worst_ratio
            );
            Ok(())
        }
        Command::Behrend { n, out } => {
            let s = behrend_set(n)?;
            match out {
                Some(path) => {
                    let mut f = File::create(path)?;
                    write_set(&mut f, &s)?;
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    write_set(&mut lock, &s)?;
                }
            }
            eprintln!("behrend N={n}: {} elements, 3AP-free", s.len());
            Ok(())
        }
        Command::Verify { suite, seed } => {
            let reports = run_suite(&suite, seed)?;
            let mut all_pass = true;
            for rep in &reports {
                print!("{}", rep.render());
                all_pass &= rep.passed();
                std::io::stdout().flush().ok();
            }
            if all_pass {
                eprintln!(
                    "verify {suite}: PASS (available suites: {})",
                    SUITE_NAMES.join(", ")
                );
                Ok(())
            } else {
                Err(Error::AssertionFailed {
                    name: "verification suite",
                    value: 0.0,
                    bound: 1.0,
                })
            }
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
