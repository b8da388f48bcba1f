use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpattern::analysis::{detect_collisions, CollisionThresholds, FailureMap};
use qpattern::runner::{
    analyze, build_for, emit_failure_map, ingest_replay, load_device, partition_for, run_to_dir,
    GhzStudyConfig, MapFormat, SuiteConfig,
};
use qpattern::{Error, ExecPolicy, PatternSpec};

#[derive(Parser)]
#[command(name = "qpattern", version, about = "Pattern-based functional tests for quantum memories")]
struct Cli {
    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a suite and write counts, analysis, maps and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Analyze a counts file against a device description.
    Analyze {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        device: PathBuf,
        /// Delay (us) at which failure maps are taken.
        #[arg(long)]
        map_tau: Option<f64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a failure map written by `run`.
    Map {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "text")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List frequency-collision triplets of a device.
    Collisions {
        #[arg(long)]
        device: PathBuf,
    },
    /// GHZ fidelity against chain length over random chains.
    GhzStudy {
        #[arg(long)]
        device: PathBuf,
        /// `lo..hi` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "2..8")]
        lengths: String,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        shots: u64,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
    },
    /// Print the circuit of a pattern in text form.
    Circuit {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        tau: f64,
    },
}

fn parse_lengths(s: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::InvalidField {
        field: "lengths".into(),
        message: format!("expected `lo..hi` or a list, got `{s}`"),
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let policy = if cli.sequential {
        ExecPolicy::Sequential
    } else {
        ExecPolicy::Parallel
    };
    match cli.command {
        Command::Run { config } => {
            let cfg = SuiteConfig::load(&config)?;
            let manifest = run_to_dir(&cfg, policy)?;
            for f in &manifest.files {
                println!("{}  {}", f.sha256, cfg.output_dir.join(&f.path).display());
            }
        }
        Command::Analyze {
            counts,
            device,
            map_tau,
            out,
        } => {
            let (topo, dev, _) = load_device(&device)?;
            let records = ingest_replay(&counts)?;
            let report = analyze(&records, &dev, &topo, map_tau, policy)?;
            emit(out.as_deref(), &(report.to_json() + "\n"))?;
        }
        Command::Map { input, format, out } => {
            let format: MapFormat = format.parse()?;
            let text = std::fs::read_to_string(&input).map_err(|e| Error::Io {
                path: input.clone(),
                source: e,
            })?;
            let map = FailureMap::from_json(&text)?;
            emit(out.as_deref(), &emit_failure_map(&map, format)?)?;
        }
        Command::Collisions { device } => {
            let (topo, dev, _) = load_device(&device)?;
            let report = detect_collisions(&dev, &topo, &CollisionThresholds::default())?;
            print!("{}", report.to_text());
        }
        Command::GhzStudy {
            device,
            lengths,
            samples,
            seed,
            shots,
            tau,
        } => {
            let (topo, dev, _) = load_device(&device)?;
            let cfg = GhzStudyConfig {
                lengths: parse_lengths(&lengths)?,
                samples,
                seed,
                shots,
                tau_us: tau,
            };
            println!("# length samples mean std_dev std_error");
            for s in qpattern::runner::ghz_study(&dev, &topo, &cfg, policy)? {
                println!(
                    "{} {} {:.5} {:.5} {:.5}",
                    s.chain_length, s.samples, s.mean, s.std_dev, s.std_error
                );
            }
        }
        Command::Circuit {
            device,
            pattern,
            tau,
        } => {
            let (topo, dev, _) = load_device(&device)?;
            let spec: PatternSpec = pattern.parse()?;
            let partition = partition_for(&spec, &dev, &topo)?;
            print!("{}", build_for(&spec, &partition, &dev, &topo, tau)?.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_specs() {
        assert_eq!(parse_lengths("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_lengths("3,6").unwrap(), vec![3, 6]);
        assert!(parse_lengths("5..2").is_err());
        assert!(parse_lengths("x").is_err());
    }
}
