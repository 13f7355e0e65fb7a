use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use nodesum_cli::config::{RuleRequest, RunConfig};
use nodesum_cli::export::{export_all, write};
use nodesum_cli::preset::preset;
use nodesum_cli::run::{build_spectrum, run, RunOptions};
use nodesum_cli::sweep::{sweep, SweepParameter};

#[derive(Parser)]
#[command(name = "nodesum", version, about = "Verify spectral sum rules for 1D bound-state problems")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "NODESUM_OUT_DIR", default_value = ".")]
    out: PathBuf,
    /// Worker threads for rule evaluation.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and print the energy levels.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate every rule in a config or preset and write the report.
    Verify {
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Tolerance applied to rules without their own.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Re-evaluate one rule over increasing grid sizes or truncations.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, value_enum)]
        parameter: SweepParameter,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
    /// Write spectrum, energies, critical points, kernel and partner tables.
    Export {
        #[arg(long)]
        config: PathBuf,
        /// State whose kernel and partner are exported.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

fn verify(configs: Vec<RunConfig>, out: &Path, options: RunOptions) -> Result<bool> {
    let mut ok = true;
    for c in configs {
        let output = run(&c, &options)?;
        for r in &output.report.rules {
            let status = match (r.divergent, r.pass, &r.error) {
                (_, _, Some(e)) => format!("ERROR {e}"),
                (true, _, _) => "DIVERGENT".to_string(),
                (_, true, _) => "PASS".to_string(),
                _ => "FAIL".to_string(),
            };
            println!(
                "{:<12} n={} lhs={:<24} rhs={:<24} {}",
                r.rule_id,
                r.n,
                r.lhs.map_or("-".into(), |v| format!("{v:.15e}")),
                r.rhs.map_or("-".into(), |v| format!("{v:.15e}")),
                status
            );
        }
        write(&out.join(&c.output.report), &output.report.to_json())?;
        write(&out.join(&c.output.trace), &output.trace_csv)?;
        ok &= output.report.success;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { config } => {
            let c = RunConfig::load(&config)?;
            let s = build_spectrum(&c)?;
            for (j, e) in s.energies().iter().enumerate() {
                println!("{:>6} {e:.15e}", j + 1);
            }
            write(&cli.out.join("energies.json"), &nodesum_core::export::energies_json(&s))?;
            Ok(true)
        }
        Command::Verify { config, preset: name, tolerance } => {
            let configs = match (config, name) {
                (Some(path), _) => vec![RunConfig::load(&path)?],
                (None, Some(name)) => preset(&name)?,
                (None, None) => unreachable!("clap requires one of --config and --preset"),
            };
            verify(configs, &cli.out, RunOptions { workers: cli.workers, tolerance })
        }
        Command::Sweep { config, rule, n, parameter, values } => {
            let c = RunConfig::load(&config)?;
            let mut req = RuleRequest::new(rule.parse().map_err(|_| nodesum_cli::ConfigError::UnknownRule(rule.clone()))?, n);
            if let Some(existing) = c.verify.iter().find(|r| r.rule == rule && r.n == n) {
                req = existing.clone();
            }
            let result = sweep(&c, &req, parameter, &values, cli.workers)?;
            for p in &result.points {
                match (p.discrepancy, &p.error) {
                    (_, Some(e)) => println!("{:>8} error: {e}", p.value),
                    (Some(d), _) => println!("{:>8} {d:.6e}", p.value),
                    _ => println!("{:>8} -", p.value),
                }
            }
            match result.slope {
                Some(s) => println!("slope {s:.4}"),
                None => println!("slope unavailable"),
            }
            let text = serde_json::to_string_pretty(&result).context("serializing sweep")? + "\n";
            write(&cli.out.join("sweep.json"), &text)?;
            Ok(result.slope.is_some())
        }
        Command::Export { config, n } => {
            let c = RunConfig::load(&config)?;
            let s = build_spectrum(&c)?;
            for path in export_all(&s, n, &cli.out)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
    }
}
