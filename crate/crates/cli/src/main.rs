//! `hyperrho`: runs the verification checks and writes a JSON report.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use hyperrho::goepel::cache::{GroupCache, CACHE_DIR_ENV};
use hyperrho::riemann::HyperellipticCurve;

use commands::{Groups, NumericCheck, Tolerances};
use report::{Check, Report, Runtime};

#[derive(Parser, Debug)]
#[command(name = "hyperrho", version, about = "Theta-constant identities on hyperelliptic curves")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit wall-clock and cache fields so reruns are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Do not read or write the Göpel group cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Cache directory for enumerated Göpel groups.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parity and multiplicity census of characteristics.
    Census {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        genus: u8,
    },
    /// Göpel groups, systems and their wholly even structure.
    Goepel {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        genus: u8,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        rank: u8,
    },
    /// Exact fourth-power checks of the ρ-image identities on random rational roots.
    Identities {
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=4))]
        genus: u8,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        trials: u32,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Periods, theta constants and the numeric identity checks for one curve.
    Numeric {
        /// File with one root per line, or a comma-separated list (`p/q` or decimal).
        #[arg(long, allow_hyphen_values = true)]
        roots: String,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        checks: Vec<NumericCheck>,
        /// Requested accuracy in decimal digits (10..=15); checks then use 10^-(digits-4).
        /// Without it numeric checks use 1e-6.
        #[arg(long)]
        digits: Option<u32>,
    },
    /// Everything: census, Göpel structure, identities and numerics on the reference curves.
    Report,
}

fn cache_of(cli: &Cli) -> Option<GroupCache> {
    if cli.no_cache {
        return None;
    }
    Some(match &cli.cache_dir {
        Some(d) => GroupCache::new(d),
        None => GroupCache::from_env(),
    })
}

fn run_report(groups: &mut Groups) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for g in 1..=4 {
        checks.extend(commands::census_checks(g)?);
    }
    for (g, r) in [(3, 3), (3, 2), (4, 4)] {
        checks.extend(commands::goepel_checks(g, r, groups)?);
    }
    checks.extend(commands::identity_checks(3, 3, 2024, groups)?);
    checks.extend(commands::identity_checks(4, 2, 2024, groups)?);
    let tol = Tolerances::double();
    for g in 1..=4 {
        let roots = HyperellipticCurve::reference(g)?.roots().to_vec();
        checks.extend(commands::numeric_checks(&roots, &[NumericCheck::All], &tol, groups)?);
    }
    Ok(checks)
}

fn run(cli: &Cli) -> Result<Report> {
    let start = Instant::now();
    let mut groups = Groups::new(cache_of(cli));
    let (name, config, checks) = match &cli.command {
        Command::Census { genus } => ("census", json!({ "genus": genus }), commands::census_checks(*genus as usize)?),
        Command::Goepel { genus, rank } => (
            "goepel",
            json!({ "genus": genus, "rank": rank, "cache": !cli.no_cache }),
            commands::goepel_checks(*genus as usize, *rank as usize, &mut groups)?,
        ),
        Command::Identities { genus, trials, seed } => (
            "identities",
            json!({ "genus": genus, "trials": trials, "seed": seed }),
            commands::identity_checks(*genus as usize, *trials as usize, *seed, &mut groups)?,
        ),
        Command::Numeric { roots, checks, digits } => {
            let tol = match digits {
                Some(d) => Tolerances::from_digits(*d)?,
                None => Tolerances::double(),
            };
            let values = commands::parse_roots(roots)?;
            let g = HyperellipticCurve::new(values.clone())?.genus();
            let expanded = NumericCheck::expand(checks, g);
            (
                "numeric",
                json!({ "roots": values, "genus": g, "checks": expanded, "digits": digits, "tolerances": tol }),
                commands::numeric_checks(&values, checks, &tol, &mut groups)?,
            )
        }
        Command::Report => {
            if cli.out.is_none() {
                anyhow::bail!("report requires --out PATH");
            }
            ("report", json!({ "tolerances": Tolerances::double(), "identity_seed": 2024 }), run_report(&mut groups)?)
        }
    };
    let mut report = Report::new(name, config, checks);
    if !cli.deterministic {
        report.runtime = Some(Runtime {
            wall_clock_ms: start.elapsed().as_millis() as u64,
            threads: rayon::current_num_threads(),
            cache: groups.log,
        });
    }
    Ok(report)
}

fn emit(cli: &Cli, report: &Report) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    eprintln!("{}: {}/{} checks passed", report.command, report.checks.len() - failed.len(), report.checks.len());
    for name in failed {
        eprintln!("  failed: {name}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|r| emit(&cli, &r).map(|_| r.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
