use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ofw_core::harness::{self, fit_slope, ExperimentConfig, OutputFormat, ResultRow};
use ofw_core::metrics::TheoremId;
use ofw_core::selftest::run_property_suites;
use ofw_core::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_CERTIFICATE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "ofw", version, about = "Online Frank-Wolfe experiments and regret certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario and write the result table.
    Run {
        config: PathBuf,
        /// CSV destination; overrides the config. `-` writes to stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run every scenario and exit 2 if any certificate or lemma check fails.
    Verify {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run with a different list of horizons and report fitted growth exponents.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Sampled checks of the smoothness, convexity and set assumptions.
    Selftest {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: &Path, threads: Option<usize>) -> Result<ExperimentConfig, ExitCode> {
    let mut cfg = harness::load_config(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })?;
    if let Some(t) = threads {
        if t == 0 {
            eprintln!("error: --threads must be >= 1");
            return Err(ExitCode::from(EXIT_CONFIG));
        }
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

fn runtime(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_RUNTIME)
}

fn report(rows: &[ResultRow]) -> (usize, usize) {
    let (mut failed, mut violated) = (0, 0);
    for row in rows {
        let tag = format!("{}/{} T={}", row.scenario, row.learner, row.horizon);
        if let Some(f) = &row.failure {
            failed += 1;
            eprintln!("FAILED  {tag}: {f}");
            continue;
        }
        for v in &row.violations {
            eprintln!("VIOLATED {tag}: {v}");
        }
        if row.violations.is_empty() {
            let bounds: Vec<String> = TheoremId::ALL
                .iter()
                .filter_map(|&t| row.bound(t).map(|b| format!("{t}<={b:.6e}")))
                .collect();
            eprintln!(
                "ok      {tag}: regret={:.6e} {}",
                row.regret.unwrap_or_default(),
                bounds.join(" ")
            );
        } else {
            violated += 1;
        }
    }
    (failed, violated)
}

fn write_outputs(rows: &[ResultRow], csv: Option<PathBuf>, json: Option<PathBuf>) -> Result<(), Error> {
    match csv {
        Some(p) if p.as_os_str() == "-" => {
            let text = harness::to_csv_string(rows)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io { path: p, source })?;
        }
        Some(p) => harness::emit_results(rows, OutputFormat::Csv, &p)?,
        None => {}
    }
    if let Some(p) = json {
        harness::emit_results(rows, OutputFormat::Json, &p)?;
    }
    Ok(())
}

fn slopes(rows: &[ResultRow]) {
    let mut groups: BTreeMap<(&str, &str), Vec<(usize, f64)>> = BTreeMap::new();
    for row in rows {
        if let Some(r) = row.regret {
            groups
                .entry((row.scenario.as_str(), row.learner.as_str()))
                .or_default()
                .push((row.horizon, r));
        }
    }
    for ((s, l), pts) in groups {
        match fit_slope(&pts) {
            Ok(fit) => eprintln!(
                "slope   {s}/{l}: exponent={:.4} r^2={:.4} ({} points)",
                fit.exponent, fit.r_squared, fit.points_used
            ),
            Err(e) => eprintln!("slope   {s}/{l}: {e}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            csv,
            json,
            threads,
        } => (|| {
            let cfg = load(&config, threads)?;
            let rows = harness::run_experiment(&cfg).map_err(runtime)?;
            let (failed, _) = report(&rows);
            let csv = csv.or(cfg.output.csv.clone()).or_else(|| Some("-".into()));
            write_outputs(&rows, csv, json.or(cfg.output.json.clone())).map_err(runtime)?;
            if failed > 0 {
                return Err(ExitCode::from(EXIT_RUNTIME));
            }
            Ok(())
        })(),
        Command::Verify { config, threads } => (|| {
            let cfg = load(&config, threads)?;
            let rows = harness::run_experiment(&cfg).map_err(runtime)?;
            let (failed, violated) = report(&rows);
            eprintln!("{} rows, {failed} failed, {violated} with violated certificates", rows.len());
            if failed > 0 {
                return Err(ExitCode::from(EXIT_RUNTIME));
            }
            if violated > 0 {
                return Err(ExitCode::from(EXIT_CERTIFICATE));
            }
            Ok(())
        })(),
        Command::Sweep {
            config,
            horizons,
            csv,
            threads,
        } => (|| {
            let mut cfg = load(&config, threads)?;
            let mut sorted = horizons.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.is_empty() || sorted[0] == 0 || sorted.len() != horizons.len() {
                eprintln!("error: --horizons must be distinct positive integers");
                return Err(ExitCode::from(EXIT_CONFIG));
            }
            cfg.horizons = horizons;
            let rows = harness::run_experiment(&cfg).map_err(runtime)?;
            let (failed, _) = report(&rows);
            slopes(&rows);
            write_outputs(&rows, csv.or_else(|| Some("-".into())), None).map_err(runtime)?;
            if failed > 0 {
                return Err(ExitCode::from(EXIT_RUNTIME));
            }
            Ok(())
        })(),
        Command::Selftest { samples, seed } => (|| {
            let reports = run_property_suites(samples, seed).map_err(runtime)?;
            let mut bad = 0;
            for r in &reports {
                let status = if r.passed() { "pass" } else { "FAIL" };
                println!(
                    "{status} {:<28} samples={} failures={} worst_slack={:.3e}",
                    r.name, r.samples, r.failures, r.worst_slack
                );
                bad += usize::from(!r.passed());
            }
            if bad > 0 {
                return Err(ExitCode::from(EXIT_CERTIFICATE));
            }
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
