//! `fordtree`: simulation, exact distributions and limit laws of cherry and
//! pitchfork counts under the Ford alpha-model.
//!
//! Primary output (CSV or JSON) goes to stdout or `--out`; diagnostics go to
//! stderr. Exit codes: 0 success, 1 usage error, 2 internal validation
//! failure. Identical flags and seed produce byte-identical primary output.

mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ford_core::exact::{joint_pmf, limit_curve_extrema, moment_trace};
use ford_core::montecarlo::{run_campaign, Engine, TrialConfig};
use ford_core::urn::limit_summary;
use ford_core::{Alpha, Error};

use output::{write_text, CsvTable};

#[derive(Parser)]
#[command(
    name = "fordtree",
    version,
    about = "Cherry and pitchfork statistics of Ford alpha-model trees",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    s.parse::<Alpha>().map_err(|e| e.to_string())
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse::<Engine>().map_err(|e| e.to_string())
}

/// `lo:hi:step`, endpoints inclusive.
#[derive(Clone, Copy)]
struct Grid {
    lo: f64,
    hi: f64,
    step: f64,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step, got {s:?}"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let g = Grid {
        lo: nums[0],
        hi: nums[1],
        step: nums[2],
    };
    if !(0.0..=1.0).contains(&g.lo) || !(0.0..=1.0).contains(&g.hi) || g.lo > g.hi {
        return Err("grid must satisfy 0 <= lo <= hi <= 1".into());
    }
    if g.step <= 0.0 {
        return Err("grid step must be positive".into());
    }
    Ok(g)
}

impl Grid {
    fn alphas(self) -> Vec<Alpha> {
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let v = self.lo + i as f64 * self.step;
            if v > self.hi + 1e-9 * self.step {
                break;
            }
            out.push(Alpha::new(v.clamp(0.0, 1.0).min(self.hi)).expect("grid inside [0,1]"));
            i += 1;
        }
        out
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo campaign: occurrence counts of (pitchforks, cherries).
    Simulate {
        /// Leaf count per tree.
        #[arg(long)]
        n: u64,
        /// Model parameter (decimal or p/q).
        #[arg(long, value_parser = parse_alpha)]
        alpha: Alpha,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Sampler: tree growth or the coupled urn.
        #[arg(long, default_value = "tree", value_parser = parse_engine)]
        engine: Engine,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write primary output to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact joint pmf of (A_n, C_n).
    Pmf {
        #[arg(long)]
        n: u64,
        #[arg(long, value_parser = parse_alpha)]
        alpha: Alpha,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact moments of (A_n, C_n): CSV traces n = 3..n, JSON at n.
    Moments {
        #[arg(long)]
        n: u64,
        #[arg(long, value_parser = parse_alpha)]
        alpha: Alpha,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Limiting proportions, covariances and polynomials at one alpha.
    Limits {
        #[arg(long, value_parser = parse_alpha)]
        alpha: Alpha,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Limit-curve data (tau2, sigma2, cov, nu, mu) over an alpha grid.
    Sweep {
        #[arg(long, default_value = "0:1:0.05", value_parser = parse_grid)]
        grid: Grid,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-checks every computational route; exits 2 on failure.
    Validate {
        #[arg(long, default_value_t = 200)]
        n: u64,
        #[arg(long, value_parser = parse_alpha)]
        alpha: Alpha,
        #[arg(long, default_value_t = 50_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stationary points of the limiting variance/covariance curves.
    Extrema {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Io(std::io::Error),
    Validation(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::EigenResidual { .. }
            | Error::CovarianceMismatch(_)
            | Error::NormalizationDrift(_)
            | Error::NoSignChange { .. } => CliError::Validation(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and are not errors.
            let is_usage = e.use_stderr();
            let _ = e.print();
            return if is_usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("validation failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            n,
            alpha,
            trials,
            seed,
            engine,
            format,
            out,
        } => {
            let cfg = TrialConfig {
                n,
                alpha,
                trials,
                seed,
                engine,
            };
            let summary = run_campaign(&cfg)?;
            let text = match format {
                Format::Json => to_json(&summary)?,
                Format::Csv => {
                    let mut table = CsvTable::new(&["n", "alpha", "engine", "a", "c", "count"]);
                    let engine_name = match engine {
                        Engine::Tree => "tree",
                        Engine::Urn => "urn",
                    };
                    for (&(a, c), &count) in &summary.counts {
                        table.row(&[
                            n.to_string(),
                            alpha.to_string(),
                            engine_name.to_string(),
                            a.to_string(),
                            c.to_string(),
                            count.to_string(),
                        ]);
                    }
                    table.finish()
                }
            };
            Ok(write_text(&out, &text)?)
        }
        Command::Pmf {
            n,
            alpha,
            format,
            out,
        } => {
            if n < 3 {
                return Err(CliError::Usage("pmf requires n >= 3".into()));
            }
            let pmf = joint_pmf(n, alpha)?;
            let text = match format {
                Format::Json => {
                    #[derive(serde::Serialize)]
                    struct Cell {
                        a: u64,
                        c: u64,
                        prob: f64,
                    }
                    #[derive(serde::Serialize)]
                    struct PmfOut {
                        n: u64,
                        alpha: Alpha,
                        cells: Vec<Cell>,
                    }
                    let cells = pmf
                        .cells()
                        .filter(|&(_, _, p)| p > 0.0)
                        .map(|(a, c, prob)| Cell { a, c, prob })
                        .collect();
                    to_json(&PmfOut { n, alpha, cells })?
                }
                Format::Csv => {
                    let mut table = CsvTable::new(&["n", "alpha", "a", "c", "prob"]);
                    for (a, c, p) in pmf.cells().filter(|&(_, _, p)| p > 0.0) {
                        table.row(&[
                            n.to_string(),
                            alpha.to_string(),
                            a.to_string(),
                            c.to_string(),
                            p.to_string(),
                        ]);
                    }
                    table.finish()
                }
            };
            Ok(write_text(&out, &text)?)
        }
        Command::Moments {
            n,
            alpha,
            format,
            out,
        } => {
            if n < 3 {
                return Err(CliError::Usage("moments require n >= 3".into()));
            }
            let trace = moment_trace(n, alpha);
            let text = match format {
                // Single-query JSON: the requested n only.
                Format::Json => to_json(trace.last().expect("nonempty trace"))?,
                Format::Csv => {
                    let mut table = CsvTable::new(&[
                        "n", "alpha", "ec", "ea", "ec2", "eac", "ea2", "var_c", "cov_ac", "var_a",
                        "corr",
                    ]);
                    for t in &trace {
                        table.row(&[
                            t.n.to_string(),
                            alpha.to_string(),
                            t.ec.to_string(),
                            t.ea.to_string(),
                            t.ec2.to_string(),
                            t.eac.to_string(),
                            t.ea2.to_string(),
                            t.var_c.to_string(),
                            t.cov_ac.to_string(),
                            t.var_a.to_string(),
                            t.corr.map(|r| r.to_string()).unwrap_or_default(),
                        ]);
                    }
                    table.finish()
                }
            };
            Ok(write_text(&out, &text)?)
        }
        Command::Limits { alpha, format, out } => {
            let summary = limit_summary(alpha)?;
            let text = match format {
                Format::Json => to_json(&summary)?,
                Format::Csv => {
                    let mut table = sweep_table();
                    sweep_row(&mut table, &summary);
                    table.finish()
                }
            };
            Ok(write_text(&out, &text)?)
        }
        Command::Sweep { grid, format, out } => {
            let mut summaries = Vec::new();
            for alpha in grid.alphas() {
                summaries.push(limit_summary(alpha)?);
            }
            let text = match format {
                Format::Json => {
                    #[derive(serde::Serialize)]
                    struct Row {
                        alpha: f64,
                        tau2: f64,
                        sigma2: f64,
                        cov: f64,
                        nu: f64,
                        mu: f64,
                    }
                    let rows: Vec<Row> = summaries
                        .iter()
                        .map(|s| Row {
                            alpha: s.alpha.value(),
                            tau2: s.s[0][0],
                            sigma2: s.s[1][1],
                            cov: s.s[0][1],
                            nu: s.nu,
                            mu: s.mu,
                        })
                        .collect();
                    to_json(&rows)?
                }
                Format::Csv => {
                    let mut table = sweep_table();
                    for s in &summaries {
                        sweep_row(&mut table, s);
                    }
                    table.finish()
                }
            };
            Ok(write_text(&out, &text)?)
        }
        Command::Validate {
            n,
            alpha,
            trials,
            seed,
            format,
            out,
        } => {
            if n < 3 {
                return Err(CliError::Usage("validation requires n >= 3".into()));
            }
            let report = validate::run_validation(n, alpha, trials, seed);
            let text = match format {
                Format::Json => to_json(&report)?,
                Format::Csv => {
                    let mut table = CsvTable::new(&["check", "passed", "detail"]);
                    for c in &report.checks {
                        table.row(&[c.name.clone(), c.passed.to_string(), c.detail.clone()]);
                    }
                    table.finish()
                }
            };
            write_text(&out, &text)?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                Err(CliError::Validation(format!(
                    "checks failed: {}",
                    failed.join(", ")
                )))
            }
        }
        Command::Extrema { format, out } => {
            let extrema = limit_curve_extrema()?;
            let text = match format {
                Format::Json => to_json(&extrema)?,
                Format::Csv => {
                    let mut table = CsvTable::new(&["a0", "a1", "sigma2_max", "cov_max"]);
                    table.row(&[
                        extrema.a0.to_string(),
                        extrema.a1.to_string(),
                        extrema.sigma2_max.to_string(),
                        extrema.cov_max.to_string(),
                    ]);
                    table.finish()
                }
            };
            Ok(write_text(&out, &text)?)
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string(value)
        .map_err(|e| CliError::Validation(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn sweep_table() -> CsvTable {
    CsvTable::new(&["alpha", "tau2", "sigma2", "cov", "nu", "mu"])
}

fn sweep_row(table: &mut CsvTable, s: &ford_core::LimitSummary) {
    table.row(&[
        s.alpha.to_string(),
        s.s[0][0].to_string(),
        s.s[1][1].to_string(),
        s.s[0][1].to_string(),
        s.nu.to_string(),
        s.mu.to_string(),
    ]);
}
