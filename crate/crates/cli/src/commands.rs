//! The experiment subcommands. Every command validates its inputs before
//! touching the output directory, so a rejected config leaves no files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kelly_market::frequency::DEFAULT_BURN_IN;
use kelly_market::rng::RNG_ALGORITHM;
use kelly_market::sim::seed_sweep;
use kelly_market::{
    audit, beta_posterior_fit, clearing_price, discounted_frequency, fit_discount_factor,
    gamma_grid, regret_bound_check, run, run_batch, AuditReport, GammaFit, Probability,
    SimulationRecord,
};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{fmt_f64, gamma_csv, read_rounds_csv, rounds_csv, wealth_csv};
use crate::svg::{chart, Mark, Series};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Written last by `simulate` and `batch`; its presence means the run
/// completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub tool_version: String,
    pub rng: String,
    pub wall_clock_seconds: f64,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn write(self, command: &str, config_path: &Path, started: Instant) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        let manifest = RunManifest {
            command: command.to_string(),
            config_path: config_path.to_path_buf(),
            output_dir: self.dir.clone(),
            files: self.files.iter().map(|(n, _)| n.clone()).collect(),
            tool_version: TOOL_VERSION.to_string(),
            rng: RNG_ALGORITHM.to_string(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        };
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, to_json(&manifest)).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
        Ok(written)
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Runs one experiment and writes `rounds.csv`, `wealth.csv`, `record.json`,
/// optional SVG charts and `manifest.json`.
pub fn simulate(config_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path)?;
    let record = run(&config.simulation)?;
    let gamma = config.analysis.discount_gamma;

    let mut out = Outputs::new(out_dir);
    out.add("rounds.csv", rounds_csv(&record, gamma)?);
    out.add("wealth.csv", wealth_csv(&record));
    out.add(
        "record.json",
        serde_json::to_string(&record).expect("serializable") + "\n",
    );
    if config.analysis.svg {
        for (name, svg) in figure_charts(&record, gamma)? {
            out.add(&name, svg);
        }
    }
    out.write("simulate", config_path, started)
}

fn figure_charts(record: &SimulationRecord, gamma: f64) -> Result<Vec<(String, String)>> {
    let mut charts = Vec::new();
    if !record.rounds.is_empty() {
        let freq = discounted_frequency(&record.outcomes(), gamma)?;
        let price: Vec<(f64, f64)> = record
            .prices()
            .iter()
            .enumerate()
            .map(|(t, &p)| ((t + 1) as f64, p))
            .collect();
        // frequency after t outcomes is what the price of round t+1 reflects
        let lagged = |v: &[f64]| -> Vec<(f64, f64)> {
            v.iter()
                .enumerate()
                .map(|(t, &f)| ((t + 2) as f64, f))
                .collect()
        };
        charts.push((
            "price_vs_observed.svg".to_string(),
            chart(
                "Price vs observed frequency",
                "period",
                "probability",
                &[
                    Series {
                        label: "price",
                        color: "black",
                        mark: Mark::Line,
                        points: price.clone(),
                    },
                    Series {
                        label: "observed frequency",
                        color: "gray",
                        mark: Mark::Line,
                        points: lagged(&freq.observed),
                    },
                ],
            ),
        ));
        charts.push((
            "price_vs_discounted.svg".to_string(),
            chart(
                &format!("Price vs discounted frequency (gamma = {gamma})"),
                "period",
                "probability",
                &[
                    Series {
                        label: "price",
                        color: "black",
                        mark: Mark::Line,
                        points: price,
                    },
                    Series {
                        label: "discounted frequency",
                        color: "gray",
                        mark: Mark::Line,
                        points: lagged(&freq.discounted),
                    },
                ],
            ),
        ));
    }
    let pop = &record.final_population;
    let fit = beta_posterior_fit(
        &pop.beliefs(),
        &pop.wealths(),
        record.successes(),
        record.failures(),
    )?;
    let mut by_belief: Vec<(f64, f64, f64)> = pop
        .beliefs()
        .into_iter()
        .zip(pop.wealths())
        .zip(&fit.density_at_beliefs)
        .map(|((b, w), d)| (b, w, *d))
        .collect();
    by_belief.sort_by(|a, b| a.0.total_cmp(&b.0));
    charts.push((
        "wealth_vs_belief.svg".to_string(),
        chart(
            &format!(
                "Wealth vs belief after {} periods ({} successes)",
                record.rounds.len(),
                fit.successes
            ),
            "belief",
            "wealth share",
            &[
                Series {
                    label: "wealth",
                    color: "black",
                    mark: Mark::Points,
                    points: by_belief.iter().map(|r| (r.0, r.1)).collect(),
                },
                Series {
                    label: "Beta(s+1, f+1), normalized",
                    color: "gray",
                    mark: Mark::Line,
                    points: by_belief.iter().map(|r| (r.0, r.2)).collect(),
                },
            ],
        ),
    ));
    Ok(charts)
}

pub enum VerifySource<'a> {
    Config(&'a Path),
    Record(&'a Path),
}

pub fn load_record(path: &Path) -> Result<SimulationRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Audits a run and writes `verify.json`. The report is returned whether or
/// not it passed; see [`ensure_passed`].
///
/// `perturb_price` shifts the recorded price of the middle round before the
/// audit; it exists to demonstrate that the balance check has teeth.
pub fn verify(
    source: VerifySource<'_>,
    out_dir: &Path,
    perturb_price: Option<f64>,
) -> Result<AuditReport> {
    let mut record = match source {
        VerifySource::Config(path) => run(&ExperimentConfig::load(path)?.simulation)?,
        VerifySource::Record(path) => load_record(path)?,
    };
    if let Some(delta) = perturb_price {
        if record.rounds.is_empty() {
            return Err(CliError::Usage(
                "cannot perturb a record with no rounds".into(),
            ));
        }
        let mid = record.rounds.len() / 2;
        let shifted = record.rounds[mid].price.value() + delta;
        record.rounds[mid].price = Probability::price(shifted)
            .map_err(|e| CliError::Usage(format!("perturbed price: {e}")))?;
    }
    let report = audit(&record)?;
    write_file(out_dir, "verify.json", &to_json(&report))?;
    Ok(report)
}

/// [`CliError::VerificationFailed`] unless every non-informational check passed.
pub fn ensure_passed(report: &AuditReport) -> Result<()> {
    let failed = report
        .checks
        .iter()
        .filter(|c| !c.passed && !c.informational)
        .count();
    if failed > 0 {
        return Err(CliError::VerificationFailed(failed));
    }
    Ok(())
}

/// `lo:hi:step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("grid `{spec}`: {e}")))?;
    match nums[..] {
        [lo, hi, step] => {
            gamma_grid(lo, hi, step).map_err(|e| CliError::Usage(format!("grid `{spec}`: {e}")))
        }
        _ => Err(CliError::Usage(format!("grid `{spec}` must be lo:hi:step"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSummary {
    pub best_gamma: f64,
    pub best_rmse: f64,
    pub burn_in: usize,
}

/// Fits the discount factor to a record (`.json`) or `rounds.csv` and writes
/// `gamma_fit.csv` and `gamma_fit.json`.
pub fn fit_gamma(input: &Path, grid: &[f64], burn_in: usize, out_dir: &Path) -> Result<GammaFit> {
    let (prices, outcomes) = if input.extension().is_some_and(|e| e == "csv") {
        let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
        read_rounds_csv(input, &text)?
    } else {
        let record = load_record(input)?;
        (record.prices(), record.outcomes())
    };
    let fit = fit_discount_factor(&prices, &outcomes, grid, burn_in)?;
    write_file(out_dir, "gamma_fit.csv", &gamma_csv(&fit))?;
    let summary = GammaSummary {
        best_gamma: fit.best_gamma,
        best_rmse: fit.best_rmse,
        burn_in,
    };
    write_file(out_dir, "gamma_fit.json", &to_json(&summary))?;
    Ok(fit)
}

/// `lo..hi`, half-open.
pub fn parse_seeds(spec: &str) -> Result<std::ops::Range<u64>> {
    let (lo, hi) = spec
        .split_once("..")
        .ok_or_else(|| CliError::Usage(format!("seeds `{spec}` must be lo..hi")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|e| CliError::Usage(format!("seeds `{spec}`: {e}")))
    };
    let range = parse(lo)?..parse(hi)?;
    if range.is_empty() {
        return Err(CliError::Usage(format!("seeds `{spec}` is empty")));
    }
    Ok(range)
}

pub const BATCH_HEADER: &str =
    "seed,status,final_price,observed_freq,market_loss,regret_slack,gamma_fit,error";

/// Runs the config once per seed and writes `batch.csv` and `manifest.json`.
/// Failed runs are reported in their row; the command fails afterwards if
/// any run did.
pub fn batch(
    config_path: &Path,
    seeds: std::ops::Range<u64>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let config = ExperimentConfig::load(config_path)?;
    let configs = seed_sweep(&config.simulation, seeds);
    let results = run_batch(&configs)?;
    let grid = gamma_grid(0.8, 1.0, 0.01)?;

    let mut csv = String::from(BATCH_HEADER);
    csv.push('\n');
    let mut failed = 0;
    for (cfg, result) in configs.iter().zip(&results) {
        match result {
            Ok(rec) => {
                let price = clearing_price(&rec.final_population)?.value();
                let freq = if rec.rounds.is_empty() {
                    String::new()
                } else {
                    fmt_f64(rec.successes() as f64 / rec.rounds.len() as f64)
                };
                let initial = vec![1.0 / cfg.n_agents as f64; cfg.n_agents];
                let regret = regret_bound_check(&rec.ledger, &initial);
                let gamma = fit_discount_factor(
                    &rec.prices(),
                    &rec.outcomes(),
                    &grid,
                    config.analysis.burn_in,
                )
                .map(|f| fmt_f64(f.best_gamma))
                .unwrap_or_default();
                writeln!(
                    csv,
                    "{},ok,{},{},{},{},{},",
                    cfg.seed,
                    fmt_f64(price),
                    freq,
                    fmt_f64(rec.ledger.market_loss),
                    fmt_f64(regret.slack),
                    gamma
                )
                .expect("writing to a String");
            }
            Err(e) => {
                failed += 1;
                writeln!(
                    csv,
                    "{},error,,,,,,{}",
                    cfg.seed,
                    e.to_string().replace([',', '\n'], ";")
                )
                .expect("writing to a String");
            }
        }
    }
    let mut out = Outputs::new(out_dir);
    out.add("batch.csv", csv);
    let written = out.write("batch", config_path, started)?;
    if failed > 0 {
        return Err(CliError::BatchFailed {
            failed,
            total: results.len(),
        });
    }
    Ok(written)
}

pub fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}
