//! CSV emission. Numbers are written with 17 significant digits in
//! scientific notation, '.' as the decimal separator and a trailing newline
//! after the last row, so files are byte-stable and re-parse exactly.

use std::fmt::Write as _;
use std::path::Path;

use kelly_market::{discounted_frequency, GammaFit, Outcome, SimulationRecord};

use crate::error::{CliError, Result};

pub const ROUNDS_HEADER: &str = "t,price,outcome,observed_freq,discounted_freq";
pub const WEALTH_HEADER: &str = "agent_id,belief,lambda,wealth_final";
pub const GAMMA_HEADER: &str = "gamma,rmse";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per round: the price quoted before the outcome, the outcome, and
/// the observed and discounted frequencies including that outcome.
pub fn rounds_csv(record: &SimulationRecord, gamma: f64) -> Result<String> {
    let mut out = String::from(ROUNDS_HEADER);
    out.push('\n');
    if record.rounds.is_empty() {
        return Ok(out);
    }
    let freq = discounted_frequency(&record.outcomes(), gamma)?;
    for (t, round) in record.rounds.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            t + 1,
            fmt_f64(round.price.value()),
            round.outcome.as_u8(),
            fmt_f64(freq.observed[t]),
            fmt_f64(freq.discounted[t]),
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn wealth_csv(record: &SimulationRecord) -> String {
    let mut out = String::from(WEALTH_HEADER);
    out.push('\n');
    for a in record.final_population.agents() {
        writeln!(
            out,
            "{},{},{},{}",
            a.id,
            fmt_f64(a.belief.value()),
            fmt_f64(a.lambda),
            fmt_f64(a.wealth)
        )
        .expect("writing to a String");
    }
    out
}

pub fn gamma_csv(fit: &GammaFit) -> String {
    let mut out = String::from(GAMMA_HEADER);
    out.push('\n');
    for (gamma, rmse) in &fit.curve {
        writeln!(out, "{},{}", fmt_f64(*gamma), fmt_f64(*rmse)).expect("writing to a String");
    }
    out
}

/// Reads `price` and `outcome` columns from a `rounds.csv`.
pub fn read_rounds_csv(path: &Path, text: &str) -> Result<(Vec<f64>, Vec<Outcome>)> {
    let bad = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .split(',')
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| bad(format!("missing column `{name}`")))
    };
    let (price_col, outcome_col) = (col("price")?, col("outcome")?);
    let (mut prices, mut outcomes) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        let field = |c: usize| {
            fields
                .get(c)
                .map(|f| f.trim())
                .ok_or_else(|| bad(format!("line {}: too few fields", i + 2)))
        };
        let price: f64 = field(price_col)?
            .parse()
            .map_err(|e| bad(format!("line {}: price: {e}", i + 2)))?;
        let outcome: u8 = field(outcome_col)?
            .parse()
            .map_err(|e| bad(format!("line {}: outcome: {e}", i + 2)))?;
        prices.push(price);
        outcomes.push(Outcome::try_from(outcome).map_err(|e| bad(format!("line {}: {e}", i + 2)))?);
    }
    Ok((prices, outcomes))
}
