//! Asset-allocation backtest on monthly closing prices.
//!
//! Prices become log returns, each expanding window is collapsed into a
//! single unit-variance observation, every rule maps that observation to an
//! action, actions become portfolio weights, and wealth compounds with the
//! realized simple return of the following month.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Months, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::normal::sample_standard_normal;
use crate::risk::Moments;
use crate::rule::Rule;

/// Monthly closing prices with strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    /// Validates positivity of closes and strict date order. Errors report
    /// the 1-based observation index as `line`.
    pub fn new(dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self, Error> {
        if dates.len() != closes.len() {
            return Err(Error::CsvRow {
                line: 0,
                message: format!("{} dates but {} closes", dates.len(), closes.len()),
            });
        }
        if dates.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        for (i, &close) in closes.iter().enumerate() {
            if !close.is_finite() || close <= 0.0 {
                return Err(Error::NonPositiveClose { line: i + 1, value: close });
            }
        }
        for i in 1..dates.len() {
            if dates[i] <= dates[i - 1] {
                return Err(Error::DateOrder {
                    previous: dates[i - 1].to_string(),
                    current: dates[i].to_string(),
                });
            }
        }
        Ok(Self { dates, closes })
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }
}

/// Period log returns; entry `t` covers the month ending at `dates[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    log_returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.log_returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_returns.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn log_returns(&self) -> &[f64] {
        &self.log_returns
    }

    /// Simple return for period `t`, `exp(log) - 1`.
    pub fn simple(&self, t: usize) -> f64 {
        self.log_returns[t].exp() - 1.0
    }
}

/// Reads a `date,close` CSV file.
pub fn load_prices(path: &Path) -> Result<PriceSeries, Error> {
    parse_prices(&std::fs::read_to_string(path)?)
}

/// Parses `date,close` CSV text: ISO-8601 dates, positive decimal closes,
/// strictly increasing rows. Errors carry the offending 1-based line.
pub fn parse_prices(text: &str) -> Result<PriceSeries, Error> {
    let mut dates = Vec::new();
    let mut closes = Vec::new();
    let mut saw_header = false;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if !saw_header {
            if row != "date,close" {
                return Err(Error::CsvHeader { line, expected: "date,close", got: row.to_string() });
            }
            saw_header = true;
            continue;
        }
        let mut fields = row.split(',');
        let (date_field, close_field) = match (fields.next(), fields.next(), fields.next()) {
            (Some(d), Some(c), None) => (d.trim(), c.trim()),
            _ => {
                return Err(Error::CsvRow {
                    line,
                    message: format!("expected 2 comma-separated fields, got `{row}`"),
                })
            }
        };
        let date = NaiveDate::parse_from_str(date_field, "%Y-%m-%d").map_err(|e| Error::CsvRow {
            line,
            message: format!("bad date `{date_field}`: {e}"),
        })?;
        let close: f64 = close_field.parse().map_err(|e| Error::CsvRow {
            line,
            message: format!("bad close `{close_field}`: {e}"),
        })?;
        if !close.is_finite() || close <= 0.0 {
            return Err(Error::NonPositiveClose { line, value: close });
        }
        if let Some(&previous) = dates.last() {
            if date <= previous {
                return Err(Error::DateOrder {
                    previous: previous.to_string(),
                    current: date.to_string(),
                });
            }
        }
        dates.push(date);
        closes.push(close);
    }
    if !saw_header {
        return Err(Error::CsvHeader { line: 1, expected: "date,close", got: String::new() });
    }
    PriceSeries::new(dates, closes)
}

/// Serializes a [`PriceSeries`] back to `date,close` CSV text.
pub fn prices_to_csv(prices: &PriceSeries) -> String {
    let mut out = String::from("date,close\n");
    for (date, close) in prices.dates().iter().zip(prices.closes()) {
        let _ = writeln!(out, "{date},{close}");
    }
    out
}

/// Converts closing prices to period log returns `ln(close_t / close_{t-1})`.
pub fn to_log_returns(prices: &PriceSeries) -> ReturnSeries {
    let closes = prices.closes();
    let log_returns: Vec<f64> =
        closes.windows(2).map(|pair| (pair[1] / pair[0]).ln()).collect();
    ReturnSeries { dates: prices.dates()[1..].to_vec(), log_returns }
}

/// The columns of a monthly-returns summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub obs: usize,
    pub mean: f64,
    /// Sample standard deviation, `n - 1` denominator.
    pub std_dev: f64,
    /// Midpoint average for even lengths.
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Summary of a return series. Needs at least two observations for the
/// sample standard deviation to exist.
pub fn summary_stats(returns: &ReturnSeries) -> Result<SummaryStats, Error> {
    let xs = returns.log_returns();
    if xs.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: xs.len() });
    }
    let mut moments = Moments::default();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in xs {
        moments.push(x);
        min = min.min(x);
        max = max.max(x);
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Ok(SummaryStats {
        obs: xs.len(),
        mean: moments.mean,
        std_dev: moments.sample_variance().sqrt(),
        median,
        min,
        max,
    })
}

/// One expanding window collapsed to a single observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats {
    /// Window length, pre-sample plus expansion step.
    pub n: usize,
    /// The fixed full-sample scale the window was divided by.
    pub sigma: f64,
    /// `sqrt(n) * mean(window) / sigma`, a unit-variance observation of the
    /// scaled mean return.
    pub xbar: f64,
}

/// Collapses the first `pre_sample + s` returns into the scaled mean
/// observation the decision rule consumes.
pub fn window_stat(
    returns: &ReturnSeries,
    pre_sample: usize,
    s: usize,
    sigma: f64,
) -> Result<WindowStats, Error> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::NonPositiveScale { what: "return scale sigma", value: sigma });
    }
    let n = pre_sample + s;
    if n == 0 {
        return Err(Error::EmptyPreSample { got: 0 });
    }
    if n > returns.len() {
        return Err(Error::TooShort { needed: n, got: returns.len() });
    }
    let mean = returns.log_returns()[..n].iter().sum::<f64>() / n as f64;
    Ok(WindowStats { n, sigma, xbar: (n as f64).sqrt() * mean / sigma })
}

/// How a transformed-space action becomes a portfolio weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMapping {
    /// `w = action / (sqrt(n) * sigma)`; under this map the plug-in rule
    /// holds the classical mean-variance weight `mean / sigma^2`.
    MeanVariance,
    /// `w = action`, for sensitivity analysis.
    RawAction,
}

/// Backtest knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BacktestConfig {
    /// Months reserved before the first decision.
    pub pre_sample: usize,
    pub initial_cash: f64,
    pub weight_mapping: WeightMapping,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self { pre_sample: 84, initial_cash: 100.0, weight_mapping: WeightMapping::MeanVariance }
    }
}

/// One decision period: the observation, and per rule the action taken,
/// the weight held, and the wealth after the month's return realized.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestRecord {
    /// Month whose return the row's wealth update realized.
    pub date: NaiveDate,
    pub xbar: f64,
    pub actions: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

/// Per-rule endpoint of the value path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleSummary {
    pub label: String,
    pub final_value: f64,
    /// `final_value / initial_cash - 1`.
    pub total_return: f64,
    /// Set when leveraged losses pushed wealth to zero or below at any
    /// point; the path still runs to the end.
    pub went_negative: bool,
}

/// Everything a backtest run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub labels: Vec<String>,
    pub sigma: f64,
    pub pre_sample: usize,
    pub initial_cash: f64,
    pub records: Vec<BacktestRecord>,
    pub summaries: Vec<RuleSummary>,
}

/// Runs every rule over the expanding-window backtest.
///
/// The scale `sigma` is the sample standard deviation of the full return
/// series, computed once up front. That is the one deliberate use of
/// future data; each window's mean uses only returns up to its own end.
pub fn run_backtest(
    returns: &ReturnSeries,
    rules: &[Rule],
    config: &BacktestConfig,
) -> Result<BacktestResult, Error> {
    if rules.is_empty() {
        return Err(Error::NoRules);
    }
    if config.pre_sample < 2 {
        return Err(Error::EmptyPreSample { got: config.pre_sample });
    }
    if !config.initial_cash.is_finite() || config.initial_cash <= 0.0 {
        return Err(Error::InitialCash { value: config.initial_cash });
    }
    if returns.len() < config.pre_sample + 1 {
        return Err(Error::TooShort { needed: config.pre_sample + 1, got: returns.len() });
    }
    let mut full = Moments::default();
    for &x in returns.log_returns() {
        full.push(x);
    }
    let sigma = full.sample_variance().sqrt();
    if sigma == 0.0 {
        return Err(Error::ZeroVariance);
    }

    let prepared = rules.iter().map(|r| r.prepare()).collect::<Result<Vec<_>, _>>()?;
    let steps = returns.len() - config.pre_sample;
    let mut values = vec![config.initial_cash; rules.len()];
    let mut went_negative = vec![false; rules.len()];
    let mut records = Vec::with_capacity(steps);
    for s in 0..steps {
        let stats = window_stat(returns, config.pre_sample, s, sigma)?;
        let realized = returns.simple(stats.n);
        let mut actions = Vec::with_capacity(rules.len());
        let mut weights = Vec::with_capacity(rules.len());
        for (i, rule) in prepared.iter().enumerate() {
            let (action, _) = rule.evaluate(stats.xbar);
            let weight = match config.weight_mapping {
                WeightMapping::MeanVariance => action / ((stats.n as f64).sqrt() * sigma),
                WeightMapping::RawAction => action,
            };
            values[i] *= 1.0 + weight * realized;
            if values[i] <= 0.0 {
                went_negative[i] = true;
            }
            actions.push(action);
            weights.push(weight);
        }
        records.push(BacktestRecord {
            date: returns.dates()[stats.n],
            xbar: stats.xbar,
            actions,
            weights,
            values: values.clone(),
        });
    }

    let summaries = rules
        .iter()
        .zip(&values)
        .zip(&went_negative)
        .map(|((rule, &final_value), &flag)| RuleSummary {
            label: rule.label(),
            final_value,
            total_return: final_value / config.initial_cash - 1.0,
            went_negative: flag,
        })
        .collect();
    Ok(BacktestResult {
        labels: rules.iter().map(Rule::label).collect(),
        sigma,
        pre_sample: config.pre_sample,
        initial_cash: config.initial_cash,
        records,
        summaries,
    })
}

/// Synthetic monthly price series whose `n_months` log returns hit the
/// requested sample mean and standard deviation exactly (up to rounding),
/// via an affine correction of seeded Gaussian draws. Prices start at 100
/// in January 1999 and step one calendar month per observation.
pub fn synth_prices(n_months: usize, mean: f64, std: f64, seed: u64) -> Result<PriceSeries, Error> {
    if !std.is_finite() || std <= 0.0 {
        return Err(Error::NonPositiveScale { what: "return standard deviation", value: std });
    }
    if !mean.is_finite() {
        return Err(Error::NonFinite { what: "return mean" });
    }
    if n_months < 2 {
        return Err(Error::TooShort { needed: 2, got: n_months });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n_months).map(|_| sample_standard_normal(&mut rng)).collect();
    let mut moments = Moments::default();
    for &z in &raw {
        moments.push(z);
    }
    let spread = moments.sample_variance().sqrt();
    if spread == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let center = moments.mean;

    let start = NaiveDate::from_ymd_opt(1999, 1, 1).expect("valid calendar date");
    let mut dates = Vec::with_capacity(n_months + 1);
    let mut closes = Vec::with_capacity(n_months + 1);
    dates.push(start);
    closes.push(100.0);
    for (i, &z) in raw.iter().enumerate() {
        let r = mean + std * (z - center) / spread;
        dates.push(
            start
                .checked_add_months(Months::new(i as u32 + 1))
                .expect("monthly dates stay in range"),
        );
        closes.push(closes[i] * r.exp());
    }
    PriceSeries::new(dates, closes)
}
