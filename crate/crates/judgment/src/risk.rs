//! Seeded Monte Carlo estimation of risk functions, rejection rates, and
//! the coverage bound of the decision rule over parameter grids.
//!
//! Draws are split into fixed-width chunks. Each chunk gets its own
//! generator seeded from the base seed and the chunk index, and the chunk
//! summaries are merged in index order, so a run produces the same bits
//! whether chunks execute serially or across any number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::normal::sample_standard_normal;
use crate::rule::{loss, Judgment, Rule};

const CHUNK_DRAWS: u64 = 1 << 16;

/// Noise distribution for the sampled observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    /// Standard normal draws, the distribution the coverage bound assumes.
    Gaussian,
    /// Student-t draws rescaled to unit variance; a misspecification stress
    /// case, so nothing is guaranteed under it. Needs `dof >= 3`.
    StudentT { dof: u32 },
}

impl Noise {
    fn validate(&self) -> Result<(), Error> {
        match *self {
            Noise::Gaussian => Ok(()),
            Noise::StudentT { dof } if dof >= 3 => Ok(()),
            Noise::StudentT { dof } => Err(Error::StudentTDof { dof }),
        }
    }

    #[inline]
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Noise::Gaussian => sample_standard_normal(rng),
            Noise::StudentT { dof } => {
                let z = sample_standard_normal(rng);
                let mut chi2 = 0.0;
                for _ in 0..dof {
                    let w = sample_standard_normal(rng);
                    chi2 += w * w;
                }
                let t = z / (chi2 / dof as f64).sqrt();
                t * ((dof as f64 - 2.0) / dof as f64).sqrt()
            }
        }
    }
}

/// Knobs shared by every Monte Carlo entry point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSettings {
    pub draws: u64,
    pub seed: u64,
    pub noise: Noise,
    /// Spread chunks across threads. Off or on, the result bits are the
    /// same; this only trades wall-clock for cores.
    pub parallel: bool,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { draws: 1_000_000, seed: 42, noise: Noise::Gaussian, parallel: true }
    }
}

/// Monte Carlo estimates for one rule at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskReport {
    pub theta: f64,
    pub n_draws: u64,
    pub seed: u64,
    /// Estimated expected loss of the rule at `theta`.
    pub mean_loss: f64,
    /// Standard error of `mean_loss`.
    pub se_loss: f64,
    /// Estimated probability that the rule's realized loss strictly exceeds
    /// the loss of the judgmental action.
    pub prob_worse: f64,
    /// Binomial standard error of `prob_worse`.
    pub se_prob: f64,
    /// Fraction of draws on which the rule's test rejected. Zero for rules
    /// without a test.
    pub reject_rate: f64,
}

/// Streaming mean and sum of squared deviations, mergeable across chunks.
/// Updates cancel exactly on constant input, so degenerate rules report
/// their analytic loss with zero spread.
#[derive(Clone, Copy, Default)]
pub(crate) struct Moments {
    pub(crate) n: u64,
    pub(crate) mean: f64,
    pub(crate) m2: f64,
}

impl Moments {
    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m2 / (self.n - 1) as f64
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * (other.n as f64 / n as f64);
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    fn standard_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.sample_variance() / self.n as f64).sqrt()
    }
}

#[derive(Clone, Copy, Default)]
struct ChunkStats {
    loss: Moments,
    worse: u64,
    rejections: u64,
}

impl ChunkStats {
    fn merge(&mut self, other: &ChunkStats) {
        self.loss.merge(&other.loss);
        self.worse += other.worse;
        self.rejections += other.rejections;
    }
}

/// Estimates the risk profile of `rule` at `theta` against the judgmental
/// benchmark. Observations are `theta + noise`; "worse" means the realized
/// loss strictly exceeds the loss of holding the judgmental action.
///
/// Deterministic for fixed settings: the same seed and draw count give a
/// bit-identical report, in serial or parallel.
pub fn mc_risk(
    rule: &Rule,
    theta: f64,
    judgment: &Judgment,
    settings: &McSettings,
) -> Result<RiskReport, Error> {
    if !theta.is_finite() {
        return Err(Error::NonFinite { what: "theta" });
    }
    if settings.draws == 0 {
        return Err(Error::NoDraws);
    }
    settings.noise.validate()?;
    let prepared = rule.prepare()?;
    let judgment_loss = loss(theta, judgment.action());

    let n_chunks = settings.draws.div_ceil(CHUNK_DRAWS);
    let run_chunk = |index: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(index));
        let remaining = settings.draws - index * CHUNK_DRAWS;
        let len = remaining.min(CHUNK_DRAWS);
        let mut stats = ChunkStats::default();
        for _ in 0..len {
            let x = theta + settings.noise.sample(&mut rng);
            let (action, rejected) = prepared.evaluate(x);
            let realized = loss(theta, action);
            stats.loss.push(realized);
            if realized > judgment_loss {
                stats.worse += 1;
            }
            if rejected == Some(true) {
                stats.rejections += 1;
            }
        }
        stats
    };

    let per_chunk: Vec<ChunkStats> = if settings.parallel {
        (0..n_chunks).into_par_iter().map(run_chunk).collect()
    } else {
        (0..n_chunks).map(run_chunk).collect()
    };
    let mut total = ChunkStats::default();
    for stats in &per_chunk {
        total.merge(stats);
    }

    let n = settings.draws as f64;
    let prob_worse = total.worse as f64 / n;
    Ok(RiskReport {
        theta,
        n_draws: settings.draws,
        seed: settings.seed,
        mean_loss: total.loss.mean,
        se_loss: total.loss.standard_error(),
        prob_worse,
        se_prob: (prob_worse * (1.0 - prob_worse) / n).sqrt(),
        reject_rate: total.rejections as f64 / n,
    })
}

/// One grid point of [`risk_bound_sweep`]: the report, the ceiling
/// `alpha + 3 se_prob`, and whether the estimate breached it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub report: RiskReport,
    pub limit: f64,
    pub violated: bool,
}

/// Sweeps the judgment rule over `theta_grid` and checks at every point
/// that the probability of doing worse than the judgmental action stays
/// within `alpha` plus three binomial standard errors.
pub fn risk_bound_sweep(
    judgment: &Judgment,
    theta_grid: &[f64],
    settings: &McSettings,
) -> Result<Vec<BoundCheck>, Error> {
    if theta_grid.is_empty() {
        return Err(Error::EmptyGrid { what: "theta grid" });
    }
    let rule = Rule::Judgment(*judgment);
    let alpha = judgment.confidence();
    theta_grid
        .iter()
        .map(|&theta| {
            let report = mc_risk(&rule, theta, judgment, settings)?;
            let limit = alpha + 3.0 * report.se_prob;
            Ok(BoundCheck { report, limit, violated: report.prob_worse > limit })
        })
        .collect()
}

/// Rejection rate of the judgment rule at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPoint {
    pub theta: f64,
    pub reject_rate: f64,
    /// Binomial standard error of `reject_rate`.
    pub se: f64,
}

/// Rejection rates of the judgment rule over `theta_grid`. Needs a
/// confidence strictly inside (0, 1); at the endpoints the test never or
/// always fires and a power curve says nothing.
pub fn power_sweep(
    judgment: &Judgment,
    theta_grid: &[f64],
    settings: &McSettings,
) -> Result<Vec<PowerPoint>, Error> {
    if theta_grid.is_empty() {
        return Err(Error::EmptyGrid { what: "theta grid" });
    }
    let alpha = judgment.confidence();
    if alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::ProbabilityRange { what: "confidence for a power sweep", value: alpha });
    }
    let rule = Rule::Judgment(*judgment);
    theta_grid
        .iter()
        .map(|&theta| {
            let report = mc_risk(&rule, theta, judgment, settings)?;
            let p = report.reject_rate;
            Ok(PowerPoint { theta, reject_rate: p, se: (p * (1.0 - p) / report.n_draws as f64).sqrt() })
        })
        .collect()
}

/// Which side of a [`DominancePoint`] had the significantly lower loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Favored {
    RuleA,
    RuleB,
}

/// Mean-loss comparison of two rules at one grid point. `favored` is set
/// only when the gap exceeds three combined standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominancePoint {
    pub theta: f64,
    pub mean_loss_a: f64,
    pub mean_loss_b: f64,
    pub margin: f64,
    pub favored: Option<Favored>,
}

/// Grid-wise loss comparison of two rules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub label_a: String,
    pub label_b: String,
    pub points: Vec<DominancePoint>,
    pub a_wins: usize,
    pub b_wins: usize,
}

/// Compares the mean loss of two rules across `theta_grid`, counting the
/// points where either is better by more than three combined standard
/// errors. Both rules see the same draws at each point.
pub fn dominance_check(
    rule_a: &Rule,
    rule_b: &Rule,
    judgment: &Judgment,
    theta_grid: &[f64],
    settings: &McSettings,
) -> Result<DominanceReport, Error> {
    if theta_grid.is_empty() {
        return Err(Error::EmptyGrid { what: "theta grid" });
    }
    let mut points = Vec::with_capacity(theta_grid.len());
    let mut a_wins = 0;
    let mut b_wins = 0;
    for &theta in theta_grid {
        let a = mc_risk(rule_a, theta, judgment, settings)?;
        let b = mc_risk(rule_b, theta, judgment, settings)?;
        let margin = 3.0 * (a.se_loss * a.se_loss + b.se_loss * b.se_loss).sqrt();
        let favored = if a.mean_loss < b.mean_loss - margin {
            a_wins += 1;
            Some(Favored::RuleA)
        } else if b.mean_loss < a.mean_loss - margin {
            b_wins += 1;
            Some(Favored::RuleB)
        } else {
            None
        };
        points.push(DominancePoint {
            theta,
            mean_loss_a: a.mean_loss,
            mean_loss_b: b.mean_loss,
            margin,
            favored,
        });
    }
    Ok(DominanceReport {
        label_a: rule_a.label(),
        label_b: rule_b.label(),
        points,
        a_wins,
        b_wins,
    })
}

/// Inclusive grid `start, start + step, ...` up to `stop` (with slack of
/// half a step for accumulated rounding).
pub fn theta_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !start.is_finite() || !stop.is_finite() {
        return Err(Error::NonFinite { what: "grid endpoint" });
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::NonFinite { what: "grid step (must be positive)" });
    }
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let theta = start + step * k as f64;
        if theta > stop + 0.5 * step {
            break;
        }
        grid.push(theta);
        k += 1;
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid { what: "theta grid" });
    }
    Ok(grid)
}
