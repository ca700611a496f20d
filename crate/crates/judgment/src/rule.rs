//! The core decision rule: start from a judgmental action, test it against
//! the data, and move to the nearest confidence bound only on rejection.
//!
//! The environment is a quadratic loss `-a*theta + a^2/2` whose gradient in
//! the action is `-theta + a`, observed through a single draw `X ~ N(theta, 1)`.
//! A [`Judgment`] pairs the action a decision maker would take without data
//! with a confidence level `alpha` measuring how much statistical risk they
//! accept. [`decide`] keeps the judgmental action whenever it is inside the
//! two-sided confidence interval `[x + q(alpha/2), x + q(1 - alpha/2)]` built
//! around the observation, and clips it to the nearest endpoint otherwise:
//!
//! - `alpha = 0` never rejects: the data are ignored and the judgmental
//!   action is final.
//! - `alpha = 1` always rejects: the rule collapses to the maximum-likelihood
//!   action `x`.
//! - In between, the rule deviates from judgment only when the data are
//!   incompatible with it at the chosen confidence level.

use crate::error::Error;
use crate::normal;
use serde::Serialize;

/// A judgmental action paired with the confidence level used to test it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Judgment {
    action: f64,
    confidence: f64,
}

impl Judgment {
    /// Validates that the action is finite and the confidence level is a
    /// probability.
    pub fn new(action: f64, confidence: f64) -> Result<Self, Error> {
        if !action.is_finite() {
            return Err(Error::NonFinite { what: "judgmental action" });
        }
        if confidence.is_nan() || !(0.0..=1.0).contains(&confidence) {
            return Err(Error::ProbabilityRange { what: "confidence level", value: confidence });
        }
        Ok(Self { action, confidence })
    }

    /// The action the decision maker would take without data.
    pub fn action(&self) -> f64 {
        self.action
    }

    /// The probability of abandoning a judgmental action that is exactly
    /// right.
    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

/// Which side of the judgmental action the data came down on: the sign of
/// the sample gradient `-x + a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Non-positive sample gradient; the data pull the action upward.
    Minus,
    /// Positive sample gradient; the data pull the action downward.
    Plus,
}

/// Outcome of the one-sided test applied on the relevant branch.
///
/// `reject` is the probability of rejecting: 0 inside the acceptance region,
/// 1 outside, and `gamma` exactly on the boundary. The boundary case is
/// action-irrelevant because the clipped action coincides with the judgmental
/// action there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub branch: Branch,
    pub reject: f64,
    pub gamma: f64,
}

/// Everything [`decide`] knows after seeing one observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionOutcome {
    /// The action to take.
    pub action: f64,
    /// Whether the judgmental action was rejected by the data.
    pub rejected: bool,
    /// Sign of the sample gradient at the judgmental action.
    pub branch: Branch,
    /// Lower end of the confidence interval for the action.
    pub ci_lower: f64,
    /// Upper end of the confidence interval for the action.
    pub ci_upper: f64,
    /// Sample gradient `-x + a` at the judgmental action.
    pub sample_gradient: f64,
    /// How far the decision moved away from judgment.
    pub displacement: f64,
}

/// Quadratic loss `-a*theta + a^2/2`; its minimizer in `a` is `theta`.
#[inline]
pub fn loss(theta: f64, action: f64) -> f64 {
    -action * theta + 0.5 * action * action
}

/// Gradient of [`loss`] in the action, evaluated at a parameter estimate.
#[inline]
pub fn gradient(theta_hat: f64, action: f64) -> f64 {
    -theta_hat + action
}

/// The pair of standard normal critical values for a two-sided test at
/// confidence `alpha`, with the upper value the exact negation of the lower.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Critical {
    pub lo: f64,
    pub hi: f64,
}

impl Critical {
    pub(crate) fn for_confidence(alpha: f64) -> Self {
        let lo = if alpha == 0.0 {
            f64::NEG_INFINITY
        } else {
            normal::quantile_raw(0.5 * alpha)
        };
        Self { lo, hi: -lo }
    }
}

/// [`decide`] with precomputed critical values, shared with the Monte Carlo
/// engine so that single calls and simulated sweeps follow the identical
/// arithmetic path.
pub(crate) fn decide_with(x: f64, judgment: &Judgment, crit: &Critical) -> DecisionOutcome {
    let g = -x + judgment.action;
    let branch = if g <= 0.0 { Branch::Minus } else { Branch::Plus };
    let (action, rejected) = if g < crit.lo {
        (x + crit.lo, true)
    } else if g > crit.hi {
        (x + crit.hi, true)
    } else {
        (judgment.action, false)
    };
    DecisionOutcome {
        action,
        rejected,
        branch,
        ci_lower: x + crit.lo,
        ci_upper: x + crit.hi,
        sample_gradient: g,
        displacement: action - judgment.action,
    }
}

/// Tests the judgmental action against one observation and keeps it unless
/// rejected, in which case the action moves to the nearest confidence bound.
///
/// Equivalent to clipping the judgmental action to
/// `[x + q(alpha/2), x + q(1 - alpha/2)]`. The boundary cases are exact: with
/// `alpha = 0` the judgmental action is returned unchanged, and with
/// `alpha = 1` the observation itself is returned.
pub fn decide(x: f64, judgment: &Judgment) -> DecisionOutcome {
    debug_assert!(x.is_finite());
    let crit = Critical::for_confidence(judgment.confidence);
    decide_with(x, judgment, &crit)
}

/// The branch test with a rejection probability of 0 on the boundary.
pub fn test_judgment(x: f64, judgment: &Judgment) -> TestResult {
    test_judgment_randomized(x, judgment, 0.0)
}

/// The branch test with an explicit boundary rejection probability `gamma`.
///
/// Panics if `gamma` is not a probability. Because the clipped action equals
/// the judgmental action exactly on the boundary, `gamma` never changes the
/// chosen action, only the reported test value.
pub fn test_judgment_randomized(x: f64, judgment: &Judgment, gamma: f64) -> TestResult {
    assert!(
        !gamma.is_nan() && (0.0..=1.0).contains(&gamma),
        "gamma must lie in [0, 1]"
    );
    let crit = Critical::for_confidence(judgment.confidence);
    let g = -x + judgment.action;
    let (branch, reject) = if g <= 0.0 {
        let reject = if g < crit.lo {
            1.0
        } else if g == crit.lo {
            gamma
        } else {
            0.0
        };
        (Branch::Minus, reject)
    } else {
        let reject = if g > crit.hi {
            1.0
        } else if g == crit.hi {
            gamma
        } else {
            0.0
        };
        (Branch::Plus, reject)
    };
    TestResult { branch, reject, gamma }
}

/// The maximum-likelihood action: follow the observation.
#[inline]
pub fn decide_ml(x: f64) -> f64 {
    x
}

/// The posterior-mean action under a conjugate `N(prior_mean, prior_var)`
/// prior and a unit-variance observation.
pub fn decide_bayes(x: f64, prior_mean: f64, prior_var: f64) -> Result<f64, Error> {
    if !prior_mean.is_finite() {
        return Err(Error::NonFinite { what: "prior mean" });
    }
    if !prior_var.is_finite() || prior_var <= 0.0 {
        return Err(Error::PriorVariance { value: prior_var });
    }
    Ok((prior_var * x + prior_mean) / (prior_var + 1.0))
}

/// A decision rule to run through the risk lab or the backtest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Rule {
    /// Keep the judgmental action unless the data reject it.
    Judgment(Judgment),
    /// Follow the observation.
    MaximumLikelihood,
    /// Posterior mean under a conjugate normal prior.
    Bayes { prior_mean: f64, prior_var: f64 },
    /// Ignore the data and always take this action.
    Fixed(f64),
}

impl Rule {
    /// Column-safe label used in CSV headers and reports.
    pub fn label(&self) -> String {
        match self {
            Rule::Judgment(j) => format!("judgment_{}_{}", j.action(), j.confidence()),
            Rule::MaximumLikelihood => "ml".to_string(),
            Rule::Bayes { prior_mean, prior_var } => format!("bayes_{prior_mean}_{prior_var}"),
            Rule::Fixed(a) => format!("fixed_{a}"),
        }
    }

    /// Validates parameters and precomputes whatever the per-observation
    /// evaluation needs.
    pub(crate) fn prepare(&self) -> Result<Prepared, Error> {
        Ok(match *self {
            Rule::Judgment(j) => Prepared::Judgment {
                judgment: j,
                crit: Critical::for_confidence(j.confidence()),
            },
            Rule::MaximumLikelihood => Prepared::Ml,
            Rule::Bayes { prior_mean, prior_var } => {
                decide_bayes(0.0, prior_mean, prior_var)?;
                Prepared::Bayes { prior_mean, prior_var }
            }
            Rule::Fixed(a) => {
                if !a.is_finite() {
                    return Err(Error::NonFinite { what: "fixed action" });
                }
                Prepared::Fixed(a)
            }
        })
    }
}

/// A validated rule ready for repeated evaluation.
pub(crate) enum Prepared {
    Judgment { judgment: Judgment, crit: Critical },
    Ml,
    Bayes { prior_mean: f64, prior_var: f64 },
    Fixed(f64),
}

impl Prepared {
    /// The action at one observation, plus the rejection flag where the rule
    /// has a test (judgment rules only).
    #[inline]
    pub(crate) fn evaluate(&self, x: f64) -> (f64, Option<bool>) {
        match *self {
            Prepared::Judgment { ref judgment, ref crit } => {
                let outcome = decide_with(x, judgment, crit);
                (outcome.action, Some(outcome.rejected))
            }
            Prepared::Ml => (x, None),
            Prepared::Bayes { prior_mean, prior_var } => {
                ((prior_var * x + prior_mean) / (prior_var + 1.0), None)
            }
            Prepared::Fixed(a) => (a, None),
        }
    }
}
