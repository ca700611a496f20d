//! The decision rule for general strictly convex losses.
//!
//! Away from the quadratic case the acceptance region is expressed through a
//! standardized gradient statistic: the loss gradient at the judgmental
//! action divided by the absolute cross derivative times the standard error
//! of the estimate. The statistic is compared against the same two-sided
//! normal critical values as the quadratic rule; on rejection, the action
//! moves to the point where the statistic meets the violated critical value,
//! found by bracketed bisection.

use crate::error::Error;
use crate::rule::{Branch, Critical, DecisionOutcome, Judgment};

const MAX_DOUBLINGS: u32 = 64;
const MAX_BISECTIONS: u32 = 200;
const ACTION_TOLERANCE: f64 = 1e-12;

/// A strictly convex loss described by its first derivative in the action
/// (`gradient`), the mixed second derivative in action and parameter
/// (`cross`), and the standard error of the parameter estimate.
///
/// `gradient(theta, a)` must be strictly increasing in `a` with a root, and
/// `cross` must stay bounded away from zero on the search range.
pub struct LossModel<G, C>
where
    G: Fn(f64, f64) -> f64,
    C: Fn(f64, f64) -> f64,
{
    gradient: G,
    cross: C,
    se: f64,
}

impl<G, C> LossModel<G, C>
where
    G: Fn(f64, f64) -> f64,
    C: Fn(f64, f64) -> f64,
{
    pub fn new(gradient: G, cross: C, se: f64) -> Result<Self, Error> {
        if !se.is_finite() || se <= 0.0 {
            return Err(Error::NonPositiveScale { what: "standard error", value: se });
        }
        Ok(Self { gradient, cross, se })
    }

    pub fn gradient(&self, theta_hat: f64, action: f64) -> f64 {
        (self.gradient)(theta_hat, action)
    }

    pub fn cross(&self, theta_hat: f64, action: f64) -> f64 {
        (self.cross)(theta_hat, action)
    }

    pub fn standard_error(&self) -> f64 {
        self.se
    }

    /// The standardized gradient statistic `grad / (|cross| * se)`.
    pub fn statistic(&self, theta_hat: f64, action: f64) -> Result<f64, Error> {
        let denom = self.cross(theta_hat, action).abs() * self.se;
        if !denom.is_finite() || denom < 1e-300 {
            return Err(Error::DegenerateCross { action });
        }
        Ok(self.gradient(theta_hat, action) / denom)
    }
}

/// The quadratic environment expressed as a [`LossModel`]: gradient
/// `-theta + a`, cross derivative `-1`, unit standard error.
pub fn quadratic() -> LossModel<impl Fn(f64, f64) -> f64, impl Fn(f64, f64) -> f64> {
    LossModel::new(|theta, a| -theta + a, |_, _| -1.0, 1.0).expect("unit se is valid")
}

/// The action at which the loss gradient vanishes, i.e. the plug-in optimum
/// for the estimated parameter.
///
/// Brackets the root by doubling outward from `[-1, 1]` and bisects to an
/// action tolerance of `1e-12`. Fails if no sign change is found or if the
/// gradient is seen decreasing while expanding.
pub fn ml_action<G, C>(theta_hat: f64, model: &LossModel<G, C>) -> Result<f64, Error>
where
    G: Fn(f64, f64) -> f64,
    C: Fn(f64, f64) -> f64,
{
    let g = |a: f64| model.gradient(theta_hat, a);
    let (lo, hi) = bracket_root(&g, -1.0, 1.0, "the gradient root")?;
    bisect(&g, lo, hi)
}

/// The judgment decision for a general strictly convex loss.
///
/// Keeps the judgmental action while the standardized gradient statistic at
/// it stays inside `[q(alpha/2), q(1 - alpha/2)]`; otherwise returns the
/// action where the statistic equals the violated bound. `ci_lower` and
/// `ci_upper` are that acceptance region translated into action space, so
/// the decision is the judgment clipped into `[ci_lower, ci_upper]`. The
/// reported `sample_gradient` is the standardized statistic at the judgment.
pub fn decide_general<G, C>(
    theta_hat: f64,
    judgment: &Judgment,
    model: &LossModel<G, C>,
) -> Result<DecisionOutcome, Error>
where
    G: Fn(f64, f64) -> f64,
    C: Fn(f64, f64) -> f64,
{
    if !theta_hat.is_finite() {
        return Err(Error::NonFinite { what: "theta_hat" });
    }
    let anchor = judgment.action();
    let statistic = model.statistic(theta_hat, anchor)?;
    let branch = if statistic <= 0.0 { Branch::Minus } else { Branch::Plus };

    if judgment.confidence() == 0.0 {
        return Ok(DecisionOutcome {
            action: anchor,
            rejected: false,
            branch,
            ci_lower: f64::NEG_INFINITY,
            ci_upper: f64::INFINITY,
            sample_gradient: statistic,
            displacement: 0.0,
        });
    }

    let crit = Critical::for_confidence(judgment.confidence());
    let center = ml_action(theta_hat, model)?;
    let ci_lower = statistic_root(theta_hat, model, center, crit.lo, Side::Below)?;
    let ci_upper = statistic_root(theta_hat, model, center, crit.hi, Side::Above)?;

    let (action, rejected) = if statistic < crit.lo {
        (ci_lower, true)
    } else if statistic > crit.hi {
        (ci_upper, true)
    } else {
        (anchor, false)
    };
    Ok(DecisionOutcome {
        action,
        rejected,
        branch,
        ci_lower,
        ci_upper,
        sample_gradient: statistic,
        displacement: action - anchor,
    })
}

enum Side {
    Below,
    Above,
}

/// Root of `statistic(a) = target` on the chosen side of the gradient root,
/// where the statistic passes through zero.
fn statistic_root<G, C>(
    theta_hat: f64,
    model: &LossModel<G, C>,
    center: f64,
    target: f64,
    side: Side,
) -> Result<f64, Error>
where
    G: Fn(f64, f64) -> f64,
    C: Fn(f64, f64) -> f64,
{
    let h = |a: f64| -> Result<f64, Error> { Ok(model.statistic(theta_hat, a)? - target) };
    let mut step = 1.0f64.max(center.abs() * 0.5);
    match side {
        Side::Below => {
            // h(center) = -target >= 0; walk down until the statistic falls
            // below the target.
            let mut lo = center - step;
            let mut guard = model.gradient(theta_hat, center);
            for _ in 0..MAX_DOUBLINGS {
                let g_lo = model.gradient(theta_hat, lo);
                if g_lo > guard {
                    return Err(Error::NonMonotoneGradient { at: lo, next: center });
                }
                guard = g_lo;
                if h(lo)? < 0.0 {
                    return bisect_result(&h, lo, center);
                }
                step *= 2.0;
                lo = center - step;
            }
            Err(Error::BracketExpansion { target: "the lower confidence bound", doublings: MAX_DOUBLINGS })
        }
        Side::Above => {
            let mut hi = center + step;
            let mut guard = model.gradient(theta_hat, center);
            for _ in 0..MAX_DOUBLINGS {
                let g_hi = model.gradient(theta_hat, hi);
                if g_hi < guard {
                    return Err(Error::NonMonotoneGradient { at: center, next: hi });
                }
                guard = g_hi;
                if h(hi)? > 0.0 {
                    return bisect_result(&h, center, hi);
                }
                step *= 2.0;
                hi = center + step;
            }
            Err(Error::BracketExpansion { target: "the upper confidence bound", doublings: MAX_DOUBLINGS })
        }
    }
}

/// Expands `[lo, hi]` outward by doubling until the function changes sign,
/// checking on the way that it never decreases with its argument.
fn bracket_root(
    g: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    target: &'static str,
) -> Result<(f64, f64), Error> {
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    if g_lo > g_hi {
        return Err(Error::NonMonotoneGradient { at: lo, next: hi });
    }
    let mut doublings = 0;
    while g_lo > 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BracketExpansion { target, doublings });
        }
        doublings += 1;
        let next = lo * 2.0;
        let g_next = g(next);
        if g_next > g_lo {
            return Err(Error::NonMonotoneGradient { at: next, next: lo });
        }
        lo = next;
        g_lo = g_next;
    }
    let mut doublings = 0;
    while g_hi < 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BracketExpansion { target, doublings });
        }
        doublings += 1;
        let next = hi * 2.0;
        let g_next = g(next);
        if g_next < g_hi {
            return Err(Error::NonMonotoneGradient { at: hi, next });
        }
        hi = next;
        g_hi = g_next;
    }
    Ok((lo, hi))
}

/// Bisection for an increasing function with `f(lo) <= 0 <= f(hi)`.
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64, Error> {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ACTION_TOLERANCE * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// [`bisect`] for a fallible increasing function.
fn bisect_result(
    f: &impl Fn(f64) -> Result<f64, Error>,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64, Error> {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ACTION_TOLERANCE * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule;
    use proptest::prelude::*;

    fn j(action: f64, confidence: f64) -> Judgment {
        Judgment::new(action, confidence).unwrap()
    }

    /// Loss `-a*theta + a^4/4`: gradient `-theta + a^3`, cross `-1`.
    fn quartic() -> LossModel<impl Fn(f64, f64) -> f64, impl Fn(f64, f64) -> f64> {
        LossModel::new(|theta, a| -theta + a * a * a, |_, _| -1.0, 1.0).unwrap()
    }

    /// Independent bisection for the quartic boundary action: solves
    /// `a^3 = theta + q` on [0, 2] without the production root finder.
    fn quartic_boundary_oracle(theta: f64, q: f64) -> f64 {
        let target = theta + q;
        let (mut lo, mut hi) = (0.0f64, 2.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid * mid < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quadratic_model_matches_the_closed_form_rule() {
        let model = quadratic();
        let outcome = decide_general(3.0, &j(0.0, 0.05), &model).unwrap();
        let closed = rule::decide(3.0, &j(0.0, 0.05));
        assert!((outcome.action - closed.action).abs() < 1e-9);
        assert_eq!(outcome.rejected, closed.rejected);
        assert!((outcome.ci_lower - closed.ci_lower).abs() < 1e-9);
        assert!((outcome.ci_upper - closed.ci_upper).abs() < 1e-9);
    }

    #[test]
    fn quartic_example_matches_the_bisection_oracle() {
        let model = quartic();
        let outcome = decide_general(3.0, &j(0.0, 0.05), &model).unwrap();
        let q = crate::normal::quantile(0.025).unwrap();
        let oracle = quartic_boundary_oracle(3.0, q);
        assert!(outcome.rejected);
        assert!((outcome.action - oracle).abs() < 1e-6);
        // The frozen constant is cbrt(3 + quantile(0.025)) in extended precision.
        assert!((oracle - 1.0131710990063063).abs() < 1e-9);
        assert!((outcome.action - 1.0131710990063063).abs() < 1e-9);
    }

    #[test]
    fn quartic_boundary_action_is_found_within_the_scan_cell() {
        let model = quartic();
        let q = crate::normal::quantile(0.025).unwrap();
        let outcome = decide_general(3.0, &j(0.0, 0.05), &model).unwrap();
        // Fine-grid scan for the sign change of statistic(a) - q.
        let step = 1e-4;
        let mut cell = None;
        let mut a = 0.0;
        while a < 2.0 {
            let here = model.statistic(3.0, a).unwrap() - q;
            let there = model.statistic(3.0, a + step).unwrap() - q;
            if here <= 0.0 && there > 0.0 {
                cell = Some(a);
                break;
            }
            a += step;
        }
        let cell = cell.expect("scan must find the crossing");
        assert!(outcome.action >= cell - step && outcome.action <= cell + 2.0 * step);
    }

    #[test]
    fn inside_the_region_the_judgment_is_returned_bitwise() {
        let model = quartic();
        let outcome = decide_general(1.0, &j(1.0, 0.05), &model).unwrap();
        assert_eq!(outcome.action, 1.0);
        assert!(!outcome.rejected);
        assert_eq!(outcome.displacement, 0.0);
    }

    #[test]
    fn ml_action_solves_the_gradient_root() {
        assert!((ml_action(2.0, &quadratic()).unwrap() - 2.0).abs() < 1e-10);
        assert!((ml_action(8.0, &quartic()).unwrap() - 2.0).abs() < 1e-10);
        assert!(ml_action(0.0, &quartic()).unwrap().abs() < 1e-10);
        assert!((ml_action(-8.0, &quartic()).unwrap() + 2.0).abs() < 1e-10);
    }

    #[test]
    fn bounded_gradient_cannot_be_bracketed() {
        let model = LossModel::new(|theta: f64, a: f64| a.tanh() - theta, |_, _| -1.0, 1.0).unwrap();
        match ml_action(2.0, &model) {
            Err(Error::BracketExpansion { .. }) => {}
            other => panic!("expected a bracket failure, got {other:?}"),
        }
    }

    #[test]
    fn oscillating_gradient_is_reported_as_non_convex() {
        let model = LossModel::new(|theta: f64, a: f64| a.sin() - theta, |_, _| -1.0, 1.0).unwrap();
        match ml_action(2.0, &model) {
            Err(Error::NonMonotoneGradient { .. }) => {}
            other => panic!("expected a convexity violation, got {other:?}"),
        }
    }

    #[test]
    fn vanishing_cross_derivative_is_rejected() {
        let model = LossModel::new(|theta: f64, a: f64| -theta + a, |_, _| 0.0, 1.0).unwrap();
        assert!(matches!(
            decide_general(1.0, &j(0.0, 0.05), &model),
            Err(Error::DegenerateCross { .. })
        ));
    }

    #[test]
    fn invalid_standard_error_is_rejected() {
        assert!(LossModel::new(|t: f64, a: f64| -t + a, |_, _| -1.0, 0.0).is_err());
        assert!(LossModel::new(|t: f64, a: f64| -t + a, |_, _| -1.0, f64::NAN).is_err());
    }

    proptest! {
        /// On the quadratic model the general machinery must reproduce the
        /// closed-form rule everywhere.
        #[test]
        fn quadratic_consistency(
            x in -20.0..20.0f64,
            anchor in -20.0..20.0f64,
            alpha in 0.01..0.99f64,
        ) {
            let model = quadratic();
            let general = decide_general(x, &j(anchor, alpha), &model).unwrap();
            let closed = rule::decide(x, &j(anchor, alpha));
            prop_assert!((general.action - closed.action).abs() < 1e-9);
            prop_assert_eq!(general.rejected, closed.rejected);
        }

        /// Whenever the quartic rule rejects, the standardized gradient at
        /// the returned action sits on the violated critical value.
        #[test]
        fn rejection_lands_on_the_critical_value(
            theta in -5.0..5.0f64,
            anchor in -2.0..2.0f64,
            alpha in 0.01..0.99f64,
        ) {
            let model = quartic();
            let outcome = decide_general(theta, &j(anchor, alpha), &model).unwrap();
            if outcome.rejected {
                let statistic = model.statistic(theta, outcome.action).unwrap();
                let q = if outcome.sample_gradient < 0.0 {
                    crate::normal::quantile(alpha / 2.0).unwrap()
                } else {
                    -crate::normal::quantile(alpha / 2.0).unwrap()
                };
                prop_assert!((statistic - q).abs() < 1e-8);
            } else {
                prop_assert_eq!(outcome.action, anchor);
            }
        }

        /// The decision stays between the judgment and the plug-in optimum.
        #[test]
        fn betweenness_on_the_quartic(
            theta in -5.0..5.0f64,
            anchor in -2.0..2.0f64,
            alpha in 0.01..0.99f64,
        ) {
            let model = quartic();
            let outcome = decide_general(theta, &j(anchor, alpha), &model).unwrap();
            let optimum = ml_action(theta, &model).unwrap();
            prop_assert!(outcome.action >= anchor.min(optimum) - 1e-9);
            prop_assert!(outcome.action <= anchor.max(optimum) + 1e-9);
        }
    }
}
