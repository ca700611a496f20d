//! Decision rules that start from a judgmental action and move it only as
//! far as the evidence demands, keeping the probability of ending up worse
//! than the judgment under an explicit cap.
//!
//! The central object is a [`Judgment`]: the action a decision maker would
//! take without data, paired with a confidence level in `[0, 1]`. Given one
//! standardized observation, [`decide`] tests whether the judgment is
//! consistent with the data and, on rejection, moves to the nearest edge of
//! the acceptance region. The confidence level is the cap on the
//! probability that the move backfires: at `0.0` the data are ignored, at
//! `1.0` the observation is followed outright.
//!
//! ```
//! use judgment::{decide, Judgment};
//!
//! let judgment = Judgment::new(0.0, 0.05).unwrap();
//! let outcome = decide(3.0, &judgment);
//! assert!(outcome.rejected);
//! assert!((outcome.action - 1.0400360154599458).abs() < 1e-12);
//! ```
//!
//! The pieces:
//! - [`rule`]: the core rule under quadratic loss, its test function, and
//!   the plug-in, posterior-mean, and fixed benchmark rules.
//! - [`convex`]: the same rule for any strictly convex loss, by
//!   root-finding on the standardized gradient.
//! - [`normal`]: the standard normal kernels everything rests on, written
//!   out in full so results reproduce bit-for-bit everywhere.
//! - [`risk`]: a seeded, chunked Monte Carlo lab for risk functions,
//!   rejection rates, and rule comparisons.
//! - [`backtest`]: an expanding-window asset-allocation exercise on
//!   monthly prices, with a synthetic-data generator.
//! - [`elicit`]: a two-urn betting experiment that maps a bet to a
//!   confidence level.
//!
//! The guide under `book/` develops the ideas chapter by chapter; every
//! code block in it compiles and runs as a doctest of this crate.

pub mod backtest;
pub mod convex;
pub mod elicit;
mod error;
pub mod normal;
pub mod risk;
pub mod rule;

pub use backtest::{
    load_prices, parse_prices, prices_to_csv, run_backtest, summary_stats, synth_prices,
    to_log_returns, window_stat, BacktestConfig, BacktestRecord, BacktestResult, PriceSeries,
    ReturnSeries, RuleSummary, SummaryStats, WeightMapping, WindowStats,
};
pub use convex::{decide_general, ml_action, quadratic, LossModel};
pub use elicit::{alpha_to_bet, bet_table, bet_to_alpha, elicit_interactive, Bet};
pub use error::Error;
pub use risk::{
    dominance_check, mc_risk, power_sweep, risk_bound_sweep, theta_grid, BoundCheck,
    DominancePoint, DominanceReport, Favored, McSettings, Noise, PowerPoint, RiskReport,
};
pub use rule::{
    decide, decide_bayes, decide_ml, test_judgment, test_judgment_randomized, Branch,
    DecisionOutcome, Judgment, Rule, TestResult,
};

#[cfg(doctest)]
mod book {
    //! Every code block in the guide runs as a doctest here, so the book
    //! can never drift from the library.

    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}

    #[doc = include_str!("../../../book/src/decision-rule.md")]
    mod decision_rule {}

    #[doc = include_str!("../../../book/src/statistical-risk.md")]
    mod statistical_risk {}

    #[doc = include_str!("../../../book/src/general-losses.md")]
    mod general_losses {}

    #[doc = include_str!("../../../book/src/risk-lab.md")]
    mod risk_lab {}

    #[doc = include_str!("../../../book/src/backtest.md")]
    mod backtest_chapter {}

    #[doc = include_str!("../../../book/src/elicitation.md")]
    mod elicitation {}

    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}

    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
