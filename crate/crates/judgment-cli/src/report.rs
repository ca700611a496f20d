//! File emission: CSV tables, the backtest text report, and the SVG chart.
//! Everything is formatted from plain values, so identical inputs always
//! produce identical bytes.

use std::fmt::Write as _;

use judgment::{BacktestResult, BoundCheck, SummaryStats, WeightMapping};

pub fn risk_csv(checks: &[BoundCheck]) -> String {
    let mut out = String::from("theta,mean_loss,se_loss,prob_worse,se_prob,reject_rate\n");
    for check in checks {
        let r = &check.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.theta, r.mean_loss, r.se_loss, r.prob_worse, r.se_prob, r.reject_rate
        );
    }
    out
}

pub fn backtest_csv(result: &BacktestResult) -> String {
    let mut out = String::from("date,xbar");
    for label in &result.labels {
        let _ = write!(out, ",action_{label},weight_{label},value_{label}");
    }
    out.push('\n');
    for record in &result.records {
        let _ = write!(out, "{},{}", record.date, record.xbar);
        for i in 0..result.labels.len() {
            let _ = write!(out, ",{},{},{}", record.actions[i], record.weights[i], record.values[i]);
        }
        out.push('\n');
    }
    out
}

pub fn summary_table(stats: &SummaryStats) -> String {
    format!(
        "obs       {}\n\
         mean      {:.6}\n\
         std dev   {:.6}\n\
         median    {:.6}\n\
         min       {:.6}\n\
         max       {:.6}\n",
        stats.obs, stats.mean, stats.std_dev, stats.median, stats.min, stats.max
    )
}

pub fn backtest_summary(
    result: &BacktestResult,
    stats: &SummaryStats,
    source: &str,
    weight_mapping: WeightMapping,
) -> String {
    let mapping = match weight_mapping {
        WeightMapping::MeanVariance => "mean_variance",
        WeightMapping::RawAction => "raw_action",
    };
    let mut out = String::from("backtest summary\n");
    let _ = writeln!(out, "prices          {source}");
    let _ = writeln!(out, "observations    {}", stats.obs);
    let _ = writeln!(out, "pre sample      {}", result.pre_sample);
    let _ = writeln!(out, "decisions       {}", result.records.len());
    let _ = writeln!(out, "sigma           {:.6}", result.sigma);
    let _ = writeln!(out, "weight mapping  {mapping}");
    let _ = writeln!(out, "initial cash    {:.6}", result.initial_cash);
    out.push('\n');
    let width = result.labels.iter().map(String::len).max().unwrap_or(4).max(4);
    let _ = writeln!(out, "{:<width$}  final value  total return  negative wealth", "rule");
    for summary in &result.summaries {
        let _ = writeln!(
            out,
            "{:<width$}  {:>11.6}  {:>12.6}  {}",
            summary.label,
            summary.final_value,
            summary.total_return,
            if summary.went_negative { "yes" } else { "no" }
        );
    }
    out
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

/// Self-contained wealth-path chart: one polyline per rule.
pub fn backtest_svg(result: &BacktestResult) -> String {
    let (width, height) = (800.0, 420.0);
    let (left, right, top, bottom) = (70.0, 780.0, 50.0, 380.0);
    let n = result.records.len();

    let mut lo = result.initial_cash;
    let mut hi = result.initial_cash;
    for record in &result.records {
        for &v in &record.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = 0.05 * (hi - lo).max(1e-9);
    let (lo, hi) = (lo - pad, hi + pad);

    let x_at = |i: usize| {
        if n <= 1 {
            left
        } else {
            left + (right - left) * i as f64 / (n - 1) as f64
        }
    };
    let y_at = |v: f64| bottom - (bottom - top) * (v - lo) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");

    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = y_at(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{left}\" y1=\"{y:.2}\" x2=\"{right}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(svg, "<text x=\"8\" y=\"{:.2}\" fill=\"#333333\">{v:.1}</text>", y + 4.0);
    }
    if let (Some(first), Some(last)) = (result.records.first(), result.records.last()) {
        let _ = writeln!(
            svg,
            "<text x=\"{left}\" y=\"{}\" fill=\"#333333\">{}</text>",
            bottom + 20.0,
            first.date
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" fill=\"#333333\" text-anchor=\"end\">{}</text>",
            right,
            bottom + 20.0,
            last.date
        );
    }

    for (r, label) in result.labels.iter().enumerate() {
        let color = PALETTE[r % PALETTE.len()];
        let mut points = String::new();
        for (i, record) in result.records.iter().enumerate() {
            let _ = write!(points, "{:.2},{:.2} ", x_at(i), y_at(record.values[r]));
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            points.trim_end()
        );
        let ly = 20.0 + 16.0 * r as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{left}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
             stroke-width=\"3\"/>",
            left + 24.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" fill=\"#333333\">{label}</text>",
            left + 30.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
