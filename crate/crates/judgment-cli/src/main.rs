//! Command-line front end: decide, risk sweeps, backtests, synthetic data,
//! and the urn elicitation, with deterministic reports.

mod report;

use std::io::{stdin, stdout};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use judgment::{
    decide, elicit_interactive, load_prices, risk_bound_sweep, run_backtest, summary_stats,
    synth_prices, theta_grid, to_log_returns, BacktestConfig, Error, Judgment, McSettings, Rule,
    WeightMapping,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "judgment",
    version,
    about = "Decision rules that move a judgmental action only as far as the evidence demands"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a judgment against one standardized observation
    Decide(DecideArgs),
    /// Sweep the risk bound of the judgment rule over a parameter grid
    Risk(RiskArgs),
    /// Run decision rules through a monthly price history
    Backtest(BacktestArgs),
    /// Generate a synthetic monthly price history with exact sample moments
    Synth(SynthArgs),
    /// Elicit a confidence level with the two-urn experiment
    Elicit,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let value: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(format!("confidence must lie in [0, 1], got {value}"));
    }
    Ok(value)
}

#[derive(Args)]
struct DecideArgs {
    /// Observed statistic
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    /// Judgmental action
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    judgment: f64,
    /// Confidence level in [0, 1]
    #[arg(long, value_parser = parse_alpha, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct RiskArgs {
    /// Judgmental action
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    judgment: f64,
    /// Confidence level in [0, 1]
    #[arg(long, value_parser = parse_alpha, default_value_t = 0.05)]
    alpha: f64,
    /// Parameter grid as start:stop:step
    #[arg(long, default_value = "-3:3:0.25", allow_hyphen_values = true)]
    grid: String,
    /// Monte Carlo draws per grid point
    #[arg(long, default_value_t = 1_000_000)]
    draws: u64,
    /// Base seed; chunk seeds derive from it
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Run chunks on one thread (the output bits are identical either way)
    #[arg(long)]
    serial: bool,
    /// Directory for risk.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum WeightArg {
    MeanVariance,
    RawAction,
}

#[derive(Args)]
struct BacktestArgs {
    /// Monthly date,close CSV file
    #[arg(long)]
    prices: PathBuf,
    /// Judgmental action in the transformed space
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    judgment: f64,
    /// Confidence level in [0, 1]
    #[arg(long, value_parser = parse_alpha, default_value_t = 0.05)]
    alpha: f64,
    /// Comma list of rules: judgment, ml, bayes[:mean:var], fixed:<action>
    #[arg(long, default_value = "judgment,ml,bayes")]
    rules: String,
    /// Months reserved before the first decision
    #[arg(long, default_value_t = 84)]
    pre_sample: usize,
    #[arg(long, default_value_t = 100.0)]
    initial_cash: f64,
    /// How actions map to portfolio weights
    #[arg(long, value_enum, default_value_t = WeightArg::MeanVariance)]
    weight_mapping: WeightArg,
    /// Also write backtest.svg
    #[arg(long)]
    svg: bool,
    /// Directory for backtest.csv, backtest_summary.txt, backtest.svg
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of monthly return observations (prices get one more row)
    #[arg(long, default_value_t = 206)]
    months: usize,
    /// Sample mean of the log returns, hit exactly
    #[arg(long, default_value_t = -0.0006, allow_hyphen_values = true)]
    mean: f64,
    /// Sample standard deviation of the log returns, hit exactly
    #[arg(long, default_value_t = 0.0557)]
    std: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory for prices.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

enum CliError {
    /// Bad flag combinations or unparseable specs: exit 2.
    Usage(String),
    /// Invalid interactive input: exit 2.
    Input(Error),
    /// Data and validation failures: exit 3.
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Usage(message) => {
                eprintln!("error: {message}");
                ExitCode::from(2)
            }
            CliError::Input(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            CliError::Data(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => err.report(),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Decide(args) => run_decide(args),
        Command::Risk(args) => run_risk(args),
        Command::Backtest(args) => run_backtest_cmd(args),
        Command::Synth(args) => run_synth(args),
        Command::Elicit => run_elicit(),
    }
}

fn run_decide(args: DecideArgs) -> Result<ExitCode, CliError> {
    println!(
        "judgment {VERSION} decide x={} judgment={} alpha={}",
        args.x, args.judgment, args.alpha
    );
    let judgment = Judgment::new(args.judgment, args.alpha)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if !args.x.is_finite() {
        return Err(CliError::Usage(format!("x must be finite, got {}", args.x)));
    }
    let outcome = decide(args.x, &judgment);
    println!("action        {:.6}", outcome.action);
    println!("rejected      {}", if outcome.rejected { "yes" } else { "no" });
    println!(
        "branch        {}",
        match outcome.branch {
            judgment::Branch::Minus => "minus",
            judgment::Branch::Plus => "plus",
        }
    );
    println!("ci            [{:.6}, {:.6}]", outcome.ci_lower, outcome.ci_upper);
    println!("gradient      {:.6}", outcome.sample_gradient);
    println!("displacement  {:.6}", outcome.displacement);
    let json = serde_json::to_string(&outcome).expect("decision outcomes serialize");
    println!("json {json}");
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("grid must be start:stop:step, got `{spec}`")));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|e| CliError::Usage(format!("bad grid `{spec}`: {e}")))?;
    theta_grid(nums[0], nums[1], nums[2]).map_err(|e| CliError::Usage(e.to_string()))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(Error::from)?;
    Ok(path)
}

fn run_risk(args: RiskArgs) -> Result<ExitCode, CliError> {
    println!(
        "judgment {VERSION} risk judgment={} alpha={} grid={} draws={} seed={} serial={} out={}",
        args.judgment,
        args.alpha,
        args.grid,
        args.draws,
        args.seed,
        args.serial,
        args.out.display()
    );
    let judgment = Judgment::new(args.judgment, args.alpha)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = parse_grid(&args.grid)?;
    let settings = McSettings {
        draws: args.draws,
        seed: args.seed,
        parallel: !args.serial,
        ..McSettings::default()
    };
    let checks = risk_bound_sweep(&judgment, &grid, &settings)?;

    let path = write_file(&args.out, "risk.csv", &report::risk_csv(&checks))?;
    let mut violations = 0usize;
    for check in &checks {
        let r = &check.report;
        println!(
            "theta {:>9.6}  prob_worse {:.6}  limit {:.6}  reject_rate {:.6}  {}",
            r.theta,
            r.prob_worse,
            check.limit,
            r.reject_rate,
            if check.violated { "VIOLATED" } else { "ok" }
        );
        violations += usize::from(check.violated);
    }
    println!("wrote {}", path.display());
    if violations > 0 {
        println!("bound violated at {violations} of {} points", checks.len());
        Ok(ExitCode::from(1))
    } else {
        println!("bound holds at all {} points", checks.len());
        Ok(ExitCode::SUCCESS)
    }
}

fn parse_rules(spec: &str, judgment: &Judgment) -> Result<Vec<Rule>, CliError> {
    let mut rules = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        let mut parts = token.split(':');
        let head = parts.next().unwrap_or_default();
        let tail: Vec<&str> = parts.collect();
        let bad = |msg: String| CliError::Usage(format!("rule `{token}`: {msg}"));
        let parse = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("bad number `{s}`: {e}")));
        let rule = match (head, tail.as_slice()) {
            ("judgment", []) => Rule::Judgment(*judgment),
            ("ml", []) => Rule::MaximumLikelihood,
            ("bayes", []) => Rule::Bayes { prior_mean: 0.0, prior_var: 1.0 },
            ("bayes", [mean, var]) => {
                Rule::Bayes { prior_mean: parse(mean)?, prior_var: parse(var)? }
            }
            ("fixed", [action]) => Rule::Fixed(parse(action)?),
            _ => {
                return Err(bad(
                    "expected judgment, ml, bayes, bayes:<mean>:<var>, or fixed:<action>"
                        .to_string(),
                ))
            }
        };
        rules.push(rule);
    }
    Ok(rules)
}

fn run_backtest_cmd(args: BacktestArgs) -> Result<ExitCode, CliError> {
    println!(
        "judgment {VERSION} backtest prices={} judgment={} alpha={} rules={} pre_sample={} \
         initial_cash={} weight_mapping={} svg={} out={}",
        args.prices.display(),
        args.judgment,
        args.alpha,
        args.rules,
        args.pre_sample,
        args.initial_cash,
        match args.weight_mapping {
            WeightArg::MeanVariance => "mean_variance",
            WeightArg::RawAction => "raw_action",
        },
        args.svg,
        args.out.display()
    );
    let judgment = Judgment::new(args.judgment, args.alpha)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rules = parse_rules(&args.rules, &judgment)?;
    let prices = load_prices(&args.prices)?;
    let returns = to_log_returns(&prices);
    let stats = summary_stats(&returns)?;
    let weight_mapping = match args.weight_mapping {
        WeightArg::MeanVariance => WeightMapping::MeanVariance,
        WeightArg::RawAction => WeightMapping::RawAction,
    };
    let config = BacktestConfig {
        pre_sample: args.pre_sample,
        initial_cash: args.initial_cash,
        weight_mapping,
    };
    let result = run_backtest(&returns, &rules, &config)?;

    let summary = report::backtest_summary(
        &result,
        &stats,
        &args.prices.display().to_string(),
        weight_mapping,
    );
    print!("{summary}");
    let csv_path = write_file(&args.out, "backtest.csv", &report::backtest_csv(&result))?;
    let txt_path = write_file(&args.out, "backtest_summary.txt", &summary)?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", txt_path.display());
    if args.svg {
        let svg_path = write_file(&args.out, "backtest.svg", &report::backtest_svg(&result))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_synth(args: SynthArgs) -> Result<ExitCode, CliError> {
    println!(
        "judgment {VERSION} synth months={} mean={} std={} seed={} out={}",
        args.months,
        args.mean,
        args.std,
        args.seed,
        args.out.display()
    );
    let prices = synth_prices(args.months, args.mean, args.std, args.seed)?;
    let stats = summary_stats(&to_log_returns(&prices))?;
    print!("{}", report::summary_table(&stats));
    let path = write_file(&args.out, "prices.csv", &judgment::prices_to_csv(&prices))?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_elicit() -> Result<ExitCode, CliError> {
    println!("judgment {VERSION} elicit");
    let mut input = stdin().lock();
    let mut output = stdout();
    let alpha = elicit_interactive(&mut input, &mut output).map_err(|e| match e {
        Error::Io(_) => CliError::Data(e),
        other => CliError::Input(other),
    })?;
    println!("use it as: judgment decide --x <observation> --alpha {alpha}");
    Ok(ExitCode::SUCCESS)
}
