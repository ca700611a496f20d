use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("{what} must lie in [0, 1], got {value}")]
    ProbabilityRange { what: &'static str, value: f64 },

    #[error("prior variance must be positive and finite, got {value}")]
    PriorVariance { value: f64 },

    #[error("{what} must be positive and finite, got {value}")]
    NonPositiveScale { what: &'static str, value: f64 },

    #[error("cross derivative vanishes near action {action}; the standardized statistic is undefined there")]
    DegenerateCross { action: f64 },

    #[error("could not bracket a sign change for {target} after {doublings} doublings")]
    BracketExpansion { target: &'static str, doublings: u32 },

    #[error("loss gradient is not increasing between actions {at} and {next}; the loss is not strictly convex")]
    NonMonotoneGradient { at: f64, next: f64 },

    #[error("draw count must be at least 1")]
    NoDraws,

    #[error("student-t noise needs at least 3 degrees of freedom, got {dof}")]
    StudentTDof { dof: u32 },

    #[error("{what} must contain at least one point")]
    EmptyGrid { what: &'static str },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: expected `{expected}`, got `{got}`")]
    CsvHeader { line: usize, expected: &'static str, got: String },

    #[error("line {line}: {message}")]
    CsvRow { line: usize, message: String },

    #[error("line {line}: close must be positive, got {value}")]
    NonPositiveClose { line: usize, value: f64 },

    #[error("dates must be strictly increasing ({previous} is not before {current})")]
    DateOrder { previous: String, current: String },

    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("returns have zero variance; the transform divides by the sample deviation")]
    ZeroVariance,

    #[error("initial cash must be positive and finite, got {value}")]
    InitialCash { value: f64 },

    #[error("a backtest needs at least one decision rule")]
    NoRules,

    #[error("pre-sample window must cover at least 2 observations, got {got}")]
    EmptyPreSample { got: usize },

    #[error("bet must lie in 0..=100, got {value}")]
    BetRange { value: u32 },

    #[error("confidence {alpha} is not a whole bet in 0..=100 hundredths")]
    BetGrid { alpha: f64 },

    #[error("no valid bet after {attempts} attempts")]
    BetAttemptsExhausted { attempts: u32 },

    #[error("input closed before a bet was entered")]
    InputClosed,
}
