use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate chain: a = b = 0 leaves the stationary distribution undefined")]
    DegenerateChain,

    #[error("invalid probability for `{name}`: {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid dispersion: alpha + beta must equal 1/2 (alpha = {alpha}, beta = {beta})")]
    InvalidDispersion { alpha: f64, beta: f64 },

    #[error("invalid xi = {0}: must lie strictly between 0 and 1/4")]
    InvalidXi(f64),

    #[error("invalid Gaussian dispersion: alpha and beta must be positive (alpha = {alpha}, beta = {beta})")]
    InvalidGaussian { alpha: f64, beta: f64 },

    #[error("step count must be at least 1")]
    ZeroSteps,

    #[error("invalid step distribution: {0}")]
    InvalidStepDistribution(String),

    #[error("convolution support of {needed} points exceeds the budget of {budget}")]
    SupportOverflow { needed: u64, budget: u64 },

    #[error("convolution table holds {depth} layers but the occupation law needs {needed}")]
    TableTooShallow { depth: usize, needed: usize },

    #[error("all mass is atomic (f_n(0) = 1); the conditional variance is undefined")]
    AllMassAtomic,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
