use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular kernel: evaluation point within {radius:e} of a source")]
    Singularity { radius: f64 },

    #[error("outside the fluid domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("finite-difference step too large: {0}")]
    StepTooLarge(String),

    #[error("inadmissible state: {}", .0.join("; "))]
    Inadmissible(Vec<String>),

    #[error("not locally controllable: bracket rank {rank} < 5 at the start state; {detail}")]
    NotLocallyControllable { rank: usize, detail: String },

    #[error("invalid argument: {0}")]
    Argument(String),
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Singularity { .. } => "singularity",
            Error::Domain(_) => "domain",
            Error::Configuration(_) => "configuration",
            Error::Degenerate(_) => "degenerate",
            Error::Consistency(_) => "consistency",
            Error::StepTooLarge(_) => "step_too_large",
            Error::Inadmissible(_) => "inadmissible",
            Error::NotLocallyControllable { .. } => "not_locally_controllable",
            Error::Argument(_) => "argument",
        }
    }
}
