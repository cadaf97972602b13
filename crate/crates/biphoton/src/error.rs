use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `find_ep` was asked for a coalescence point off the Δ3 = 0 plane,
    /// where no real Ω3 closes the splitting. Carries the smallest |Ω_e|
    /// attained along the scan.
    #[error("no eigenvalue coalescence for delta3 != 0; min |omega_e| attained = {min_splitting}")]
    NoCoalescence { min_splitting: f64 },

    #[error("singular parameter combination: {0}")]
    SingularParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("waveform is not in the expected regime: {0}")]
    WrongRegime(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("no signal detected: {0}")]
    NoSignal(String),

    /// Fit did not converge; carries the best parameters found so far.
    #[error("fit failed to converge: {reason}")]
    FitFailure {
        reason: String,
        best_so_far: Box<crate::fitting::FitResult>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
