use thiserror::Error;

/// Errors raised by kernel construction, evaluation and the verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {re}+{im}i lies outside the admissible domain ({domain})")]
    PointOutsideDomain { re: f64, im: f64, domain: String },

    #[error("truncation tail bound {tail:e} exceeds tolerance {limit:e}; increase the truncation window")]
    TruncationTailTooLarge { tail: f64, limit: f64 },

    #[error("jet order ({p},{q}) is not supported by this kernel (max {max})")]
    UnsupportedJetOrder { p: usize, q: usize, max: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("kernel vanishes near the normalization center (|K(z,center)| = {value:e})")]
    KernelVanishesNearCenter { value: f64 },

    #[error("Moebius center must lie in the open unit disc (|a| = {modulus})")]
    CenterOutsideDisc { modulus: f64 },

    #[error("degenerate kernel: K(w,w) = {value:e}")]
    DegenerateKernel { value: f64 },

    #[error("metric matrix is singular or not positive definite")]
    SingularMetric,

    #[error("jet Gram matrix is singular (operator is not locally in the Cowen-Douglas class)")]
    SingularGram,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("jet Gram matrix must have an identity leading block (normalize the frame first)")]
    NormalizationMissing,

    #[error("Gram matrix condition number {cond:e} exceeds the limit {limit:e}")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("input matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NonHermitianInput { asymmetry: f64 },

    #[error("operator is not a contraction: {0}")]
    NotAContraction(String),

    #[error("hypothesis failed at step `{step}`: {detail}")]
    HypothesisFailed { step: String, detail: String },

    #[error("truncation residual {residual:e} too large for the requested order {order}")]
    TruncationInsufficient { residual: f64, order: usize },

    #[error("degenerate jet: {0}")]
    DegenerateJet(String),

    #[error("quadrature failed to converge on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("point outside the unit ball (norm {norm})")]
    PointOutsideBall { norm: f64 },

    #[error("point outside the unit polydisc (max modulus {max_modulus})")]
    PointOutsidePolydisc { max_modulus: f64 },

    #[error("point outside the annulus r < |z| < 1 (|z| = {modulus}, r = {r})")]
    PointOutsideAnnulus { modulus: f64, r: f64 },

    #[error("weight is not log-harmonic (fit residual {residual:e})")]
    NotLogHarmonic { residual: f64 },

    #[error("invalid specification field `{field}`: {message}")]
    Spec { field: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn spec(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable name of the variant, used in structured diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::PointOutsideDomain { .. } => "PointOutsideDomain",
            Error::TruncationTailTooLarge { .. } => "TruncationTailTooLarge",
            Error::UnsupportedJetOrder { .. } => "UnsupportedJetOrder",
            Error::InvalidKernel(_) => "InvalidKernel",
            Error::KernelVanishesNearCenter { .. } => "KernelVanishesNearCenter",
            Error::CenterOutsideDisc { .. } => "CenterOutsideDisc",
            Error::DegenerateKernel { .. } => "DegenerateKernel",
            Error::SingularMetric => "SingularMetric",
            Error::SingularGram => "SingularGram",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::NormalizationMissing => "NormalizationMissing",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonHermitianInput { .. } => "NonHermitianInput",
            Error::NotAContraction(_) => "NotAContraction",
            Error::HypothesisFailed { .. } => "HypothesisFailed",
            Error::TruncationInsufficient { .. } => "TruncationInsufficient",
            Error::DegenerateJet(_) => "DegenerateJet",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::PointOutsideBall { .. } => "PointOutsideBall",
            Error::PointOutsidePolydisc { .. } => "PointOutsidePolydisc",
            Error::PointOutsideAnnulus { .. } => "PointOutsideAnnulus",
            Error::NotLogHarmonic { .. } => "NotLogHarmonic",
            Error::Spec { .. } => "Spec",
        }
    }
}
