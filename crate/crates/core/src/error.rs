use thiserror::Error;

pub type Result<T, E = MrfError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MrfError {
    #[error("invalid {space} point: {reason}")]
    InvalidPoint { space: &'static str, reason: String },

    #[error("sample {index}: {source}")]
    InvalidSample {
        index: usize,
        #[source]
        source: Box<MrfError>,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("member mask is empty")]
    EmptyMask,

    #[error("center {0} is not a member of the mask")]
    CenterNotInMask(usize),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("all forest weights are zero for this query")]
    DegenerateWeights,

    #[error("{solver} did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("points are antipodal; logarithm undefined on the cut locus")]
    CutLocus,

    #[error("samples do not lie in an open hemisphere (pairwise distance {0})")]
    NotInHemisphere(f64),

    #[error("split search failed at feature {feature}, threshold {threshold}: {source}")]
    Split {
        feature: usize,
        threshold: f64,
        #[source]
        source: Box<MrfError>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data generation failed: {0}")]
    Generation(String),

    #[error("malformed dataset file, line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MrfError {
    pub(crate) fn invalid(space: &'static str, reason: impl Into<String>) -> Self {
        MrfError::InvalidPoint {
            space,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_sample(self, index: usize) -> Self {
        MrfError::InvalidSample {
            index,
            source: Box::new(self),
        }
    }
}
