use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller supplied inconsistent or out-of-range arguments.
    #[error("invalid input: {0}")]
    Usage(String),

    /// The configuration lies on the collinear locus where the potential is infinite.
    #[error("singular configuration: |area| / I = {ratio:e} is below the collinearity tolerance")]
    SingularConfiguration { ratio: f64 },

    /// A specific triple of an N-gon is collinear.
    #[error("singular configuration: triple ({}, {}, {}) is collinear (|area| / I = {ratio:e})", triple[0], triple[1], triple[2])]
    CollinearTriple { triple: [usize; 3], ratio: f64 },

    /// Two bodies coincide, where the strong-force potential is infinite.
    #[error("singular configuration: bodies {} and {} collide", pair[0], pair[1])]
    Collision { pair: [usize; 2] },

    #[error("degenerate shape: the zero shape vector has no triangle")]
    DegenerateShape,

    #[error("shape on the collinear equator: {0}")]
    DegenerateStart(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("no unique vertical plane through the given shapes")]
    AmbiguousPlane,

    #[error("degenerate plane fit: all points share the same horizontal projection")]
    DegenerateFit,

    #[error("{side} endpoint unavailable: that side ended by {reason}")]
    EndpointUnavailable { side: &'static str, reason: String },

    #[error("degenerate 2-plane: angle between vectors is {angle:e} rad")]
    DegeneratePlane { angle: f64 },

    #[error("point lies on the deleted hyperplane of the chart")]
    Chart,
}

impl Error {
    /// True for argument errors, as opposed to errors raised by the mathematics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_))
    }
}
