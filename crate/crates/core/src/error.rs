use thiserror::Error;

/// Errors raised by grid construction, field validation and the evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid dimension {0} unsupported (expected 2 for 1+1 or 4 for 3+1)")]
    UnsupportedDimension(usize),

    #[error("axis {axis}: {points} points given, at least 5 required")]
    TooFewPoints { axis: usize, points: usize },

    #[error("axis {axis}: extent must be finite and positive, got {extent}")]
    InvalidExtent { axis: usize, extent: f64 },

    #[error("invalid metric signature {0:?}: entries must be nonzero with exactly one positive")]
    InvalidMetric(Vec<f64>),

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite sample at grid index {index:?}")]
    NonFinite { index: Vec<usize> },

    #[error("expected a {expected} vector field")]
    VarianceMismatch { expected: &'static str },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("density {value:e} below floor {floor:e} at grid index {index:?}")]
    DensityBelowFloor {
        index: Vec<usize>,
        value: f64,
        floor: f64,
    },

    #[error("wavefunction node (|phi|^2 = {value:e}) at grid index {index:?}")]
    Node { index: Vec<usize>, value: f64 },

    #[error("quantum potential requires mass > 0")]
    MassRequired,

    #[error("exp(Q) overflows: max Q = {max_q}")]
    Overflow { max_q: f64 },

    #[error("|1 - Q| < {threshold:e} at {} points (first at {:?})", locus.len(), locus.first())]
    SingularLocus { threshold: f64, locus: Vec<Vec<f64>> },

    #[error("{quantity} vanishes or changes sign near x = {x}; split the domain there")]
    SingularCrossing { quantity: &'static str, x: f64 },

    #[error("anchor x0 = {x0} outside domain [{lo}, {hi}]")]
    AnchorOutsideDomain { x0: f64, lo: f64, hi: f64 },

    #[error("complex vacuum mass at {count} points; diagnostic mode required")]
    ComplexMass { count: usize },

    #[error("Ricci scalar {0} given; only flat constant-diagonal backgrounds are supported")]
    CurvedBackground(f64),

    #[error("spinor density has imaginary part {imag:e} at grid index {index:?}")]
    ImaginaryDensity { index: Vec<usize>, imag: f64 },

    #[error("spinor/gamma representation mismatch: {0}")]
    SpinorMismatch(&'static str),

    #[error("phase gradient required for {0} mode")]
    MissingPhaseGradient(&'static str),

    #[error("mass sequence invalid: {0}")]
    InvalidMassSequence(&'static str),

    #[error("eigen-decomposition failed: {0}")]
    Eigen(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
