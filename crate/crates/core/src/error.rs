use alloc::boxed::Box;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Which coordinate of a junction left its admissible box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Time,
    Angle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of a function.
    Domain { what: &'static str, value: f64 },
    /// Segment too short for the certified inner solver.
    SegmentTooShort { delta: f64, min: f64 },
    /// Perturbation larger than the contraction threshold of a segment.
    ThresholdExceeded { mu: f64, mu0: f64 },
    /// Quasi-Newton iterate left the certified ball.
    LeftBall { iteration: usize, norm: f64, radius: f64 },
    /// Quasi-Newton did not reach tolerance.
    NotConverged { iterations: usize, step: f64 },
    /// Smallest eigenvalue of the frozen Jacobian below its lower bound.
    EigenBound { lambda: f64, bound: f64 },
    /// Frequencies do not share a Diophantine window.
    Window { omega_i: f64, omega_f: f64 },
    /// Skeleton search for a return time ran out.
    SearchExhausted { index: usize, cap: usize },
    /// Malformed chain or point.
    InvalidChain(&'static str),
    /// A junction moved outside its box around the skeleton.
    BoxViolation { junction: usize, coordinate: Coordinate, displacement: f64 },
    /// Error raised while processing one segment.
    Segment { index: usize, source: Box<Error> },
}

impl Error {
    pub fn in_segment(self, index: usize) -> Error {
        Error::Segment { index, source: Box::new(self) }
    }

    /// Strips `Segment` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Segment { source, .. } => source.root(),
            e => e,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::SegmentTooShort { delta, min } => {
                write!(f, "segment length {delta} below minimum {min}")
            }
            Error::ThresholdExceeded { mu, mu0 } => {
                write!(f, "mu = {mu:e} exceeds contraction threshold mu0 = {mu0:e}")
            }
            Error::LeftBall { iteration, norm, radius } => write!(
                f,
                "iterate {iteration} left the certified ball (norm {norm:e} > {radius:e})"
            ),
            Error::NotConverged { iterations, step } => {
                write!(f, "no convergence after {iterations} iterations (last step {step:e})")
            }
            Error::EigenBound { lambda, bound } => {
                write!(f, "smallest eigenvalue {lambda:e} below bound {bound:e}")
            }
            Error::Window { omega_i, omega_f } => write!(
                f,
                "frequencies {omega_i} and {omega_f} do not lie in a common Diophantine window"
            ),
            Error::SearchExhausted { index, cap } => {
                write!(f, "no admissible return time for junction {index} within {cap} tries")
            }
            Error::InvalidChain(msg) => write!(f, "invalid chain: {msg}"),
            Error::BoxViolation { junction, coordinate, displacement } => write!(
                f,
                "junction {junction} left its box ({coordinate:?} displacement {displacement:e})"
            ),
            Error::Segment { index, source } => write!(f, "segment {index}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Segment { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
