use alloc::string::String;
use core::fmt;

/// Errors raised by operations whose preconditions are not met.
///
/// Validation of user data does not go through this type; see
/// [`ValidationReport`](crate::ValidationReport).
#[derive(Clone, Debug, PartialEq)]
pub enum SscError {
    /// The weight function has no timestep in its support.
    EmptyWeightSupport,
    /// A weight specification or weight vector is malformed.
    InvalidWeight(String),
    /// An expected-cost evaluation was requested without a cost matrix.
    MissingCostMatrix,
    /// Objective, optimizer or sampling configuration is unusable.
    Config(String),
    /// A function argument is out of its domain.
    Argument(String),
    /// Exhaustive enumeration was requested for too many states.
    SizeGuard { states: usize, limit: usize },
    /// The identity compression has a zero objective, so ratios against it are undefined.
    DegenerateBaseline,
    /// No corpus example carries this name.
    UnknownExample(String),
}

impl fmt::Display for SscError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SscError::EmptyWeightSupport => write!(f, "weight function has empty support"),
            SscError::InvalidWeight(msg) => write!(f, "invalid weight: {msg}"),
            SscError::MissingCostMatrix => {
                write!(f, "expected accuracy cost requires an observable cost matrix")
            }
            SscError::Config(msg) => write!(f, "configuration error: {msg}"),
            SscError::Argument(msg) => write!(f, "invalid argument: {msg}"),
            SscError::SizeGuard { states, limit } => write!(
                f,
                "exhaustive enumeration limited to {limit} states (got {states}); use the anneal method"
            ),
            SscError::DegenerateBaseline => {
                write!(f, "identity compression has zero objective; ratio undefined")
            }
            SscError::UnknownExample(name) => write!(
                f,
                "unknown example `{name}` (expected one of SWAP2, IID4, LUMP4, CYL, RING8)"
            ),
        }
    }
}

impl core::error::Error for SscError {}
