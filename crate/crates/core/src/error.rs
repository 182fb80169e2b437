use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{field}: expected length {expected}, found {found}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("point index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("an election needs two distinct candidates, got {0} twice")]
    SameCandidate(usize),
    #[error("indices must be distinct")]
    IndicesNotDistinct,
    #[error("negative distance {value} at ({i}, {j})")]
    NegativeDistance { i: usize, j: usize, value: f64 },
    #[error("positions must be strictly increasing (violated at index {index})")]
    NonIncreasingPositions { index: usize },
    #[error("degenerate median: cumulative mass reaches exactly 1/2 after point {index}")]
    DegenerateMedian { index: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{name} = {value} outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("non-positive cost {value} at point {index}")]
    NonPositiveCost { index: usize, value: f64 },
    #[error("grid scan needs {required} evaluations, above the cap of {cap}")]
    TooManyEvaluations { required: u128, cap: u128 },
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    lo_open: bool,
    hi_open: bool,
    domain: &'static str,
) -> Result<()> {
    let above = if lo_open { value > lo } else { value >= lo };
    let below = if hi_open { value < hi } else { value <= hi };
    if above && below {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name,
            value,
            domain,
        })
    }
}
