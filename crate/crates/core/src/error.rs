use alloc::string::String;
use core::fmt;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Inversion of a quaternion whose norm is below the inversion floor.
    ZeroDivision { norm: f64 },
    /// Evaluation too close to the pole sphere of a kernel.
    Pole { distance: f64, guard: f64 },
    /// Point or parameter outside the domain of a function.
    Domain(String),
    /// An adaptive scheme exhausted its refinement budget.
    NonConvergence(String),
    /// Invalid construction or call parameters.
    Param(String),
    /// A finite coefficient window could not decide the requested property.
    Undecidable(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroDivision { norm } => write!(f, "division by a quaternion of norm {norm:e}"),
            Error::Pole { distance, guard } => {
                write!(f, "pole: distance {distance:e} to the pole sphere is below the guard {guard:e}")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NonConvergence(msg) => write!(f, "no convergence: {msg}"),
            Error::Param(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Undecidable(msg) => write!(f, "undecidable: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::Error::Param(alloc::format!($($arg)*)) };
}
macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
#[allow(unused_imports)]
pub(crate) use {domain_err, param_err};
