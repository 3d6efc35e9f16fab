//! Crate-wide error type.
//!
//! Every fallible operation returns [`Error`]; the variants map directly to
//! the failure families of the library: geometry that does not sit on the
//! cell lattice, mismatched grids, arguments outside their domain, violated
//! analytic preconditions, and inputs too degenerate to process.

/// Errors produced by grid construction, modular evaluation, norm solvers
/// and verification helpers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Dimension other than 1 or 2.
    #[error("unsupported dimension {0}; only 1 and 2 are supported")]
    UnsupportedDimension(usize),

    /// A coordinate or side length is not an integer multiple of the cell
    /// size `h = 2^-M / 3`.
    #[error("coordinate {value} is not aligned to the cell lattice (h = {h})")]
    Misaligned { value: f64, h: f64 },

    /// A dyadic scale finer than the grid resolution (or an empty range).
    #[error("dyadic scale range [{min}, {max}] invalid for grid scale M = {grid_scale}")]
    ScaleRange { min: i32, max: i32, grid_scale: u32 },

    /// Two objects live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    /// An argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An analytic precondition of the checked statement fails.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Input carries no usable information (e.g. the zero function where a
    /// witness is requested).
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    /// A non-finite sample value.
    #[error("non-finite value at cell {0}")]
    NonFinite(usize),

    /// An internal consistency check failed (indicates a bug).
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
