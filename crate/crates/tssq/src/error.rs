//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Newton iteration for the complex distance root did not converge.
    #[error("root iteration did not converge after {max_iter} steps (last |R^2| = {residual:.3e})")]
    NonConvergence { max_iter: usize, residual: f64 },

    /// Adaptive panel subdivision hit the depth cap without resolving the curve.
    #[error("panel subdivision exceeded maximum depth {0}")]
    MaxDepthExceeded(usize),

    /// An input was outside the range an operation supports.
    #[error("{0}")]
    Domain(String),

    /// An upward recurrence was requested in a regime where its parasitic
    /// solution would overwhelm the result.
    #[error("recurrence unstable: |Im t0| * kmax = {bk:.3} exceeds limit {limit}")]
    RecurrenceUnstable { bk: f64, limit: f64 },

    /// The expansion center of the fast modified-coefficient path coincides
    /// (to within the guard) with a grid node, where its division blows up.
    #[error("expansion shift is {dist:.3e} from a grid node (guard {guard:.3e})")]
    ShiftTooCloseToNode { dist: f64, guard: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
