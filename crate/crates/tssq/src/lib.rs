//! Singularity-swap quadrature for nearly singular line integrals.
//!
//! Integrals of the form
//!
//! ```text
//!   I_m(x) = int f(t) sigma(t) |gamma'(t)| / |x - gamma(t)|^m dt,   m = 1, 3, 5,
//! ```
//!
//! along a smooth curve gamma in R^3 become numerically singular when the
//! target x approaches the curve: the distance R(t) = |x - gamma(t)| has a
//! complex root t0 = a + ib near the real axis and ordinary quadrature
//! loses accuracy long before x touches the curve. This crate swaps the
//! true denominator for a model g(t)^m with the same root structure
//! (|t - t0| on open arcs, |e^{it} - e^{it0}| on closed loops), interpolates
//! the now-smooth remainder, and integrates the interpolation basis against
//! the model in closed form. Near the root the standard bases themselves
//! become ill-conditioned for m = 3, 5; a translated (open) or modified
//! (closed) basis removes that cancellation, and the engine switches to it
//! when an a-priori roundoff estimate crosses a user tolerance.
//!
//! The crate is organized bottom-up: `dd` (double-double scalars), `gauss`
//! (Gauss-Legendre rules), `curves` (geometries, panels, complex distance
//! roots), `interp` (polynomial/trigonometric interpolation and the modified
//! basis transform), `basis_integrals` (closed-form tables), `stokes`
//! (slender-body kernels), and `engine` (near/far classification, basis
//! switching, batch evaluation).

pub mod basis_integrals;
pub mod curves;
pub mod dd;
pub mod engine;
mod error;
pub mod gauss;
pub mod interp;
pub mod stokes;

pub use error::{Error, Result};
