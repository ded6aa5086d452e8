//! Nyström discretization of the double layer potential equation `(I + V)x = f`
//! on piecewise-smooth closed contours, together with the tools used to locate
//! the corner opening angles at which the Gauss-Legendre Nyström method loses
//! stability.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`]: Gauss-Legendre rules on `[0, 1]` and the composite panel rule.
//! * [`contour`]: 1-periodic parametrizations with corner metadata.
//! * [`dlp`]: the double layer kernel bracket, its diagonal limit and the
//!   right-hand sides used in the experiments.
//! * [`numerics`]: dense linear algebra (LU solves, singular values, condition numbers).
//! * [`nystrom`]: assembly, solution, interpolation and convergence studies.
//! * [`mellin`]: Mellin symbols of the local corner operators.
//! * [`localop`]: finite sections of the local wedge operator.
//! * [`sweep`]: condition-number sweeps over the opening angle with peak refinement.
//! * [`cli`]: the `nystrom-dlp` command line front end.

pub mod cli;
pub mod contour;
pub mod dlp;
mod error;
pub mod localop;
pub mod mellin;
pub mod numerics;
pub mod nystrom;
pub mod quadrature;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;
