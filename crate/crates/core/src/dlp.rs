//! The double layer kernel in parametrized form and the right-hand sides used
//! by the experiments.
//!
//! For a source `τ = γ(σ)` and a target `t = γ(s)` the kernel bracket is
//!
//! ```text
//! (1/2πi) · [ γ'(σ)/(τ - t) - conj(γ'(σ))/(conj(τ) - conj(t)) ]
//! ```
//!
//! which already contains the line element `γ'(σ)`. The second term is the
//! conjugate of the first, so the bracket is real and equals `Im(γ'(σ)/(τ - t))/π`.
//! As `σ → s` it tends to `Im(conj(γ')γ'')/(2π|γ'|²)`, which is what
//! [`diagonal_limit`] returns. The arc-length normalized kernel differs from
//! this by a factor `1/γ'`; everything here uses the `dσ` normalization.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::contour::{periodic_distance, Contour, Jet};
use crate::error::{invalid, Error, Result};

/// Parameters closer than this (periodically) use the diagonal limit.
pub const DIAGONAL_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRegime {
    OffDiagonal,
    DiagonalLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: Complex64,
    pub regime: KernelRegime,
}

/// The bracket for explicit source point `src`, source derivative `dsrc`
/// and target point `tgt`. Returns the real value `Im(dsrc/(src - tgt))/π`.
#[inline]
pub fn bracket_from_points(src: Complex64, dsrc: Complex64, tgt: Complex64) -> f64 {
    (dsrc / (src - tgt)).im / PI
}

/// `lim_{σ→s}` of the bracket: `Im(conj(γ')γ'')/(2π|γ'|²)`.
#[inline]
pub fn diagonal_limit(jet: &Jet) -> f64 {
    (jet.d1.conj() * jet.d2).im / (2.0 * PI * jet.d1.norm_sqr())
}

/// Kernel bracket on `contour` between source parameter `s_src` and target
/// parameter `s_tgt`.
pub fn kernel_bracket(contour: &Contour, s_src: f64, s_tgt: f64) -> Result<KernelEval> {
    let src = contour.derivatives_at(s_src)?;
    let tgt = contour.derivatives_at(s_tgt)?;
    if periodic_distance(s_src, s_tgt) < DIAGONAL_THRESHOLD {
        return Ok(KernelEval {
            value: Complex64::new(diagonal_limit(&tgt), 0.0),
            regime: KernelRegime::DiagonalLimit,
        });
    }
    if src.point == tgt.point {
        return Err(Error::Geometry(format!(
            "parameters {s_src} and {s_tgt} map to the same point {}",
            src.point
        )));
    }
    Ok(KernelEval {
        value: Complex64::new(bracket_from_points(src.point, src.d1, tgt.point), 0.0),
        regime: KernelRegime::OffDiagonal,
    })
}

/// `f₁(z) = -z|z|`.
pub fn rhs_f1(z: Complex64) -> Complex64 {
    -z * z.norm()
}

/// `f₂(z) = -1 + iz` below the real axis and `1 + iz` on or above it.
pub fn rhs_f2(z: Complex64) -> Complex64 {
    let iz = Complex64::new(-z.im, z.re);
    if z.im < 0.0 {
        iz - 1.0
    } else {
        iz + 1.0
    }
}

/// Right-hand side selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rhs {
    F1,
    F2,
    /// The constant 2; the exact solution of `(I + V)x = 2` is `x ≡ 1`.
    Const2,
}

impl Rhs {
    pub fn eval(self, z: Complex64) -> Complex64 {
        match self {
            Rhs::F1 => rhs_f1(z),
            Rhs::F2 => rhs_f2(z),
            Rhs::Const2 => Complex64::new(2.0, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rhs::F1 => "f1",
            Rhs::F2 => "f2",
            Rhs::Const2 => "const2",
        }
    }
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rhs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(Rhs::F1),
            "f2" => Ok(Rhs::F2),
            "const2" => Ok(Rhs::Const2),
            other => invalid(format!("unknown right-hand side {other:?} (expected f1, f2 or const2)")),
        }
    }
}
