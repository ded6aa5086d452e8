//! Mellin symbols of the local corner operators.
//!
//! For a corner of opening `ω` the Mellin convolution `N_ω` has symbol
//! `n_ω(y) = e^{(π-ω)y} / sinh(πy)`, and the local double layer operator
//! `A_ω` has the 2×2 symbol with unit diagonal and off-diagonal entries
//! `sinh((π-ω)y) / sinh(πy)`, evaluated on the line `y = z + (1/p + α)i`.
//! In value space the same operator is the Mellin convolution with kernel
//! `k_ω(z) = z sin ω / (π(1 - 2z cos ω + z²))`.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::QuadratureRule;

/// The integration line `y(z) = z + (1/p + α)i` of the Mellin transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinLine {
    pub p: f64,
    pub alpha: f64,
}

impl MellinLine {
    /// Requires `0 < 1/p + α < 1`.
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        let shift = 1.0 / p + alpha;
        if !(p > 1.0 && p.is_finite() && alpha.is_finite() && shift > 0.0 && shift < 1.0) {
            return invalid(format!("Mellin line needs p > 1 and 0 < 1/p + alpha < 1, got p={p}, alpha={alpha}"));
        }
        Ok(Self { p, alpha })
    }

    /// `L²` without weight: `y = z + i/2`.
    pub fn l2() -> Self {
        Self { p: 2.0, alpha: 0.0 }
    }

    pub fn shift(&self) -> f64 {
        1.0 / self.p + self.alpha
    }

    pub fn point(&self, z: f64) -> Complex64 {
        Complex64::new(z, self.shift())
    }
}

impl Default for MellinLine {
    fn default() -> Self {
        Self::l2()
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega < TAU) {
        return invalid(format!("opening angle {omega} is outside (0, 2pi)"));
    }
    Ok(())
}

fn check_pole(y: Complex64) -> Result<()> {
    // sinh(πy) = 0 exactly at y ∈ iℤ
    if !y.re.is_finite() || !y.im.is_finite() {
        return invalid(format!("non-finite Mellin variable {y}"));
    }
    if y.re == 0.0 && y.im.fract() == 0.0 {
        return Err(Error::Pole { re: y.re, im: y.im });
    }
    Ok(())
}

/// `e^{(π-ω)y} / sinh(πy)`, evaluated in a form that does not overflow for
/// large `|Re y|`.
pub fn n_omega(omega: f64, y: Complex64) -> Result<Complex64> {
    check_pole(y)?;
    let value = if y.re >= 0.0 {
        2.0 * (-omega * y).exp() / (1.0 - (-TAU * y).exp())
    } else {
        -2.0 * ((TAU - omega) * y).exp() / (1.0 - (TAU * y).exp())
    };
    Ok(value)
}

/// `sinh((π-ω)y) / sinh(πy)`; even in `y`, so it is always evaluated with
/// `Re y ≥ 0` where the exponential form is stable.
pub fn symbol_off_diagonal(omega: f64, y: Complex64) -> Result<Complex64> {
    check_pole(y)?;
    let y = if y.re < 0.0 { -y } else { y };
    Ok(((-omega * y).exp() - (-(TAU - omega) * y).exp()) / (1.0 - (-TAU * y).exp()))
}

/// The 2×2 symbol of the local operator, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolMatrix2 {
    pub entries: [[Complex64; 2]; 2],
}

impl SymbolMatrix2 {
    pub fn det(&self) -> Complex64 {
        let [[a, b], [c, d]] = self.entries;
        a * d - b * c
    }

    pub fn off_diagonal(&self) -> Complex64 {
        self.entries[0][1]
    }
}

/// Symbol of `A_ω` at `y`.
#[allow(non_snake_case)]
pub fn symbol_A(omega: f64, y: Complex64) -> Result<SymbolMatrix2> {
    let off = symbol_off_diagonal(omega, y)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(SymbolMatrix2 { entries: [[one, off], [off, one]] })
}

/// `1 - sinh²((π-ω)y)/sinh²(πy)`, the closed form of the symbol determinant.
pub fn symbol_det(omega: f64, y: Complex64) -> Result<Complex64> {
    let off = symbol_off_diagonal(omega, y)?;
    Ok(1.0 - off * off)
}

/// Minimum of `|det smb A_ω(z + i/2)|` over a uniform grid on `[-z_max, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FredholmScan {
    pub omega: f64,
    pub min_abs_det: f64,
    pub argmin_z: f64,
}

pub const DEFAULT_Z_MAX: f64 = 40.0;
pub const DEFAULT_Z_STEPS: usize = 4001;

/// `(z, |det|)` on the uniform grid with `z_steps` points spanning `[-z_max, z_max]`.
pub fn fredholm_profile(omega: f64, z_max: f64, z_steps: usize) -> Result<Vec<(f64, f64)>> {
    check_omega(omega)?;
    if !(z_max > 0.0 && z_max.is_finite()) {
        return invalid(format!("z_max must be positive, got {z_max}"));
    }
    if z_steps < 2 {
        return invalid("the z grid needs at least two points");
    }
    let line = MellinLine::l2();
    (0..z_steps)
        .into_par_iter()
        .map(|i| {
            let z = -z_max + 2.0 * z_max * i as f64 / (z_steps - 1) as f64;
            Ok((z, symbol_det(omega, line.point(z))?.norm()))
        })
        .collect()
}

/// Scans the determinant along the line. Ties keep the smallest `z`.
pub fn fredholm_scan(omega: f64, z_max: f64, z_steps: usize) -> Result<FredholmScan> {
    let profile = fredholm_profile(omega, z_max, z_steps)?;
    let (argmin_z, min_abs_det) =
        profile.into_iter().fold((f64::NAN, f64::INFINITY), |best, (z, v)| if v < best.1 { (z, v) } else { best });
    Ok(FredholmScan { omega, min_abs_det, argmin_z })
}

/// `k_ω(z) = z sin ω / (π(1 - 2z cos ω + z²))`, the real kernel of the
/// Mellin convolution `N_ω` restricted to the double layer part.
pub fn k_omega(omega: f64, z: f64) -> Result<f64> {
    check_omega(omega)?;
    if !(z > 0.0 && z.is_finite()) {
        return invalid(format!("k_omega needs a positive argument, got {z}"));
    }
    // the float nearest π stands for a straight line
    let sin = if omega == PI { 0.0 } else { omega.sin() };
    Ok(z * sin / (PI * (1.0 - 2.0 * z * omega.cos() + z * z)))
}

fn gl16() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| QuadratureRule::gauss_legendre(16).expect("16-point rule"))
}

fn gl<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let rule = gl16();
    let h = b - a;
    rule.nodes().iter().zip(rule.weights()).map(|(&x, &w)| w * h * f(a + h * x)).sum()
}

/// Adaptive 16-point Gauss-Legendre on `[a, b]`: an interval is accepted once
/// its halves agree with the whole to within its share of `tol`.
fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> Result<Complex64> {
    let whole = gl(f, a, b);
    let m = 0.5 * (a + b);
    let halves = gl(f, a, m) + gl(f, m, b);
    if (whole - halves).norm() <= tol {
        return Ok(halves);
    }
    if depth == 0 {
        return Err(Error::NumericalFailure(format!("adaptive quadrature did not converge on [{a}, {b}]")));
    }
    Ok(adaptive(f, a, m, 0.5 * tol, depth - 1)? + adaptive(f, m, b, 0.5 * tol, depth - 1)?)
}

/// `∫₀^∞ x^{-1/2 - zi} k_ω(x) dx`, the Mellin transform of `k_ω` at
/// `y = z + i/2`. The integral is split at `x = 1`, the tail is folded back by
/// `x → 1/x` (`k_ω(1/x) = k_ω(x)`), and `x = e^{-t}` turns both pieces into
/// smooth, exponentially decaying integrands on `t ∈ [0, ∞)`.
pub fn mellin_transform_numeric(omega: f64, z: f64) -> Result<Complex64> {
    check_omega(omega)?;
    const TOL: f64 = 1e-10;
    const DEPTH: usize = 60;
    // e^{-t/2} bounds both integrands; 90 leaves a tail below 1e-19
    const T_MAX: f64 = 90.0;
    // k_ω(x) = x·g(x)
    let g = |x: f64| omega.sin() / (PI * (1.0 - 2.0 * x * omega.cos() + x * x));
    // ∫₀¹ x^{1/2-zi} g(x) dx = ∫₀^∞ e^{-3t/2 + izt} g(e^{-t}) dt
    let inner = |t: f64| Complex64::new(-1.5 * t, z * t).exp() * g((-t).exp());
    // ∫₀¹ u^{-1/2+zi} g(u) du = ∫₀^∞ e^{-t/2 - izt} g(e^{-t}) dt
    let outer = |t: f64| Complex64::new(-0.5 * t, -z * t).exp() * g((-t).exp());
    Ok(adaptive(&inner, 0.0, T_MAX, TOL, DEPTH)? + adaptive(&outer, 0.0, T_MAX, TOL, DEPTH)?)
}

/// Largest deviation between the numerical Mellin transform of `k_ω` and the
/// symbol entry `sinh((π-ω)y)/sinh(πy)` over the given `z` values.
pub fn mellin_transform_check(omega: f64, z_values: &[f64]) -> Result<f64> {
    let line = MellinLine::l2();
    let mut worst: f64 = 0.0;
    for &z in z_values {
        let numeric = mellin_transform_numeric(omega, z)?;
        let exact = symbol_off_diagonal(omega, line.point(z))?;
        worst = worst.max((numeric - exact).norm());
    }
    Ok(worst)
}
