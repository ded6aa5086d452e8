//! Piecewise-smooth, 1-periodic closed contours with corners at `s = j/q`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const CLOSEDNESS_TOL: f64 = 1e-13;
const SPEED_TOL: f64 = 1e-10;
const SIMPLICITY_SAMPLES: usize = 512;
const SIMPLICITY_TOL: f64 = 1e-9;
/// Offset used to approximate one-sided derivatives of closure-defined curves.
const ONE_SIDED_STEP: f64 = 1e-9;

/// Point, first and second derivative of the parametrization at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub point: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    /// Parameter location `j/q`.
    pub s: f64,
    /// Opening angle between the two semi-tangents, in `(0, 2π)`.
    pub omega: f64,
    /// Direction of the right (outgoing) semi-tangent.
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

type JetFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
enum Shape {
    /// `sin(πs) exp(iω(s - 1/2))`.
    L1 { omega: f64 },
    /// Two circular arcs meeting at `∓i/2` with opening `ω`.
    L2 { omega: f64 },
    Ellipse { a: f64, b: f64 },
    Custom { gamma: Arc<JetFn>, dgamma: Arc<JetFn>, ddgamma: Arc<JetFn> },
}

/// A closed contour `γ: ℝ → ℂ` of period one.
#[derive(Clone)]
pub struct Contour {
    shape: Shape,
    label: String,
    corners: Vec<Corner>,
}

impl fmt::Debug for Contour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Contour").field("label", &self.label).field("corners", &self.corners).finish()
    }
}

fn check_opening(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 && omega < TAU {
        Ok(())
    } else {
        invalid(format!("opening angle must lie in (0, 2π), got {omega}"))
    }
}

/// Reduces `s` to `[0, 1)`.
pub fn wrap_parameter(s: f64) -> f64 {
    let r = s - s.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two parameters on the unit circle `ℝ/ℤ`.
pub fn periodic_distance(a: f64, b: f64) -> f64 {
    let d = wrap_parameter(a - b);
    d.min(1.0 - d)
}

impl Contour {
    /// The one-corner curve `γ₁(s) = sin(πs) exp(iω(s - 1/2))`.
    pub fn curve_l1(omega: f64) -> Result<Self> {
        check_opening(omega)?;
        Self::build(Shape::L1 { omega }, format!("l1(omega={omega:?})"), 1)
    }

    /// The two-corner lens made of two circular arcs, corners at `s = 0` and `s = 1/2`.
    pub fn curve_l2(omega: f64) -> Result<Self> {
        check_opening(omega)?;
        Self::build(Shape::L2 { omega }, format!("l2(omega={omega:?})"), 2)
    }

    pub fn curve_ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return invalid(format!("ellipse semi-axes must be positive, got a = {a}, b = {b}"));
        }
        Self::build(Shape::Ellipse { a, b }, format!("ellipse(a={a:?},b={b:?})"), 0)
    }

    /// A user-defined curve given by `γ`, `γ'` and `γ''` with `corner_count`
    /// corners at `j / corner_count`. Opening angles and orientations are
    /// measured from one-sided derivatives.
    pub fn custom<G, D1, D2>(label: impl Into<String>, gamma: G, dgamma: D1, ddgamma: D2, corner_count: usize) -> Result<Self>
    where
        G: Fn(f64) -> Complex64 + Send + Sync + 'static,
        D1: Fn(f64) -> Complex64 + Send + Sync + 'static,
        D2: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let shape = Shape::Custom { gamma: Arc::new(gamma), dgamma: Arc::new(dgamma), ddgamma: Arc::new(ddgamma) };
        Self::build(shape, label.into(), corner_count)
    }

    fn build(shape: Shape, label: String, q: usize) -> Result<Self> {
        let mut contour = Self { shape, label, corners: Vec::with_capacity(q) };
        for j in 0..q {
            let s = j as f64 / q as f64;
            let right = contour.one_sided_derivative(s, Side::Right);
            let left = contour.one_sided_derivative(s, Side::Left);
            if !(right.norm() > 0.0 && left.norm() > 0.0) {
                return Err(Error::Geometry(format!("vanishing one-sided derivative at corner {j}")));
            }
            let omega = wrap_angle((-left / right).arg());
            let beta = right.arg();
            contour.corners.push(Corner { s, omega, beta });
        }
        contour.validate()?;
        Ok(contour)
    }

    fn validate(&self) -> Result<()> {
        let start = self.point(0.0);
        let end = self.point_raw(1.0);
        if (start - end).norm() > CLOSEDNESS_TOL {
            return Err(Error::Geometry(format!("curve is not closed: γ(0) = {start}, γ(1) = {end}")));
        }
        for (j, c) in self.corners.iter().enumerate() {
            if !(c.omega > 0.0 && c.omega < TAU) {
                return Err(Error::Geometry(format!("corner {j} is a cusp (opening {})", c.omega)));
            }
            let r = self.one_sided_derivative(c.s, Side::Right).norm();
            let l = self.one_sided_derivative(c.s, Side::Left).norm();
            if (r - l).abs() > SPEED_TOL * r.max(1.0) {
                return Err(Error::Geometry(format!(
                    "one-sided speeds differ at corner {j}: |γ'(s+0)| = {r}, |γ'(s-0)| = {l}"
                )));
            }
        }
        let samples: Vec<Complex64> =
            (0..SIMPLICITY_SAMPLES).map(|i| self.point(i as f64 / SIMPLICITY_SAMPLES as f64)).collect();
        for i in 0..samples.len() {
            for k in (i + 1)..samples.len() {
                if (samples[i] - samples[k]).norm() <= SIMPLICITY_TOL {
                    return Err(Error::Geometry(format!(
                        "curve is not simple: samples at s = {} and s = {} coincide",
                        i as f64 / SIMPLICITY_SAMPLES as f64,
                        k as f64 / SIMPLICITY_SAMPLES as f64
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    /// Number of corners `q`.
    pub fn corner_count(&self) -> usize {
        self.corners.len()
    }

    /// Index of the corner sitting exactly at `s` (modulo one), if any.
    pub fn corner_at(&self, s: f64) -> Option<usize> {
        let q = self.corners.len();
        if q == 0 {
            return None;
        }
        let scaled = wrap_parameter(s) * q as f64;
        (scaled == scaled.floor()).then_some(scaled as usize % q)
    }

    /// `γ(s)`; well defined everywhere, including at corners.
    pub fn point(&self, s: f64) -> Complex64 {
        self.point_raw(wrap_parameter(s))
    }

    fn point_raw(&self, s: f64) -> Complex64 {
        match &self.shape {
            Shape::L1 { omega } => Complex64::from_polar((PI * s).sin(), omega * (s - 0.5)),
            Shape::L2 { omega } => {
                let half = 0.5 * omega;
                let radius = 0.5 / half.sin();
                let offset = 0.5 / half.tan();
                if s <= 0.5 {
                    -offset + Complex64::from_polar(radius, omega * (2.0 * s - 0.5))
                } else {
                    offset - Complex64::from_polar(radius, omega * (2.0 * s - 1.5))
                }
            }
            Shape::Ellipse { a, b } => {
                let t = TAU * s;
                Complex64::new(a * t.cos(), b * t.sin())
            }
            Shape::Custom { gamma, .. } => gamma(s),
        }
    }

    /// `γ`, `γ'` and `γ''` at an off-corner parameter.
    pub fn derivatives_at(&self, s: f64) -> Result<Jet> {
        if let Some(index) = self.corner_at(s) {
            return Err(Error::CornerEvaluation { index, s });
        }
        Ok(self.jet_unchecked(wrap_parameter(s)))
    }

    /// Analytic jet at an off-corner `s ∈ [0, 1)`.
    pub(crate) fn jet_unchecked(&self, s: f64) -> Jet {
        self.branch_jet(s, Side::Right)
    }

    /// Jet at `s ∈ [0, 1]` on the smooth piece adjacent to `s` from `side`.
    fn branch_jet(&self, s: f64, side: Side) -> Jet {
        match &self.shape {
            Shape::L1 { omega } => {
                let e = Complex64::from_polar(1.0, omega * (s - 0.5));
                let (sn, cs) = (PI * s).sin_cos();
                let iw = Complex64::new(0.0, *omega);
                Jet {
                    point: e * sn,
                    d1: e * (PI * cs + iw * sn),
                    d2: e * (Complex64::new(-(PI * PI) - omega * omega, 0.0) * sn + 2.0 * PI * iw * cs),
                }
            }
            Shape::L2 { omega } => {
                let half = 0.5 * omega;
                let radius = 0.5 / half.sin();
                let offset = 0.5 / half.tan();
                let iw2 = Complex64::new(0.0, 2.0 * omega);
                let first_arc = match side {
                    Side::Right => s < 0.5,
                    Side::Left => s > 0.0 && s <= 0.5,
                };
                if first_arc {
                    let e = Complex64::from_polar(radius, omega * (2.0 * s - 0.5));
                    Jet { point: -offset + e, d1: iw2 * e, d2: iw2 * iw2 * e }
                } else {
                    let s = if s == 0.0 { 1.0 } else { s };
                    let e = Complex64::from_polar(radius, omega * (2.0 * s - 1.5));
                    Jet { point: offset - e, d1: -iw2 * e, d2: -iw2 * iw2 * e }
                }
            }
            Shape::Ellipse { a, b } => {
                let (sn, cs) = (TAU * s).sin_cos();
                Jet {
                    point: Complex64::new(a * cs, b * sn),
                    d1: TAU * Complex64::new(-a * sn, b * cs),
                    d2: -TAU * TAU * Complex64::new(a * cs, b * sn),
                }
            }
            Shape::Custom { gamma, dgamma, ddgamma } => Jet { point: gamma(s), d1: dgamma(s), d2: ddgamma(s) },
        }
    }

    /// `γ'(s ± 0)` at any parameter; exact for the built-in curves.
    pub fn one_sided_derivative(&self, s: f64, side: Side) -> Complex64 {
        let s = wrap_parameter(s);
        match (&self.shape, side) {
            (Shape::Custom { dgamma, .. }, Side::Right) => dgamma(s + ONE_SIDED_STEP),
            (Shape::Custom { dgamma, .. }, Side::Left) => {
                dgamma(if s == 0.0 { 1.0 - ONE_SIDED_STEP } else { s - ONE_SIDED_STEP })
            }
            (_, Side::Left) if s == 0.0 => self.branch_jet(1.0, Side::Left).d1,
            _ => self.branch_jet(s, side).d1,
        }
    }
}

/// Maps an angle to `[0, 2π)`.
fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn l1_examples() {
        let w = 0.3 * PI;
        let c = Contour::curve_l1(w).unwrap();
        assert!(close(c.point(0.5), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(c.point(0.0), Complex64::new(0.0, 0.0), 1e-15));
        let expected = Complex64::from_polar(PI, -0.15 * PI);
        assert!(close(c.one_sided_derivative(0.0, Side::Right), expected, 1e-14));
        assert_eq!(c.corner_count(), 1);
        assert!((c.corners()[0].omega - w).abs() < 1e-12);
        assert!((c.corners()[0].beta + 0.5 * w).abs() < 1e-12);
        let jet = c.derivatives_at(0.5).unwrap();
        assert!(close(jet.d1, Complex64::new(0.0, w), 1e-14));
    }

    #[test]
    fn l2_examples() {
        for w in [0.1 * PI, 0.3 * PI, PI, 1.5 * PI, 1.9 * PI] {
            let c = Contour::curve_l2(w).unwrap();
            assert!(close(c.point(0.0), Complex64::new(0.0, -0.5), 1e-13));
            assert!(close(c.point(0.5), Complex64::new(0.0, 0.5), 1e-13));
            assert!(close(c.point(0.5 + 1e-15), Complex64::new(0.0, 0.5), 1e-13));
            assert!(close(c.branch_jet(0.0, Side::Left).point, Complex64::new(0.0, -0.5), 1e-13));
            assert_eq!(c.corner_count(), 2);
            for corner in c.corners() {
                assert!((corner.omega - w).abs() < 1e-10, "w = {w}, got {}", corner.omega);
            }
        }
    }

    #[test]
    fn l2_has_constant_speed_per_arc() {
        let w = 0.7 * PI;
        let c = Contour::curve_l2(w).unwrap();
        let speed = w / (0.5 * w).sin();
        for i in 1..200 {
            let s = i as f64 / 200.0;
            if c.corner_at(s).is_some() {
                continue;
            }
            assert!((c.derivatives_at(s).unwrap().d1.norm() - speed).abs() < 1e-12);
        }
    }

    #[test]
    fn measured_openings_match_for_built_ins() {
        for k in 1..20 {
            let w = k as f64 * 0.1 * PI;
            for c in [Contour::curve_l1(w).unwrap(), Contour::curve_l2(w).unwrap()] {
                for corner in c.corners() {
                    let r = c.one_sided_derivative(corner.s, Side::Right);
                    let l = c.one_sided_derivative(corner.s, Side::Left);
                    assert!((wrap_angle((-l / r).arg()) - w).abs() < 1e-10);
                    assert!((r.norm() - l.norm()).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn ellipse_examples() {
        let c = Contour::curve_ellipse(1.0, 1.0).unwrap();
        assert!(close(c.point(0.0), Complex64::new(1.0, 0.0), 1e-15));
        assert!(c.corners().is_empty());
        let jet = c.derivatives_at(0.0).unwrap();
        assert!(close(jet.d1, Complex64::new(0.0, TAU), 1e-13));
        assert!(close(jet.d2, Complex64::new(-TAU * TAU, 0.0), 1e-12));
        let e = Contour::curve_ellipse(2.0, 1.0).unwrap();
        assert!(close(e.point(0.25), Complex64::new(0.0, 1.0), 1e-15));
    }

    #[test]
    fn invalid_arguments_rejected() {
        for w in [0.0, TAU, -1.0, 3.0 * PI, f64::NAN] {
            assert!(matches!(Contour::curve_l1(w), Err(Error::InvalidArgument(_))));
            assert!(matches!(Contour::curve_l2(w), Err(Error::InvalidArgument(_))));
        }
        assert!(Contour::curve_ellipse(0.0, 1.0).is_err());
        assert!(Contour::curve_ellipse(1.0, -2.0).is_err());
    }

    #[test]
    fn corner_evaluation_is_an_error() {
        let c = Contour::curve_l2(0.3 * PI).unwrap();
        assert_eq!(c.derivatives_at(0.5), Err(Error::CornerEvaluation { index: 1, s: 0.5 }));
        assert_eq!(c.derivatives_at(1.0), Err(Error::CornerEvaluation { index: 0, s: 1.0 }));
        assert!(c.derivatives_at(0.25).is_ok());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        let curves = [
            Contour::curve_l1(0.3 * PI).unwrap(),
            Contour::curve_l2(1.4 * PI).unwrap(),
            Contour::curve_ellipse(2.0, 1.0).unwrap(),
        ];
        for c in &curves {
            for _ in 0..100 {
                let mut s: f64 = rng.random_range(0.001..0.999);
                if (s - 0.5).abs() < 0.001 {
                    s += 0.01;
                }
                let jet = c.derivatives_at(s).unwrap();
                let fd1 = (c.point(s + h) - c.point(s - h)) / (2.0 * h);
                let fd2 = (c.jet_unchecked(s + h).d1 - c.jet_unchecked(s - h).d1) / (2.0 * h);
                assert!(close(jet.d1, fd1, 1e-6 * jet.d1.norm().max(1.0)), "{} at {s}", c.label());
                assert!(close(jet.d2, fd2, 1e-5 * jet.d2.norm().max(1.0)), "{} at {s}", c.label());
            }
        }
    }

    #[test]
    fn custom_curve_measures_its_corner() {
        let w = 0.6 * PI;
        let c = Contour::custom(
            "custom-l1",
            move |s| Complex64::from_polar((PI * s).sin(), w * (s - 0.5)),
            move |s| {
                let e = Complex64::from_polar(1.0, w * (s - 0.5));
                e * (PI * (PI * s).cos() + Complex64::new(0.0, w) * (PI * s).sin())
            },
            |_| Complex64::new(0.0, 0.0),
            1,
        )
        .unwrap();
        assert!((c.corners()[0].omega - w).abs() < 1e-7);
        assert!((c.corners()[0].beta + 0.5 * w).abs() < 1e-7);
    }

    #[test]
    fn custom_curve_violations_rejected() {
        // open curve
        let open = Contour::custom("open", |s| Complex64::new(s, 0.0), |_| Complex64::new(1.0, 0.0), |_| Complex64::new(0.0, 0.0), 0);
        assert!(matches!(open, Err(Error::Geometry(_))));
        // figure eight passes through the origin twice
        let eight = Contour::custom(
            "eight",
            |s| Complex64::new((TAU * s).sin(), (2.0 * TAU * s).sin()),
            |s| Complex64::new(TAU * (TAU * s).cos(), 2.0 * TAU * (2.0 * TAU * s).cos()),
            |_| Complex64::new(0.0, 0.0),
            0,
        );
        assert!(matches!(eight, Err(Error::Geometry(_))));
        // unequal one-sided speeds at the corner
        let uneven = Contour::custom(
            "uneven",
            |s| Complex64::new((PI * s).sin(), s * (1.0 - s)),
            |s| Complex64::new(PI * (PI * s).cos(), 1.0 - 2.0 * s),
            |_| Complex64::new(0.0, 0.0),
            1,
        );
        assert!(matches!(uneven, Err(Error::Geometry(_))));
    }

    #[test]
    fn closed_and_simple_for_sweep_range() {
        for k in 0..=36 {
            let w = (0.1 + 0.05 * k as f64) * PI;
            Contour::curve_l1(w).unwrap();
            Contour::curve_l2(w).unwrap();
        }
    }
}
