//! Finite sections of the local wedge operator at a corner.
//!
//! The wedge is `γ_w(s) = -s e^{i(β+ω)}` for `s < 0` and `s e^{iβ}` for
//! `s ≥ 0`: two rays leaving the origin at angles `β + ω` and `β`. Panels are
//! `[k, k+1]`, `k ∈ {-N, …, N-1}`, and unknowns are flattened as
//! `(k + N)·d + r`.
//!
//! The Mellin block form orders the positive ray first and the negative ray
//! second, reflected by `l ↦ -1-l` with node reversal `p ↦ d-1-p`, so that
//! both blocks are indexed by distance from the corner. See
//! [`wedge_to_block_permutation`].

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dlp::bracket_from_points;
use crate::error::{invalid, Result};
use crate::mellin::k_omega;
use crate::numerics::{self, DenseMatrix};
use crate::quadrature::QuadratureRule;

/// Infinite wedge with opening `omega` and right semi-tangent angle `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    omega: f64,
    beta: f64,
}

impl Wedge {
    pub fn new(omega: f64, beta: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < std::f64::consts::TAU) {
            return invalid(format!("opening angle {omega} is outside (0, 2pi)"));
        }
        if !beta.is_finite() {
            return invalid("orientation angle must be finite");
        }
        Ok(Self { omega, beta })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Direction `e^{i(β+ω)}` of the ray at `s < 0`; `ω = π` gives exactly `-e^{iβ}`.
    fn left_direction(&self) -> Complex64 {
        if self.omega == std::f64::consts::PI {
            -Complex64::from_polar(1.0, self.beta)
        } else {
            Complex64::from_polar(1.0, self.beta + self.omega)
        }
    }

    pub fn point(&self, s: f64) -> Complex64 {
        if s < 0.0 {
            -s * self.left_direction()
        } else {
            s * Complex64::from_polar(1.0, self.beta)
        }
    }

    pub fn derivative(&self, s: f64) -> Complex64 {
        if s < 0.0 {
            -self.left_direction()
        } else {
            Complex64::from_polar(1.0, self.beta)
        }
    }
}

/// The `2Nd × 2Nd` finite section of the wedge operator.
#[derive(Debug, Clone)]
pub struct WedgeSection {
    pub wedge: Wedge,
    pub rule_eps: QuadratureRule,
    pub rule_delta: QuadratureRule,
    pub panels_per_ray: usize,
    pub matrix: DenseMatrix,
}

fn check_rules(rule_eps: &QuadratureRule, rule_delta: &QuadratureRule, panels: usize) -> Result<()> {
    if rule_eps.len() != rule_delta.len() {
        return invalid("quadrature and collocation rules differ in size");
    }
    if panels == 0 {
        return invalid("at least one panel per ray is required");
    }
    Ok(())
}

/// Finite section on the unscaled wedge grid (`n = 1`).
pub fn assemble_wedge(
    omega: f64,
    beta: f64,
    rule_eps: &QuadratureRule,
    rule_delta: &QuadratureRule,
    panels: usize,
) -> Result<WedgeSection> {
    assemble_wedge_scaled(omega, beta, rule_eps, rule_delta, panels, 1)
}

/// Finite section with grid parameters `(l + ε_p)/n` and weights `w_p/n`.
/// The wedge is dilation invariant, so the result does not depend on `n`
/// beyond rounding.
pub fn assemble_wedge_scaled(
    omega: f64,
    beta: f64,
    rule_eps: &QuadratureRule,
    rule_delta: &QuadratureRule,
    panels: usize,
    scale: usize,
) -> Result<WedgeSection> {
    check_rules(rule_eps, rule_delta, panels)?;
    if scale == 0 {
        return invalid("scale must be positive");
    }
    let wedge = Wedge::new(omega, beta)?;
    let d = rule_eps.len();
    let size = 2 * panels * d;
    let n = scale as f64;
    let param = |nodes: &[f64], idx: usize| {
        let k = (idx / d) as f64 - panels as f64;
        (k + nodes[idx % d]) / n
    };
    let sources: Vec<(f64, Complex64, Complex64)> = (0..size)
        .map(|j| {
            let s = param(rule_eps.nodes(), j);
            (s, wedge.point(s), wedge.derivative(s))
        })
        .collect();
    let targets: Vec<(f64, Complex64)> = (0..size)
        .map(|i| {
            let s = param(rule_delta.nodes(), i);
            (s, wedge.point(s))
        })
        .collect();
    let mut data = vec![0.0; size * size];
    data.par_chunks_mut(size).enumerate().for_each(|(j, column)| {
        let (s_src, src, dsrc) = sources[j];
        let w = rule_eps.weights()[j % d] / n;
        for (i, entry) in column.iter_mut().enumerate() {
            let (s_tgt, tgt) = targets[i];
            // the kernel of a straight ray vanishes identically
            let value = if (s_src < 0.0) == (s_tgt < 0.0) { 0.0 } else { w * bracket_from_points(src, dsrc, tgt) };
            *entry = value + if i == j { 1.0 } else { 0.0 };
        }
    });
    Ok(WedgeSection {
        wedge,
        rule_eps: rule_eps.clone(),
        rule_delta: rule_delta.clone(),
        panels_per_ray: panels,
        matrix: DenseMatrix::from_real_columns(size, size, data)?,
    })
}

/// `perm[b] = w`: row/column `b` of the block form is row/column `w` of the
/// wedge form. Block 1 is `k = 0..N` on the positive ray; block 2 holds the
/// negative-ray index `(l, p)` at position `(-1-l, d-1-p)`.
pub fn wedge_to_block_permutation(panels: usize, d: usize) -> Vec<usize> {
    let half = panels * d;
    (0..2 * half)
        .map(|b| {
            if b < half {
                half + b
            } else {
                let (l, p) = ((b - half) / d, (b - half) % d);
                (panels - 1 - l) * d + (d - 1 - p)
            }
        })
        .collect()
}

/// The Mellin block form: identity diagonal blocks and off-diagonal blocks
/// `w_p · k_ω(a/m) / m`, where `a` is the target's and `m` the source's
/// distance from the corner.
///
/// In reflected coordinates the negative ray carries the reversed rules
/// `1 - ε_{d-1-p}` (weights reversed) and `1 - δ_{d-1-r}`. Block (1,2) thus
/// pairs `δ` targets with reversed-`ε` sources and block (2,1) reversed-`δ`
/// targets with `ε` sources. For symmetric rules such as Gauss-Legendre the
/// reversals are the rules themselves.
pub fn assemble_block_mellin(
    omega: f64,
    rule_eps: &QuadratureRule,
    rule_delta: &QuadratureRule,
    panels: usize,
) -> Result<DenseMatrix> {
    check_rules(rule_eps, rule_delta, panels)?;
    Wedge::new(omega, 0.0)?;
    let d = rule_eps.len();
    let half = panels * d;
    let eps_rev = rule_eps.reversed();
    let delta_rev = rule_delta.reversed();
    let size = 2 * half;
    let mut data = vec![0.0; size * size];
    let fill = |column: &mut [f64], j: usize| -> Result<()> {
        let (src_block, jj) = (j / half, j % half);
        let (l, p) = (jj / d, jj % d);
        let (eps, tgt_rule) = if src_block == 0 { (rule_eps, &delta_rev) } else { (&eps_rev, rule_delta) };
        let m = l as f64 + eps.nodes()[p];
        let w = eps.weights()[p];
        let offset = if src_block == 0 { half } else { 0 };
        for ii in 0..half {
            let (k, r) = (ii / d, ii % d);
            let a = k as f64 + tgt_rule.nodes()[r];
            column[offset + ii] = w * k_omega(omega, a / m)? / m;
        }
        column[j] = 1.0;
        Ok(())
    };
    data.par_chunks_mut(size).enumerate().try_for_each(|(j, column)| fill(column, j))?;
    DenseMatrix::from_real_columns(size, size, data)
}

/// One row of a finite-section study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaMinRow {
    pub panels: usize,
    pub sigma_min: f64,
    pub cond: f64,
    /// `σ_min ≥ 0.9 · σ_min` of the previous row; absent on the first row.
    pub stabilized: Option<bool>,
}

/// Ratio below which a drop in `σ_min` between consecutive sections counts
/// as not stabilized.
pub const STABILIZATION_RATIO: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaMinStudy {
    pub omega: f64,
    pub d: usize,
    pub rows: Vec<SigmaMinRow>,
    /// Flag of the last row (false for a single section).
    pub stabilized: bool,
}

/// `σ_min` and `κ₂` of the wedge sections for each `N` (ascending), using
/// `ε = δ = rule`. Sections are independent and computed in parallel.
pub fn sigma_min_study(omega: f64, rule: &QuadratureRule, panel_list: &[usize]) -> Result<SigmaMinStudy> {
    if panel_list.is_empty() {
        return invalid("panel list is empty");
    }
    if panel_list.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("panel list must be strictly ascending");
    }
    let svals: Vec<(f64, f64)> = panel_list
        .par_iter()
        .map(|&n| {
            let section = assemble_wedge(omega, 0.0, rule, rule, n)?;
            let s = numerics::singular_values(&section.matrix)?;
            let (max, min) = (s[0], *s.last().unwrap());
            Ok((min, if min == 0.0 { f64::INFINITY } else { max / min }))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SigmaMinRow> = panel_list
        .iter()
        .zip(&svals)
        .enumerate()
        .map(|(i, (&panels, &(sigma_min, cond)))| SigmaMinRow {
            panels,
            sigma_min,
            cond,
            stabilized: (i > 0).then(|| sigma_min >= STABILIZATION_RATIO * svals[i - 1].0),
        })
        .collect();
    let stabilized = rows.last().and_then(|r| r.stabilized).unwrap_or(false);
    Ok(SigmaMinStudy { omega, d: rule.len(), rows, stabilized })
}

/// CSV `N,sigma_min,cond,stabilized`; the flag is empty on the first row.
pub fn write_sigma_min_csv<W: Write>(study: &SigmaMinStudy, mut out: W) -> std::io::Result<()> {
    writeln!(out, "N,sigma_min,cond,stabilized")?;
    for row in &study.rows {
        let flag = row.stabilized.map(|b| b.to_string()).unwrap_or_default();
        writeln!(out, "{},{:.16e},{:.16e},{}", row.panels, row.sigma_min, row.cond, flag)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gl(d: usize) -> QuadratureRule {
        QuadratureRule::gauss_legendre(d).unwrap()
    }

    fn permuted(m: &DenseMatrix, perm: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(perm[i], perm[j])).unwrap()
    }

    #[test]
    fn flat_wedge_is_identity() {
        let s = assemble_wedge(PI, 0.3, &gl(4), &gl(4), 3).unwrap();
        let id = DenseMatrix::identity(24).unwrap();
        assert!(s.matrix.max_abs_diff(&id) <= 1e-15);
        let b = assemble_block_mellin(PI, &gl(4), &gl(4), 3).unwrap();
        assert!(b.max_abs_diff(&id) <= 1e-15);
    }

    #[test]
    fn same_ray_entries_vanish() {
        let (n, d) = (4, 3);
        let s = assemble_wedge(0.7 * PI, 0.4, &gl(d), &gl(d), n).unwrap();
        let half = n * d;
        for i in 0..2 * half {
            for j in 0..2 * half {
                if (i < half) == (j < half) {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_eq!(s.matrix.get(i, j).re, expected);
                }
            }
        }
    }

    #[test]
    fn cross_ray_entries_match_mellin_kernel() {
        let omega = 0.3 * PI;
        let (n, d) = (3, 4);
        let rule = gl(d);
        let s = assemble_wedge(omega, 0.0, &rule, &rule, n).unwrap();
        for k in 0..n as i64 {
            for l in -(n as i64)..0 {
                for r in 0..d {
                    for p in 0..d {
                        let i = ((k + n as i64) as usize) * d + r;
                        let j = ((l + n as i64) as usize) * d + p;
                        let a = k as f64 + rule.nodes()[r];
                        let m = -(l as f64 + rule.nodes()[p]);
                        let expected = rule.weights()[p] * k_omega(omega, a / m).unwrap() / m;
                        assert!((s.matrix.get(i, j).re - expected).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn rigid_motion_and_dilation_invariance() {
        let rule = gl(4);
        let a = assemble_wedge(1.3, 0.0, &rule, &rule, 4).unwrap().matrix;
        let b = assemble_wedge(1.3, 1.1, &rule, &rule, 4).unwrap().matrix;
        assert!(a.max_abs_diff(&b) <= 1e-13);
        let c = assemble_wedge_scaled(1.3, 0.0, &rule, &rule, 4, 3).unwrap().matrix;
        assert!(a.max_abs_diff(&c) <= 1e-13);
        let sa = numerics::singular_values(&a).unwrap();
        let sb = numerics::singular_values(&b).unwrap();
        for (x, y) in sa.iter().zip(&sb) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn block_form_matches_wedge() {
        for omega in [0.3 * PI, 0.5 * PI, 1.5 * PI] {
            for n in [4, 16] {
                let rule = gl(4);
                let wedge = assemble_wedge(omega, 0.0, &rule, &rule, n).unwrap().matrix;
                let block = assemble_block_mellin(omega, &rule, &rule, n).unwrap();
                let perm = wedge_to_block_permutation(n, 4);
                assert!(permuted(&wedge, &perm).max_abs_diff(&block) <= 1e-12);
            }
        }
    }

    #[test]
    fn block_form_matches_wedge_for_distinct_rules() {
        let eps = gl(3);
        let delta = QuadratureRule::midpoint(3).unwrap();
        let wedge = assemble_wedge(1.1, 0.0, &eps, &delta, 5).unwrap().matrix;
        let block = assemble_block_mellin(1.1, &eps, &delta, 5).unwrap();
        let perm = wedge_to_block_permutation(5, 3);
        assert!(permuted(&wedge, &perm).max_abs_diff(&block) <= 1e-12);
    }

    #[test]
    fn permutation_is_a_bijection() {
        let mut p = wedge_to_block_permutation(5, 3);
        assert_eq!(p[0], 15);
        assert_eq!(p[15], 14);
        p.sort_unstable();
        assert_eq!(p, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn long_sections_stay_finite() {
        let m = assemble_block_mellin(0.1 * PI, &gl(16), &gl(16), 64).unwrap();
        assert!(m.frobenius_norm().is_finite());
    }

    #[test]
    fn flat_study_has_unit_sigma() {
        let study = sigma_min_study(PI, &gl(4), &[2, 4]).unwrap();
        for row in &study.rows {
            assert_eq!(row.sigma_min, 1.0);
            assert_eq!(row.cond, 1.0);
        }
        assert!(study.stabilized);
        assert!(sigma_min_study(PI, &gl(4), &[4, 2]).is_err());
        assert!(sigma_min_study(PI, &gl(4), &[]).is_err());
        let mut out = Vec::new();
        write_sigma_min_csv(&study, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "2,1.0000000000000000e0,1.0000000000000000e0,");
        assert!(text.lines().nth(2).unwrap().ends_with(",true"));
    }

    #[test]
    fn invalid_arguments() {
        assert!(assemble_wedge(0.0, 0.0, &gl(2), &gl(2), 2).is_err());
        assert!(assemble_wedge(1.0, 0.0, &gl(2), &gl(3), 2).is_err());
        assert!(assemble_wedge(1.0, 0.0, &gl(2), &gl(2), 0).is_err());
        assert!(assemble_wedge_scaled(1.0, 0.0, &gl(2), &gl(2), 2, 0).is_err());
        assert!(assemble_block_mellin(7.0, &gl(2), &gl(2), 2).is_err());
    }
}
