//! The Gauss-Legendre Nyström method for `(I + V)x = f`.
//!
//! With quadrature parameters `ε_p`, collocation parameters `δ_r` and `n`
//! panels, the unknowns `x(t_{kr})`, `t_{kr} = γ((k + δ_r)/n)`, solve
//!
//! ```text
//! x(t_kr) + Σ_l Σ_p (w_p/n) · bracket(τ_lp, t_kr) · x(t_lp) = f(t_kr)
//! ```
//!
//! where `τ_lp = γ((l + ε_p)/n)` and `bracket` is [`crate::dlp`]'s kernel.
//! Unknowns and equations are flattened k-major: index `k * d + r`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contour::{periodic_distance, Contour, Jet};
use crate::dlp::{bracket_from_points, diagonal_limit, Rhs, DIAGONAL_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::numerics::{self, DenseMatrix, LanczosOptions};
use crate::quadrature::QuadratureRule;

/// Contour plus quadrature (`ε`) and collocation (`δ`) rules and the panel count.
#[derive(Debug, Clone)]
pub struct Discretization {
    contour: Contour,
    rule_eps: QuadratureRule,
    rule_delta: QuadratureRule,
    n: usize,
}

impl Discretization {
    /// `n` must be a positive multiple of the corner count so every corner
    /// sits on a panel boundary.
    pub fn new(contour: Contour, rule_eps: QuadratureRule, rule_delta: QuadratureRule, n: usize) -> Result<Self> {
        let q = contour.corner_count().max(1);
        if n == 0 || n % q != 0 {
            return invalid(format!("panel count {n} must be a positive multiple of the corner count {q}"));
        }
        if rule_eps.len() != rule_delta.len() {
            return invalid(format!(
                "quadrature and collocation rules differ in size ({} vs {})",
                rule_eps.len(),
                rule_delta.len()
            ));
        }
        Ok(Self { contour, rule_eps, rule_delta, n })
    }

    /// `ε = δ` = the `d`-point Gauss-Legendre rule.
    pub fn gauss(contour: Contour, d: usize, n: usize) -> Result<Self> {
        let rule = QuadratureRule::gauss_legendre(d)?;
        Self::new(contour, rule.clone(), rule, n)
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn rule_eps(&self) -> &QuadratureRule {
        &self.rule_eps
    }

    pub fn rule_delta(&self) -> &QuadratureRule {
        &self.rule_delta
    }

    pub fn panels(&self) -> usize {
        self.n
    }

    pub fn points_per_panel(&self) -> usize {
        self.rule_eps.len()
    }

    /// Number of unknowns `n·d`.
    pub fn size(&self) -> usize {
        self.n * self.rule_eps.len()
    }

    /// Flat index of `(panel, point)`.
    pub fn flat_index(&self, panel: usize, point: usize) -> usize {
        panel * self.points_per_panel() + point
    }

    /// `(panel, point)` of a flat index.
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        let d = self.points_per_panel();
        (index / d, index % d)
    }

    /// Quadrature parameter `(l + ε_p)/n`.
    pub fn source_param(&self, index: usize) -> f64 {
        let (l, p) = self.split_index(index);
        (l as f64 + self.rule_eps.nodes()[p]) / self.n as f64
    }

    /// Collocation parameter `(k + δ_r)/n`.
    pub fn target_param(&self, index: usize) -> f64 {
        let (k, r) = self.split_index(index);
        (k as f64 + self.rule_delta.nodes()[r]) / self.n as f64
    }

    /// Quadrature weight `w_p / n`.
    pub fn source_weight(&self, index: usize) -> f64 {
        self.rule_eps.weights()[index % self.points_per_panel()] / self.n as f64
    }

    fn same_configuration(&self, other: &Self) -> bool {
        self.contour.label() == other.contour.label()
            && self.rule_eps.approx_eq(&other.rule_eps, 0.0)
            && self.rule_delta.approx_eq(&other.rule_delta, 0.0)
    }

    fn source_jets(&self) -> Vec<Jet> {
        (0..self.size()).map(|j| self.jet(self.source_param(j))).collect()
    }

    fn target_jets(&self) -> Vec<Jet> {
        (0..self.size()).map(|i| self.jet(self.target_param(i))).collect()
    }

    fn jet(&self, s: f64) -> Jet {
        // grid parameters never hit a corner: corners sit at panel ends and 0 < ε_p, δ_r < 1
        assert!(self.contour.corner_at(s).is_none(), "grid parameter {s} lies on a corner");
        self.contour.jet_unchecked(s)
    }
}

/// Assembled matrix `I + V_n` and right-hand side `f(t_kr)`.
#[derive(Debug, Clone)]
pub struct NystromSystem {
    pub disc: Discretization,
    pub matrix: DenseMatrix,
    pub rhs: Vec<Complex64>,
    pub rhs_kind: Rhs,
}

/// Values `x(t_kr)` on the collocation grid.
#[derive(Debug, Clone)]
pub struct Solution {
    pub disc: Discretization,
    pub values: Vec<Complex64>,
    pub rhs: Rhs,
}

/// The system matrix `I + V_n`. Columns are filled in parallel on the
/// current rayon pool; every entry is computed independently, so the result
/// does not depend on the number of threads.
pub fn assemble_matrix(disc: &Discretization) -> Result<DenseMatrix> {
    let size = disc.size();
    let sources = disc.source_jets();
    let targets = disc.target_jets();
    let target_params: Vec<f64> = (0..size).map(|i| disc.target_param(i)).collect();
    let mut data = vec![0.0f64; size * size];
    data.par_chunks_mut(size).enumerate().for_each(|(j, column)| {
        let src = &sources[j];
        let s_src = disc.source_param(j);
        let w = disc.source_weight(j);
        for (i, entry) in column.iter_mut().enumerate() {
            let k = if periodic_distance(s_src, target_params[i]) < DIAGONAL_THRESHOLD {
                diagonal_limit(&targets[i])
            } else {
                bracket_from_points(src.point, src.d1, targets[i].point)
            };
            *entry = w * k + if i == j { 1.0 } else { 0.0 };
        }
    });
    DenseMatrix::from_real_columns(size, size, data)
}

/// Collocation values `f(t_kr)`.
pub fn assemble_rhs(disc: &Discretization, rhs: Rhs) -> Vec<Complex64> {
    (0..disc.size()).map(|i| rhs.eval(disc.contour.point(disc.target_param(i)))).collect()
}

pub fn assemble(disc: &Discretization, rhs: Rhs) -> Result<NystromSystem> {
    Ok(NystromSystem { disc: disc.clone(), matrix: assemble_matrix(disc)?, rhs: assemble_rhs(disc, rhs), rhs_kind: rhs })
}

pub fn solve_system(system: &NystromSystem) -> Result<Solution> {
    let values = numerics::solve(&system.matrix, &system.rhs)?;
    Ok(Solution { disc: system.disc.clone(), values, rhs: system.rhs_kind })
}

/// Assembles, factors once and solves for every right-hand side in `rhs`.
pub fn solve_many(disc: &Discretization, rhs: &[Rhs]) -> Result<Vec<Solution>> {
    let lu = {
        let matrix = assemble_matrix(disc)?;
        numerics::factorize(&matrix)?
    };
    let columns: Vec<Vec<Complex64>> = rhs.iter().map(|&r| assemble_rhs(disc, r)).collect();
    let refs: Vec<&[Complex64]> = columns.iter().map(|c| c.as_slice()).collect();
    let values = lu.solve_many(&refs)?;
    Ok(values.into_iter().zip(rhs).map(|(values, &rhs)| Solution { disc: disc.clone(), values, rhs }).collect())
}

/// Nyström interpolant `x(s) = f(γ(s)) - Σ (w_p/n) bracket(τ_lp, γ(s)) x_lp`.
pub fn interpolate(solution: &Solution, s: f64) -> Result<Complex64> {
    Ok(interpolate_many(solution, &[s])?[0])
}

/// [`interpolate`] at many parameters, evaluated in parallel.
pub fn interpolate_many(solution: &Solution, params: &[f64]) -> Result<Vec<Complex64>> {
    let disc = &solution.disc;
    let mut targets = Vec::with_capacity(params.len());
    for &s in params {
        targets.push(disc.contour.derivatives_at(s)?);
    }
    let sources = disc.source_jets();
    let source_params: Vec<f64> = (0..disc.size()).map(|j| disc.source_param(j)).collect();
    let weights: Vec<f64> = (0..disc.size()).map(|j| disc.source_weight(j)).collect();
    Ok(params
        .par_iter()
        .zip(targets.par_iter())
        .map(|(&s, tgt)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..sources.len() {
                let k = if periodic_distance(source_params[j], s) < DIAGONAL_THRESHOLD {
                    diagonal_limit(tgt)
                } else {
                    bracket_from_points(sources[j].point, sources[j].d1, tgt.point)
                };
                acc += weights[j] * k * solution.values[j];
            }
            solution.rhs.eval(tgt.point) - acc
        })
        .collect())
}

/// `‖x_{2n} - I[x_n]‖ / ‖x_{2n}‖` in the quadrature-weighted discrete L²(Γ)
/// norm of the fine grid, weights `(w_r/2n)·|γ'(t_kr)|`; the coarse solution
/// is evaluated on the fine grid by Nyström interpolation.
pub fn relative_error(coarse: &Solution, fine: &Solution) -> Result<f64> {
    if !coarse.disc.same_configuration(&fine.disc) || coarse.rhs != fine.rhs {
        return invalid("coarse and fine solutions must share contour, rules and right-hand side");
    }
    if fine.disc.n != 2 * coarse.disc.n {
        return invalid(format!("fine panel count {} is not twice the coarse {}", fine.disc.n, coarse.disc.n));
    }
    let fd = &fine.disc;
    let params: Vec<f64> = (0..fd.size()).map(|i| fd.target_param(i)).collect();
    let interpolated = interpolate_many(coarse, &params)?;
    let mut diff = 0.0;
    let mut reference = 0.0;
    for (i, &s) in params.iter().enumerate() {
        let w = fd.rule_delta.weights()[i % fd.points_per_panel()] / fd.n as f64 * fd.jet(s).d1.norm();
        diff += w * (fine.values[i] - interpolated[i]).norm_sqr();
        reference += w * fine.values[i].norm_sqr();
    }
    if reference == 0.0 {
        return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((diff / reference).sqrt())
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
}

fn check_n_list(contour: &Contour, n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return invalid("panel list is empty");
    }
    let q = contour.corner_count().max(1);
    for (i, &n) in n_list.iter().enumerate() {
        if n == 0 || n % q != 0 {
            return invalid(format!("panel count {n} must be a positive multiple of {q}"));
        }
        if n_list[..i].contains(&n) {
            return invalid(format!("panel count {n} appears twice"));
        }
    }
    Ok(())
}

/// `E_n` for each `n` in `n_list`, comparing the solutions at `n` and `2n`.
pub fn convergence_study(contour: &Contour, rhs: Rhs, d: usize, n_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    Ok(convergence_studies(contour, &[rhs], d, n_list)?.pop().unwrap().1)
}

/// Convergence tables for several right-hand sides, sharing one
/// factorization per panel count.
pub fn convergence_studies(
    contour: &Contour,
    rhs: &[Rhs],
    d: usize,
    n_list: &[usize],
) -> Result<Vec<(Rhs, Vec<ConvergenceRow>)>> {
    check_n_list(contour, n_list)?;
    if rhs.is_empty() {
        return invalid("no right-hand side given");
    }
    let rule = QuadratureRule::gauss_legendre(d)?;
    let mut solutions: BTreeMap<usize, Vec<Solution>> = BTreeMap::new();
    for &n in n_list {
        for m in [n, 2 * n] {
            if let std::collections::btree_map::Entry::Vacant(slot) = solutions.entry(m) {
                let disc = Discretization::new(contour.clone(), rule.clone(), rule.clone(), m)?;
                slot.insert(solve_many(&disc, rhs)?);
            }
        }
    }
    let mut tables = Vec::with_capacity(rhs.len());
    for (k, &r) in rhs.iter().enumerate() {
        let mut rows = Vec::with_capacity(n_list.len());
        for &n in n_list {
            let error = relative_error(&solutions[&n][k], &solutions[&(2 * n)][k])?;
            rows.push(ConvergenceRow { n, error });
        }
        tables.push((r, rows));
    }
    Ok(tables)
}

/// Writes a convergence table as CSV `n,E_n`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,E_n")?;
    for row in rows {
        writeln!(out, "{},{:.16e}", row.n, row.error)?;
    }
    Ok(())
}

/// How the spectral condition number is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionMethod {
    /// Full singular value decomposition.
    #[default]
    Svd,
    /// LU factorization plus Lanczos on `AᵀA` and `(AᵀA)⁻¹`.
    Lanczos,
}

impl std::str::FromStr for ConditionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(Self::Svd),
            "lanczos" => Ok(Self::Lanczos),
            other => invalid(format!("unknown condition method {other:?} (expected svd or lanczos)")),
        }
    }
}

/// `κ₂(I + V_n)` for `ε = δ` = Gauss-Legendre points.
pub fn condition_of(contour: &Contour, n: usize, d: usize, method: ConditionMethod) -> Result<f64> {
    let disc = Discretization::gauss(contour.clone(), d, n)?;
    let matrix = assemble_matrix(&disc)?;
    match method {
        ConditionMethod::Svd => numerics::condition_number_2(&matrix),
        ConditionMethod::Lanczos => numerics::condition_number_lanczos(&matrix, LanczosOptions::default()),
    }
}
