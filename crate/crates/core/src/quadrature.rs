//! Gauss-Legendre rules on `[0, 1]` and the composite panel rule
//! `∫₀¹ u(s) ds ≈ Σ_l Σ_p w_p u((l + ε_p)/n) / n`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Largest supported number of points per panel.
pub const MAX_POINTS: usize = 64;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// A `d`-point rule on `[0, 1]` with strictly increasing nodes in `(0, 1)`,
/// positive weights summing to one, and mirror symmetry about `1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// The `d`-point Gauss-Legendre rule mapped to `[0, 1]`; exact for
    /// polynomials of degree `2d - 1`.
    pub fn gauss_legendre(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_POINTS {
            return invalid(format!("number of Gauss-Legendre points must be in 1..={MAX_POINTS}, got {d}"));
        }
        let half = d / 2;
        // positive roots of P_d on [-1, 1], descending, with their weights
        let mut roots = Vec::with_capacity(half);
        for i in 0..half {
            let mut x = (PI * (i as f64 + 0.75) / (d as f64 + 0.5)).cos();
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let (p, dp) = legendre_with_derivative(d, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NumericalFailure(format!(
                    "Newton iteration for Gauss-Legendre root {i} of degree {d} did not converge"
                )));
            }
            let (_, dp) = legendre_with_derivative(d, x);
            roots.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }

        let mut nodes = Vec::with_capacity(d);
        let mut weights = Vec::with_capacity(d);
        for &(x, w) in &roots {
            nodes.push(0.5 - 0.5 * x);
            weights.push(0.5 * w);
        }
        if d % 2 == 1 {
            let (_, dp) = legendre_with_derivative(d, 0.0);
            nodes.push(0.5);
            weights.push(1.0 / (dp * dp));
        }
        for &(x, w) in roots.iter().rev() {
            nodes.push(0.5 + 0.5 * x);
            weights.push(0.5 * w);
        }
        Ok(Self { nodes, weights })
    }

    /// The `d`-point midpoint rule, nodes `(2p + 1)/(2d)` with equal weights.
    /// Useful as an alternative set of collocation parameters.
    pub fn midpoint(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_POINTS {
            return invalid(format!("number of midpoint nodes must be in 1..={MAX_POINTS}, got {d}"));
        }
        let nodes = (0..d).map(|p| (2 * p + 1) as f64 / (2 * d) as f64).collect();
        Ok(Self { nodes, weights: vec![1.0 / d as f64; d] })
    }

    /// Builds a rule from explicit nodes and weights, checking every invariant.
    pub fn custom(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let d = nodes.len();
        if d == 0 || d > MAX_POINTS || weights.len() != d {
            return invalid(format!(
                "rule needs 1..={MAX_POINTS} nodes and as many weights (got {d} nodes, {} weights)",
                weights.len()
            ));
        }
        if nodes.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return invalid("nodes must lie in the open interval (0, 1)");
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("nodes must be strictly increasing");
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return invalid("weights must be positive");
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-14 {
            return invalid("weights must sum to 1");
        }
        for p in 0..d {
            let q = d - 1 - p;
            if (nodes[p] + nodes[q] - 1.0).abs() > 1e-13 || (weights[p] - weights[q]).abs() > 1e-13 {
                return invalid("rule must be symmetric about 1/2");
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The reflected rule `ε̃_p = 1 - ε_{d-1-p}`, `w̃_p = w_{d-1-p}`, kept in
    /// ascending order.
    pub fn reversed(&self) -> Self {
        Self {
            nodes: self.nodes.iter().rev().map(|e| 1.0 - e).collect(),
            weights: self.weights.iter().rev().copied().collect(),
        }
    }

    /// Same rule up to `tol` in every node and weight.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| (a - b).abs() <= tol)
            && self.weights.iter().zip(&other.weights).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// `P_d(x)` and `P_d'(x)` by the three-term recurrence.
fn legendre_with_derivative(d: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=d {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if d == 0 {
        return (1.0, 0.0);
    }
    let d = d as f64;
    (p1, d * (x * p1 - p0) / (x * x - 1.0))
}

/// The abscissae `s_{lp} = (l + ε_p)/n` of the composite rule, ordered
/// panel-major.
#[derive(Debug, Clone)]
pub struct CompositeGrid {
    n: usize,
    rule: QuadratureRule,
}

impl CompositeGrid {
    pub fn new(rule: QuadratureRule, n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("panel count must be positive");
        }
        Ok(Self { n, rule })
    }

    pub fn panels(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn len(&self) -> usize {
        self.n * self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `s_{lp}` for flat index `l * d + p`.
    pub fn abscissa(&self, index: usize) -> f64 {
        let d = self.rule.len();
        (((index / d) as f64) + self.rule.nodes[index % d]) / self.n as f64
    }

    /// Weight `w_p / n` attached to flat index `l * d + p`.
    pub fn weight(&self, index: usize) -> f64 {
        self.rule.weights[index % self.rule.len()] / self.n as f64
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.abscissa(i)).collect()
    }
}

/// `Σ_l Σ_p w_p f(s_{lp}) / n`.
pub fn composite_integrate<F>(rule: &QuadratureRule, n: usize, mut f: F) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    try_composite_integrate(rule, n, |s| Ok(f(s))).expect("infallible integrand")
}

/// As [`composite_integrate`], propagating the first integrand failure.
pub fn try_composite_integrate<F>(rule: &QuadratureRule, n: usize, mut f: F) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if n == 0 {
        return invalid("panel count must be positive");
    }
    let scale = 1.0 / n as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for l in 0..n {
        let mut panel = Complex64::new(0.0, 0.0);
        for (&e, &w) in rule.nodes.iter().zip(&rule.weights) {
            panel += w * f((l as f64 + e) * scale)?;
        }
        total += panel;
    }
    Ok(total * scale)
}
