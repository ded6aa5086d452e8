//! Dense linear algebra used by the solvers and the stability analysis.
//!
//! Factorizations and singular values are delegated to `faer`, built without
//! its thread pool so every result is bit-reproducible. Matrices whose entries
//! are all real (the Nyström and wedge matrices) are stored and factored in
//! real arithmetic.

use faer::linalg::solvers::{Solve, SolveCore};
use faer::{Conj, Mat, MatMut, MatRef};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// A dense `rows × cols` matrix, column-major in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Storage,
}

impl DenseMatrix {
    /// Matrix with entries `f(i, j)`.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        check_shape(rows, cols)?;
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_complex_columns(rows, cols, data)
    }

    /// Real matrix with entries `f(i, j)`.
    pub fn from_real_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        check_shape(rows, cols)?;
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_real_columns(rows, cols, data)
    }

    /// Real matrix from column-major data.
    pub fn from_real_columns(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols)?;
        if data.len() != rows * cols {
            return invalid(format!("expected {} entries, got {}", rows * cols, data.len()));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(format!("non-finite entry at ({}, {})", k % rows, k / rows)));
        }
        Ok(Self { rows, cols, data: Storage::Real(data) })
    }

    /// Complex matrix from column-major data.
    pub fn from_complex_columns(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        check_shape(rows, cols)?;
        if data.len() != rows * cols {
            return invalid(format!("expected {} entries, got {}", rows * cols, data.len()));
        }
        if let Some(k) = data.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NumericalFailure(format!("non-finite entry at ({}, {})", k % rows, k / rows)));
        }
        Ok(Self { rows, cols, data: Storage::Complex(data) })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_real_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// True when the matrix is held in real storage.
    pub fn is_real(&self) -> bool {
        matches!(self.data, Storage::Real(_))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        let k = j * self.rows + i;
        match &self.data {
            Storage::Real(d) => Complex64::new(d[k], 0.0),
            Storage::Complex(d) => d[k],
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match &self.data {
            Storage::Real(d) => d.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Storage::Complex(d) => d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// `A x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            match &self.data {
                Storage::Real(d) => {
                    for (yi, &a) in y.iter_mut().zip(&d[j * self.rows..(j + 1) * self.rows]) {
                        *yi += a * xj;
                    }
                }
                Storage::Complex(d) => {
                    for (yi, &a) in y.iter_mut().zip(&d[j * self.rows..(j + 1) * self.rows]) {
                        *yi += a * xj;
                    }
                }
            }
        }
        y
    }

    /// Largest entrywise difference to `other` (same shape required).
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..self.rows {
                m = m.max((self.get(i, j) - other.get(i, j)).norm());
            }
        }
        m
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return invalid(format!("matrix dimensions must be positive, got {rows}x{cols}"));
    }
    Ok(())
}

fn require_square(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return invalid(format!("square matrix required, got {}x{}", m.rows, m.cols));
    }
    Ok(())
}

/// Partially pivoted LU factors of a square matrix.
pub enum LuFactors {
    Real(faer::linalg::solvers::PartialPivLu<f64>),
    Complex(faer::linalg::solvers::PartialPivLu<Complex64>),
}

impl std::fmt::Debug for LuFactors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuFactors").field("dim", &self.dim()).field("real", &matches!(self, LuFactors::Real(_))).finish()
    }
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        match self {
            LuFactors::Real(lu) => lu.U().nrows(),
            LuFactors::Complex(lu) => lu.U().nrows(),
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.solve_many(&[b]).map(|mut v| v.pop().unwrap())
    }

    /// Solves `A x = b` for several right-hand sides at once.
    pub fn solve_many(&self, rhs: &[&[Complex64]]) -> Result<Vec<Vec<Complex64>>> {
        let n = self.dim();
        if let Some(b) = rhs.iter().find(|b| b.len() != n) {
            return invalid(format!("right-hand side has length {}, expected {n}", b.len()));
        }
        match self {
            LuFactors::Real(lu) => {
                // real and imaginary parts as separate columns
                let mut x = Mat::<f64>::from_fn(n, 2 * rhs.len(), |i, j| {
                    let v = rhs[j / 2][i];
                    if j % 2 == 0 {
                        v.re
                    } else {
                        v.im
                    }
                });
                lu.solve_in_place(x.as_mut());
                Ok((0..rhs.len())
                    .map(|k| (0..n).map(|i| Complex64::new(x[(i, 2 * k)], x[(i, 2 * k + 1)])).collect())
                    .collect())
            }
            LuFactors::Complex(lu) => {
                let mut x = Mat::<Complex64>::from_fn(n, rhs.len(), |i, j| rhs[j][i]);
                lu.solve_in_place(x.as_mut());
                Ok((0..rhs.len()).map(|k| (0..n).map(|i| x[(i, k)]).collect()).collect())
            }
        }
    }
}

/// LU factorization with partial pivoting; an exactly zero pivot is reported
/// as [`Error::SingularMatrix`].
pub fn factorize(matrix: &DenseMatrix) -> Result<LuFactors> {
    require_square(matrix)?;
    let n = matrix.rows;
    let lu = match &matrix.data {
        Storage::Real(d) => LuFactors::Real(faer::linalg::solvers::PartialPivLu::new(MatRef::from_column_major_slice(d, n, n))),
        Storage::Complex(d) => {
            LuFactors::Complex(faer::linalg::solvers::PartialPivLu::new(MatRef::from_column_major_slice(d, n, n)))
        }
    };
    let zero_pivot = match &lu {
        LuFactors::Real(f) => (0..n).find(|&i| f.U()[(i, i)] == 0.0),
        LuFactors::Complex(f) => (0..n).find(|&i| f.U()[(i, i)] == Complex64::new(0.0, 0.0)),
    };
    if let Some(pivot) = zero_pivot {
        return Err(Error::SingularMatrix { pivot });
    }
    Ok(lu)
}

/// Solves `A x = b` by partially pivoted LU.
pub fn solve(matrix: &DenseMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    require_square(matrix)?;
    if rhs.len() != matrix.rows {
        return invalid(format!("right-hand side has length {}, expected {}", rhs.len(), matrix.rows));
    }
    factorize(matrix)?.solve(rhs)
}

/// Singular values in descending order.
pub fn singular_values(matrix: &DenseMatrix) -> Result<Vec<f64>> {
    let (m, n) = (matrix.rows, matrix.cols);
    let mut s = match &matrix.data {
        Storage::Real(d) => MatRef::from_column_major_slice(d, m, n).singular_values(),
        Storage::Complex(d) => MatRef::from_column_major_slice(d, m, n).singular_values(),
    }
    .map_err(|e| Error::NumericalFailure(format!("singular value iteration did not converge: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Spectral condition number `σ_max / σ_min` from a full SVD; `+∞` when
/// `σ_min` is zero.
pub fn condition_number_2(matrix: &DenseMatrix) -> Result<f64> {
    require_square(matrix)?;
    let s = singular_values(matrix)?;
    Ok(ratio(s[0], *s.last().unwrap()))
}

fn ratio(max: f64, min: f64) -> f64 {
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Controls for [`condition_number_lanczos`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Relative change of the Ritz value below which the iteration stops.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_steps: 400 }
    }
}

/// Spectral condition number from one LU factorization and two Lanczos runs:
/// `σ_max² = λ_max(AᴴA)` and `σ_min⁻² = λ_max(A⁻¹A⁻ᴴ)`.
///
/// Agrees with [`condition_number_2`] to roughly `tol` at a fraction of the
/// cost of a full SVD; used by the angle sweeps.
pub fn condition_number_lanczos(matrix: &DenseMatrix, opts: LanczosOptions) -> Result<f64> {
    require_square(matrix)?;
    let lu = match factorize(matrix) {
        Ok(lu) => lu,
        Err(Error::SingularMatrix { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let n = matrix.rows;
    let (sigma_max_sq, inv_sigma_min_sq) = match (&matrix.data, &lu) {
        (Storage::Real(d), LuFactors::Real(f)) => {
            let a = MatRef::from_column_major_slice(d.as_slice(), n, n);
            let big = lanczos_max_eigenvalue(n, opts, |v, out| {
                let av = a * faer::ColRef::from_slice(v);
                let atav = a.transpose() * &av;
                for (o, x) in out.iter_mut().zip(atav.iter()) {
                    *o = *x;
                }
            })?;
            let small = lanczos_max_eigenvalue(n, opts, |v, out| {
                out.copy_from_slice(v);
                let mut col = MatMut::from_column_major_slice_mut(out, n, 1);
                f.solve_transpose_in_place(col.as_mut());
                f.solve_in_place(col.as_mut());
            })?;
            (big, small)
        }
        (Storage::Complex(d), LuFactors::Complex(f)) => {
            let a = MatRef::from_column_major_slice(d.as_slice(), n, n);
            // realified: v ∈ ℝ^{2n} holds (Re, Im)
            let big = lanczos_max_eigenvalue(2 * n, opts, |v, out| {
                let x = faer::Col::<Complex64>::from_fn(n, |i| Complex64::new(v[i], v[n + i]));
                let ax = a * &x;
                let y = a.adjoint() * &ax;
                for i in 0..n {
                    out[i] = y[i].re;
                    out[n + i] = y[i].im;
                }
            })?;
            let small = lanczos_max_eigenvalue(2 * n, opts, |v, out| {
                let mut x = Mat::<Complex64>::from_fn(n, 1, |i, _| Complex64::new(v[i], v[n + i]));
                f.solve_transpose_in_place_with_conj(Conj::Yes, x.as_mut());
                f.solve_in_place(x.as_mut());
                for i in 0..n {
                    out[i] = x[(i, 0)].re;
                    out[n + i] = x[(i, 0)].im;
                }
            })?;
            (big, small)
        }
        _ => unreachable!("factorization storage matches matrix storage"),
    };
    if !inv_sigma_min_sq.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(sigma_max_sq.sqrt() * inv_sigma_min_sq.sqrt())
}

/// Largest eigenvalue of a symmetric positive semi-definite operator on `ℝ^m`
/// by Lanczos with full reorthogonalization and a fixed start vector.
fn lanczos_max_eigenvalue<F>(m: usize, opts: LanczosOptions, mut apply: F) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let steps = opts.max_steps.min(m).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha: Vec<f64> = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);

    let mut q: Vec<f64> = (0..m).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662466927).sin()).collect();
    normalize(&mut q);
    let mut w = vec![0.0; m];
    let mut theta_prev = f64::NAN;
    let mut stable = 0;
    for j in 0..steps {
        apply(&q, &mut w);
        if w.iter().any(|x| !x.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let a = dot(&q, &w);
        alpha.push(a);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(q);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        let theta = tridiagonal_max_eigenvalue(&alpha, &beta);
        if j > 0 && (theta - theta_prev).abs() <= opts.tol * theta.abs() {
            stable += 1;
        } else {
            stable = 0;
        }
        if stable >= 2 || b <= 1e-14 * theta.abs() || j + 1 == steps {
            return Ok(theta);
        }
        theta_prev = theta;
        beta.push(b);
        q = w.iter().map(|x| x / b).collect();
    }
    Err(Error::NumericalFailure("Lanczos iteration did not run".into()))
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta` (`beta.len() == alpha.len() - 1`), by
/// Sturm-sequence bisection.
fn tridiagonal_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    // number of eigenvalues strictly less than x
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..k {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::MIN_POSITIVE;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        if count_below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    for x in a.iter_mut() {
        *x /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<Complex64> =
            (0..n * n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        DenseMatrix::from_complex_columns(n, n, data).unwrap()
    }

    /// One-sided (Hestenes) Jacobi: orthogonalizes columns by plane rotations
    /// until all pairs are orthogonal; singular values are the column norms.
    fn jacobi_singular_values(m: &DenseMatrix) -> Vec<f64> {
        let (rows, cols) = (m.rows(), m.cols());
        let mut a: Vec<Vec<Complex64>> = (0..cols).map(|j| (0..rows).map(|i| m.get(i, j)).collect()).collect();
        for _sweep in 0..60 {
            let mut off: f64 = 0.0;
            for p in 0..cols {
                for q in (p + 1)..cols {
                    let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                    let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                    let gamma: Complex64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                    let g = gamma.norm();
                    if g == 0.0 {
                        continue;
                    }
                    off = off.max(g / (alpha * beta).sqrt());
                    let phase = gamma / g;
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..rows {
                        let x = a[p][i];
                        let y = a[q][i];
                        a[p][i] = c * x - s * phase.conj() * y;
                        a[q][i] = s * phase * x + c * y;
                    }
                }
            }
            if off < 1e-15 {
                break;
            }
        }
        let mut s: Vec<f64> = a.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
        s.sort_by(|x, y| y.total_cmp(x));
        s
    }

    #[test]
    fn solve_examples() {
        let id = DenseMatrix::identity(4).unwrap();
        let b: Vec<Complex64> = (0..4).map(|k| Complex64::new(k as f64, -1.0)).collect();
        assert_eq!(solve(&id, &b).unwrap(), b);

        let d = DenseMatrix::from_real_fn(2, 2, |i, j| if i == j { [2.0, 4.0][i] } else { 0.0 }).unwrap();
        let x = solve(&d, &[Complex64::new(2.0, 0.0), Complex64::new(8.0, 0.0)]).unwrap();
        assert!((x[0] - 1.0).norm() < 1e-15 && (x[1] - 2.0).norm() < 1e-15);
    }

    #[test]
    fn solve_random_recovers_solution() {
        let a = random_complex(50, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<Complex64> = (0..50).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let b = a.matvec(&x);
        let got = solve(&a, &b).unwrap();
        let err: f64 = got.iter().zip(&x).map(|(g, e)| (g - e).norm_sqr()).sum::<f64>().sqrt();
        let xn: f64 = x.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / xn <= 1e-9);
        let r = a.matvec(&got);
        let res: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        assert!(res / (a.frobenius_norm() * xn + bn) <= 1e-10);
    }

    #[test]
    fn real_storage_solves_complex_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseMatrix::from_real_fn(30, 30, |i, j| if i == j { 4.0 } else { ((i * 31 + j * 17) % 7) as f64 / 7.0 - 0.5 }).unwrap();
        let x: Vec<Complex64> = (0..30).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let got = solve(&a, &a.matvec(&x)).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_pivot_is_reported() {
        let z = DenseMatrix::from_real_fn(3, 3, |i, j| if i == j && i < 2 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(solve(&z, &[Complex64::new(1.0, 0.0); 3]), Err(Error::SingularMatrix { pivot: 2 }));
        assert_eq!(condition_number_2(&z).unwrap(), f64::INFINITY);
        assert_eq!(condition_number_lanczos(&z, LanczosOptions::default()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn shape_and_finiteness_checks() {
        assert!(DenseMatrix::from_real_fn(0, 3, |_, _| 0.0).is_err());
        assert!(matches!(DenseMatrix::from_real_fn(2, 2, |_, _| f64::NAN), Err(Error::NumericalFailure(_))));
        let rect = DenseMatrix::from_real_fn(2, 3, |_, _| 1.0).unwrap();
        assert!(matches!(solve(&rect, &[Complex64::new(0.0, 0.0); 2]), Err(Error::InvalidArgument(_))));
        assert!(matches!(condition_number_2(&rect), Err(Error::InvalidArgument(_))));
        let id = DenseMatrix::identity(3).unwrap();
        assert!(matches!(solve(&id, &[Complex64::new(0.0, 0.0); 2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn singular_value_examples() {
        let s = singular_values(&DenseMatrix::identity(5).unwrap()).unwrap();
        assert!(s.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let d = DenseMatrix::from_real_fn(2, 2, |i, j| if i == j { [3.0, 4.0][i] } else { 0.0 }).unwrap();
        let s = singular_values(&d).unwrap();
        assert!((s[0] - 4.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
        assert!((condition_number_2(&DenseMatrix::identity(3).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        let d = DenseMatrix::from_real_fn(2, 2, |i, j| if i == j { [1.0, 1e-8][i] } else { 0.0 }).unwrap();
        assert!((condition_number_2(&d).unwrap() / 1e8 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_match_jacobi_oracle() {
        let a = random_complex(30, 9);
        let s = singular_values(&a).unwrap();
        let oracle = jacobi_singular_values(&a);
        for (x, y) in s.iter().zip(&oracle) {
            assert!((x - y).abs() <= 1e-8 * y.max(1.0), "{x} vs {y}");
        }
        let fro2: f64 = s.iter().map(|v| v * v).sum();
        assert!((fro2 / a.frobenius_norm().powi(2) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn condition_of_hilbert_like_matrix_matches_oracle() {
        let h = DenseMatrix::from_fn(8, 8, |i, j| Complex64::new(1.0 / (i + j + 1) as f64, 0.1 / (i + 2 * j + 1) as f64)).unwrap();
        let kappa = condition_number_2(&h).unwrap();
        let s = jacobi_singular_values(&h);
        let oracle = s[0] / s[7];
        assert!((kappa / oracle - 1.0).abs() <= 1e-6, "{kappa} vs {oracle}");
    }

    #[test]
    fn unitary_invariance() {
        let a = random_complex(20, 21);
        // unitary factor from the Q of a QR factorization of a random matrix
        let r = random_complex(20, 22);
        let rm = Mat::<Complex64>::from_fn(20, 20, |i, j| r.get(i, j));
        let q = rm.qr().compute_Q();
        let am = Mat::<Complex64>::from_fn(20, 20, |i, j| a.get(i, j));
        let qa = &q * &am;
        let qa = DenseMatrix::from_fn(20, 20, |i, j| qa[(i, j)]).unwrap();
        let s1 = singular_values(&a).unwrap();
        let s2 = singular_values(&qa).unwrap();
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() <= 1e-8 * x);
        }
    }

    #[test]
    fn lanczos_condition_matches_svd() {
        let a = random_complex(60, 31);
        let svd = condition_number_2(&a).unwrap();
        let est = condition_number_lanczos(&a, LanczosOptions::default()).unwrap();
        assert!((est / svd - 1.0).abs() < 1e-8, "{est} vs {svd}");

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let real = DenseMatrix::from_real_fn(80, 80, |i, j| {
            let base = ((i * 13 + j * 7) % 11) as f64 / 11.0;
            if i == j {
                base + 1e-3 * (i as f64)
            } else {
                base
            }
        })
        .unwrap();
        let svd = condition_number_2(&real).unwrap();
        let est = condition_number_lanczos(&real, LanczosOptions::default()).unwrap();
        assert!((est / svd - 1.0).abs() < 1e-8, "{est} vs {svd}");
        let _ = rng.random::<f64>();
    }

    #[test]
    fn tridiagonal_eigenvalue() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3
        assert!((tridiagonal_max_eigenvalue(&[2.0, 2.0], &[1.0]) - 3.0).abs() < 1e-14);
        assert!((tridiagonal_max_eigenvalue(&[5.0], &[]) - 5.0).abs() < 1e-14);
        // 1D Laplacian, largest eigenvalue 2 - 2cos(kπ/(k+1))
        let k = 40;
        let top = tridiagonal_max_eigenvalue(&vec![2.0; k], &vec![-1.0; k - 1]);
        let exact = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (k as f64 + 1.0)).cos();
        assert!((top - exact).abs() < 1e-13);
    }
}
