//! Symmetric eigensolver and the Einstein spectral notions built on it.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::einstein::{einstein_product, matricize, matricize_general, unmatricize};
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::random::unit_vector;
use crate::tensor::{scaled_tol, Tensor, DEFAULT_TOL};

/// Jacobi stops once the off-diagonal Frobenius norm drops below this
/// fraction of the input's Frobenius norm.
pub const JACOBI_REL_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, values in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.max().abs().max(self.min().abs())
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> Matrix {
        let v = &self.vectors;
        let scaled = Matrix::from_fn(v.rows(), v.cols(), |i, j| v.get(i, j) * self.values[j])
            .expect("dimensions come from an existing matrix");
        scaled.matmul_t(v).expect("square factors")
    }
}

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// `symmetry_tol` bounds `max |M - M^T|` relative to `max |M|`.
pub fn sym_eig(m: &Matrix, symmetry_tol: f64) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::contract(format!(
            "matrix is {}x{}, not square",
            m.rows(),
            m.cols()
        )));
    }
    let asym = m.asymmetry();
    if asym > scaled_tol(symmetry_tol, m.max_abs()) {
        return Err(Error::contract(format!(
            "matrix is not symmetric (max |M - M^T| = {asym:e})"
        )));
    }
    let n = m.rows();
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)))?;
    let mut v = Matrix::identity(n)?;
    let target = JACOBI_REL_TOL * a.frobenius_norm();

    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Solver {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(j, j)
            .total_cmp(&a.get(i, i))
            .then_with(|| lexicographic(v.column(i), v.column(j)))
    });
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v.get(r, order[c]))?;
    Ok(EigenDecomposition { values, vectors })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a.get(i, j) * a.get(i, j);
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();
    for k in 0..n {
        let (akp, akq) = (a.get(k, p), a.get(k, q));
        a.set(k, p, c * akp - s * akq);
        a.set(k, q, s * akp + c * akq);
    }
    for k in 0..n {
        let (apk, aqk) = (a.get(p, k), a.get(q, k));
        a.set(p, k, c * apk - s * aqk);
        a.set(q, k, s * apk + c * aqk);
    }
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for k in 0..n {
        let (vkp, vkq) = (v.get(k, p), v.get(k, q));
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

fn require_e_symmetric(a: &Tensor) -> Result<()> {
    if a.is_e_symmetric(DEFAULT_TOL)? {
        Ok(())
    } else {
        Err(Error::contract("tensor is not Einstein-symmetric"))
    }
}

/// Eigendecomposition of `f(A)` for an E-symmetric `A`.
pub fn e_eigen(a: &Tensor) -> Result<EigenDecomposition> {
    require_e_symmetric(a)?;
    sym_eig(&matricize(a)?, DEFAULT_TOL)
}

/// The `d^m` Einstein eigenvalues, descending.
pub fn e_eigenvalues(a: &Tensor) -> Result<Vec<f64>> {
    Ok(e_eigen(a)?.values)
}

pub fn e_lambda_max(a: &Tensor) -> Result<f64> {
    Ok(e_eigen(a)?.max())
}

pub fn e_lambda_min(a: &Tensor) -> Result<f64> {
    Ok(e_eigen(a)?.min())
}

/// `A = U * D * U^T` with `U` E-orthogonal and `D` diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinEvd {
    pub u: Tensor,
    pub d: Tensor,
    pub values: Vec<f64>,
}

impl EinsteinEvd {
    pub fn reconstruct(&self) -> Result<Tensor> {
        let ud = einstein_product(&self.u, &self.d)?;
        einstein_product(&ud, &self.u.transpose_even()?)
    }
}

pub fn e_evd(a: &Tensor) -> Result<EinsteinEvd> {
    let eig = e_eigen(a)?;
    let order = a.order();
    let d = a.dim().unwrap_or(1);
    let u = unmatricize(&eig.vectors, order, d)?;
    let dt = unmatricize(&Matrix::from_diagonal(&eig.values)?, order, d)?;
    Ok(EinsteinEvd {
        u,
        d: dt,
        values: eig.values,
    })
}

/// `max_i |λ_i^E(A)|`.
pub fn e_spectral_norm(a: &Tensor) -> Result<f64> {
    Ok(e_eigen(a)?.spectral_radius())
}

/// Einstein trace, computed as the sum of the diagonal entries `a_{i..i..}`.
pub fn e_trace(a: &Tensor) -> Result<f64> {
    require_e_symmetric(a)?;
    Ok(matricize(a)?.trace())
}

/// Spectral norm in the generalized-product sense: the largest eigenvalue of
/// the Hermitian dilation of `f̄(A)`, i.e. the largest singular value of `f̄(A)`.
pub fn gen_spectral_norm(a: &Tensor) -> Result<f64> {
    let h = matricize_general(a)?.hermitian_dilation();
    Ok(sym_eig(&h, 0.0)?.max().max(0.0))
}

fn psd_slack(eig: &EigenDecomposition, tol: f64) -> f64 {
    tol * eig.spectral_radius().max(1.0)
}

/// All Einstein eigenvalues `>= -tol * max(1, ‖A‖^E)`.
pub fn is_e_psd(a: &Tensor, tol: f64) -> Result<bool> {
    let eig = e_eigen(a)?;
    Ok(eig.min() >= -psd_slack(&eig, tol))
}

/// All Einstein eigenvalues `> tol * max(1, ‖A‖^E)`.
pub fn is_e_pd(a: &Tensor, tol: f64) -> Result<bool> {
    let eig = e_eigen(a)?;
    Ok(eig.min() > psd_slack(&eig, tol))
}

/// Settings for [`z_eigen_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZEigenOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Convergence threshold on the change of `A x^{2m}` between steps.
    pub step_tol: f64,
    pub seed: u64,
}

impl Default for ZEigenOptions {
    fn default() -> Self {
        ZEigenOptions {
            restarts: 100,
            max_iters: 1000,
            step_tol: 1e-10,
            seed: 0x5EED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZEigenEstimate {
    /// `A x^{2m}` at the returned vector; never above the largest Z-eigenvalue.
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖A x^{2m-1} - value x‖`.
    pub residual: f64,
    pub converged_starts: usize,
}

/// True iff `A` is unchanged by every permutation of its indices.
pub fn is_fully_symmetric(a: &Tensor, tol: f64) -> bool {
    if !a.is_cubic() {
        return false;
    }
    let bound = scaled_tol(tol, a.max_abs());
    let mut sorted = vec![0; a.order()];
    let mut ok = true;
    crate::tensor::for_each_index(a.shape(), |idx, flat| {
        sorted.copy_from_slice(idx);
        sorted.sort_unstable();
        if (a.data()[flat] - a.at(&sorted)).abs() > bound {
            ok = false;
        }
    });
    ok
}

/// Largest Z-eigenvalue estimate by the shifted symmetric higher-order power
/// method, started from `restarts` random unit vectors.
///
/// The shift `1 + (2m-1)‖A‖_F` dominates the curvature of `x -> A x^{2m}` on
/// the unit ball, so every run increases `A x^{2m}` monotonically.
pub fn z_eigen_max(a: &Tensor, opts: &ZEigenOptions) -> Result<ZEigenEstimate> {
    let (m, _) = a.even_split()?;
    if m == 0 {
        return Err(Error::shape("Z-eigenvalues need order at least 2"));
    }
    if !is_fully_symmetric(a, DEFAULT_TOL) {
        return Err(Error::contract("tensor is not fully symmetric"));
    }
    let d = a.shape()[0];
    let alpha = 1.0 + (2 * m - 1) as f64 * a.frobenius_norm();

    let mut best: Option<ZEigenEstimate> = None;
    let mut best_residual = f64::INFINITY;
    let mut converged_starts = 0;
    for r in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r as u64);
        let mut x = unit_vector(d, &mut rng);
        let mut lambda = a.apply_power(&x)?;
        let mut converged = false;
        for _ in 0..opts.max_iters {
            let g = a.apply_power_map(&x)?;
            let y: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi + alpha * xi).collect();
            let n = dot(&y, &y).sqrt();
            x = y.into_iter().map(|v| v / n).collect();
            let next = a.apply_power(&x)?;
            let step = (next - lambda).abs();
            lambda = next;
            if step <= opts.step_tol {
                converged = true;
                break;
            }
        }
        let g = a.apply_power_map(&x)?;
        let residual = g
            .iter()
            .zip(&x)
            .map(|(gi, xi)| (gi - lambda * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        best_residual = best_residual.min(residual);
        if !converged {
            continue;
        }
        converged_starts += 1;
        if best.as_ref().is_none_or(|b| lambda > b.value) {
            best = Some(ZEigenEstimate {
                value: lambda,
                vector: x,
                residual,
                converged_starts: 0,
            });
        }
    }
    match best {
        Some(mut est) => {
            est.converged_starts = converged_starts;
            Ok(est)
        }
        None => Err(Error::Estimation { best_residual }),
    }
}
