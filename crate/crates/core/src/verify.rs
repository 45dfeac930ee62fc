//! Seeded property suites over random inputs, compared against the
//! definition-level oracles in [`crate::reference`].

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    general_dim_factor, intrinsic_dimension_block, intrinsic_report, tail_bound, uniform_bound_l,
    variance_even, variance_general, variance_general_matricized, BernsteinReport, SumModel,
    Theorem,
};
use crate::einstein::{
    einstein_product, gen_product_inner, gen_product_outer, matricize, matricize_general,
    unmatricize,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::random::{e_symmetric_tensor, fully_symmetric_tensor, gaussian_tensor, unit_vector};
use crate::reference;
use crate::spectral::{
    e_eigen, e_evd, e_spectral_norm, e_trace, gen_spectral_norm, is_e_psd, sym_eig, z_eigen_max,
    ZEigenOptions,
};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Spectral,
    Bounds,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "spectral" => Ok(Suite::Spectral),
            "bounds" => Ok(Suite::Bounds),
            "all" => Ok(Suite::All),
            other => Err(Error::Argument(format!("unknown suite {other:?}"))),
        }
    }
}

/// Result of one property over all its cases.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub cases: usize,
    /// Largest observed error, relative where a scale is natural.
    pub worst: f64,
    pub tol: f64,
    pub pass: bool,
}

impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<9} {:<28} cases={:<5} worst={:.3e} tol={:.0e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.cases,
            self.worst,
            self.tol
        )
    }
}

struct Runner {
    suite: &'static str,
    seed: u64,
    stream: u64,
    out: Vec<PropertyOutcome>,
}

impl Runner {
    fn new(suite: &'static str, seed: u64) -> Self {
        Runner {
            suite,
            seed,
            stream: 0,
            out: Vec::new(),
        }
    }

    /// Runs `case` `cases` times with a fresh stream per property; each case
    /// returns its error.
    fn property(
        &mut self,
        name: &'static str,
        cases: usize,
        tol: f64,
        mut case: impl FnMut(&mut ChaCha8Rng, usize) -> Result<f64>,
    ) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        self.stream += 1;
        let mut worst = 0.0f64;
        for k in 0..cases {
            let e = case(&mut rng, k)?;
            // NaN must fail
            worst = if e.is_nan() { f64::NAN } else { worst.max(e) };
        }
        self.out.push(PropertyOutcome {
            suite: self.suite,
            name,
            cases,
            worst,
            tol,
            pass: worst <= tol,
        });
        Ok(())
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

fn mat_diff(a: &Matrix, b: &Matrix) -> Result<f64> {
    Ok(a.sub(b)?.max_abs())
}

pub fn run_suite(suite: Suite, seed: u64, cases: usize) -> Result<Vec<PropertyOutcome>> {
    Ok(match suite {
        Suite::Algebra => algebra(seed, cases)?,
        Suite::Spectral => spectral(seed, cases)?,
        Suite::Bounds => bounds(seed, cases)?,
        Suite::All => {
            let mut v = algebra(seed, cases)?;
            v.extend(spectral(seed, cases)?);
            v.extend(bounds(seed, cases)?);
            v
        }
    })
}

fn algebra(seed: u64, cases: usize) -> Result<Vec<PropertyOutcome>> {
    let mut r = Runner::new("algebra", seed);
    const MD: [(usize, usize); 4] = [(1, 2), (1, 3), (2, 2), (2, 3)];

    r.property("homomorphism", cases, 1e-12, |rng, k| {
        let (m, d) = MD[k % 4];
        let a = gaussian_tensor(2 * m, d, rng)?;
        let b = gaussian_tensor(2 * m, d, rng)?;
        let lhs = matricize(&reference::einstein_product(&a, &b)?)?;
        let rhs = matricize(&a)?.matmul(&matricize(&b)?)?;
        let scale = a.max_abs() * b.max_abs() * d.pow(m as u32) as f64;
        Ok(rel(mat_diff(&lhs, &rhs)?, scale))
    })?;

    r.property("transpose_reverses_product", cases, 1e-12, |rng, k| {
        let (m, d) = MD[k % 4];
        let a = gaussian_tensor(2 * m, d, rng)?;
        let b = gaussian_tensor(2 * m, d, rng)?;
        let lhs = einstein_product(&a, &b)?.transpose_even()?;
        let rhs = einstein_product(&b.transpose_even()?, &a.transpose_even()?)?;
        Ok(rel(
            lhs.max_abs_diff(&rhs)?,
            a.max_abs() * b.max_abs() * d.pow(m as u32) as f64,
        ))
    })?;

    let nd = |k: usize| (1 + k % 5, 2 + (k / 5) % 2);
    r.property("gram_outer_unfolds", cases, 1e-12, |rng, k| {
        let (n, d) = nd(k);
        let a = gaussian_tensor(n, d, rng)?;
        let fa = matricize_general(&a)?;
        let lhs = matricize(&reference::gen_product_outer(&a, &a)?)?;
        Ok(rel(
            mat_diff(&lhs, &fa.matmul_t(&fa)?)?,
            a.frobenius_norm().powi(2),
        ))
    })?;

    r.property("gram_inner_unfolds", cases, 1e-12, |rng, k| {
        let (n, d) = nd(k);
        let a = gaussian_tensor(n, d, rng)?;
        let fa = matricize_general(&a)?;
        let lhs = matricize(&reference::gen_product_inner(&a, &a)?)?;
        Ok(rel(
            mat_diff(&lhs, &fa.t_matmul(&fa)?)?,
            a.frobenius_norm().powi(2),
        ))
    })?;

    r.property("gram_is_e_symmetric", cases, 0.0, |rng, k| {
        let (n, d) = nd(k);
        let a = gaussian_tensor(n, d, rng)?;
        let g = gen_product_outer(&a, &a)?;
        let h = gen_product_inner(&a, &a)?;
        Ok(g.max_abs_diff(&g.transpose_even()?)?
            .max(h.max_abs_diff(&h.transpose_even()?)?))
    })?;

    r.property("unfolding_matches_formula", cases, 0.0, |rng, k| {
        let (n, d) = nd(k);
        let a = gaussian_tensor(n, d, rng)?;
        let f = matricize_general(&a)?;
        let back = unmatricize(&f, n, d)?;
        Ok(mat_diff(&f, &reference::matricize_general(&a)?)?.max(back.max_abs_diff(&a)?))
    })?;

    r.property("text_roundtrip", cases, 0.0, |rng, k| {
        let (n, d) = nd(k);
        let a = gaussian_tensor(n, d, rng)?;
        Tensor::from_text(&a.to_text())?.max_abs_diff(&a)
    })?;

    Ok(r.out)
}

fn spectral(seed: u64, cases: usize) -> Result<Vec<PropertyOutcome>> {
    let mut r = Runner::new("spectral", seed);
    const MD: [(usize, usize); 4] = [(1, 2), (1, 3), (2, 2), (2, 3)];

    r.property("evd_reconstructs", cases, 1e-10, |rng, k| {
        let (m, d) = MD[k % 4];
        let a = e_symmetric_tensor(m, d, rng)?;
        let evd = e_evd(&a)?;
        let back = evd.reconstruct()?;
        Ok(back.max_abs_diff(&a)? / (a.max_abs() * d.pow(m as u32) as f64))
    })?;

    r.property("trace_is_eigenvalue_sum", cases, 1e-10, |rng, k| {
        let (m, d) = MD[k % 4];
        let a = e_symmetric_tensor(m, d, rng)?;
        let sum: f64 = e_eigen(&a)?.values.iter().sum();
        Ok(rel((e_trace(&a)? - sum).abs(), a.frobenius_norm()))
    })?;

    r.property("square_via_evd", cases, 1e-10, |rng, k| {
        let (m, d) = MD[k % 4];
        let a = e_symmetric_tensor(m, d, rng)?;
        let evd = e_evd(&a)?;
        let d2 = evd.d.hadamard(&evd.d)?;
        let rhs = einstein_product(&einstein_product(&evd.u, &d2)?, &evd.u.transpose_even()?)?;
        Ok(rel(
            einstein_product(&a, &a)?.max_abs_diff(&rhs)?,
            a.frobenius_norm().powi(2),
        ))
    })?;

    r.property("norm_chain", cases, 1e-10, |rng, k| {
        let n = [1, 3, 4][k % 3];
        let d = 2 + (k / 3) % 2;
        let a = gaussian_tensor(n, d, rng)?;
        let fa = matricize_general(&a)?;
        let chain = [
            e_spectral_norm(&reference::gen_product_outer(&a, &a)?)?.sqrt(),
            e_spectral_norm(&reference::gen_product_inner(&a, &a)?)?.sqrt(),
            sym_eig(&fa.t_matmul(&fa)?, 1e-12)?.max().max(0.0).sqrt(),
            sym_eig(&fa.hermitian_dilation(), 0.0)?.max(),
        ];
        let g = gen_spectral_norm(&a)?;
        Ok(chain.iter().map(|c| (c - g).abs()).fold(0.0, f64::max) / g.max(1.0))
    })?;

    r.property("dilation_norm", cases, 1e-10, |rng, k| {
        let (rows, cols) = (1 + k % 5, 1 + (k / 5) % 4);
        let b = Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))?;
        let top = sym_eig(&b.hermitian_dilation(), 0.0)?.max();
        let sv = sym_eig(&b.t_matmul(&b)?, 1e-12)?.max().max(0.0).sqrt();
        Ok(rel((top - sv).abs(), sv))
    })?;

    r.property("e_psd_implies_psd", cases, 1e-10, |rng, k| {
        let (m, d) = MD[k % 4];
        let g = gaussian_tensor(2 * m, d, rng)?;
        let a = gen_product_outer(&g, &g)?;
        if !is_e_psd(&a, 1e-12)? {
            return Ok(f64::INFINITY);
        }
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let x = unit_vector(d, rng);
            worst = worst.max(-a.apply_power(&x)? / a.frobenius_norm().max(1.0));
        }
        Ok(worst)
    })?;

    let opts = ZEigenOptions {
        restarts: 20,
        ..ZEigenOptions::default()
    };
    r.property("e_max_dominates_z_max", cases.min(50), 1e-8, |rng, _| {
        let a = fully_symmetric_tensor(4, 3, rng)?;
        let z = z_eigen_max(
            &a,
            &ZEigenOptions {
                seed: rng.random(),
                ..opts
            },
        )?;
        Ok(z.value - e_eigen(&a)?.max())
    })?;

    Ok(r.out)
}

fn bounds(seed: u64, cases: usize) -> Result<Vec<PropertyOutcome>> {
    let mut r = Runner::new("bounds", seed);
    let small = cases.min(50);

    r.property("tail_monotone", cases, 0.0, |rng, _| {
        let nu = rng.random_range(0.01..5.0);
        let l = rng.random_range(0.0..2.0);
        let c = rng.random_range(1.0..50.0);
        let mut prev = f64::INFINITY;
        let mut bad = 0.0f64;
        for i in 1..=40 {
            let t = 0.1 * i as f64;
            let v = tail_bound(t, nu, l, c)?.raw;
            if v >= prev
                || tail_bound(t, nu * 1.1, l, c)?.raw <= v
                || tail_bound(t, nu, l + 0.1, c)?.raw <= v
            {
                bad = 1.0;
            }
            prev = v;
        }
        Ok(bad)
    })?;

    r.property("matrix_reduction", small, 1e-12, |rng, k| {
        let d = 2 + k % 3;
        let comps = (0..4)
            .map(|_| gaussian_tensor(2, d, rng))
            .collect::<Result<Vec<_>>>()?;
        let mats: Vec<Matrix> = comps.iter().map(matricize).collect::<Result<_>>()?;
        let model = SumModel::rademacher(comps)?;
        let rep = BernsteinReport::for_model(&model, Theorem::General)?;
        // matrix Bernstein quantities straight from the unfoldings
        let mut left = Matrix::zeros(d, d)?;
        let mut right = Matrix::zeros(d, d)?;
        let mut l = 0.0f64;
        for b in &mats {
            left = add(&left, &b.matmul_t(b)?);
            right = add(&right, &b.t_matmul(b)?);
            l = l.max(sym_eig(&b.hermitian_dilation(), 0.0)?.max());
        }
        let nu = sym_eig(&left, 1e-12)?
            .max()
            .max(sym_eig(&right, 1e-12)?.max());
        let mut err = rel((rep.nu - nu).abs(), nu).max(rel((rep.l - l).abs(), l));
        err = err.max((rep.dim_factor - 2.0 * d as f64).abs());
        for t in [0.5, 1.0, 2.0, 4.0] {
            let direct = 2.0 * d as f64 * (-(t * t / 2.0) / (nu + l * t / 3.0)).exp();
            err = err.max(rel((rep.tail(t)?.raw - direct).abs(), direct));
        }
        Ok(err)
    })?;

    r.property("variance_unfolded_agrees", small, 1e-12, |rng, k| {
        let n = 1 + k % 4;
        let comps = (0..5)
            .map(|_| gaussian_tensor(n, 2, rng))
            .collect::<Result<Vec<_>>>()?;
        let model = SumModel::rademacher(comps)?;
        let (nu, _, _) = variance_general_matricized(&model)?;
        Ok(rel((variance_general(&model)?.nu - nu).abs(), nu))
    })?;

    r.property("even_matches_general", small, 1e-12, |rng, k| {
        let m = 1 + k % 2;
        let comps = (0..4)
            .map(|_| e_symmetric_tensor(m, 2, rng))
            .collect::<Result<Vec<_>>>()?;
        let model = SumModel::rademacher(comps)?;
        let (nu_e, _) = variance_even(&model)?;
        let nu_g = variance_general(&model)?.nu;
        let l_e = uniform_bound_l(&model, Theorem::Even)?;
        let l_g = uniform_bound_l(&model, Theorem::General)?;
        Ok(rel((nu_e - nu_g).abs(), nu_e).max(rel((l_e - l_g).abs(), l_e)))
    })?;

    r.property("intrinsic_dim_block", small, 1e-12, |rng, k| {
        let n = 1 + k % 4;
        let d = 2 + (k / 4) % 2;
        let comps = (0..5)
            .map(|_| gaussian_tensor(n, d, rng))
            .collect::<Result<Vec<_>>>()?;
        let v = variance_general(&SumModel::rademacher(comps)?)?;
        let ir = intrinsic_report(&v.v1, &v.v2, 0.0, Some((&v.v1, &v.v2)))?;
        Ok(rel(
            (ir.d_v - intrinsic_dimension_block(&v.v1, &v.v2)?).abs(),
            ir.d_v,
        ))
    })?;

    r.property("intrinsic_dim_at_most_factor", small, 1e-12, |rng, k| {
        let n = 1 + k % 4;
        let d = 2 + (k / 4) % 2;
        let comps = (0..5)
            .map(|_| gaussian_tensor(n, d, rng))
            .collect::<Result<Vec<_>>>()?;
        let model = SumModel::subsample(comps, 3)?;
        let v = variance_general(&model)?;
        let ir = intrinsic_report(&v.v1, &v.v2, 0.0, None)?;
        let factor = general_dim_factor(n, d);
        Ok(((ir.d_v - factor) / factor).max(0.0))
    })?;

    Ok(r.out)
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j) + b.get(i, j)).expect("same dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        for suite in [Suite::Algebra, Suite::Spectral, Suite::Bounds] {
            for o in run_suite(suite, 7, 24).unwrap() {
                assert!(o.pass, "{o}");
            }
        }
    }

    #[test]
    fn suite_names() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("nope".parse::<Suite>().is_err());
    }
}
