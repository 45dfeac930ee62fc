//! Definition-level implementations used as independent oracles.
//!
//! These loop over explicit multi-indices exactly as the algebraic
//! definitions are written and share no code path with the matricized
//! kernels in [`crate::einstein`]. They are slow and meant for tests,
//! property suites and benchmarks.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tensor::Tensor;

fn odometer(idx: &mut [usize], shape: &[usize]) -> bool {
    for (pos, &n) in idx.iter_mut().zip(shape) {
        *pos += 1;
        if *pos < n {
            return true;
        }
        *pos = 0;
    }
    false
}

/// Einstein product of `A` (order `2m`) and `B` by nested summation.
pub fn einstein_product(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if !a.order().is_multiple_of(2) {
        return Err(Error::Shape("left factor must have even order".into()));
    }
    let m = a.order() / 2;
    let (i_shape, k_shape) = a.shape().split_at(m);
    if b.order() < m || &b.shape()[..m] != k_shape {
        return Err(Error::Shape("contracted modes differ".into()));
    }
    let j_shape = &b.shape()[m..];
    let out_shape: Vec<usize> = i_shape.iter().chain(j_shape).copied().collect();
    let mut ai = vec![0; a.order()];
    let mut bi = vec![0; b.order()];
    Tensor::from_fn(&out_shape, |idx| {
        let (i, j) = idx.split_at(m);
        let mut k = vec![0; m];
        let mut sum = 0.0;
        loop {
            ai[..m].copy_from_slice(i);
            ai[m..].copy_from_slice(&k);
            bi[..m].copy_from_slice(&k);
            bi[m..].copy_from_slice(j);
            sum += a.at(&ai) * b.at(&bi);
            if !odometer(&mut k, k_shape) {
                break;
            }
        }
        sum
    })
}

fn gen_dims(a: &Tensor, b: &Tensor) -> Result<(usize, usize, usize)> {
    if a.shape() != b.shape() || a.order() == 0 {
        return Err(Error::Shape(
            "generalized products need equal nonzero-order shapes".into(),
        ));
    }
    let d = a.dim().ok_or_else(|| Error::Shape("not cubic".into()))?;
    let n = a.order();
    Ok((n, n.div_ceil(2), d))
}

/// `(A ⊡ B)_{i j} = sum_k a_{i k} b_{j k}`, `i, j` of length `m`, `k` of length `N - m`.
pub fn gen_product_outer(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (n, m, d) = gen_dims(a, b)?;
    let k_shape = vec![d; n - m];
    let mut ai = vec![0; n];
    let mut bi = vec![0; n];
    Tensor::from_fn(&vec![d; 2 * m], |idx| {
        let (i, j) = idx.split_at(m);
        let mut k = vec![0; n - m];
        let mut sum = 0.0;
        loop {
            ai[..m].copy_from_slice(i);
            ai[m..].copy_from_slice(&k);
            bi[..m].copy_from_slice(j);
            bi[m..].copy_from_slice(&k);
            sum += a.at(&ai) * b.at(&bi);
            if !odometer(&mut k, &k_shape) {
                break;
            }
        }
        sum
    })
}

/// `(A ⊙ B)_{k k'} = sum_i a_{i k} b_{i k'}`, `i` of length `m`, `k, k'` of length `N - m`.
pub fn gen_product_inner(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (n, m, d) = gen_dims(a, b)?;
    let r = n - m;
    let i_shape = vec![d; m];
    let mut ai = vec![0; n];
    let mut bi = vec![0; n];
    Tensor::from_fn(&vec![d; 2 * r], |idx| {
        let (k, kp) = idx.split_at(r);
        let mut i = vec![0; m];
        let mut sum = 0.0;
        loop {
            ai[..m].copy_from_slice(&i);
            ai[m..].copy_from_slice(k);
            bi[..m].copy_from_slice(&i);
            bi[m..].copy_from_slice(kp);
            sum += a.at(&ai) * b.at(&bi);
            if !odometer(&mut i, &i_shape) {
                break;
            }
        }
        sum
    })
}

/// Matricization written with the 1-based row/column formula
/// `i = i_1 + sum_{k>=2} (i_k - 1) d^{k-1}`, independent of storage order.
pub fn matricize_general(a: &Tensor) -> Result<Matrix> {
    let d = a.dim().unwrap_or(1);
    if !a.is_cubic() {
        return Err(Error::Shape("not cubic".into()));
    }
    let n = a.order();
    let m = n.div_ceil(2);
    let rows = d.pow(m as u32);
    let cols = d.pow((n - m) as u32);
    let mut out = Matrix::zeros(rows, cols)?;
    let mut idx = vec![0usize; n];
    loop {
        let one_based = |group: &[usize]| -> usize {
            let mut pos = group.first().map_or(1, |&i| i + 1);
            for (k, &ik) in group.iter().enumerate().skip(1) {
                pos += ik * d.pow(k as u32);
            }
            pos
        };
        let i = one_based(&idx[..m]);
        let j = one_based(&idx[m..]);
        out.set(i - 1, j - 1, a.at(&idx));
        if !odometer(&mut idx, a.shape()) {
            break;
        }
    }
    Ok(out)
}

/// `A x^{order}` as the full sum over every index tuple.
pub fn apply_power(a: &Tensor, x: &[f64]) -> Result<f64> {
    if !a.is_cubic() || a.order() == 0 || a.dim() != Some(x.len()) {
        return Err(Error::Shape("dimension mismatch".into()));
    }
    let mut idx = vec![0usize; a.order()];
    let mut sum = 0.0;
    loop {
        let w: f64 = idx.iter().map(|&i| x[i]).product();
        sum += a.at(&idx) * w;
        if !odometer(&mut idx, a.shape()) {
            break;
        }
    }
    Ok(sum)
}

/// Maximum of `A x^{order}` over a spherical-coordinate grid of the unit
/// sphere in `R^2` or `R^3`, with `steps` samples per angle.
pub fn sphere_grid_max(a: &Tensor, steps: usize) -> Result<f64> {
    let d = a.dim().ok_or_else(|| Error::Shape("not cubic".into()))?;
    let mut best = f64::NEG_INFINITY;
    match d {
        2 => {
            for s in 0..steps {
                let th = std::f64::consts::PI * s as f64 / steps as f64;
                best = best.max(apply_power(a, &[th.cos(), th.sin()])?);
            }
        }
        3 => {
            for s in 0..=steps {
                let th = std::f64::consts::PI * s as f64 / steps as f64;
                for p in 0..2 * steps {
                    let ph = std::f64::consts::PI * p as f64 / steps as f64;
                    let x = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    best = best.max(apply_power(a, &x)?);
                }
            }
        }
        _ => return Err(Error::Argument("grid oracle supports d in {2, 3}".into())),
    }
    Ok(best)
}
