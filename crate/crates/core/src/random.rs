//! Seeded random tensor generators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::tensor::Tensor;

/// Tensor in `T_{order,d}` with independent standard normal entries.
pub fn gaussian_tensor<R: Rng + ?Sized>(order: usize, d: usize, rng: &mut R) -> Result<Tensor> {
    let n = d.pow(order as u32);
    Tensor::cubic(
        order,
        d,
        (0..n).map(|_| rng.sample(StandardNormal)).collect(),
    )
}

/// `(G + G^T) / 2` for a Gaussian `G` in `T_{2m,d}`.
pub fn e_symmetric_tensor<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<Tensor> {
    let g = gaussian_tensor(2 * m, d, rng)?;
    let t = g.transpose_even()?;
    Ok(g.add(&t)?.scale(0.5))
}

/// A tensor invariant under every permutation of its indices: each entry
/// reads the Gaussian entry at its sorted multi-index.
pub fn fully_symmetric_tensor<R: Rng + ?Sized>(
    order: usize,
    d: usize,
    rng: &mut R,
) -> Result<Tensor> {
    let g = gaussian_tensor(order, d, rng)?;
    let mut sorted = vec![0; order];
    Tensor::from_fn(g.shape(), |idx| {
        sorted.copy_from_slice(idx);
        sorted.sort_unstable();
        g.at(&sorted)
    })
}

/// Uniformly distributed point on the unit sphere of `R^d`.
pub fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
