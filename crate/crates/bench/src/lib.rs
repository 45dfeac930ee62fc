//! Fixtures shared by the criterion benchmarks.

use einbern::random::{e_symmetric_tensor, gaussian_tensor};
use einbern::{SumModel, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A pair of Gaussian tensors in `T_{2m,d}`.
pub fn tensor_pair(m: usize, d: usize) -> (Tensor, Tensor) {
    let mut r = rng(1);
    (
        gaussian_tensor(2 * m, d, &mut r).expect("valid shape"),
        gaussian_tensor(2 * m, d, &mut r).expect("valid shape"),
    )
}

/// Rademacher series over `count` random E-symmetric tensors in `T_{2m,d}`.
pub fn symmetric_model(m: usize, d: usize, count: usize) -> SumModel {
    let mut r = rng(2);
    let comps = (0..count)
        .map(|_| e_symmetric_tensor(m, d, &mut r).expect("valid shape"))
        .collect();
    SumModel::rademacher(comps).expect("nonempty model")
}
