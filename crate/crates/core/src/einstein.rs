//! Einstein products, matricization and the Hermitian dilation.
//!
//! Every contraction here runs as matricize, matrix multiply, unmatricize.
//! Because tensors store mode 1 fastest and matrices are column-major, both
//! reshapes reuse the buffer as is. The loop-based definitions in
//! [`crate::reference`] are kept separate as test oracles.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tensor::Tensor;

/// Row-mode count `m = ceil(N / 2)` of the general matricization.
pub fn split_order(order: usize) -> usize {
    order.div_ceil(2)
}

fn cubic_dim(t: &Tensor) -> Result<usize> {
    t.require_cubic()?;
    // order 0 has no modes; any d gives a 1x1 unfolding
    Ok(t.dim().unwrap_or(1))
}

/// `f(A)`: the `d^m x d^m` matrix of a tensor in `T_{2m,d}`.
pub fn matricize(a: &Tensor) -> Result<Matrix> {
    let (_, side) = a.even_split()?;
    Matrix::from_col_major(side, side, a.data().to_vec())
}

/// `f̄(A)`: the `d^m x d^{N-m}` matrix of a tensor in `T_{N,d}`, `m = ceil(N/2)`.
pub fn matricize_general(a: &Tensor) -> Result<Matrix> {
    let d = cubic_dim(a)?;
    let n = a.order();
    let m = split_order(n);
    Matrix::from_col_major(d.pow(m as u32), d.pow((n - m) as u32), a.data().to_vec())
}

/// Inverse of [`matricize_general`] (and of [`matricize`] for even `order`).
pub fn unmatricize(mat: &Matrix, order: usize, d: usize) -> Result<Tensor> {
    let m = split_order(order);
    let rows = d.pow(m as u32);
    let cols = d.pow((order - m) as u32);
    if mat.rows() != rows || mat.cols() != cols {
        return Err(Error::shape(format!(
            "order {order}, dimension {d} needs a {rows}x{cols} matrix, got {}x{}",
            mat.rows(),
            mat.cols()
        )));
    }
    Tensor::cubic(order, d, mat.data().to_vec())
}

/// Contracts the trailing `k` modes of `a` with the leading `k` modes of `b`.
pub fn contract(a: &Tensor, b: &Tensor, k: usize) -> Result<Tensor> {
    if k > a.order() || k > b.order() {
        return Err(Error::shape(format!(
            "cannot contract {k} modes of orders {} and {}",
            a.order(),
            b.order()
        )));
    }
    let a_free = &a.shape()[..a.order() - k];
    let a_con = &a.shape()[a.order() - k..];
    let b_con = &b.shape()[..k];
    let b_free = &b.shape()[k..];
    if a_con != b_con {
        return Err(Error::shape(format!(
            "contracted modes differ: {a_con:?} vs {b_con:?}"
        )));
    }
    let rows: usize = a_free.iter().product();
    let inner: usize = a_con.iter().product();
    let cols: usize = b_free.iter().product();
    let am = Matrix::from_col_major(rows, inner, a.data().to_vec())?;
    let bm = Matrix::from_col_major(inner, cols, b.data().to_vec())?;
    let cm = am.matmul(&bm)?;
    let shape = a_free.iter().chain(b_free).copied().collect();
    Tensor::new(shape, cm.into_data())
}

/// `A * B`: for `A` of order `2m`, contracts its last `m` modes with the
/// first `m` modes of `B`.
pub fn einstein_product(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if !a.order().is_multiple_of(2) {
        return Err(Error::shape(format!(
            "left factor must have even order, got {}",
            a.order()
        )));
    }
    contract(a, b, a.order() / 2)
}

fn same_cubic(a: &Tensor, b: &Tensor) -> Result<usize> {
    if a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if a.order() == 0 {
        return Err(Error::shape("generalized products need order >= 1"));
    }
    cubic_dim(a)
}

/// `A ⊡ B` in `T_{2m,d}`: contraction over the last `N - m` modes.
pub fn gen_product_outer(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let d = same_cubic(a, b)?;
    let c = matricize_general(a)?.matmul_t(&matricize_general(b)?)?;
    unmatricize(&c, 2 * split_order(a.order()), d)
}

/// `A ⊙ B` in `T_{2(N-m),d}`: contraction over the first `m` modes.
pub fn gen_product_inner(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let d = same_cubic(a, b)?;
    let c = matricize_general(a)?.t_matmul(&matricize_general(b)?)?;
    unmatricize(&c, 2 * (a.order() - split_order(a.order())), d)
}

/// `H(B) = [[0, B], [B^T, 0]]`.
pub fn hermitian_dilation(b: &Matrix) -> Matrix {
    b.hermitian_dilation()
}
