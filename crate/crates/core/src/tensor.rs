//! Dense real tensors.
//!
//! Entries are stored with mode 1 varying fastest: the stride of mode `l` is
//! the product of the sizes of modes `1..l`. With this layout the 1-based flat
//! index of `(i_1, ..., i_N)` is `i_1 + sum_{k>=2} (i_k - 1) * stride_k`, and
//! every matricization used by the crate is a reshape of the same buffer.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Default entrywise comparison tolerance, relative to the largest magnitude.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A 1-based multi-index, one position per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>) -> Self {
        MultiIndex(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check(&self, shape: &[usize]) -> Result<()> {
        let ok = self.0.len() == shape.len()
            && self.0.iter().zip(shape).all(|(&i, &n)| i >= 1 && i <= n);
        if ok {
            Ok(())
        } else {
            Err(Error::Index {
                index: self.0.clone(),
                shape: shape.to_vec(),
            })
        }
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl<const N: usize> From<[usize; N]> for MultiIndex {
    fn from(v: [usize; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

/// Maps a 1-based multi-index to its 1-based flat position.
pub fn linearize(idx: &MultiIndex, shape: &[usize]) -> Result<usize> {
    idx.check(shape)?;
    let mut flat = 0;
    let mut stride = 1;
    for (&i, &n) in idx.0.iter().zip(shape) {
        flat += (i - 1) * stride;
        stride *= n;
    }
    Ok(flat + 1)
}

/// Inverse of [`linearize`].
pub fn delinearize(flat: usize, shape: &[usize]) -> Result<MultiIndex> {
    let total: usize = shape.iter().product();
    if flat == 0 || flat > total {
        return Err(Error::Index {
            index: vec![flat],
            shape: shape.to_vec(),
        });
    }
    let mut rest = flat - 1;
    let mut out = Vec::with_capacity(shape.len());
    for &n in shape {
        out.push(rest % n + 1);
        rest /= n;
    }
    Ok(MultiIndex(out))
}

/// Visits every 0-based multi-index of `shape` in storage order.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize], usize)) {
    let total: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        f(&idx, flat);
        for (pos, &n) in idx.iter_mut().zip(shape) {
            *pos += 1;
            if *pos < n {
                break;
            }
            *pos = 0;
        }
    }
}

fn offset(idx: &[usize], shape: &[usize]) -> usize {
    let mut flat = 0;
    let mut stride = 1;
    for (&i, &n) in idx.iter().zip(shape) {
        flat += i * stride;
        stride *= n;
    }
    flat
}

pub(crate) fn scaled_tol(tol: f64, magnitude: f64) -> f64 {
    if magnitude > 0.0 {
        tol * magnitude
    } else {
        tol
    }
}

/// Dense real tensor with explicit mode sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::shape(format!(
                "mode sizes must be positive, got {shape:?}"
            )));
        }
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::shape(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = shape.iter().product();
        Tensor::new(shape.to_vec(), vec![0.0; len])
    }

    /// Tensor in `T_{order,d}` with all entries zero.
    pub fn cubic_zeros(order: usize, d: usize) -> Result<Self> {
        Tensor::zeros(&vec![d; order])
    }

    pub fn cubic(order: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        Tensor::new(vec![d; order], data)
    }

    /// A zero-order tensor holding a single value.
    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    /// Builds a tensor from a function of the 0-based multi-index.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Tensor::zeros(shape)?;
        let data = &mut t.data;
        for_each_index(shape, |idx, flat| data[flat] = f(idx));
        Ok(t)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Common mode size when every mode has the same size.
    pub fn dim(&self) -> Option<usize> {
        let first = *self.shape.first()?;
        self.shape.iter().all(|&n| n == first).then_some(first)
    }

    pub fn is_cubic(&self) -> bool {
        self.shape.is_empty() || self.dim().is_some()
    }

    pub(crate) fn require_cubic(&self) -> Result<()> {
        if self.is_cubic() {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "expected equal mode sizes, got {:?}",
                self.shape
            )))
        }
    }

    /// For an even-order cubic tensor in `T_{2m,d}`, returns `(m, d^m)`.
    ///
    /// Order zero is accepted as `m = 0` with side length 1.
    pub fn even_split(&self) -> Result<(usize, usize)> {
        if !self.order().is_multiple_of(2) {
            return Err(Error::shape(format!(
                "expected even order, got {}",
                self.order()
            )));
        }
        self.require_cubic()?;
        let m = self.order() / 2;
        let side = self.shape[..m].iter().product();
        Ok((m, side))
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<f64> {
        let flat = linearize(idx, &self.shape)?;
        Ok(self.data[flat - 1])
    }

    /// Entry at a 0-based multi-index.
    ///
    /// Panics if the index is out of range.
    pub fn at(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.order(), "index arity mismatch");
        assert!(
            idx.iter().zip(&self.shape).all(|(&i, &n)| i < n),
            "index out of range"
        );
        self.data[offset(idx, &self.shape)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::shape(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Tensor {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Entrywise comparison with tolerance scaled by the larger max-magnitude.
    pub fn approx_eq(&self, other: &Tensor, tol: f64) -> bool {
        match self.max_abs_diff(other) {
            Ok(diff) => diff <= scaled_tol(tol, self.max_abs().max(other.max_abs())),
            Err(_) => false,
        }
    }

    /// Swaps the first and last `m` index groups of a tensor in `T_{2m,d}`.
    pub fn transpose_even(&self) -> Result<Tensor> {
        let (m, _) = self.even_split()?;
        let shape = &self.shape;
        let mut swapped = vec![0usize; shape.len()];
        Tensor::from_fn(shape, |idx| {
            swapped[..m].copy_from_slice(&idx[m..]);
            swapped[m..].copy_from_slice(&idx[..m]);
            self.data[offset(&swapped, shape)]
        })
    }

    /// True iff `max |A - A^T| <= tol * max|A|`.
    pub fn is_e_symmetric(&self, tol: f64) -> Result<bool> {
        let t = self.transpose_even()?;
        let diff = self.max_abs_diff(&t)?;
        Ok(diff <= scaled_tol(tol, self.max_abs()))
    }

    /// True iff every entry with some `i_k != j_k` is below `tol * max|A|`.
    pub fn is_diagonal(&self, tol: f64) -> Result<bool> {
        let (m, _) = self.even_split()?;
        let bound = scaled_tol(tol, self.max_abs());
        let mut ok = true;
        for_each_index(&self.shape, |idx, flat| {
            if idx[..m] != idx[m..] && self.data[flat].abs() > bound {
                ok = false;
            }
        });
        Ok(ok)
    }

    /// `A x^{2m}`: the full contraction of every mode with `x`.
    pub fn apply_power(&self, x: &[f64]) -> Result<f64> {
        let v = self.contract_trailing_with(x, 0)?;
        Ok(v[0])
    }

    /// `A x^{2m-1}`: contraction of modes `2..2m` with `x`.
    pub fn apply_power_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.contract_trailing_with(x, 1)
    }

    fn contract_trailing_with(&self, x: &[f64], keep: usize) -> Result<Vec<f64>> {
        let (m, _) = self.even_split()?;
        if m == 0 {
            return Err(Error::shape("tensor power needs order at least 2"));
        }
        let d = self.shape[0];
        if x.len() != d {
            return Err(Error::shape(format!(
                "vector length {} does not match dimension {d}",
                x.len()
            )));
        }
        let mut cur = self.data.clone();
        let mut order = self.order();
        while order > keep {
            let rest = cur.len() / d;
            let mut next = vec![0.0; rest];
            for (c, &xc) in x.iter().enumerate() {
                let col = &cur[c * rest..(c + 1) * rest];
                for (acc, &v) in next.iter_mut().zip(col) {
                    *acc += v * xc;
                }
            }
            cur = next;
            order -= 1;
        }
        Ok(cur)
    }

    /// Parses the fixture text format.
    ///
    /// ```text
    /// N d_1 ... d_N
    /// i_1 ... i_N value
    /// ```
    ///
    /// Indices are 1-based; unlisted entries are zero. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Tensor> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        let nums = parse_usizes(header, hline)?;
        let (&order, dims) = nums.split_first().ok_or(Error::Parse {
            line: hline,
            msg: "empty header".into(),
        })?;
        if dims.len() != order {
            return Err(Error::Parse {
                line: hline,
                msg: format!(
                    "header declares order {order} but lists {} sizes",
                    dims.len()
                ),
            });
        }
        let mut t = Tensor::zeros(dims).map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })?;
        let mut seen = vec![false; t.len()];
        for (n, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != order + 1 {
                return Err(Error::Parse {
                    line: n,
                    msg: format!("expected {} fields, got {}", order + 1, fields.len()),
                });
            }
            let idx = parse_usizes(&fields[..order].join(" "), n)?;
            let value: f64 = fields[order].parse().map_err(|_| Error::Parse {
                line: n,
                msg: format!("bad value {:?}", fields[order]),
            })?;
            let flat = linearize(&MultiIndex(idx), &t.shape).map_err(|e| Error::Parse {
                line: n,
                msg: e.to_string(),
            })? - 1;
            if seen[flat] {
                return Err(Error::Parse {
                    line: n,
                    msg: "duplicate entry".into(),
                });
            }
            seen[flat] = true;
            t.data[flat] = value;
        }
        Ok(t)
    }

    /// Writes the fixture text format, listing nonzero entries in storage order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{}", self.order());
        for n in &self.shape {
            let _ = write!(out, " {n}");
        }
        out.push('\n');
        for_each_index(&self.shape, |idx, flat| {
            let v = self.data[flat];
            if v != 0.0 {
                for i in idx {
                    let _ = write!(out, "{} ", i + 1);
                }
                let _ = writeln!(out, "{v:?}");
            }
        });
        out
    }
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_usizes(s: &str, line: usize) -> Result<Vec<usize>> {
    s.split_whitespace()
        .map(|w| {
            w.parse::<usize>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad integer {w:?}"),
            })
        })
        .collect()
}

/// The Einstein identity in `T_{2m,d}`: one exactly when `i_k = j_k` for all `k`.
pub fn identity_tensor(m: usize, d: usize) -> Result<Tensor> {
    if m == 0 || d == 0 {
        return Err(Error::Argument(format!(
            "identity needs m >= 1 and d >= 1, got m={m}, d={d}"
        )));
    }
    Tensor::from_fn(&vec![d; 2 * m], |idx| {
        if idx[..m] == idx[m..] {
            1.0
        } else {
            0.0
        }
    })
}

/// `x ⊗ ... ⊗ x` (`m` factors) as an order-`m` tensor.
pub fn outer_power(x: &[f64], m: usize) -> Result<Tensor> {
    if m == 0 {
        return Err(Error::Argument("outer power needs m >= 1".into()));
    }
    if x.is_empty() {
        return Err(Error::Argument("empty vector".into()));
    }
    Tensor::from_fn(&vec![x.len(); m], |idx| idx.iter().map(|&i| x[i]).product())
}

/// Kronecker power `x • ... • x` (`m` factors), first factor varying slowest.
pub fn kron_power(x: &[f64], m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Argument("Kronecker power needs m >= 1".into()));
    }
    let mut acc = x.to_vec();
    for _ in 1..m {
        acc = acc
            .iter()
            .flat_map(|&a| x.iter().map(move |&b| a * b))
            .collect();
    }
    Ok(acc)
}

/// The order-4, dimension-3 tensor with ones at every permutation of
/// `(1, 1, 2, 2)`. `A x^4 = 6 x_1^2 x_2^2` is nonnegative, yet `f(A)` has the
/// eigenvalue -1: it is PSD without being E-PSD.
pub fn psd_counterexample() -> Tensor {
    Tensor::from_fn(&[3, 3, 3, 3], |idx| {
        let ones = idx.iter().filter(|&&i| i == 0).count();
        let twos = idx.iter().filter(|&&i| i == 1).count();
        f64::from(u8::from(ones == 2 && twos == 2))
    })
    .expect("fixed shape")
}
