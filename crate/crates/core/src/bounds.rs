//! Tensor Bernstein bounds: uniform bounds, variance statistics, expectation
//! and tail bounds, and the intrinsic-dimension variant.
//!
//! All expectations are exact sums over the finite support of the summands'
//! law; nothing here samples.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::einstein::{
    einstein_product, gen_product_inner, gen_product_outer, matricize, matricize_general,
    split_order,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spectral::{e_eigen, e_spectral_norm, e_trace, gen_spectral_norm, sym_eig};
use crate::tensor::{Tensor, DEFAULT_TOL};

/// Tolerance for the `⪰^E` checks, relative to the operator's norm.
pub const DOMINANCE_TOL: f64 = 1e-10;

/// Which of the three bounds to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// Even order, E-symmetric summands; statistic `λ^E_max`, factor `d^m`.
    Even,
    /// Any order; statistic `‖·‖^⊡`, factor `d^m + d^{N-m}`.
    General,
    /// Any order; factor `4 d_V`, valid for `t >= sqrt(ν) + L/3`.
    Intrinsic,
}

impl Theorem {
    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::Even => "even",
            Theorem::General => "general",
            Theorem::Intrinsic => "intrinsic",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Theorem::Even),
            "general" => Ok(Theorem::General),
            "intrinsic" => Ok(Theorem::Intrinsic),
            other => Err(Error::Argument(format!("unknown theorem {other:?}"))),
        }
    }
}

/// Distribution of the independent summands `X_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Law {
    /// `X_k = ε_k A_k` with independent uniform signs.
    Rademacher,
    /// `s` i.i.d. draws `X_k = (n/s)(B_I - B̄)`, `I` uniform over the `n`
    /// population members, so that `Σ X_k` is the error of the rescaled
    /// subsample sum.
    Subsample {
        sample_size: usize,
        #[serde(default = "default_true")]
        with_replacement: bool,
    },
}

fn default_true() -> bool {
    true
}

/// A random sum `Y = Σ_k X_k` of independent, zero-mean tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct SumModel {
    components: Vec<Tensor>,
    law: Law,
    order: usize,
    dim: usize,
    /// Per-summand support as `(multiplicity, [(probability, realization)])`.
    supports: Vec<(usize, Vec<(f64, Tensor)>)>,
}

impl SumModel {
    /// `components` are the `A_k` for a Rademacher law and the population
    /// `B_1..B_n` for subsampling.
    pub fn new(components: Vec<Tensor>, law: Law) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Argument("model needs at least one component".into()))?;
        let order = first.order();
        let dim = first
            .dim()
            .ok_or_else(|| Error::Shape("components must be cubic with order >= 1".into()))?;
        if let Some(bad) = components.iter().find(|c| c.shape() != first.shape()) {
            return Err(Error::Shape(format!(
                "component shapes differ: {:?} vs {:?}",
                first.shape(),
                bad.shape()
            )));
        }
        let supports = match law {
            Law::Rademacher => components
                .iter()
                .map(|a| (1, vec![(0.5, a.clone()), (0.5, a.scale(-1.0))]))
                .collect(),
            Law::Subsample {
                with_replacement: false,
                ..
            } => {
                return Err(Error::UnsupportedLaw(
                    "subsampling without replacement gives dependent summands".into(),
                ))
            }
            Law::Subsample { sample_size: 0, .. } => {
                return Err(Error::Argument("sample size must be positive".into()))
            }
            Law::Subsample { sample_size, .. } => {
                let n = components.len() as f64;
                let mut mean = Tensor::cubic_zeros(order, dim)?;
                for b in &components {
                    mean = mean.add(b)?;
                }
                let mean = mean.scale(1.0 / n);
                let w = n / sample_size as f64;
                let support = components
                    .iter()
                    .map(|b| Ok((1.0 / n, b.sub(&mean)?.scale(w))))
                    .collect::<Result<Vec<_>>>()?;
                vec![(sample_size, support)]
            }
        };
        Ok(SumModel {
            components,
            law,
            order,
            dim,
            supports,
        })
    }

    pub fn rademacher(components: Vec<Tensor>) -> Result<Self> {
        SumModel::new(components, Law::Rademacher)
    }

    pub fn subsample(population: Vec<Tensor>, sample_size: usize) -> Result<Self> {
        SumModel::new(
            population,
            Law::Subsample {
                sample_size,
                with_replacement: true,
            },
        )
    }

    pub fn components(&self) -> &[Tensor] {
        &self.components
    }

    pub fn law(&self) -> Law {
        self.law
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `m = ceil(N / 2)`.
    pub fn m(&self) -> usize {
        split_order(self.order)
    }

    /// Number of summands `X_k`.
    pub fn summands(&self) -> usize {
        self.supports.iter().map(|(mult, _)| mult).sum()
    }

    /// Distinct summand laws as `(multiplicity, support)`; each support lists
    /// `(probability, realization)` pairs.
    pub fn supports(&self) -> &[(usize, Vec<(f64, Tensor)>)] {
        &self.supports
    }

    /// Checks the even-order theorem's hypotheses on the component tensors.
    pub fn check_even(&self) -> Result<()> {
        if !self.order.is_multiple_of(2) {
            return Err(Error::InapplicableTheorem(format!(
                "even-order theorem needs even N, model has N = {}",
                self.order
            )));
        }
        for (k, c) in self.components.iter().enumerate() {
            if !c.is_e_symmetric(DEFAULT_TOL)? {
                return Err(Error::InapplicableTheorem(format!(
                    "component {} is not Einstein-symmetric",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// `Σ_k E(g(X_k))` for a tensor-valued `g`.
    fn expected_sum(&self, g: impl Fn(&Tensor) -> Result<Tensor>) -> Result<Tensor> {
        let mut acc: Option<Tensor> = None;
        for (mult, support) in &self.supports {
            let mut e: Option<Tensor> = None;
            for (p, x) in support {
                let term = g(x)?.scale(*p);
                e = Some(match e {
                    Some(s) => s.add(&term)?,
                    None => term,
                });
            }
            let e = e.expect("supports are nonempty").scale(*mult as f64);
            acc = Some(match acc {
                Some(s) => s.add(&e)?,
                None => e,
            });
        }
        Ok(acc.expect("models have at least one summand"))
    }
}

/// Uniform bound `L` over every realizable summand.
///
/// For [`Theorem::Even`] this is the one-sided `max λ^E_max(X_k)` (never below
/// zero); otherwise `max ‖X_k‖^⊡`.
pub fn uniform_bound_l(model: &SumModel, theorem: Theorem) -> Result<f64> {
    if theorem == Theorem::Even {
        model.check_even()?;
    }
    let mut l = 0.0f64;
    for (_, support) in model.supports() {
        for (_, x) in support {
            let v = match theorem {
                Theorem::Even => e_eigen(x)?.max(),
                Theorem::General | Theorem::Intrinsic => gen_spectral_norm(x)?,
            };
            l = l.max(v);
        }
    }
    Ok(l)
}

/// `ν = ‖Σ_k E(X_k * X_k)‖^E` together with the summed second-moment tensor.
pub fn variance_even(model: &SumModel) -> Result<(f64, Tensor)> {
    if !model.order().is_multiple_of(2) {
        return Err(Error::InapplicableTheorem(
            "variance_even needs even order".into(),
        ));
    }
    for c in model.components() {
        if !c.is_e_symmetric(DEFAULT_TOL)? {
            return Err(Error::contract("component is not Einstein-symmetric"));
        }
    }
    let second = model.expected_sum(|x| einstein_product(x, x))?;
    Ok((e_spectral_norm(&second)?, second))
}

/// Tensor-valued variance statistics of the general theorem.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralVariance {
    pub nu: f64,
    /// `Σ_k E(X_k ⊡ X_k)` in `T_{2m,d}`.
    pub v1: Tensor,
    /// `Σ_k E(X_k ⊙ X_k)` in `T_{2(N-m),d}`.
    pub v2: Tensor,
}

pub fn variance_general(model: &SumModel) -> Result<GeneralVariance> {
    let v1 = model.expected_sum(|x| gen_product_outer(x, x))?;
    let v2 = model.expected_sum(|x| gen_product_inner(x, x))?;
    let nu = e_spectral_norm(&v1)?.max(e_spectral_norm(&v2)?);
    Ok(GeneralVariance { nu, v1, v2 })
}

/// The same statistic assembled from unfoldings:
/// `max{‖Σ E f̄(X) f̄(X)^T‖, ‖Σ E f̄(X)^T f̄(X)‖}` with both sums returned.
pub fn variance_general_matricized(model: &SumModel) -> Result<(f64, Matrix, Matrix)> {
    let mut left: Option<Matrix> = None;
    let mut right: Option<Matrix> = None;
    for (mult, support) in model.supports() {
        for (p, x) in support {
            let b = matricize_general(x)?;
            let w = p * *mult as f64;
            let bbt = scale_matrix(&b.matmul_t(&b)?, w);
            let btb = scale_matrix(&b.t_matmul(&b)?, w);
            left = Some(match left {
                Some(s) => add_matrix(&s, &bbt),
                None => bbt,
            });
            right = Some(match right {
                Some(s) => add_matrix(&s, &btb),
                None => btb,
            });
        }
    }
    let (left, right) = (left.expect("nonempty"), right.expect("nonempty"));
    let nu = sym_eig(&left, DEFAULT_TOL)?
        .spectral_radius()
        .max(sym_eig(&right, DEFAULT_TOL)?.spectral_radius());
    Ok((nu, left, right))
}

fn scale_matrix(m: &Matrix, c: f64) -> Matrix {
    Matrix::from_col_major(m.rows(), m.cols(), m.data().iter().map(|v| v * c).collect())
        .expect("same dimensions")
}

fn add_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_col_major(
        a.rows(),
        a.cols(),
        a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect(),
    )
    .expect("same dimensions")
}

fn check_nonneg(nu: f64, l: f64) -> Result<()> {
    if !(nu >= 0.0 && l >= 0.0) {
        return Err(Error::domain(format!(
            "ν and L must be nonnegative, got ν = {nu}, L = {l}"
        )));
    }
    Ok(())
}

/// `sqrt(2 ν m log d) + L m log d / 3`.
pub fn expectation_bound(nu: f64, l: f64, m: usize, d: usize) -> Result<f64> {
    check_nonneg(nu, l)?;
    if d < 2 {
        return Err(Error::domain("even-order expectation bound needs d >= 2"));
    }
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    let lm = m as f64 * (d as f64).ln();
    Ok((2.0 * nu * lm).sqrt() + l * lm / 3.0)
}

/// `d^m + d^{N-m}` with `m = ceil(N/2)`.
pub fn general_dim_factor(order: usize, d: usize) -> f64 {
    let m = split_order(order);
    (d as f64).powi(m as i32) + (d as f64).powi((order - m) as i32)
}

/// `sqrt(2 ν log(d^m + d^{N-m})) + L log(d^m + d^{N-m}) / 3`.
pub fn expectation_bound_general(nu: f64, l: f64, order: usize, d: usize) -> Result<f64> {
    check_nonneg(nu, l)?;
    if order == 0 || d == 0 {
        return Err(Error::domain("order and dimension must be positive"));
    }
    let lg = general_dim_factor(order, d).ln();
    Ok((2.0 * nu * lg).sqrt() + l * lg / 3.0)
}

/// A tail bound before and after clamping to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailValue {
    pub raw: f64,
    pub clamped: f64,
}

/// `dim_factor * exp(-(t^2/2) / (ν + L t / 3))`.
pub fn tail_bound(t: f64, nu: f64, l: f64, dim_factor: f64) -> Result<TailValue> {
    check_nonneg(nu, l)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain(format!("t must be nonnegative, got {t}")));
    }
    let raw = if t == 0.0 {
        dim_factor
    } else {
        let denom = nu + l * t / 3.0;
        if denom == 0.0 {
            // ν = L = 0: the sum is identically zero
            0.0
        } else {
            dim_factor * (-(t * t / 2.0) / denom).exp()
        }
    };
    Ok(TailValue {
        raw,
        clamped: raw.min(1.0),
    })
}

/// Intrinsic-dimension quantities for variance upper bounds `V1`, `V2`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicReport {
    pub nu: f64,
    pub l: f64,
    /// `(tr^E V1 + tr^E V2) / ν`.
    pub d_v: f64,
    /// `tr(V) / ‖V‖` for the block matrix `V = diag(f̄(V1)^T, f̄(V2))`.
    pub d_v_block: f64,
    /// `sqrt(ν) + L/3`.
    pub domain_min: f64,
}

impl IntrinsicReport {
    pub fn tail(&self, t: f64) -> Result<TailValue> {
        if t < self.domain_min {
            return Err(Error::domain(format!(
                "intrinsic bound holds for t >= {}, got {t}",
                self.domain_min
            )));
        }
        tail_bound(t, self.nu, self.l, 4.0 * self.d_v)
    }
}

fn require_e_psd(v: &Tensor, name: &str) -> Result<()> {
    let eig = e_eigen(v)?;
    if eig.min() < -DOMINANCE_TOL * eig.spectral_radius().max(1.0) {
        return Err(Error::contract(format!(
            "{name} is not E-PSD (λ_min = {:e})",
            eig.min()
        )));
    }
    Ok(())
}

fn require_dominates(v: &Tensor, exact: &Tensor, name: &str) -> Result<()> {
    let diff = v.sub(exact)?;
    let eig = e_eigen(&diff)?;
    let scale = e_spectral_norm(v)?.max(1.0);
    if eig.min() < -DOMINANCE_TOL * scale {
        return Err(Error::contract(format!(
            "{name} does not dominate the exact statistic (λ_min of difference = {:e})",
            eig.min()
        )));
    }
    Ok(())
}

/// Builds the intrinsic-dimension report from E-PSD upper bounds `v1 ⪰ ΣE(X⊡X)`
/// and `v2 ⪰ ΣE(X⊙X)`. When `exact` is given, dominance is checked.
pub fn intrinsic_report(
    v1: &Tensor,
    v2: &Tensor,
    l: f64,
    exact: Option<(&Tensor, &Tensor)>,
) -> Result<IntrinsicReport> {
    check_nonneg(0.0, l)?;
    require_e_psd(v1, "V1")?;
    require_e_psd(v2, "V2")?;
    if let Some((e1, e2)) = exact {
        require_dominates(v1, e1, "V1")?;
        require_dominates(v2, e2, "V2")?;
    }
    let nu = e_spectral_norm(v1)?.max(e_spectral_norm(v2)?);
    if nu <= 0.0 {
        return Err(Error::domain(
            "intrinsic dimension is undefined for zero variance",
        ));
    }
    let d_v = (e_trace(v1)? + e_trace(v2)?) / nu;
    Ok(IntrinsicReport {
        nu,
        l,
        d_v,
        d_v_block: intrinsic_dimension_block(v1, v2)?,
        domain_min: nu.sqrt() + l / 3.0,
    })
}

/// `tr(V) / ‖V‖` for `V = diag(f̄(V1)^T, f̄(V2))`.
pub fn intrinsic_dimension_block(v1: &Tensor, v2: &Tensor) -> Result<f64> {
    let v = matricize(v1)?.transpose().block_diag(&matricize(v2)?);
    let norm = sym_eig(&v, DEFAULT_TOL)?.spectral_radius();
    if norm <= 0.0 {
        return Err(Error::domain(
            "intrinsic dimension is undefined for zero variance",
        ));
    }
    Ok(v.trace() / norm)
}

/// Every quantity one of the three theorems needs, for a given model.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinReport {
    pub theorem: Theorem,
    pub l: f64,
    pub nu: f64,
    pub order: usize,
    pub dim: usize,
    pub m: usize,
    /// `d^m`, `d^m + d^{N-m}` or `4 d_V`.
    pub dim_factor: f64,
    pub d_v: Option<f64>,
    /// Absent for the intrinsic theorem, which only bounds tails.
    pub expectation_bound: Option<f64>,
    pub tail_domain_min: f64,
}

impl BernsteinReport {
    pub fn for_model(model: &SumModel, theorem: Theorem) -> Result<Self> {
        let (order, dim, m) = (model.order(), model.dim(), model.m());
        let l = uniform_bound_l(model, theorem)?;
        match theorem {
            Theorem::Even => {
                let (nu, _) = variance_even(model)?;
                Ok(BernsteinReport {
                    theorem,
                    l,
                    nu,
                    order,
                    dim,
                    m,
                    dim_factor: (dim as f64).powi(m as i32),
                    d_v: None,
                    expectation_bound: Some(expectation_bound(nu, l, m, dim)?),
                    tail_domain_min: 0.0,
                })
            }
            Theorem::General => {
                let v = variance_general(model)?;
                Ok(BernsteinReport {
                    theorem,
                    l,
                    nu: v.nu,
                    order,
                    dim,
                    m,
                    dim_factor: general_dim_factor(order, dim),
                    d_v: None,
                    expectation_bound: Some(expectation_bound_general(v.nu, l, order, dim)?),
                    tail_domain_min: 0.0,
                })
            }
            Theorem::Intrinsic => {
                let v = variance_general(model)?;
                let ir = intrinsic_report(&v.v1, &v.v2, l, None)?;
                Ok(BernsteinReport::from_intrinsic(&ir, order, dim))
            }
        }
    }

    pub fn from_intrinsic(ir: &IntrinsicReport, order: usize, dim: usize) -> Self {
        BernsteinReport {
            theorem: Theorem::Intrinsic,
            l: ir.l,
            nu: ir.nu,
            order,
            dim,
            m: split_order(order),
            dim_factor: 4.0 * ir.d_v,
            d_v: Some(ir.d_v),
            expectation_bound: None,
            tail_domain_min: ir.domain_min,
        }
    }

    pub fn tail(&self, t: f64) -> Result<TailValue> {
        if t < self.tail_domain_min {
            return Err(Error::domain(format!(
                "{} bound holds for t >= {}, got {t}",
                self.theorem, self.tail_domain_min
            )));
        }
        tail_bound(t, self.nu, self.l, self.dim_factor)
    }

    /// `sqrt(ν) + L`, the natural scale of the deviations.
    pub fn scale(&self) -> f64 {
        self.nu.sqrt() + self.l
    }

    /// One `key=value` line per field.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theorem={}", self.theorem);
        let _ = writeln!(out, "order={}", self.order);
        let _ = writeln!(out, "dim={}", self.dim);
        let _ = writeln!(out, "m={}", self.m);
        let _ = writeln!(out, "L={}", sci17(self.l));
        let _ = writeln!(out, "nu={}", sci17(self.nu));
        let _ = writeln!(out, "dim_factor={}", sci17(self.dim_factor));
        if let Some(dv) = self.d_v {
            let _ = writeln!(out, "d_v={}", sci17(dv));
        }
        if let Some(e) = self.expectation_bound {
            let _ = writeln!(out, "expectation_bound={}", sci17(e));
        }
        let _ = writeln!(out, "tail_domain_min={}", sci17(self.tail_domain_min));
        out
    }

    /// CSV `t,bound_raw,bound_clamped` over `grid`.
    pub fn tail_csv(&self, grid: &[f64]) -> Result<String> {
        let mut out = String::from("t,bound_raw,bound_clamped\n");
        for &t in grid {
            let v = self.tail(t)?;
            let _ = writeln!(out, "{},{},{}", sci17(t), sci17(v.raw), sci17(v.clamped));
        }
        Ok(out)
    }
}

/// Scientific notation with 17 significant digits.
pub fn sci17(x: f64) -> String {
    format!("{x:.16e}")
}
