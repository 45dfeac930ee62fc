//! Einstein-product tensor algebra and Bernstein-type concentration bounds
//! for sums of independent random tensors.
//!
//! Tensors are unfolded into matrices so that Einstein products become matrix
//! products; spectral notions (Einstein eigenvalues, norms, traces) and the
//! tensor Bernstein tail and expectation bounds follow from that unfolding.
//! [`montecarlo`] checks the bounds empirically against simulated sums.

pub mod bounds;
pub mod config;
pub mod einstein;
pub mod error;
pub mod matrix;
pub mod montecarlo;
pub mod random;
pub mod reference;
pub mod spectral;
pub mod tensor;
pub mod verify;

pub use bounds::{
    expectation_bound, expectation_bound_general, intrinsic_report, tail_bound, uniform_bound_l,
    variance_even, variance_general, BernsteinReport, IntrinsicReport, Law, SumModel, TailValue,
    Theorem,
};
pub use einstein::{
    contract, einstein_product, gen_product_inner, gen_product_outer, hermitian_dilation,
    matricize, matricize_general, split_order, unmatricize,
};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use montecarlo::{
    check_expectation, run_experiment, sample_sum, ExpectationCheck, ExperimentConfig,
    ExperimentResult, TailRow,
};
pub use spectral::{
    e_eigenvalues, e_evd, e_spectral_norm, e_trace, gen_spectral_norm, is_e_pd, is_e_psd, sym_eig,
    z_eigen_max, EigenDecomposition, EinsteinEvd, ZEigenEstimate, ZEigenOptions,
};
pub use tensor::{
    delinearize, identity_tensor, kron_power, linearize, outer_power, psd_counterexample,
    MultiIndex, Tensor,
};
pub use verify::{run_suite, PropertyOutcome, Suite};
