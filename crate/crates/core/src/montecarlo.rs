//! Seeded simulation of random tensor sums and empirical checks of the
//! Bernstein bounds.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{expectation_bound_general, sci17, BernsteinReport, SumModel, Theorem};
use crate::error::{Error, Result};
use crate::spectral::{e_lambda_max, gen_spectral_norm};
use crate::tensor::Tensor;

pub const MIN_TRIALS: usize = 100;
pub const DEFAULT_SLACK: f64 = 3.0;

/// Draws one realization of `Y = Σ_k X_k`.
pub fn sample_sum<R: Rng + ?Sized>(model: &SumModel, rng: &mut R) -> Tensor {
    let mut y = vec![0.0; model.components()[0].len()];
    for (mult, support) in model.supports() {
        for _ in 0..*mult {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            // fall back to the last atom if rounding leaves u above the total
            let mut pick = &support[support.len() - 1].1;
            for (p, x) in support {
                acc += p;
                if u < acc {
                    pick = x;
                    break;
                }
            }
            for (yi, xi) in y.iter_mut().zip(pick.data()) {
                *yi += xi;
            }
        }
    }
    Tensor::cubic(model.order(), model.dim(), y).expect("shape matches the model")
}

/// Independent generator for trial `trial`: same seed, distinct stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `λ^E_max(Y)` for the even theorem, `‖Y‖^⊡` otherwise.
pub fn trial_statistic(theorem: Theorem, y: &Tensor) -> Result<f64> {
    match theorem {
        Theorem::Even => e_lambda_max(y),
        Theorem::General | Theorem::Intrinsic => gen_spectral_norm(y),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: SumModel,
    pub trials: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub confidence_slack: f64,
    pub theorem: Theorem,
}

impl ExperimentConfig {
    pub fn new(
        model: SumModel,
        theorem: Theorem,
        trials: usize,
        t_grid: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let cfg = ExperimentConfig {
            model,
            trials,
            t_grid,
            seed,
            confidence_slack: DEFAULT_SLACK,
            theorem,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_slack(mut self, slack: f64) -> Result<Self> {
        self.confidence_slack = slack;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!(
                "trials must be at least {MIN_TRIALS}, got {}",
                self.trials
            )));
        }
        if !(self.confidence_slack >= 0.0 && self.confidence_slack.is_finite()) {
            return Err(Error::Config(
                "confidence_slack must be a nonnegative number".into(),
            ));
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("t_grid must be finite".into()));
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("t_grid must be strictly ascending".into()));
        }
        Ok(())
    }
}

/// Per-trial statistics in trial order. Trials run in parallel on the current
/// rayon pool; the result does not depend on the pool size.
pub fn simulate_statistics(
    model: &SumModel,
    theorem: Theorem,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let y = sample_sum(model, &mut trial_rng(seed, k));
            trial_statistic(theorem, &y)
        })
        .collect()
}

/// `min(1, p + slack sqrt(p(1-p)/n) + 1/n)`.
pub fn upper_confidence(freq: f64, trials: usize, slack: f64) -> f64 {
    let n = trials as f64;
    (freq + slack * (freq * (1.0 - freq) / n).sqrt() + 1.0 / n).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub t: f64,
    pub empirical_freq: f64,
    pub upper_conf: f64,
    pub bound_raw: f64,
    pub bound_clamped: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationCheck {
    pub empirical_mean: f64,
    pub empirical_std: f64,
    /// `mean + slack * std / sqrt(trials)`.
    pub upper: f64,
    pub bound: f64,
    /// `bound - upper`; nonnegative iff the check passes.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub theorem: Theorem,
    pub trials: usize,
    pub empirical_mean_max: f64,
    pub tails: Vec<TailRow>,
    pub bound_report: BernsteinReport,
    pub expectation: ExpectationCheck,
}

impl ExperimentResult {
    pub fn all_pass(&self) -> bool {
        self.expectation.pass && self.tails.iter().all(|r| r.pass)
    }

    /// CSV `t,empirical_freq,upper_conf,bound_raw,bound_clamped,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,empirical_freq,upper_conf,bound_raw,bound_clamped,verdict\n");
        for r in &self.tails {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                sci17(r.t),
                sci17(r.empirical_freq),
                sci17(r.upper_conf),
                sci17(r.bound_raw),
                sci17(r.bound_clamped),
                if r.pass { "pass" } else { "fail" }
            );
        }
        out
    }

    /// Summary lines in `key=value` form.
    pub fn summary(&self) -> String {
        let e = &self.expectation;
        let mut out = String::new();
        let _ = writeln!(out, "trials={}", self.trials);
        let _ = writeln!(out, "empirical_mean={}", sci17(e.empirical_mean));
        let _ = writeln!(out, "empirical_std={}", sci17(e.empirical_std));
        let _ = writeln!(out, "expectation_upper={}", sci17(e.upper));
        let _ = writeln!(out, "expectation_target={}", sci17(e.bound));
        let _ = writeln!(out, "expectation_margin={}", sci17(e.margin));
        let _ = writeln!(
            out,
            "expectation_verdict={}",
            if e.pass { "pass" } else { "fail" }
        );
        let failed = self.tails.iter().filter(|r| !r.pass).count();
        let _ = writeln!(out, "tail_failures={failed}");
        out
    }
}

/// Expectation bound the statistic's mean is compared with. The intrinsic
/// theorem only bounds tails, so it borrows the general expectation bound.
fn expectation_target(report: &BernsteinReport) -> Result<f64> {
    match report.expectation_bound {
        Some(b) => Ok(b),
        None => expectation_bound_general(report.nu, report.l, report.order, report.dim),
    }
}

fn expectation_from(stats: &[f64], bound: f64, slack: f64) -> ExpectationCheck {
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let var = stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    let upper = mean + slack * std / n.sqrt();
    ExpectationCheck {
        empirical_mean: mean,
        empirical_std: std,
        upper,
        bound,
        margin: bound - upper,
        pass: upper <= bound,
    }
}

pub fn check_expectation(config: &ExperimentConfig) -> Result<ExpectationCheck> {
    config.validate()?;
    let report = BernsteinReport::for_model(&config.model, config.theorem)?;
    let stats = simulate_statistics(&config.model, config.theorem, config.trials, config.seed)?;
    Ok(expectation_from(
        &stats,
        expectation_target(&report)?,
        config.confidence_slack,
    ))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let report = BernsteinReport::for_model(&config.model, config.theorem)?;
    let bounds = config
        .t_grid
        .iter()
        .map(|&t| report.tail(t))
        .collect::<Result<Vec<_>>>()?;
    let stats = simulate_statistics(&config.model, config.theorem, config.trials, config.seed)?;
    let n = config.trials;
    let tails = config
        .t_grid
        .iter()
        .zip(bounds)
        .map(|(&t, b)| {
            let hits = stats.iter().filter(|&&s| s >= t).count();
            let freq = hits as f64 / n as f64;
            let upper = upper_confidence(freq, n, config.confidence_slack);
            TailRow {
                t,
                empirical_freq: freq,
                upper_conf: upper,
                bound_raw: b.raw,
                bound_clamped: b.clamped,
                // a zero bound (ν = L = 0) can only be met by never exceeding t
                pass: if b.clamped == 0.0 {
                    hits == 0
                } else {
                    upper <= b.clamped
                },
            }
        })
        .collect();
    let expectation = expectation_from(
        &stats,
        expectation_target(&report)?,
        config.confidence_slack,
    );
    Ok(ExperimentResult {
        theorem: config.theorem,
        trials: n,
        empirical_mean_max: expectation.empirical_mean,
        tails,
        bound_report: report,
        expectation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::identity_tensor;

    fn zero_model() -> SumModel {
        SumModel::rademacher(vec![Tensor::cubic_zeros(2, 2).unwrap(); 3]).unwrap()
    }

    #[test]
    fn single_component_is_plus_or_minus() {
        let a = Tensor::cubic(2, 2, vec![1.0, 2.0, 2.0, -3.0]).unwrap();
        let model = SumModel::rademacher(vec![a.clone()]).unwrap();
        let (mut plus, mut minus) = (0, 0);
        for k in 0..400 {
            let y = sample_sum(&model, &mut trial_rng(1, k));
            if y == a {
                plus += 1;
            } else {
                assert_eq!(y, a.scale(-1.0));
                minus += 1;
            }
        }
        assert!(plus > 150 && minus > 150);
    }

    #[test]
    fn identical_population_sums_to_zero() {
        let b = Tensor::cubic(1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let model = SumModel::subsample(vec![b.clone(), b.clone(), b], 5).unwrap();
        for k in 0..20 {
            assert_eq!(sample_sum(&model, &mut trial_rng(3, k)).max_abs(), 0.0);
        }
    }

    #[test]
    fn zero_model_passes_everything() {
        let cfg = ExperimentConfig::new(zero_model(), Theorem::Even, 200, vec![0.5, 1.0, 2.0], 9)
            .unwrap();
        let res = run_experiment(&cfg).unwrap();
        assert!(res.tails.iter().all(|r| r.empirical_freq == 0.0 && r.pass));
        assert_eq!(res.expectation.margin, res.expectation.bound);
        assert!(res.all_pass());
    }

    #[test]
    fn identity_expectation_check() {
        let model = SumModel::rademacher(vec![identity_tensor(1, 2).unwrap()]).unwrap();
        let cfg = ExperimentConfig::new(model, Theorem::Even, 1000, vec![], 4).unwrap();
        let chk = check_expectation(&cfg).unwrap();
        let ln2 = 2f64.ln();
        assert!((chk.bound - ((2.0 * ln2).sqrt() + ln2 / 3.0)).abs() < 1e-15);
        assert!(chk.pass);
        // λ_max(±I) = ±1, so the signed mean is near 0 and the norm mean is 1
        assert!(chk.empirical_mean.abs() < 0.2);
        let cfg = ExperimentConfig {
            theorem: Theorem::General,
            ..cfg
        };
        let chk = check_expectation(&cfg).unwrap();
        assert!((chk.empirical_mean - 1.0).abs() < 1e-14 && chk.empirical_std < 1e-14);
        assert!(chk.pass);
    }

    #[test]
    fn deterministic_and_pool_independent() {
        let model = SumModel::rademacher(vec![identity_tensor(1, 3).unwrap(); 4]).unwrap();
        let cfg = ExperimentConfig::new(model, Theorem::General, 300, vec![0.0, 1.0, 2.0, 3.0], 77)
            .unwrap();
        let a = run_experiment(&cfg).unwrap().to_csv();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_experiment(&cfg).unwrap().to_csv());
        assert_eq!(a, b);
    }

    #[test]
    fn config_invariants() {
        assert!(matches!(
            ExperimentConfig::new(zero_model(), Theorem::Even, 99, vec![], 0),
            Err(Error::Config(_))
        ));
        assert!(
            ExperimentConfig::new(zero_model(), Theorem::Even, 100, vec![1.0, 1.0], 0).is_err()
        );
        let cfg = ExperimentConfig::new(zero_model(), Theorem::Even, 100, vec![], 0).unwrap();
        assert!(cfg.with_slack(-1.0).is_err());
    }

    #[test]
    fn intrinsic_rejects_grid_below_domain() {
        let model = SumModel::rademacher(vec![identity_tensor(1, 2).unwrap()]).unwrap();
        let cfg = ExperimentConfig::new(model, Theorem::Intrinsic, 100, vec![0.1], 0).unwrap();
        assert!(matches!(run_experiment(&cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn upper_confidence_is_clamped() {
        assert_eq!(upper_confidence(1.0, 100, 3.0), 1.0);
        assert_eq!(upper_confidence(0.0, 100, 3.0), 0.01);
    }
}
