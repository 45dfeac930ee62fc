use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use einbern::config::{auto_grid, load_experiment, load_model, parse_grid_arg};
use einbern::random::unit_vector;
use einbern::{
    e_eigenvalues, is_e_psd, matricize, psd_counterexample, run_experiment, run_suite,
    BernsteinReport, Error, Suite, Theorem,
};

/// Exit status for a failed property or verdict.
const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INAPPLICABLE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "einbern",
    version,
    about = "Einstein-product tensor algebra and tensor Bernstein bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded property suite and report each property.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
    /// Evaluate a Bernstein bound for a model and write its tail curve.
    Bound {
        /// Model document, or an experiment document embedding one.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        theorem: TheoremArg,
        /// `start:stop:points`; defaults to 20 points over [0, 3(sqrt(nu) + L)].
        #[arg(long)]
        t_grid: Option<String>,
        /// CSV destination; the key=value report goes next to it with a .txt extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo experiment and compare it with the bounds.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the order-4 tensor that is PSD but not E-PSD.
    Example45,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Algebra,
    Spectral,
    Bounds,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Algebra => Suite::Algebra,
            SuiteArg::Spectral => Suite::Spectral,
            SuiteArg::Bounds => Suite::Bounds,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    Even,
    General,
    Intrinsic,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::Even => Theorem::Even,
            TheoremArg::General => Theorem::General,
            TheoremArg::Intrinsic => Theorem::Intrinsic,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InapplicableTheorem(_) => EXIT_INAPPLICABLE,
        Error::Solver { .. } | Error::Estimation { .. } => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Verify { suite, seed, cases } => verify(suite.into(), seed, cases),
        Command::Bound {
            config,
            theorem,
            t_grid,
            out,
        } => bound(&config, theorem.into(), t_grid.as_deref(), &out),
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Example45 => example45(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Caps the trial pool at `EB_THREADS` when set.
fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("EB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!("EB_THREADS must be a positive integer, got {v:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn verify(suite: Suite, seed: u64, cases: usize) -> Result<bool, Error> {
    let outcomes = run_suite(suite, seed, cases)?;
    for o in &outcomes {
        println!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} properties passed", outcomes.len());
    Ok(passed == outcomes.len())
}

fn bound(config: &Path, theorem: Theorem, grid: Option<&str>, out: &Path) -> Result<bool, Error> {
    let model = load_model(config)?;
    let report = BernsteinReport::for_model(&model, theorem)?;
    let mut grid = match grid {
        Some(s) => parse_grid_arg(s)?,
        None => auto_grid(&report, 20)?,
    };
    let before = grid.len();
    grid.retain(|&t| t >= report.tail_domain_min);
    if grid.len() < before {
        eprintln!(
            "warning: dropped {} grid point(s) below t = {} where the {} bound does not hold",
            before - grid.len(),
            report.tail_domain_min,
            theorem
        );
    }
    if grid.is_empty() {
        return Err(Error::Domain(
            "no grid point lies in the bound's domain".into(),
        ));
    }
    let kv = report.to_key_value();
    write(out, &report.tail_csv(&grid)?)?;
    write(&out.with_extension("txt"), &kv)?;
    print!("{kv}");
    Ok(true)
}

fn simulate(config: &Path, out: &Path) -> Result<bool, Error> {
    let cfg = load_experiment(config)?;
    let result = run_experiment(&cfg)?;
    write(out, &result.to_csv())?;
    print!("{}", result.bound_report.to_key_value());
    print!("{}", result.summary());
    Ok(result.all_pass())
}

fn example45() -> Result<bool, Error> {
    let a = psd_counterexample();
    let mut ok = true;
    let mut check = |label: &str, pass: bool| {
        println!("{} {label}", if pass { "ok  " } else { "FAIL" });
        ok &= pass;
    };

    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let (mut worst, mut min_form) = (0.0f64, f64::INFINITY);
    for _ in 0..1000 {
        let x = unit_vector(3, &mut rng);
        let v = a.apply_power(&x)?;
        worst = worst.max((v - 6.0 * x[0] * x[0] * x[1] * x[1]).abs());
        min_form = min_form.min(v);
    }
    println!("max |A x^4 - 6 x1^2 x2^2| over 1000 unit x = {worst:e}");
    println!("min A x^4 over the same x = {min_form:e}");
    check("A x^4 = 6 x1^2 x2^2", worst <= 1e-12);
    check("A x^4 >= 0 on samples", min_form >= -1e-12);

    let f = matricize(&a)?;
    let y = [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0];
    let q = f.bilinear(&y, &y)?;
    println!("y^T f(A) y at y = (1,0,0,0,-1,0,0,0,0) = {q}");
    check("quadratic form = -2", (q + 2.0).abs() <= 1e-12);

    let spectrum = e_eigenvalues(&a)?;
    let fmt: Vec<String> = spectrum.iter().map(|v| format!("{v:.6}")).collect();
    println!("Einstein spectrum = [{}]", fmt.join(", "));
    let (max, min) = (spectrum[0], spectrum[spectrum.len() - 1]);
    println!("lambda_max^E = {max:.12}, lambda_min^E = {min:.12}");
    check("lambda_max^E = 2", (max - 2.0).abs() <= 1e-10);
    check("lambda_min^E = -1", (min + 1.0).abs() <= 1e-10);
    let e_psd = is_e_psd(&a, 1e-10)?;
    println!("is_e_psd = {e_psd}");
    check("not E-PSD", !e_psd);

    if ok {
        println!("conclusion: PSD but not E-PSD");
    }
    Ok(ok)
}
