//! `rvhaar`: weighted RV coefficient significance testing with exact null
//! moments under invariant orthogonal integration, plus the exact and Monte
//! Carlo verification suites.
//!
//! Exit codes: 0 success, 2 validation error, 3 non-Euclidean input,
//! 4 verification failure.

mod input;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use rvhaar_core::error::Error as CoreError;
use rvhaar_core::geometry::{
    build_kernel, kernel_from_features, neutral_kernel, ObjectWeights, StandardKernel,
    WeightedConfiguration,
};
use rvhaar_core::haaroracle::{
    empirical_p_matrix, monte_carlo_cv_moments, monte_carlo_orthogonal_coefficient,
    sample_haar_orthogonal, EigenbasisPair,
};
use rvhaar_core::rvstats::{cv_null_moments, cv_null_moments_rational, full_test_kernels};
use rvhaar_core::spectra::{nontrivial_spectrum, SpectralSummary};
use rvhaar_core::weingarten::{
    cv_centered_moment_weingarten_rational, orthogonal_coefficient, partitions_of,
    trivariate_counts, verify_elementary_closed_forms, verify_marginalization,
    verify_polynomial_identities, PartitionType, Rational,
};

use report::{
    CheckReport, McReport, McRow, SpectrumCommandReport, SpectrumReport, TestReport, VerifyReport,
    SCHEMA_VERSION,
};

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::NotEuclidean { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rvhaar",
    version,
    about = "Weighted RV coefficient tests with exact null moments under invariant orthogonal integration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// One row per object, numeric feature columns.
    Features,
    /// Full symmetric matrix of squared Euclidean distances.
    Distances,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyScope {
    Weingarten,
    Haar,
    All,
}

#[derive(Args)]
struct IoArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    out: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out_file: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    /// First dataset (CSV).
    #[arg(long)]
    x: PathBuf,
    /// Second dataset (CSV).
    #[arg(long)]
    y: PathBuf,
    /// Optional single-column CSV of object weights; uniform otherwise.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// How to interpret the dataset files.
    #[arg(long, value_enum, default_value_t = Mode::Features)]
    mode: Mode,
    /// Significance level of the one-tailed test.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Dataset (CSV).
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Features)]
    mode: Mode,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which verification engine to run.
    #[arg(long, value_enum, default_value_t = VerifyScope::All)]
    scope: VerifyScope,
    /// Dimensions for the exact polynomial identities, e.g. "5-30" or "5,8,13".
    #[arg(long, default_value = "5-30")]
    n_list: String,
    /// Monte Carlo draws per randomized check.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory for CSV dumps of the trivariate count tables.
    #[arg(long)]
    tables_dir: Option<PathBuf>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Features)]
    mode: Mode,
    /// Haar samples for the moment estimates.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Significance test of the RV coefficient between two datasets.
    Test(TestArgs),
    /// Spectral summary of a single configuration.
    Spectrum(SpectrumArgs),
    /// Exact and Monte Carlo verification suites.
    Verify(VerifyArgs),
    /// Monte Carlo vs exact null-moment comparison for two datasets.
    Mc(McArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Mc(args) => cmd_mc(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn emit(io: &IoArgs, json: serde_json::Value, text: String) -> Result<(), CliError> {
    let payload = match io.out {
        OutputFormat::Json => {
            serde_json::to_string_pretty(&json).expect("reports serialize") + "\n"
        }
        OutputFormat::Text => text,
    };
    match &io.out_file {
        Some(path) => fs::write(path, payload)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

/// Loads one dataset as a standard kernel plus its weights.
fn load_kernel(
    path: &Path,
    weights: Option<&Path>,
    mode: Mode,
    shared_weights: Option<&ObjectWeights>,
) -> Result<StandardKernel, CliError> {
    let resolve_weights = |n: usize| -> Result<ObjectWeights, CliError> {
        if let Some(w) = shared_weights {
            if w.len() != n {
                return Err(CliError::validation(format!(
                    "datasets disagree on the number of objects: {} vs {n}",
                    w.len()
                )));
            }
            return Ok(w.clone());
        }
        match weights {
            Some(p) => input::read_weights(p, n),
            None => Ok(ObjectWeights::uniform(n)?),
        }
    };
    match mode {
        Mode::Features => {
            let x = input::read_features(path)?;
            let w = resolve_weights(x.nrows())?;
            Ok(kernel_from_features(&x, &w)?)
        }
        Mode::Distances => {
            let d = input::read_distances(path)?;
            let w = resolve_weights(d.len())?;
            let config = WeightedConfiguration::new(w, d)?;
            Ok(build_kernel(&config)?)
        }
    }
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let kx = load_kernel(&args.x, args.weights.as_deref(), args.mode, None)?;
    let ky = load_kernel(
        &args.y,
        args.weights.as_deref(),
        args.mode,
        Some(kx.weights()),
    )?;
    if kx.len() < 3 {
        return Err(CliError::validation(format!(
            "test requires at least 3 objects, got {}",
            kx.len()
        )));
    }
    let outcome = full_test_kernels(&kx, &ky, args.alpha)?;
    let report = TestReport::from_outcome(&outcome, args.alpha);
    let text = report.render_text();
    emit(&args.io, serde_json::to_value(&report).unwrap(), text)
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let kernel = load_kernel(&args.x, args.weights.as_deref(), args.mode, None)?;
    let spectrum = nontrivial_spectrum(&kernel)?;
    let summary = SpectralSummary::from_spectrum(&spectrum)?;
    let report = SpectrumCommandReport {
        schema_version: SCHEMA_VERSION,
        command: "spectrum",
        spectrum: SpectrumReport::from_summary(&summary, Some(spectrum.lambdas().to_vec())),
    };
    let text = report.render_text();
    emit(&args.io, serde_json::to_value(&report).unwrap(), text)
}

fn cmd_mc(args: McArgs) -> Result<(), CliError> {
    let kx = load_kernel(&args.x, args.weights.as_deref(), args.mode, None)?;
    let ky = load_kernel(
        &args.y,
        args.weights.as_deref(),
        args.mode,
        Some(kx.weights()),
    )?;
    let n = kx.len();
    let sx = nontrivial_spectrum(&kx)?;
    let sy = nontrivial_spectrum(&ky)?;
    let exact = cv_null_moments(&sx, &sy)?;
    let basis = EigenbasisPair::from_kernels(&kx, &ky)?;
    let estimates = monte_carlo_cv_moments(&basis, args.samples, args.seed)?;
    let mut rows = Vec::new();
    let mut push = |target: &str,
                    exact_value: Option<f64>,
                    estimate: rvhaar_core::haaroracle::MonteCarloEstimate| {
        if let Some(exact_value) = exact_value {
            rows.push(McRow {
                target: target.into(),
                exact_value,
                estimate: estimate.value,
                std_error: estimate.std_error,
                samples: estimate.samples,
                seed: estimate.seed,
                z_gap: (estimate.value - exact_value) / estimate.std_error.max(f64::MIN_POSITIVE),
            });
        }
    };
    push("mean", Some(exact.mean), estimates.mean);
    push("central2", exact.central2, estimates.central2);
    push("central3", exact.central3, estimates.central3);
    push("central4", exact.central4, estimates.central4);
    let report = McReport {
        schema_version: SCHEMA_VERSION,
        command: "mc",
        n,
        samples: args.samples,
        seed: args.seed,
        rows,
    };
    let text = report.render_text();
    emit(&args.io, serde_json::to_value(&report).unwrap(), text)
}

fn parse_n_list(list: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in list.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| CliError::validation(format!("bad range start in '{part}'")))?;
            let hi: usize = hi
                .trim()
                .parse()
                .map_err(|_| CliError::validation(format!("bad range end in '{part}'")))?;
            if lo > hi {
                return Err(CliError::validation(format!("empty range '{part}'")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                part.parse()
                    .map_err(|_| CliError::validation(format!("bad value '{part}'")))?,
            );
        }
    }
    if out.is_empty() {
        return Err(CliError::validation("empty n list"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn partition(parts: &[usize]) -> PartitionType {
    PartitionType::new(parts.to_vec()).expect("static partition")
}

fn dump_tables(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))?;
    for q in [3usize, 4] {
        let table = trivariate_counts(q)?;
        let path = dir.join(format!("trivariate_q{q}.csv"));
        let mut writer = csv::Writer::from_path(&path)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
        writer
            .write_record(["join_type", "coset_sigma", "coset_tau", "count"])
            .and_then(|_| {
                for ((join, cs, ct), count) in table.iter() {
                    writer.write_record([
                        join.to_string(),
                        cs.to_string(),
                        ct.to_string(),
                        count.to_string(),
                    ])?;
                }
                writer.flush().map_err(csv::Error::from)
            })
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn weingarten_checks(n_list: &[usize]) -> Result<Vec<CheckReport>, CliError> {
    let mut checks = Vec::new();

    let t3 = trivariate_counts(3)?;
    let t4 = trivariate_counts(4)?;
    checks.push(CheckReport {
        name: "trivariate table totals".into(),
        passed: t3.total() == 225 && t4.total() == 11025,
        detail: format!("q=3 total {}, q=4 total {}", t3.total(), t4.total()),
    });

    let joins3 = partitions_of(3);
    let joins4 = partitions_of(4);
    let three = partition(&[3]);
    let four = partition(&[4]);
    let two_two = partition(&[2, 2]);
    let cells3: Vec<u64> = joins3.iter().map(|j| t3.get(j, &three, &three)).collect();
    let diag4: Vec<u64> = joins4.iter().map(|j| t4.get(j, &four, &four)).collect();
    let diag22: Vec<u64> = joins4
        .iter()
        .map(|j| t4.get(j, &two_two, &two_two))
        .collect();
    let cross: Vec<u64> = joins4.iter().map(|j| t4.get(j, &four, &two_two)).collect();
    checks.push(CheckReport {
        name: "boxed count families".into(),
        passed: cells3 == [8, 24, 32]
            && diag4 == [48, 288, 240, 768, 960]
            && diag22 == [12, 24, 60, 0, 48]
            && cross == [0, 96, 48, 192, 240],
        detail: format!("{cells3:?} {diag4:?} {diag22:?} {cross:?}"),
    });

    let identities = verify_polynomial_identities(n_list)?;
    for check in identities.checks {
        checks.push(CheckReport {
            name: check.name,
            passed: check.passed,
            detail: if check.passed {
                "exact".into()
            } else {
                check.detail
            },
        });
    }

    let elementary = verify_elementary_closed_forms();
    checks.push(CheckReport {
        name: elementary.name,
        passed: elementary.passed,
        detail: elementary.detail,
    });

    // Dual-path centered moments on fixed rational spectra.
    for n in [6usize, 9] {
        let lambdas: Vec<Rational> = (0..n - 1)
            .map(|i| Rational::new(((3 * i + 1) as i64).into(), ((i % 3 + 1) as i64).into()))
            .collect();
        let mus: Vec<Rational> = (0..n - 1)
            .map(|i| Rational::new(((2 * i + 3) as i64).into(), ((i % 2 + 1) as i64).into()))
            .collect();
        let closed = cv_null_moments_rational(&lambdas, &mus, n)?;
        let expected = [
            closed.central2.unwrap(),
            closed.central3.unwrap(),
            closed.central4.unwrap(),
        ];
        let mut passed = true;
        for q in 2..=4usize {
            passed &=
                cv_centered_moment_weingarten_rational(q, &lambdas, &mus, n)? == expected[q - 2];
        }
        checks.push(CheckReport {
            name: format!("dual-path centered moments, n={n}"),
            passed,
            detail: "Weingarten assembly vs closed forms, exact rational".into(),
        });
    }

    for n in [5usize, 6, 9] {
        let check = verify_marginalization(n)?;
        checks.push(CheckReport {
            name: check.name,
            passed: check.passed,
            detail: check.detail,
        });
    }

    Ok(checks)
}

fn haar_checks(samples: u64, seed: u64) -> Result<Vec<CheckReport>, CliError> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut checks = Vec::new();

    // Representative monomial patterns: order 1, 2 and 3 coefficients,
    // including vanishing odd-multiplicity cases.
    let patterns: [(&str, Vec<usize>, Vec<usize>); 12] = [
        ("first moment", vec![0, 0], vec![0, 0]),
        ("odd subscript", vec![0, 1], vec![0, 0]),
        ("order2 all equal", vec![0, 0, 0, 0], vec![0, 0, 0, 0]),
        ("order2 sub pairs", vec![0, 0, 1, 1], vec![0, 0, 0, 0]),
        ("order2 aligned", vec![0, 0, 1, 1], vec![0, 0, 1, 1]),
        ("order2 crossed", vec![0, 0, 1, 1], vec![0, 1, 0, 1]),
        ("order2 odd", vec![0, 1, 2, 2], vec![0, 0, 1, 1]),
        (
            "order3 all equal",
            vec![0, 0, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 0, 0],
        ),
        (
            "order3 three pairs",
            vec![0, 0, 1, 1, 2, 2],
            vec![0, 0, 0, 0, 0, 0],
        ),
        (
            "order3 split sup",
            vec![0, 0, 1, 1, 2, 2],
            vec![0, 0, 0, 0, 1, 1],
        ),
        (
            "order3 crossed",
            vec![0, 2, 3, 3, 0, 2],
            vec![0, 0, 0, 0, 1, 1],
        ),
        (
            "order3 fully crossed",
            vec![0, 3, 2, 3, 0, 2],
            vec![0, 0, 1, 1, 2, 2],
        ),
    ];
    for d in [4usize, 7] {
        let mut worst: f64 = 0.0;
        let mut passed = true;
        for (i, (_, sub, sup)) in patterns.iter().enumerate() {
            let exact = orthogonal_coefficient(sub, sup, d + 1)?;
            let exact = num::ToPrimitive::to_f64(&exact).expect("coefficient fits in f64");
            let estimate = monte_carlo_orthogonal_coefficient(
                sub,
                sup,
                d,
                samples,
                seed.wrapping_add(i as u64),
            )?;
            let gap = (estimate.value - exact).abs() / estimate.std_error.max(f64::MIN_POSITIVE);
            worst = worst.max(gap);
            passed &= gap <= 5.0;
        }
        checks.push(CheckReport {
            name: format!("orthogonal coefficients vs Monte Carlo, d={d}"),
            passed,
            detail: format!("12 patterns, worst gap {worst:.2} SE at {samples} samples"),
        });
    }

    // Overlap matrices: double stochasticity and mean entries.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut stochastic_ok = true;
    for n in [4usize, 6, 10] {
        let w = ObjectWeights::uniform(n)?;
        let x = DMatrix::from_fn(n, 3, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let y = DMatrix::from_fn(n, 2, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let basis = EigenbasisPair::from_kernels(
            &kernel_from_features(&x, &w)?,
            &kernel_from_features(&y, &w)?,
        )?;
        for _ in 0..100 {
            let t = sample_haar_orthogonal(n - 1, &mut rng);
            let p = empirical_p_matrix(&basis, &t);
            for a in 0..n - 1 {
                stochastic_ok &= (p.row(a).sum() - 1.0).abs() <= 1e-8;
                stochastic_ok &= (p.column(a).sum() - 1.0).abs() <= 1e-8;
            }
        }
    }
    checks.push(CheckReport {
        name: "overlap matrices doubly stochastic".into(),
        passed: stochastic_ok,
        detail: "row/column sums within 1e-8, 100 draws each for n in {4, 6, 10}".into(),
    });

    {
        let n = 5usize;
        let d = n - 1;
        let w = ObjectWeights::uniform(n)?;
        let x = DMatrix::from_fn(n, 3, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let y = DMatrix::from_fn(n, 2, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let basis = EigenbasisPair::from_kernels(
            &kernel_from_features(&x, &w)?,
            &kernel_from_features(&y, &w)?,
        )?;
        let draws = samples.min(200_000) as usize;
        let mut sums = DMatrix::<f64>::zeros(d, d);
        let mut squares = DMatrix::<f64>::zeros(d, d);
        for _ in 0..draws {
            let t = sample_haar_orthogonal(d, &mut rng);
            let p = empirical_p_matrix(&basis, &t);
            sums += &p;
            squares += p.map(|v| v * v);
        }
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let mean = sums[(a, b)] / draws as f64;
                let var = squares[(a, b)] / draws as f64 - mean * mean;
                let se = (var / draws as f64).sqrt();
                worst = worst.max((mean - 0.25).abs() / se.max(f64::MIN_POSITIVE));
            }
        }
        checks.push(CheckReport {
            name: "mean overlap entries at n=5".into(),
            passed: worst <= 4.0,
            detail: format!("all entries within 4 SE of 1/4 (worst {worst:.2} SE, {draws} draws)"),
        });
    }

    {
        // Moment estimates against the closed forms on a fixed spectrum pair.
        let n = 6usize;
        let w = ObjectWeights::uniform(n)?;
        let k0 = neutral_kernel(&w);
        let base = EigenbasisPair::from_kernels(&k0, &k0)?;
        let u = base.basis_x();
        let make = |values: &[f64]| -> Result<StandardKernel, CliError> {
            let mut k = DMatrix::zeros(n, n);
            for (col, lambda) in values.iter().enumerate() {
                let u_col = u.column(col);
                for i in 0..n {
                    for j in 0..n {
                        k[(i, j)] += lambda * u_col[i] * u_col[j];
                    }
                }
            }
            Ok(StandardKernel::new(k, w.clone())?)
        };
        let kx = make(&[5.0, 3.0, 1.0, 1.0, 0.0])?;
        let ky = make(&[4.0, 2.0, 2.0, 1.0, 1.0])?;
        let basis = EigenbasisPair::from_kernels(&kx, &ky)?;
        let exact = cv_null_moments(&nontrivial_spectrum(&kx)?, &nontrivial_spectrum(&ky)?)?;
        let estimates = monte_carlo_cv_moments(&basis, samples, seed)?;
        let mut worst: f64 = 0.0;
        for (estimate, target) in [
            (estimates.mean, exact.mean),
            (estimates.central2, exact.central2.unwrap()),
            (estimates.central3, exact.central3.unwrap()),
            (estimates.central4, exact.central4.unwrap()),
        ] {
            worst = worst
                .max((estimate.value - target).abs() / estimate.std_error.max(f64::MIN_POSITIVE));
        }
        checks.push(CheckReport {
            name: "cross-inertia moments vs Monte Carlo, n=6".into(),
            passed: worst <= 4.0,
            detail: format!("worst gap {worst:.2} SE at {samples} samples"),
        });
    }

    Ok(checks)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let n_list = parse_n_list(&args.n_list)?;
    if let Some(dir) = &args.tables_dir {
        dump_tables(dir)?;
    }
    let mut checks = Vec::new();
    let scope_name = match args.scope {
        VerifyScope::Weingarten => "weingarten",
        VerifyScope::Haar => "haar",
        VerifyScope::All => "all",
    };
    if matches!(args.scope, VerifyScope::Weingarten | VerifyScope::All) {
        checks.extend(weingarten_checks(&n_list)?);
    }
    if matches!(args.scope, VerifyScope::Haar | VerifyScope::All) {
        checks.extend(haar_checks(args.samples, args.seed)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        scope: scope_name.into(),
        samples: args.samples,
        seed: args.seed,
        passed,
        checks,
    };
    let text = report.render_text();
    emit(&args.io, serde_json::to_value(&report).unwrap(), text)?;
    if !passed {
        return Err(CliError {
            code: 4,
            message: "verification failures (see report)".into(),
        });
    }
    Ok(())
}
