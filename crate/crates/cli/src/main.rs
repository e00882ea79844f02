//! Command-line interface: run the stationarity test on a file of values,
//! query the limit law, generate synthetic series, and execute experiment
//! plans.
//!
//! Every flag can also be set through an `EPOCHSPEC_*` environment
//! variable; explicit flags win. Exit codes: 0 ok, 2 input error, 3
//! configuration error, 4 numerical failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use epochtest::cache::WeightStore;
use epochtest::dgp::{generate, DgpKind, DgpSpec, GenMode, Innovations};
use epochtest::experiments::{run_plan, ExperimentPlan};
use epochtest::model::{read_series_file, MemoryParameter, TestConfig};
use epochtest::procedure::run_test_with_store;
use epochtest::wchisq::WeightedChiSq;
use epochtest::Error;

#[derive(Parser)]
#[command(
    name = "epochtest",
    version,
    about = "Epoch-periodogram test of I(1) nonstationarity against stationary memory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a one-column series file for stationarity.
    Test(TestArgs),
    /// Print limit-law weights and quantiles for a memory parameter.
    Limit(LimitArgs),
    /// Generate a synthetic series.
    Simulate(SimulateArgs),
    /// Run an experiment plan and write CSV tables plus a manifest.
    Experiment(ExperimentArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct TestArgs {
    /// Input file: one value per line, optional header, '#' comments.
    path: PathBuf,
    /// Epoch length; defaults to 10 for n >= 500.
    #[arg(long, env = "EPOCHSPEC_BLOCK_LENGTH")]
    block_length: Option<usize>,
    /// Number of Fourier frequencies in the statistic.
    #[arg(long, default_value_t = 2, env = "EPOCHSPEC_S")]
    s: usize,
    /// Nominal level of the one-sided test.
    #[arg(long, default_value_t = 0.05, env = "EPOCHSPEC_ALPHA")]
    alpha: f64,
    /// Relative tolerance for the limit-covariance quadrature.
    #[arg(long, default_value_t = 1e-6, env = "EPOCHSPEC_TOL")]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json, env = "EPOCHSPEC_FORMAT")]
    format: Format,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Args)]
struct LimitArgs {
    /// Memory parameter in (-1/2, 3/2).
    #[arg(long, env = "EPOCHSPEC_D", allow_negative_numbers = true)]
    d: f64,
    #[arg(long, default_value_t = 2, env = "EPOCHSPEC_S")]
    s: usize,
    /// Quantile probabilities to report (repeatable).
    #[arg(long = "quantile", env = "EPOCHSPEC_QUANTILE", value_delimiter = ',')]
    quantiles: Vec<f64>,
    #[arg(long, default_value_t = 1e-6, env = "EPOCHSPEC_TOL")]
    tol: f64,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Whitenoise,
    Farima,
    Ar1,
    Integrated,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Ma,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum InnovArg {
    Gaussian,
    Uniform,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, env = "EPOCHSPEC_KIND")]
    kind: KindArg,
    /// Memory parameter for --kind farima, in (-1/2, 1/2).
    #[arg(long, env = "EPOCHSPEC_D", allow_negative_numbers = true)]
    d: Option<f64>,
    /// AR coefficient for --kind ar1, |phi| < 1.
    #[arg(long, env = "EPOCHSPEC_PHI", allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Increment memory for --kind integrated, in [-1/2, 1/2).
    #[arg(long, env = "EPOCHSPEC_D_INCREMENT", allow_negative_numbers = true)]
    d_increment: Option<f64>,
    #[arg(long, default_value_t = 2000, env = "EPOCHSPEC_N")]
    n: usize,
    #[arg(long, default_value_t = 0, env = "EPOCHSPEC_SEED")]
    seed: u64,
    /// Innovation standard deviation.
    #[arg(long, default_value_t = 1.0, env = "EPOCHSPEC_SIGMA")]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact, env = "EPOCHSPEC_MODE")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = InnovArg::Gaussian, env = "EPOCHSPEC_INNOVATIONS")]
    innovations: InnovArg,
    /// MA truncation length for --mode ma.
    #[arg(long, env = "EPOCHSPEC_MA_TRUNCATION")]
    ma_truncation: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, env = "EPOCHSPEC_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Plan file (JSON).
    #[arg(long, env = "EPOCHSPEC_PLAN")]
    plan: PathBuf,
    /// Output directory for CSV tables and manifest.json.
    #[arg(long, env = "EPOCHSPEC_OUT")]
    out: PathBuf,
    /// Worker threads; tables are identical for any value.
    #[arg(long, default_value_t = 1, env = "EPOCHSPEC_THREADS")]
    threads: usize,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Args)]
struct CacheArgs {
    /// Weight-cache file; defaults to ~/.cache/epochtest/weights.json.
    #[arg(long, env = "EPOCHSPEC_CACHE")]
    cache_file: Option<PathBuf>,
    /// Force recomputation of cached weights.
    #[arg(long, default_value_t = false, env = "EPOCHSPEC_NO_CACHE")]
    no_cache: bool,
}

impl CacheArgs {
    fn store(&self) -> WeightStore {
        let path = self.cache_file.clone().or_else(|| {
            std::env::var_os("HOME")
                .map(|home| PathBuf::from(home).join(".cache/epochtest/weights.json"))
        });
        WeightStore::new(path).with_bypass(self.no_cache)
    }
}

/// Envelope for every JSON result printed to stdout.
#[derive(Serialize)]
struct CliResult<I: Serialize, O: Serialize> {
    command: &'static str,
    inputs: I,
    outcome: O,
    seed: Option<u64>,
    version: &'static str,
    elapsed_ms: u128,
}

fn emit<I: Serialize, O: Serialize>(
    command: &'static str,
    inputs: I,
    outcome: O,
    seed: Option<u64>,
    started: Instant,
) -> Result<(), Error> {
    let doc = CliResult {
        command,
        inputs,
        outcome,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        elapsed_ms: started.elapsed().as_millis(),
    };
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(3);
        }
    };
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Limit(args) => cmd_limit(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_class() as u8)
        }
    }
}

#[derive(Serialize)]
struct TestInputs {
    path: String,
    block_length: usize,
    block_length_heuristic: bool,
    s: usize,
    alpha: f64,
    tol: f64,
}

fn cmd_test(args: TestArgs) -> Result<(), Error> {
    let started = Instant::now();
    let series = read_series_file(&args.path)?;
    let (default_ell, heuristic) = TestConfig::default_block_length(series.len());
    let ell = args.block_length.unwrap_or(default_ell);
    let config = TestConfig {
        s: args.s,
        alpha: args.alpha,
        ell,
        ell_heuristic: args.block_length.is_none() && heuristic,
        quadrature_tol: args.tol,
        ..TestConfig::default()
    };
    let outcome = run_test_with_store(&series, &config, &args.cache.store())?;
    let inputs = TestInputs {
        path: args.path.display().to_string(),
        block_length: ell,
        block_length_heuristic: args.block_length.is_none() && heuristic,
        s: args.s,
        alpha: args.alpha,
        tol: args.tol,
    };
    match args.format {
        Format::Json => emit("test", inputs, &outcome, None, started)?,
        Format::Text => {
            println!(
                "statistic = {:.6} (boundary normalization d = 1/2), critical value q_{} = {:.6}",
                outcome.statistic, outcome.alpha, outcome.critical_value
            );
            println!("p-value = {:.6}", outcome.p_value);
            println!(
                "decision: {}",
                match outcome.decision {
                    epochtest::Decision::Stationary => "stationary (reject I(1))",
                    epochtest::Decision::NotRejected => "not-rejected (I(1) plausible)",
                }
            );
            println!(
                "n = {}, usable n = {}, ell = {}, m = {}, s = {}",
                outcome.config.n,
                outcome.config.usable_n,
                outcome.config.ell,
                outcome.config.m,
                outcome.config.s
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct LimitInputs {
    d: f64,
    s: usize,
    quantiles: Vec<f64>,
    tol: f64,
}

#[derive(Serialize)]
struct LimitOutcome {
    weights: Vec<f64>,
    weights_sum: f64,
    quantiles: Vec<QuantileRow>,
    cache_hit: bool,
    sigma_cos: Vec<Vec<f64>>,
    sigma_sin: Vec<Vec<f64>>,
    d_diag: Vec<f64>,
}

#[derive(Serialize)]
struct QuantileRow {
    p: f64,
    value: f64,
}

fn cmd_limit(args: LimitArgs) -> Result<(), Error> {
    let started = Instant::now();
    let d = MemoryParameter::new(args.d)?;
    if args.s < 1 {
        return Err(Error::ConfigError {
            reason: "s must be at least 1".to_string(),
        });
    }
    for &p in &args.quantiles {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ConfigError {
                reason: format!("quantile probability {p} outside (0, 1)"),
            });
        }
    }
    let store = args.cache.store();
    let (cov, weights, cache_hit) = store.get_or_compute(d, args.s, args.tol)?;
    let dist = WeightedChiSq::new(weights.clone());
    let quantiles = args
        .quantiles
        .iter()
        .map(|&p| {
            Ok(QuantileRow {
                p,
                value: dist.quantile(p)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let outcome = LimitOutcome {
        weights: weights.values().to_vec(),
        weights_sum: weights.sum(),
        quantiles,
        cache_hit,
        sigma_cos: cov.sigma_cos().to_vec(),
        sigma_sin: cov.sigma_sin().to_vec(),
        d_diag: cov.d_diag().to_vec(),
    };
    emit(
        "limit",
        LimitInputs {
            d: args.d,
            s: args.s,
            quantiles: args.quantiles.clone(),
            tol: args.tol,
        },
        outcome,
        None,
        started,
    )
}

#[derive(Serialize)]
struct SimulateInputs {
    kind: String,
    d: Option<f64>,
    phi: Option<f64>,
    d_increment: Option<f64>,
    n: usize,
    sigma: f64,
    mode: String,
    innovations: String,
    out: Option<String>,
}

#[derive(Serialize)]
struct SimulateOutcome {
    written_to: Option<String>,
    n: usize,
    memory_parameter: f64,
    meta: epochtest::dgp::GenMeta,
}

fn build_spec(args: &SimulateArgs) -> Result<DgpSpec, Error> {
    let require = |opt: Option<f64>, flag: &str| {
        opt.ok_or_else(|| Error::ConfigError {
            reason: format!("--{flag} is required for this kind"),
        })
    };
    let kind = match args.kind {
        KindArg::Whitenoise => DgpKind::WhiteNoise,
        KindArg::Farima => {
            let d = require(args.d, "d")?;
            if (0.5..1.5).contains(&d) {
                return Err(Error::ConfigError {
                    reason: format!(
                        "d = {d} is in the integrated range; use --kind integrated \
                         --d-increment {}",
                        d - 1.0
                    ),
                });
            }
            DgpKind::Farima0d0 { d }
        }
        KindArg::Ar1 => DgpKind::Ar1 {
            phi: require(args.phi, "phi")?,
        },
        KindArg::Integrated => DgpKind::IntegratedFarima {
            d_increment: require(args.d_increment, "d-increment")?,
        },
    };
    let mut spec = DgpSpec::new(kind, args.n, args.seed);
    spec.sigma_eps = args.sigma;
    spec.mode = match args.mode {
        ModeArg::Exact => GenMode::ExactGaussian,
        ModeArg::Ma => GenMode::TruncatedMa,
    };
    spec.innovations = match args.innovations {
        InnovArg::Gaussian => Innovations::Gaussian,
        InnovArg::Uniform => Innovations::CenteredUniform,
    };
    spec.ma_truncation = args.ma_truncation;
    spec.validate()?;
    Ok(spec)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let started = Instant::now();
    let spec = build_spec(&args)?;
    let generated = generate(&spec)?;

    let mut body = String::new();
    body.push_str("# epochtest simulate\n");
    body.push_str(&format!("# spec = {}\n", serde_json::to_string(&spec)?));
    body.push_str(&format!(
        "# meta = {}\n",
        serde_json::to_string(&generated.meta)?
    ));
    for v in generated.series.values() {
        body.push_str(&format!("{v}\n"));
    }
    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            file.write_all(body.as_bytes())?;
        }
        None => print!("{body}"),
    }

    let inputs = SimulateInputs {
        kind: format!("{:?}", spec.kind),
        d: args.d,
        phi: args.phi,
        d_increment: args.d_increment,
        n: args.n,
        sigma: args.sigma,
        mode: format!("{:?}", spec.mode),
        innovations: format!("{:?}", spec.innovations),
        out: args.out.as_ref().map(|p| p.display().to_string()),
    };
    if args.out.is_some() {
        let outcome = SimulateOutcome {
            written_to: inputs.out.clone(),
            n: args.n,
            memory_parameter: spec.memory_parameter(),
            meta: generated.meta,
        };
        emit("simulate", inputs, outcome, Some(args.seed), started)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ExperimentInputs {
    plan: String,
    out: String,
    threads: usize,
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Error> {
    let started = Instant::now();
    let plan = ExperimentPlan::from_file(&args.plan)?;
    let store = args.cache.store();
    let manifest = run_plan(&plan, &args.out, &store, args.threads)?;
    emit(
        "experiment",
        ExperimentInputs {
            plan: args.plan.display().to_string(),
            out: args.out.display().to_string(),
            threads: args.threads,
        },
        &manifest,
        Some(plan.master_seed),
        started,
    )
}
