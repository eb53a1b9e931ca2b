//! Command-line front-end: discrepancy curves, symmetry tests, replicated
//! simulation studies, and prior vanishing-rate fits, each writing its
//! outputs plus a run manifest into one directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use skewtest::dataio::{
    load_column, mad_outliers, remove_outliers, write_plot, BoxGroup, ColumnSpec, CurveSeries,
    PlotData, DEFAULT_MAD_THRESHOLD,
};
use skewtest::discrepancy::{
    build_curve, default_skew_grid, default_two_piece_grid, DiscrepancyCurve, DminOptions, Family,
};
use skewtest::error::{Error, Result};
use skewtest::evidence::{bayes_test, Engine};
use skewtest::kernels::Baseline;
use skewtest::priors::{
    fit_vanishing_rate, PriorSpec, DEFAULT_JEFFREYS_DF, DEFAULT_JEFFREYS_SCALE,
    DEFAULT_RATE_HALFWIDTH,
};
use skewtest::simulation::{rate_study, run_experiment, SimConfig};

const DEFAULT_MASTER_SEED: u64 = 1729;
const SEED_ENV_VAR: &str = "SKEWTEST_SEED";
/// Version of the output-file layout written by the commands.
const OUTPUT_FORMAT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "skewtest",
    version,
    about = "Bayes-factor symmetry tests for skew-symmetric models with objective non-local priors"
)]
struct Cli {
    /// Cap on worker threads for the parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a minimum-discrepancy curve; write its CSV, summary, and plots.
    Curve(CurveArgs),
    /// Test a data column for symmetry; write the result as JSON.
    Test(TestArgs),
    /// Run the replicated simulation study (or the rate study).
    Simulate(SimArgs),
    /// Fit the polynomial vanishing rate of the exact prior near zero.
    FitRate(RateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Skew,
    TwoPiece,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Skew => Family::SkewSymmetric,
            FamilyArg::TwoPiece => Family::TwoPiece,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineArg {
    Normal,
    Logistic,
    Sech,
}

impl From<BaselineArg> for Baseline {
    fn from(b: BaselineArg) -> Baseline {
        match b {
            BaselineArg::Normal => Baseline::Normal,
            BaselineArg::Logistic => Baseline::Logistic,
            BaselineArg::Sech => Baseline::Sech,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PriorArg {
    /// Jeffreys-style heavy-tailed t prior (local).
    Jeffreys,
    /// Moment-normal non-local prior.
    Dimom,
    /// Approximate discrepancy-based non-local prior.
    Moomin,
    /// Exact curve-backed discrepancy prior (slower; built on demand).
    MoominExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Laplace,
    Ila,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Laplace => Engine::Laplace,
            EngineArg::Ila => Engine::Ila,
        }
    }
}

#[derive(Args)]
struct CurveArgs {
    /// Asymmetric family the curve is built against.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Symmetric baseline density.
    #[arg(long, value_enum)]
    baseline: BaselineArg,
    /// Smallest shape value of a uniform grid (default: the family grid).
    #[arg(long, allow_negative_numbers = true)]
    grid_min: Option<f64>,
    /// Largest shape value of a uniform grid.
    #[arg(long)]
    grid_max: Option<f64>,
    /// Node count of a uniform grid.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value = "out-curve")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    /// CSV file holding the observations.
    #[arg(long)]
    data: PathBuf,
    /// Column to read: a header name or a zero-based index.
    #[arg(long, default_value = "0")]
    column: String,
    /// Field delimiter (one character).
    #[arg(long, default_value = ",")]
    delimiter: String,
    #[arg(long, value_enum, default_value_t = PriorArg::Moomin)]
    prior: PriorArg,
    #[arg(long, value_enum, default_value_t = EngineArg::Ila)]
    engine: EngineArg,
    /// Drop robust MAD outliers before testing.
    #[arg(long)]
    remove_outliers: bool,
    /// Flagging threshold in scaled-MAD units.
    #[arg(long, default_value_t = DEFAULT_MAD_THRESHOLD)]
    mad_threshold: f64,
    /// Scale of the Jeffreys-style t prior.
    #[arg(long, default_value_t = DEFAULT_JEFFREYS_SCALE)]
    jeffreys_scale: f64,
    /// Output directory.
    #[arg(long, default_value = "out-test")]
    out: PathBuf,
}

#[derive(Args)]
struct SimArgs {
    /// JSON file with a simulation configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample sizes (comma-separated or repeated).
    #[arg(long = "n", value_delimiter = ',', num_args = 1..)]
    sizes: Option<Vec<usize>>,
    /// True shape values of the generating model.
    #[arg(long = "lambda", value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    lambdas: Option<Vec<f64>>,
    /// Replications per cell.
    #[arg(long = "N")]
    replications: Option<usize>,
    /// Master seed (fallback: the SKEWTEST_SEED environment variable).
    #[arg(long)]
    seed: Option<u64>,
    /// Priors to evaluate (repeat the flag for several).
    #[arg(long = "prior", value_enum, num_args = 1..)]
    priors: Option<Vec<PriorArg>>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    /// Fail (exit 3) when any cell loses more than 1% of its replicates.
    #[arg(long)]
    strict: bool,
    /// Regress mean log Bayes factors on log n under the null instead of
    /// the plain replicated study.
    #[arg(long)]
    rate_study: bool,
    #[arg(long, default_value = "out-sim")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RateArgs {
    /// Symmetric baseline density.
    #[arg(long, value_enum)]
    baseline: BaselineArg,
    /// Halfwidth of the fitting window around zero.
    #[arg(long, default_value_t = DEFAULT_RATE_HALFWIDTH)]
    halfwidth: f64,
    /// Span of the backing curve grid (default: the family grid).
    #[arg(long)]
    grid_max: Option<f64>,
    /// Node count of the backing curve grid.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value = "out-rate")]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: serde_json::Value,
    versions: ManifestVersions,
    seed: u64,
    timestamp: String,
}

#[derive(Serialize)]
struct ManifestVersions {
    tool: &'static str,
    output_format: u32,
}

fn write_manifest(out_dir: &Path, config: serde_json::Value, seed: u64) -> Result<()> {
    let manifest = RunManifest {
        command: std::env::args().collect::<Vec<_>>().join(" "),
        config,
        versions: ManifestVersions {
            tool: env!("CARGO_PKG_VERSION"),
            output_format: OUTPUT_FORMAT_VERSION,
        },
        seed,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    write_json(&out_dir.join("manifest.json"), &manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut doc = serde_json::to_string_pretty(value)?;
    doc.push('\n');
    fs::write(path, doc)?;
    Ok(())
}

fn env_seed() -> Option<u64> {
    std::env::var(SEED_ENV_VAR).ok()?.trim().parse().ok()
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(env_seed).unwrap_or(DEFAULT_MASTER_SEED)
}

/// Uniform shape grid containing zero, for user-specified curve windows.
fn uniform_grid(min: f64, max: f64, nodes: usize) -> Result<Vec<f64>> {
    if !(min < 0.0 && max > 0.0 && min.is_finite() && max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "the grid window [{min}, {max}] must straddle zero"
        )));
    }
    if nodes < 5 {
        return Err(Error::InvalidArgument(format!(
            "a curve grid needs at least 5 nodes, got {nodes}"
        )));
    }
    let mut grid: Vec<f64> = (0..nodes)
        .map(|i| min + (max - min) * i as f64 / (nodes - 1) as f64)
        .collect();
    if !grid.iter().any(|l| l.abs() < 1e-12) {
        grid.push(0.0);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(grid)
}

fn curve_grid(
    family: Family,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    nodes: Option<usize>,
) -> Result<Vec<f64>> {
    if grid_min.is_none() && grid_max.is_none() && nodes.is_none() {
        return Ok(match family {
            Family::SkewSymmetric => default_skew_grid(),
            Family::TwoPiece => default_two_piece_grid(),
        });
    }
    let default_span = match family {
        Family::SkewSymmetric => 30.0,
        Family::TwoPiece => 3.0,
    };
    let max = grid_max.unwrap_or(default_span);
    let min = grid_min.unwrap_or(-max);
    let nodes = nodes.unwrap_or(match family {
        Family::SkewSymmetric => 241,
        Family::TwoPiece => 121,
    });
    uniform_grid(min, max, nodes)
}

/// Prior panel of the curve plots: |d signed / d shape| from node-wise
/// central differences, normalized to unit area by the trapezoid rule.
/// (The exact envelope evaluator is the library's primary route; the plot
/// only needs the curve-level picture.)
fn prior_panel(curve: &DiscrepancyCurve) -> Vec<(f64, f64)> {
    let l = &curve.lambdas;
    let s = &curve.signed;
    let n = l.len();
    let mut vals = vec![0.0; n];
    for (i, v) in vals.iter_mut().enumerate() {
        let (a, b) = if i == 0 {
            (i, i + 1)
        } else if i == n - 1 {
            (i - 1, i)
        } else {
            (i - 1, i + 1)
        };
        *v = ((s[b] - s[a]) / (l[b] - l[a])).abs();
    }
    let mut mass = 0.0;
    for i in 1..n {
        mass += 0.5 * (vals[i] + vals[i - 1]) * (l[i] - l[i - 1]);
    }
    if mass > 0.0 {
        for v in &mut vals {
            *v /= mass;
        }
    }
    l.iter().copied().zip(vals).collect()
}

fn cmd_curve(args: &CurveArgs, seed: u64) -> Result<()> {
    let family: Family = args.family.into();
    let baseline: Baseline = args.baseline.into();
    let grid = curve_grid(family, args.grid_min, args.grid_max, args.nodes)?;
    let curve = build_curve(family, baseline, &grid, &DminOptions::default())?;

    fs::create_dir_all(&args.out_dir)?;
    let mut csv = Vec::new();
    curve.write_csv(&mut csv)?;
    fs::write(args.out_dir.join("curve.csv"), csv)?;

    let summary = json!({
        "family": curve.family,
        "baseline": curve.baseline,
        "grid_nodes": curve.lambdas.len(),
        "grid_min": curve.lambdas.first(),
        "grid_max": curve.lambdas.last(),
        "endpoint_signed_plateau": curve.endpoint_c(),
        "d_min_at_grid_ends": [curve.d_min.first(), curve.d_min.last()],
        "d_min_limit_estimate": curve.limit_estimate,
    });
    write_json(&args.out_dir.join("curve_summary.json"), &summary)?;

    let pts = |ys: &[f64]| -> Vec<(f64, f64)> {
        curve.lambdas.iter().copied().zip(ys.iter().copied()).collect()
    };
    let panels = [
        ("discrepancy.svg", "minimum discrepancy", pts(&curve.d_min)),
        ("signed.svg", "signed discrepancy", pts(&curve.signed)),
        ("prior.svg", "prior density (unit area)", prior_panel(&curve)),
    ];
    for (file, label, points) in panels {
        let plot = PlotData::Curve {
            x_label: "shape".into(),
            y_label: label.into(),
            series: vec![CurveSeries {
                name: label.into(),
                points,
            }],
        };
        write_plot(&plot, &args.out_dir.join(file))?;
    }

    write_manifest(
        &args.out_dir,
        json!({
            "family": family,
            "baseline": baseline,
            "grid_min": args.grid_min,
            "grid_max": args.grid_max,
            "nodes": args.nodes,
        }),
        seed,
    )?;
    println!(
        "curve: {} nodes on [{:.3}, {:.3}]; signed plateau {:.6}; d_min limit {}",
        curve.lambdas.len(),
        curve.lambdas.first().unwrap(),
        curve.lambdas.last().unwrap(),
        curve.endpoint_c(),
        curve
            .limit_estimate
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "unavailable (grid too narrow)".into()),
    );
    println!("curve: outputs in {}", args.out_dir.display());
    Ok(())
}

fn build_prior(arg: PriorArg, jeffreys_scale: f64) -> Result<PriorSpec> {
    match arg {
        PriorArg::Jeffreys => PriorSpec::jeffreys_t(DEFAULT_JEFFREYS_DF, jeffreys_scale),
        PriorArg::Dimom => Ok(PriorSpec::default_dimom()),
        PriorArg::Moomin => Ok(PriorSpec::default_moomin_approx()),
        PriorArg::MoominExact => {
            let curve = build_curve(
                Family::SkewSymmetric,
                Baseline::Normal,
                &default_skew_grid(),
                &DminOptions::default(),
            )?;
            PriorSpec::moomin_exact(curve)?.normalize()
        }
    }
}

fn parse_delimiter(s: &str) -> Result<u8> {
    let bytes = s.as_bytes();
    if bytes.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "the delimiter must be a single character, got '{s}'"
        )));
    }
    Ok(bytes[0])
}

fn cmd_test(args: &TestArgs, seed: u64) -> Result<()> {
    let delimiter = parse_delimiter(&args.delimiter)?;
    let column = ColumnSpec::parse(&args.column);
    let mut data = load_column(&args.data, &column, delimiter)?;

    fs::create_dir_all(&args.out)?;
    if args.remove_outliers {
        let report = mad_outliers(&data, args.mad_threshold)?;
        println!(
            "outliers: flagged {} of {} observations (threshold {} scaled MADs)",
            report.indices.len(),
            data.len(),
            report.threshold
        );
        write_json(&args.out.join("outlier_report.json"), &report)?;
        data = remove_outliers(&data, &report)?;
    }

    let prior = build_prior(args.prior, args.jeffreys_scale)?;
    let result = bayes_test(&data, Baseline::Normal, &prior, args.engine.into())?;
    write_json(&args.out.join("test_result.json"), &result)?;
    write_manifest(
        &args.out,
        json!({
            "data": args.data,
            "column": args.column,
            "delimiter": args.delimiter,
            "prior": result.prior,
            "engine": result.engine,
            "remove_outliers": args.remove_outliers,
            "mad_threshold": args.mad_threshold,
            "jeffreys_scale": args.jeffreys_scale,
        }),
        seed,
    )?;
    println!(
        "test: n={} prior={} engine={}",
        data.len(),
        result.prior,
        result.engine.name()
    );
    println!(
        "test: log BF(alt|null) = {:.4}; posterior P(alt) = {:.4}",
        result.log_bf_10, result.post_prob_alt
    );
    println!(
        "test: BIC null = {:.2}, BIC alt = {:.2}",
        result.bic_null, result.bic_alt
    );
    println!("test: report in {}", args.out.join("test_result.json").display());
    Ok(())
}

fn sim_config(args: &SimArgs) -> Result<SimConfig> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str::<SimConfig>(&fs::read_to_string(path)?)?,
        None => SimConfig::default(),
    };
    if let Some(sizes) = &args.sizes {
        cfg.sample_sizes = sizes.clone();
    }
    if let Some(lambdas) = &args.lambdas {
        cfg.lambdas = lambdas.clone();
    }
    if let Some(n) = args.replications {
        cfg.replications = n;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    } else if args.config.is_none() {
        cfg.master_seed = resolve_seed(None);
    }
    if let Some(priors) = &args.priors {
        cfg.priors = priors
            .iter()
            .map(|p| match p {
                PriorArg::MoominExact => Err(Error::InvalidArgument(
                    "the exact prior is too costly for replicated studies; use 'moomin'".into(),
                )),
                other => build_prior(*other, DEFAULT_JEFFREYS_SCALE),
            })
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(engine) = args.engine {
        cfg.engine = engine.into();
    }
    Ok(cfg)
}

fn lambda_file_tag(lambda: f64) -> String {
    // "2.5" -> "2p5", "-1" -> "m1": keeps filenames portable.
    format!("{lambda}").replace('-', "m").replace('.', "p")
}

fn cmd_simulate(args: &SimArgs) -> Result<()> {
    let cfg = sim_config(args)?;
    fs::create_dir_all(&args.out_dir)?;

    let result = if args.rate_study {
        let study = rate_study(&cfg)?;
        println!("rate study: OLS slope of mean log BF on log n (bootstrap SE)");
        for s in &study.slopes {
            println!(
                "  {:<14} slope {:+.4}  (se {:.4})",
                s.prior, s.slope, s.bootstrap_se
            );
        }
        write_json(&args.out_dir.join("rate_study.json"), &study.slopes)?;
        study.result
    } else {
        run_experiment(&cfg)?
    };

    let mut rows = Vec::new();
    result.write_rows_csv(&mut rows)?;
    fs::write(args.out_dir.join("rows.csv"), rows)?;
    let mut summary = Vec::new();
    result.write_summary_json(&mut summary)?;
    fs::write(args.out_dir.join("summary.json"), summary)?;

    // One boxplot per (size, shape) cell, one box per prior.
    let lambdas_used: Vec<f64> = if args.rate_study { vec![0.0] } else { cfg.lambdas.clone() };
    for &n in &cfg.sample_sizes {
        for &lambda in &lambdas_used {
            let groups: Vec<BoxGroup> = result
                .summaries
                .iter()
                .filter(|s| s.n == n && s.true_lambda == lambda)
                .map(|s| BoxGroup {
                    name: s.prior.clone(),
                    stats: s.post_prob_box.clone(),
                })
                .collect();
            let plot = PlotData::Box {
                x_label: format!("prior (n={n}, shape={lambda})"),
                y_label: "posterior P(alt)".into(),
                groups,
            };
            write_plot(
                &plot,
                &args
                    .out_dir
                    .join(format!("boxplot_n{n}_lambda{}.svg", lambda_file_tag(lambda))),
            )?;
        }
    }

    write_manifest(
        &args.out_dir,
        json!({
            "simulation": &cfg,
            "strict": args.strict,
            "rate_study": args.rate_study,
        }),
        cfg.master_seed,
    )?;

    for s in &result.summaries {
        println!(
            "cell n={} shape={} prior={:<14} median P(alt) {:.3} (IQR {:.3}-{:.3}, failures {})",
            s.n, s.true_lambda, s.prior, s.post_prob_box.median, s.post_prob_box.q1,
            s.post_prob_box.q3, s.failures
        );
    }
    if result.degraded {
        eprintln!(
            "warning: experiment degraded; cells with >1% failures:\n  {}",
            result.degraded_cells.join("\n  ")
        );
        if args.strict {
            return Err(Error::EvaluationFailed(
                "strict mode: the experiment is degraded".into(),
            ));
        }
    }
    println!("simulate: outputs in {}", args.out_dir.display());
    Ok(())
}

fn cmd_fit_rate(args: &RateArgs, seed: u64) -> Result<()> {
    let grid = match (args.grid_max, args.nodes) {
        (None, None) => default_skew_grid(),
        (max, nodes) => uniform_grid(
            -max.unwrap_or(30.0),
            max.unwrap_or(30.0),
            nodes.unwrap_or(241),
        )?,
    };
    let baseline: Baseline = args.baseline.into();
    let curve = build_curve(
        Family::SkewSymmetric,
        baseline,
        &grid,
        &DminOptions::default(),
    )?;
    let fit = fit_vanishing_rate(&curve, args.halfwidth)?;
    println!(
        "fit-rate: baseline {} halfwidth {}: slope {:.4}, nearest even integer {}",
        baseline.name(),
        args.halfwidth,
        fit.slope,
        fit.even_power
    );
    fs::create_dir_all(&args.out_dir)?;
    write_json(
        &args.out_dir.join("rate_fit.json"),
        &json!({
            "baseline": baseline,
            "halfwidth": args.halfwidth,
            "slope": fit.slope,
            "even_power": fit.even_power,
        }),
    )?;
    write_manifest(
        &args.out_dir,
        json!({
            "baseline": baseline,
            "halfwidth": args.halfwidth,
            "grid_max": args.grid_max,
            "nodes": args.nodes,
        }),
        seed,
    )?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::InvalidArgument(
                "--threads must be at least 1".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Cmd::Curve(args) => cmd_curve(args, resolve_seed(None)),
        Cmd::Test(args) => cmd_test(args, resolve_seed(None)),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::FitRate(args) => cmd_fit_rate(args, resolve_seed(None)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
