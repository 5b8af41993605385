//! The `opderiv` command line: `analyze`, `classify`, `torus-demo` and `sweep`.

pub mod bundle;
pub mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use opderiv::derivatives::BoundednessStatus;
use opderiv::dynamics::continuity_modulus;
use opderiv::schema::{model_to_json, parse_model, parse_operator};
use opderiv::torus::{absx_identity_defect, toeplitz, torus_d, Builtin, FourierFunction};
use opderiv::{classify, Classification, ClassifyConfig, DiffReport, Operator, SelfAdjointModel};
use serde_json::{json, Value};

pub use error::{CliError, CliResult, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};

/// Configuration file format: every field optional, defaults as documented.
pub type AnalysisConfig = ClassifyConfig;

#[derive(Debug, Parser)]
#[command(name = "opderiv", version, about = "Weak and strong differentiability of operators with respect to a self-adjoint D")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyse an operator against a self-adjoint model and write a report bundle.
    Analyze(AnalyzeArgs),
    /// Same as `analyze --summary-only`.
    Classify(AnalyzeArgs),
    /// Run one of the built-in circle examples.
    TorusDemo(TorusDemoArgs),
    /// Repeat a circle example over several bandlimits.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Derivative order; orders ≥ 2 add the derivative chain.
    #[arg(long)]
    pub order: Option<usize>,
    /// JSON analysis configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with code 4 when the classification is Inconclusive.
    #[arg(long)]
    pub strict: bool,
    /// Leave timestamps and wall times out of the report.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Self-adjoint model JSON.
    #[arg(long = "D", value_name = "FILE")]
    pub d: PathBuf,
    /// Operator JSON.
    #[arg(long = "a", value_name = "FILE")]
    pub a: PathBuf,
    /// Output directory for the report bundle.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the summary line only.
    #[arg(long)]
    pub summary_only: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TorusDemoArgs {
    /// absx, sign, antideriv or powerlaw.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub bandlimit: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// absx, sign, antideriv, powerlaw or identity.
    #[arg(long)]
    pub model: String,
    /// Comma-separated bandlimits.
    #[arg(long, value_delimiter = ',', required = true)]
    pub bandlimits: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

fn input_error(path: &Path, e: opderiv::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Config file (if any) with `--order` applied on top.
pub fn load_config(common: &CommonArgs) -> CliResult<AnalysisConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let v = read_json(path)?;
            serde_json::from_value::<AnalysisConfig>(v).map_err(|source| CliError::Json { path: path.clone(), source })?
        }
        None => AnalysisConfig::default(),
    };
    if let Some(order) = common.order {
        cfg.order = order;
    }
    cfg.validate().map_err(|e| CliError::Input(format!("configuration: {e}")))?;
    Ok(cfg)
}

/// `<classification> | ‖wD(a)‖≈<x> | Lip≈<y>`; `<x>` is `unbounded` or `inconclusive` without a bounded verdict.
pub fn summary_line(report: &DiffReport) -> String {
    let wd = match (report.derivative_norm, report.weak_verdict.status) {
        (Some(x), _) => format!("{x:.6}"),
        (None, BoundednessStatus::Unbounded) => "unbounded".to_owned(),
        (None, _) => "inconclusive".to_owned(),
    };
    format!("{} | ‖wD(a)‖≈{} | Lip≈{:.6}", report.classification.as_str(), wd, report.lipschitz.sup_ratio)
}

fn metadata(command: &str, cfg: &AnalysisConfig, inputs: Value, started: Instant, reproducible: bool) -> Value {
    let mut m = json!({
        "tool": "opderiv",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": serde_json::to_value(cfg).unwrap_or(Value::Null),
        "inputs": inputs,
    });
    if !reproducible {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        m["wall_time_s"] = json!(started.elapsed().as_secs_f64());
        m["unix_time"] = json!(now);
    }
    m
}

fn strict_code(strict: bool, classes: &[Classification]) -> i32 {
    if strict && classes.contains(&Classification::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn builtin(name: &str) -> CliResult<Builtin> {
    name.parse::<Builtin>().map_err(|e| CliError::Input(e.to_string()))
}

pub fn cmd_analyze(args: &AnalyzeArgs, summary_only: bool) -> CliResult<i32> {
    let started = Instant::now();
    let cfg = load_config(&args.common)?;
    let model = parse_model(&read_json(&args.d)?).map_err(|e| input_error(&args.d, e))?;
    let a = parse_operator(&read_json(&args.a)?, &model).map_err(|e| input_error(&args.a, e))?;
    let summary_only = summary_only || args.summary_only;
    let out = match (&args.out, summary_only) {
        (Some(dir), _) => Some(dir.clone()),
        (None, true) => None,
        (None, false) => return Err(CliError::Input("--out is required unless --summary-only is given".into())),
    };

    let report = classify(&model, &a, &cfg)?;
    println!("{}", summary_line(&report));
    if let (Some(dir), false) = (out, summary_only) {
        let inputs = json!({ "D": args.d.display().to_string(), "a": args.a.display().to_string(), "model": model.kind().as_str() });
        let meta = metadata("analyze", &cfg, inputs, started, args.common.reproducible);
        let v = bundle::report_json(&report, meta, None)?;
        bundle::write_bundle(&dir, &report, &v)?;
    }
    Ok(strict_code(args.common.strict, &[report.classification]))
}

/// Everything `torus-demo` writes for one bandlimit; shared with `sweep`.
pub struct DemoRun {
    pub report: DiffReport,
    pub json: Value,
}

fn run_demo(
    symbol: Builtin,
    bandlimit: usize,
    cfg: &AnalysisConfig,
    dir: &Path,
    command: &str,
    reproducible: bool,
) -> CliResult<DemoRun> {
    let started = Instant::now();
    let model: SelfAdjointModel = torus_d(bandlimit).map_err(|e| CliError::Input(e.to_string()))?;
    let f = FourierFunction::builtin(symbol);
    let t = toeplitz(&f, bandlimit);
    let a = Operator::Toeplitz(t.clone());
    let report = classify(&model, &a, cfg)?;

    bundle::create_dir(dir)?;
    let coeff_path = dir.join("coefficients.csv");
    bundle::write_csv(
        &coeff_path,
        &["n", "re", "im"],
        t.diagonals().map(|(k, c)| vec![k.to_string(), bundle::fmt_f64(c.re), bundle::fmt_f64(c.im)]),
    )?;

    let mut extras = json!({
        "symbol": f.name,
        "bandlimit": bandlimit,
        "sup_norm_hint": f.sup_norm_hint,
        "operator_norm": a.norm(&cfg.norm)?,
    });
    if symbol == Builtin::Absx {
        extras["identity_check"] = json!(absx_identity_defect(bandlimit));
    }
    if report.continuity.is_none() {
        // No bounded derivative to follow: show how t ↦ α_t(M_f) itself behaves.
        let grid = cfg.time_grid.grid(&model);
        let c = continuity_modulus(&model, &a, &grid, &cfg.norm)?;
        let (_, v) = bundle::write_extra_continuity(dir, &c)?;
        extras["symbol_continuity"] = v;
    }

    let inputs = json!({ "D": model_to_json(&model), "a": { "type": "builtin", "name": f.name } });
    let meta = metadata(command, cfg, inputs, started, reproducible);
    let json = bundle::report_json(&report, meta, Some(extras))?;
    bundle::write_bundle(dir, &report, &json)?;
    Ok(DemoRun { report, json })
}

pub fn cmd_torus_demo(args: &TorusDemoArgs) -> CliResult<i32> {
    let symbol = builtin(&args.model)?;
    if symbol == Builtin::One {
        return Err(CliError::Input("torus-demo models are absx, sign, antideriv and powerlaw".into()));
    }
    let cfg = load_config(&args.common)?;
    let run = run_demo(symbol, args.bandlimit, &cfg, &args.out, "torus-demo", args.common.reproducible)?;
    println!("{}", summary_line(&run.report));
    Ok(strict_code(args.common.strict, &[run.report.classification]))
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<i32> {
    let symbol = builtin(&args.model)?;
    let cfg = load_config(&args.common)?;
    let mut limits = args.bandlimits.clone();
    limits.sort_unstable();
    limits.dedup();
    if limits.first() == Some(&0) {
        return Err(CliError::Input("bandlimits must be positive".into()));
    }
    bundle::create_dir(&args.out)?;

    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for &l in &limits {
        let dir = args.out.join(format!("L{l}"));
        let run = run_demo(symbol, l, &cfg, &dir, "sweep", args.common.reproducible)?;
        let r = &run.report;
        println!("L={l}: {}", summary_line(r));
        let omega = r.continuity.as_ref().map(|c| c.omega_min());
        rows.push(vec![
            l.to_string(),
            r.classification.as_str().to_owned(),
            r.weak_verdict.status.as_str().to_owned(),
            bundle::fmt_f64(r.weak_verdict.norm_estimate),
            bundle::fmt_f64(r.weak_verdict.growth_exponent),
            bundle::fmt_f64(r.lipschitz.sup_ratio),
            bundle::fmt_f64(r.lipschitz.limit_estimate),
            omega.map(bundle::fmt_f64).unwrap_or_default(),
        ]);
        classes.push(r.classification);
    }
    bundle::write_csv(
        &args.out.join("summary.csv"),
        &["bandlimit", "classification", "weak_verdict", "norm_estimate", "growth_exponent", "lip_sup", "lip_limit", "omega_min"],
        rows,
    )?;
    Ok(strict_code(args.common.strict, &classes))
}

pub fn run(cli: &Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, false),
        Command::Classify(a) => cmd_analyze(a, true),
        Command::TorusDemo(a) => cmd_torus_demo(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

/// Sizes the global worker pool from `OPDERIV_THREADS`.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("OPDERIV_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("OPDERIV_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot size worker pool: {e}")))
}

/// Re-reads a written report and checks it against the schema.
pub fn revalidate(path: &Path) -> CliResult<Value> {
    let v = read_json(path)?;
    opderiv::schema::validate_report(&v).map_err(|e| CliError::Report(e.to_string()))?;
    Ok(v)
}
