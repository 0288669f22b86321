mod build;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sumform::{
    bundle_to_json, classify_samples, classify_solution_with, draw_bundle, entropy_alpha, fit_affine_family, make_distribution, parse_bundle, parse_function_spec, verify_over_grid_with, verify_sampled,
    Alpha, DrawVariant, EquationId, EquationSpec, Error, FamilyTag, IntervalFunction, SampleSet, Scalar,
    SolutionBundle, SweepOptions,
};

/// Construct, verify, and classify solutions of sum-form functional
/// equations on the closed probability simplex.
#[derive(Parser, Debug)]
#[command(name = "sumform", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep a bundle's residual over a grid (or seeded random pairs).
    Verify(VerifyArgs),
    /// Write a solution bundle as JSON.
    Construct(ConstructArgs),
    /// Entropy of degree alpha of one distribution.
    Entropy(EntropyArgs),
    /// Verify a bundle, then assign it a family.
    Classify(ClassifyArgs),
    /// Least-squares table of f for given g_j on a grid.
    SolveGrid(SolveGridArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Plain,
    Hamel,
    SupportIndicator,
    OneAtOne,
}

impl From<VariantArg> for DrawVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Plain => DrawVariant::Plain,
            VariantArg::Hamel => DrawVariant::Hamel,
            VariantArg::SupportIndicator => DrawVariant::SupportIndicator,
            VariantArg::OneAtOne => DrawVariant::OneAtOne,
        }
    }
}

#[derive(Args, Debug)]
struct BundleArgs {
    /// Bundle JSON file; overrides --family.
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Family label to construct (3.1i, 3.1ii, 3.3, 4.1, 4.2, 4.4, 5.1, 5.2, 5.4, R1, R2).
    #[arg(long)]
    family: Option<String>,
    /// Equation label; must match the bundle (1.5 selects k_j = h bundles of 1.8).
    #[arg(long)]
    equation: Option<String>,
    /// Exponent of the multiplicative part; also fixes lambda = 2^(1-alpha) - 1.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Coupling constant, e.g. "-1/2".
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Draw random admissible parameters with this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Kind of random draw.
    #[arg(long, value_enum, default_value_t = VariantArg::Plain)]
    variant: VariantArg,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Add this constant to the primary function (negative control).
    #[arg(long, allow_hyphen_values = true)]
    perturb: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Grid resolution.
    #[arg(long, default_value_t = 6)]
    d: usize,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    /// Skip the irrational-coordinate distributions.
    #[arg(long)]
    rational_only: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    bundle: BundleArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Sweep this many random pairs drawn from --seed instead of the grid.
    #[arg(long, requires = "seed")]
    random: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[command(flatten)]
    bundle: BundleArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EntropyArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Comma-separated components, e.g. "1/2,1/2".
    #[arg(long)]
    dist: String,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    bundle: BundleArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Classify samples ("x,y" CSV) of the primary function instead; the
    /// residual is not checked in this mode.
    #[arg(long, conflicts_with = "bundle")]
    samples: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveGridArgs {
    /// Function spec JSON file used for every g_j.
    #[arg(long, conflicts_with = "g_power")]
    g: Option<PathBuf>,
    /// Use g_j = p^K.
    #[arg(long, default_value_t = 2)]
    g_power: u32,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    d: usize,
    /// Maximum number of unknowns.
    #[arg(long, default_value_t = sumform::discover::DEFAULT_UNKNOWN_CAP)]
    cap: usize,
    /// Write a JSON summary (nullity, residual norm) here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Failure modes with their exit codes.
enum Failure {
    /// Exit 2 with a JSON error on stderr.
    Invalid(Error),
    /// Exit 1: a verification ran and did not pass.
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn io_error(path: &std::path::Path, e: std::io::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

fn read(path: &std::path::Path) -> sumform::Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn emit(output: &Option<PathBuf>, text: &str) -> sumform::Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn scalar_arg(text: &str) -> sumform::Result<Scalar> {
    text.parse()
}

fn load_bundle(args: &BundleArgs) -> sumform::Result<(SolutionBundle, EquationSpec)> {
    let requested = args.equation.as_deref().map(str::parse::<EquationId>).transpose()?;
    let lambda = args.lambda.as_deref().map(scalar_arg).transpose()?;
    let mut bundle = if let Some(path) = &args.bundle {
        parse_bundle(&read(path)?)?
    } else {
        let family: FamilyTag = args
            .family
            .as_deref()
            .ok_or_else(|| Error::Parse("give --bundle or --family".into()))?
            .parse()?;
        match args.seed {
            Some(seed) => draw_bundle(family, args.n, args.m, seed, args.variant.into())?,
            None => build::canonical_bundle(family, args.n, args.m, args.alpha, lambda.clone())?,
        }
    };
    if let Some(delta) = &args.perturb {
        bundle = bundle.perturbed(&scalar_arg(delta)?)?;
    }
    let id = build::check_equation(&bundle, requested)?;
    let spec = EquationSpec::new(id, bundle.n, bundle.m, bundle.lambda.clone())?;
    Ok((bundle, spec))
}

fn sweep_options(bundle: &SolutionBundle, args: &SweepArgs) -> SweepOptions {
    let mut opts = SweepOptions::for_bundle(bundle);
    if args.rational_only {
        opts.irrational = false;
    }
    opts.float = matches!(args.backend, BackendArg::Float);
    opts
}

fn check_d(d: usize) -> sumform::Result<()> {
    if d == 0 {
        return Err(Error::InvalidGrid("d must be at least 1".into()));
    }
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> CmdResult {
    let (bundle, spec) = load_bundle(&args.bundle)?;
    let report = match (args.random, args.bundle.seed) {
        (Some(count), Some(seed)) => {
            verify_sampled(&spec, &bundle, count, seed, matches!(args.sweep.backend, BackendArg::Float))?
        }
        _ => {
            check_d(args.sweep.d)?;
            verify_over_grid_with(&spec, &bundle, args.sweep.d, sweep_options(&bundle, &args.sweep))?
        }
    };
    emit(&args.output, &pretty(&report.to_json()))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run_construct(args: &ConstructArgs) -> CmdResult {
    let (bundle, _) = load_bundle(&args.bundle)?;
    emit(&args.output, &pretty(&bundle_to_json(&bundle)))?;
    Ok(())
}

fn run_entropy(args: &EntropyArgs) -> CmdResult {
    let alpha = Alpha::new(args.alpha)?;
    let comps = args
        .dist
        .split(',')
        .map(|c| scalar_arg(c.trim()))
        .collect::<sumform::Result<Vec<_>>>()?;
    let mut dist = make_distribution(comps)?;
    if matches!(args.backend, BackendArg::Float) {
        dist = dist.to_float();
    }
    let h = entropy_alpha(&dist, alpha)?;
    let mut out = Map::new();
    out.insert(
        "alpha".into(),
        match alpha.as_integer() {
            Some(k) => json!(k),
            None => json!(alpha.value()),
        },
    );
    out.insert(
        "distribution".into(),
        Value::Array(dist.components().iter().map(|c| json!(c.to_string())).collect()),
    );
    out.insert("H".into(), json!(h.to_f64()));
    if h.is_exact() {
        out.insert("H_exact".into(), json!(h.to_string()));
    }
    emit(&args.output, &pretty(&Value::Object(out)))?;
    Ok(())
}

fn run_classify(args: &ClassifyArgs) -> CmdResult {
    let result = match &args.samples {
        Some(path) => {
            let samples = SampleSet::from_csv(&read(path)?)?;
            let id: EquationId = args
                .bundle
                .equation
                .as_deref()
                .ok_or_else(|| Error::Parse("--samples needs --equation".into()))?
                .parse()?;
            classify_samples(&samples, id, args.bundle.n)?
        }
        None => {
            check_d(args.sweep.d)?;
            let (bundle, spec) = load_bundle(&args.bundle)?;
            classify_solution_with(&bundle, &spec, args.sweep.d, sweep_options(&bundle, &args.sweep))?
        }
    };
    emit(&args.output, &pretty(&result.to_json()))?;
    Ok(())
}

fn run_solve_grid(args: &SolveGridArgs) -> CmdResult {
    let g = match &args.g {
        Some(path) => parse_function_spec(&read(path)?)?,
        None => IntervalFunction::power(args.g_power)?,
    };
    check_d(args.d)?;
    let sol = sumform::discover::grid_solve_eq110_capped(&vec![g; args.m], args.n, args.m, args.d, args.cap)?;
    emit(&args.output, &sol.table.to_csv())?;
    if let Some(path) = &args.report {
        let affine = fit_affine_family(&sol.table)?;
        let summary = json!({
            "unknowns": sol.unknowns,
            "equations": sol.equations,
            "nullity": sol.nullity,
            "residual_norm": sol.residual_norm,
            "affine_rms": affine.rms,
        });
        fs::write(path, pretty(&summary)).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

fn error_line(code: &str, message: &str) -> String {
    json!({"error": code, "message": message}).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Construct(a) => run_construct(a),
        Command::Entropy(a) => run_entropy(a),
        Command::Classify(a) => run_classify(a),
        Command::SolveGrid(a) => run_solve_grid(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Invalid(e)) => {
            let text = e.to_string();
            let message = text.strip_prefix(&format!("{}: ", e.code())).unwrap_or(&text);
            eprintln!("{}", error_line(e.code(), message));
            ExitCode::from(2)
        }
    }
}
