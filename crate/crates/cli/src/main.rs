mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};
use serde::de::DeserializeOwned;
use serde::Serialize;

use combdim::class_model::{family_to_json, gen_random_family, load_family};
use combdim::experiments::{
    run_main_theorem_experiment, run_pipeline_trace, ConstantsConfig, ExperimentError, KRow, MainTheoremConfig,
    PipelineConfig,
};
use combdim::extraction::{extract_coordinates, success_curve, ExtractionError, DEFAULT_MAX_ATTEMPTS};
use combdim::gaussian_elton::{
    dudley_constant, elton_subset, family_sup_mc, gaussian_sup_mc, rudelson_example, sudakov_ratio, EltonOptions,
    ProcessKind,
};
use combdim::geometry_lp::{
    convex_vc, cube_in_projection, ell1_lower_constant, load_norm, load_polytope,
};
use combdim::metric_entropy::{entropy_reports, DistanceMatrix, EntropyError, EntropyMode, EntropyOptions, EntropyReport};
use combdim::separation_tree::{build_separating_tree, validate_tree, SeparatingTree};
use combdim::shattering::{enumerate_with_witnesses, vc_integer, vc_real, ShatterError, DEFAULT_BUDGET};
use combdim::{CoordinateSubset, GeneratorKind, LpExponent};

use report::Format;

#[derive(Parser, Debug)]
#[command(name = "combdim", version, about = "Shattering dimensions, metric entropy and their certificates")]
struct Cli {
    /// Seed for every random choice of the command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON file with the command's configuration; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random family and write it as JSON.
    Gen(GenArgs),
    /// Packing and covering numbers, one CSV row per scale.
    Entropy(EntropyArgs),
    /// Shattering dimension: at `--scale` for real families, of centers for integer ones.
    Vc(VcArgs),
    /// Shattered centers with witnesses.
    Centers(CentersArgs),
    /// Build (or load) a separating tree and optionally validate it.
    Tree(TreeArgs),
    /// Extract a coordinate subset keeping half the separation.
    Extract(ExtractArgs),
    /// Single-draw extraction success rate over a grid of target sizes.
    ExtractCurve(ExtractCurveArgs),
    /// Monte-Carlo expected supremum of the Gaussian or Rademacher process.
    Gsup(GsupArgs),
    /// Dudley and Sudakov constants of a family against its expected supremum.
    Dudley(DudleyArgs),
    /// Large subset of vectors equivalent to the l_1 basis.
    Elton(EltonArgs),
    /// Run the Elton search on Rudelson's example.
    Rudelson(RudelsonArgs),
    /// Empirical constant of the entropy bound over a random suite.
    MainTheorem(MainTheoremArgs),
    /// Audited run of separation, extraction, discretization, tree and centers.
    Pipeline(PipelineArgs),
    /// Check a family file, and optionally a tree against it.
    Validate(ValidateArgs),
    /// Does a cube of side `--scale` fit in a coordinate projection?
    CubeTest(CubeTestArgs),
    /// Largest coordinate set whose projection contains a cube of side `--scale`.
    ConvexVc(ConvexVcArgs),
    /// Best l_1 lower constant of a set of vectors.
    L1Const(L1ConstArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KindArg {
    UniformReal,
    SignVectors,
    IntegerGrid,
    ConvexHullSections,
}

impl KindArg {
    fn to_kind(self, range_max: u32) -> GeneratorKind {
        match self {
            Self::UniformReal => GeneratorKind::UniformReal,
            Self::SignVectors => GeneratorKind::SignVectors,
            Self::IntegerGrid => GeneratorKind::IntegerGrid { range_max },
            Self::ConvexHullSections => GeneratorKind::ConvexHullSections,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ProcessArg {
    Gaussian,
    Rademacher,
}

impl From<ProcessArg> for ProcessKind {
    fn from(p: ProcessArg) -> Self {
        match p {
            ProcessArg::Gaussian => ProcessKind::Gaussian,
            ProcessArg::Rademacher => ProcessKind::Rademacher,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = KindArg::UniformReal)]
    kind: KindArg,
    /// Top of the integer grid for `integer-grid`.
    #[arg(long, default_value_t = 6)]
    range_max: u32,
}

#[derive(Args, Debug, Serialize)]
struct EntropyArgs {
    #[arg(long)]
    family: PathBuf,
    /// Scales, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    scale: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// L_p exponent; `inf` for the sup norm over the support.
    #[arg(long, default_value = "2")]
    p: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Args, Debug, Serialize)]
struct VcArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug, Serialize)]
struct CentersArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long, default_value_t = usize::MAX)]
    max_dim: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug, Serialize)]
struct TreeArgs {
    #[arg(long)]
    family: PathBuf,
    /// Separation of the family; the tree gap is `scale / 6`.
    #[arg(long)]
    scale: f64,
    /// Write the tree JSON here.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Validate this tree instead of building one.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Re-check the tree and report its leaf count against sqrt(m).
    #[arg(long)]
    validate: bool,
}

#[derive(Args, Debug, Serialize)]
struct ExtractArgs {
    #[arg(long)]
    family: PathBuf,
    /// Separation of the input family.
    #[arg(long)]
    scale: f64,
    #[arg(long)]
    target_size: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
    max_attempts: u64,
}

#[derive(Args, Debug, Serialize)]
struct ExtractCurveArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    scale: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    k_grid: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
}

#[derive(Args, Debug, Serialize)]
struct GsupArgs {
    /// Family whose rows index the process.
    #[arg(long, conflicts_with = "sign_cube")]
    family: Option<PathBuf>,
    /// Use the full sign cube of this dimension instead of a family.
    #[arg(long)]
    sign_cube: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, value_enum, default_value_t = ProcessArg::Gaussian)]
    process: ProcessArg,
}

#[derive(Args, Debug, Serialize)]
struct DudleyArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Euclidean scales, increasing; default is 32 points up to the diameter.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ProcessArg::Gaussian)]
    process: ProcessArg,
}

#[derive(Args, Debug, Serialize)]
struct EltonArgs {
    #[arg(long)]
    norm: PathBuf,
    /// JSON list of vectors in the unit ball of the norm.
    #[arg(long)]
    vectors: PathBuf,
    /// Report file (same as `--out`).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, value_enum)]
    process: Option<ProcessArg>,
}

#[derive(Args, Debug, Serialize)]
struct RudelsonArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
    /// Largest support of the sparse functionals in the dual net.
    #[arg(long, default_value_t = 2)]
    net_support: usize,
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct MainTheoremArgs {
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    format: Format,
}

#[derive(Args, Debug, Serialize)]
struct PipelineArgs {
    /// Number of instances, seeded `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 1)]
    instances: u64,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Working scale; instances are thinned to be `2t`-separated.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Swap the root's sons before validation (fault injection).
    #[arg(long)]
    corrupt_tree: bool,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long, requires = "gap")]
    tree: Option<PathBuf>,
    #[arg(long)]
    gap: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CubeTestArgs {
    #[arg(long)]
    polytope: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    subset: Vec<usize>,
    #[arg(long)]
    scale: f64,
    /// Allow the cube to be translated.
    #[arg(long)]
    translated: bool,
}

#[derive(Args, Debug, Serialize)]
struct ConvexVcArgs {
    #[arg(long)]
    polytope: PathBuf,
    #[arg(long)]
    scale: f64,
    #[arg(long)]
    translated: bool,
}

#[derive(Args, Debug, Serialize)]
struct L1ConstArgs {
    #[arg(long)]
    norm: PathBuf,
    #[arg(long)]
    vectors: PathBuf,
    /// Coordinates to use; all when absent.
    #[arg(long, value_delimiter = ',')]
    subset: Vec<usize>,
}

/// A failed check that is not a library error.
#[derive(Debug, thiserror::Error)]
#[error("assertion failed: {0}")]
struct AssertionFailed(String);

/// Every JSON report carries the command, seed and parameters that produced it.
#[derive(Serialize)]
struct Envelope<'a, P: Serialize, R: Serialize> {
    command: &'a str,
    seed: u64,
    params: &'a P,
    result: R,
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
}

impl Ctx {
    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    fn emit<P: Serialize, R: Serialize>(&self, command: &str, params: &P, result: R) -> Result<()> {
        report::emit_json(self.out(), &Envelope { command, seed: self.seed, params, result })
    }

    fn config<T: DeserializeOwned + Default>(&self) -> Result<T> {
        match &self.config {
            None => Ok(T::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
            }
        }
    }
}

fn load_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn subset_or_full(indices: &[usize], n: usize) -> Result<CoordinateSubset> {
    if indices.is_empty() {
        Ok(CoordinateSubset::full(n))
    } else {
        Ok(CoordinateSubset::from_unsorted(indices.to_vec(), n)?)
    }
}

fn parse_exponent(p: &str) -> Result<LpExponent> {
    if p.eq_ignore_ascii_case("inf") {
        Ok(LpExponent::Infinity)
    } else {
        Ok(LpExponent::Finite(p.parse().with_context(|| format!("bad exponent {p:?}"))?))
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx { seed: cli.seed, out: cli.out, config: cli.config };
    match cli.command {
        Command::Gen(a) => {
            let fam = gen_random_family::<f64>(a.m, a.n, a.kind.to_kind(a.range_max), ctx.seed)?;
            let mu = combdim::ProbabilityMeasure::uniform(a.n);
            report::write(ctx.out(), &(family_to_json(&fam, &mu)? + "\n"))
        }
        Command::Entropy(a) => {
            let (fam, mu) = load_family::<f64>(&a.family)?;
            let options = EntropyOptions {
                mode: match a.mode {
                    ModeArg::Exact => EntropyMode::Exact,
                    ModeArg::Greedy => EntropyMode::Greedy,
                },
                p: parse_exponent(&a.p)?,
                ..EntropyOptions::default()
            };
            let rows = entropy_reports(&fam, &mu, &a.scale, &options)?;
            let text = report::to_csv(&EntropyReport::<f64>::CSV_HEADER, rows.iter().map(|r| r.csv_record()))?;
            report::write(ctx.out(), &text)
        }
        Command::Vc(a) => {
            let (fam, _) = load_family::<f64>(&a.family)?;
            let dim = match (fam.is_integer(), a.scale) {
                (true, None) => vc_integer(&fam, a.budget)?,
                (_, Some(t)) => vc_real(&fam, t, a.budget)?.dimension,
                (false, None) => bail!("real-valued families need --scale"),
            };
            report::write(ctx.out(), &format!("{dim}\n"))
        }
        Command::Centers(a) => {
            let (fam, _) = load_family::<f64>(&a.family)?;
            let witnesses = enumerate_with_witnesses(&fam, a.max_dim, a.budget)?;
            ctx.emit("centers", &a, witnesses)
        }
        Command::Tree(a) => tree_command(&ctx, a),
        Command::Extract(a) => {
            let (fam, _) = load_family::<f64>(&a.family)?;
            let outcome = extract_coordinates(&fam, a.scale, a.target_size, ctx.seed, a.max_attempts)?;
            ctx.emit("extract", &a, outcome)
        }
        Command::ExtractCurve(a) => {
            let (fam, _) = load_family::<f64>(&a.family)?;
            let curve = success_curve(&fam, a.scale, &a.k_grid, a.trials, ctx.seed)?;
            let text = report::to_csv(
                &["k", "success_rate", "stderr"],
                curve.iter().map(|e| [e.k.to_string(), e.success_rate.to_string(), e.stderr.to_string()]),
            )?;
            report::write(ctx.out(), &text)
        }
        Command::Gsup(a) => {
            let kind = a.process.into();
            let est = match (&a.family, a.sign_cube) {
                (Some(path), _) => family_sup_mc(&load_family::<f64>(path)?.0, a.samples, ctx.seed, kind)?,
                (None, Some(n)) => {
                    if n > 20 {
                        bail!("sign cube dimension {n} too large to enumerate");
                    }
                    let pts: Vec<Vec<f64>> = (0..1usize << n)
                        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
                        .collect();
                    gaussian_sup_mc(&pts, a.samples, ctx.seed, kind)?
                }
                (None, None) => bail!("gsup needs --family or --sign-cube"),
            };
            ctx.emit("gsup", &a, est)
        }
        Command::Dudley(a) => dudley_command(&ctx, a),
        Command::Elton(a) => {
            let norm = load_norm(&a.norm)?;
            let vectors = load_vectors(&a.vectors)?;
            let mut options: EltonOptions = ctx.config()?;
            options.seed = ctx.seed;
            if let Some(s) = a.samples {
                options.samples = s;
            }
            if let Some(p) = a.process {
                options.process = p.into();
            }
            let result = elton_subset(&norm, &vectors, &options)?;
            let out = a.report.as_deref().or(ctx.out());
            report::emit_json(out, &Envelope { command: "elton", seed: ctx.seed, params: &options, result })
        }
        Command::Rudelson(a) => {
            let inst = rudelson_example::<f64>(a.n, a.delta, a.net_support)?;
            let mut options: EltonOptions = ctx.config()?;
            options.seed = ctx.seed;
            if let Some(s) = a.samples {
                options.samples = s;
            }
            let result = elton_subset(&inst.norm, &inst.vectors, &options)?;
            let slack = inst.net_slack(&result.sigma);
            let st = result.s * result.t;
            #[derive(Serialize)]
            struct Out<'a> {
                n: usize,
                delta: f64,
                s_times_t: f64,
                net_slack: f64,
                bound_holds: bool,
                options: &'a EltonOptions,
                elton: combdim::EltonResult,
            }
            let out = Out {
                n: a.n,
                delta: a.delta,
                s_times_t: st,
                net_slack: slack,
                bound_holds: st <= a.delta + slack + 1e-9,
                options: &options,
                elton: result,
            };
            ctx.emit("rudelson", &a, out)
        }
        Command::MainTheorem(a) => {
            let mut config: MainTheoremConfig = ctx.config()?;
            config.seed = ctx.seed;
            if let Some(i) = a.instances {
                config.instances = i;
            }
            let rep = run_main_theorem_experiment(&config)?;
            match a.format {
                Format::Json => ctx.emit("main-theorem", &config, rep),
                Format::Csv => {
                    let text = report::to_csv(&KRow::CSV_HEADER, rep.rows.iter().map(|r| r.csv_record()))?;
                    report::write(ctx.out(), &text)
                }
            }
        }
        Command::Pipeline(a) => pipeline_command(&ctx, a),
        Command::Validate(a) => {
            let (fam, mu) = load_family::<f64>(&a.family)?;
            let mut summary = serde_json::json!({
                "functions": fam.len(),
                "domain_size": fam.domain_size(),
                "value_kind": fam.kind(),
                "uniform": mu.is_uniform(),
                "distinct_rows": fam.distinct_rows(),
            });
            if let (Some(path), Some(gap)) = (&a.tree, a.gap) {
                let tree = load_tree(path)?;
                let verdict = validate_tree(&tree, &fam, gap);
                summary["tree_valid"] = serde_json::json!(verdict.is_ok());
                ctx.emit("validate", &a, &summary)?;
                if let Err(v) = verdict {
                    return Err(AssertionFailed(v.to_string()).into());
                }
                return Ok(());
            }
            ctx.emit("validate", &a, summary)
        }
        Command::CubeTest(a) => {
            let poly = load_polytope(&a.polytope)?;
            let sigma = CoordinateSubset::from_unsorted(a.subset.clone(), poly.dimension)?;
            let witness = cube_in_projection(&poly, &sigma, a.scale, a.translated)?;
            ctx.emit("cube-test", &a, serde_json::json!({ "contains": witness.is_some(), "witness": witness }))
        }
        Command::ConvexVc(a) => {
            let poly = load_polytope(&a.polytope)?;
            let res = convex_vc(&poly, a.scale, a.translated)?;
            ctx.emit("convex-vc", &a, res)
        }
        Command::L1Const(a) => {
            let norm = load_norm(&a.norm)?;
            let vectors = load_vectors(&a.vectors)?;
            let sigma = subset_or_full(&a.subset, vectors.len())?;
            let c = ell1_lower_constant(&norm, &vectors, &sigma)?;
            ctx.emit("l1-const", &a, c)
        }
    }
}

fn load_tree(path: &Path) -> Result<SeparatingTree<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn tree_command(ctx: &Ctx, a: TreeArgs) -> Result<()> {
    let (fam, mu) = load_family::<f64>(&a.family)?;
    let tree = match &a.tree {
        Some(path) => load_tree(path)?,
        None => build_separating_tree(&fam, &mu, a.scale)?,
    };
    if let Some(path) = &a.emit {
        report::write(Some(path), &report::to_json(&tree)?)?;
    }
    if !a.validate {
        return if a.emit.is_none() { report::emit_json(ctx.out(), &tree) } else { Ok(()) };
    }
    let verdict = validate_tree(&tree, &fam, a.scale / 6.0);
    let leaves = tree.leaf_count();
    let m = fam.len();
    let summary = serde_json::json!({
        "valid": verdict.is_ok(),
        "violation": verdict.as_ref().err().map(|v| v.to_string()),
        "leaves": leaves,
        "depth": tree.depth(),
        "m": m,
        "sqrt_m": (m as f64).sqrt(),
        "leaf_bound_holds": leaves * leaves >= m,
    });
    ctx.emit("tree", &a, &summary)?;
    match verdict {
        Err(v) => Err(AssertionFailed(v.to_string()).into()),
        Ok(()) if leaves * leaves < m => Err(AssertionFailed(format!("{leaves} leaves for {m} functions")).into()),
        Ok(()) => Ok(()),
    }
}

fn dudley_command(ctx: &Ctx, a: DudleyArgs) -> Result<()> {
    let constants: ConstantsConfig = ctx.config()?;
    let (fam, _) = load_family::<f64>(&a.family)?;
    let n = fam.domain_size();
    let sup = family_sup_mc(&fam, a.samples, ctx.seed, a.process.into())?;
    let grid = if a.grid.is_empty() {
        let mu = combdim::ProbabilityMeasure::uniform(n);
        let diam = DistanceMatrix::new(&fam, &mu, LpExponent::L2)?.diameter() * (n as f64).sqrt();
        let top = diam.max(1e-9) * 1.0001;
        (1..=32).map(|i| top * i as f64 / 32.0).collect()
    } else {
        a.grid.clone()
    };
    let options = EntropyOptions::forced();
    let dudley = dudley_constant(&fam, &grid, sup.mean, constants.dudley_lower, &options)?;
    let sudakov = if sup.mean > 0.0 { Some(sudakov_ratio(&fam, &grid, sup.mean, &options)?) } else { None };
    ctx.emit(
        "dudley",
        &a,
        serde_json::json!({ "constants": constants, "sup": sup, "dudley": dudley, "sudakov": sudakov }),
    )
}

fn pipeline_command(ctx: &Ctx, a: PipelineArgs) -> Result<()> {
    let base: PipelineConfig = ctx.config()?;
    let mut reports = Vec::new();
    for i in 0..a.instances {
        let mut config = base.clone();
        config.seed = ctx.seed + i;
        config.m = a.m.unwrap_or(config.m);
        config.n = a.n.unwrap_or(config.n);
        config.t = a.t.unwrap_or(config.t);
        if let Some(k) = a.kind {
            config.kind = k.to_kind(6);
        }
        config.corrupt_tree |= a.corrupt_tree;
        match run_pipeline_trace(&config) {
            Ok(rep) => {
                info!("instance {i}: {} stages passed", rep.stages.len());
                reports.push(rep);
            }
            Err(ExperimentError::Assertion { stage, message, report }) => {
                error!("instance {i}: stage `{stage}` failed: {message}");
                eprintln!("{}", report::to_json(&report)?);
                return Err(ExperimentError::Assertion { stage, message, report }.into());
            }
            Err(e) => return Err(e.into()),
        }
    }
    ctx.emit("pipeline", &a, reports)
}

/// 2 for failed assertions, 3 for exhausted budgets, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<AssertionFailed>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<ExperimentError>() {
            match e {
                ExperimentError::Assertion { .. } => return 2,
                ExperimentError::Budget { .. } => return 3,
                ExperimentError::Extraction(ExtractionError::MaxAttempts { .. }) => return 2,
                _ => {}
            }
        }
        if let Some(ExtractionError::MaxAttempts { .. }) = cause.downcast_ref() {
            return 2;
        }
        if let Some(ShatterError::BudgetExceeded(_) | ShatterError::SupportTooLarge(_)) = cause.downcast_ref() {
            return 3;
        }
        if let Some(EntropyError::SizeLimit { .. }) = cause.downcast_ref() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
