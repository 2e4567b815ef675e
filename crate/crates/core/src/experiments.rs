//! Experiment drivers: the empirical constant of the entropy bound and an
//! audited run of the whole extraction / discretization / tree / center
//! chain on one instance.

use log::{info, warn};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class_model::{discretize, CoordinateSubset, gen_random_family, FamilyError, FunctionFamily, GeneratorKind, ProbabilityMeasure};
use crate::extraction::{extract_coordinates, min_separation, ExtractionError, ExtractionOutcome};
use crate::gaussian_elton::{elton_subset, EltonOptions, GaussianError};
use crate::geometry_lp::PolyhedralNorm;
use crate::metric_entropy::{is_separated, packing_number, DistanceMatrix, EntropyError, EntropyOptions, LpExponent};
use crate::rng;
use crate::separation_tree::{
    build_separating_tree, find_separating_coordinate, validate_tree, Distribution, SeparatingTree, TreeError,
};
use crate::shattering::{count_shattered_centers, vc_integer, vc_real, ShatterError, DEFAULT_BUDGET};

/// Unspecified absolute constants of the theory, as used by the drivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstantsConfig {
    /// Scale divisor in `vc(A, t / divisor)` for the entropy bound; the
    /// discretization argument gives 7.
    pub scale_divisor: f64,
    /// `c` in the lower limit `c E / sqrt(n)` of the Dudley integral.
    pub dudley_lower: f64,
    /// `c` in the lower limit `c E / n` of the vc integral.
    pub vc_lower: f64,
    /// Success level at which the extraction constant is fitted.
    pub extraction_level: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { scale_divisor: 7.0, dudley_lower: 0.1, vc_lower: 0.1, extraction_level: 0.5 }
    }
}

/// Greedy maximal `t`-separated subset of rows, scanning rows in order.
pub fn greedy_separated_rows(family: &FunctionFamily<f64>, measure: &ProbabilityMeasure<f64>, t: f64) -> Result<Vec<usize>, EntropyError> {
    let dm = DistanceMatrix::new(family, measure, LpExponent::L2)?;
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..family.len() {
        if chosen.iter().all(|&j| dm.get(i, j) > t) {
            chosen.push(i);
        }
    }
    Ok(chosen)
}

/// A random family thinned to a maximal `t`-separated subfamily in `L_2` of
/// the uniform measure.
pub fn random_separated_family(
    m: usize,
    n: usize,
    kind: GeneratorKind,
    t: f64,
    seed: u64,
) -> Result<FunctionFamily<f64>, ExperimentError> {
    let raw = gen_random_family::<f64>(m, n, kind, seed)?;
    let rows = greedy_separated_rows(&raw, &ProbabilityMeasure::uniform(n), t)?;
    Ok(raw.select_rows(&rows))
}

/// Random norm on `R^dim` with Gaussian functionals, and `count` random
/// vectors rescaled to norm 1.
pub fn random_polyhedral_instance(
    dim: usize,
    count: usize,
    functionals: usize,
    seed: u64,
) -> Result<(PolyhedralNorm<f64>, Vec<Vec<f64>>), ExperimentError> {
    let mut rng = rng::seeded(seed);
    let normal = rand_distr::StandardNormal;
    for attempt in 0..100u64 {
        let fs: Vec<Vec<f64>> = (0..functionals).map(|_| (0..dim).map(|_| rng.sample(normal)).collect()).collect();
        let Ok(norm) = PolyhedralNorm::new(dim, fs) else {
            warn!("degenerate random norm on attempt {attempt}, redrawing");
            continue;
        };
        let vectors = (0..count)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.sample(normal)).collect();
                let len = norm.norm(&v);
                v.into_iter().map(|x| x / len).collect()
            })
            .collect();
        return Ok((norm, vectors));
    }
    Err(ExperimentError::InvalidConfig("could not draw a nondegenerate norm".into()))
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("stage `{stage}` failed: {message}")]
    Assertion { stage: String, message: String, report: Box<PipelineReport> },
    #[error("budget exceeded in stage `{stage}`: {message}")]
    Budget { stage: String, message: String },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Shatter(#[from] ShatterError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MainTheoremConfig {
    pub instances: usize,
    pub max_m: usize,
    pub max_n: usize,
    pub scales: Vec<f64>,
    pub kinds: Vec<GeneratorKind>,
    pub seed: u64,
    pub budget: u64,
    pub constants: ConstantsConfig,
}

impl Default for MainTheoremConfig {
    fn default() -> Self {
        Self {
            instances: 200,
            max_m: 20,
            max_n: 6,
            scales: vec![0.25, 0.5, 0.75, 1.0],
            kinds: vec![GeneratorKind::UniformReal, GeneratorKind::SignVectors, GeneratorKind::ConvexHullSections],
            seed: 0,
            budget: DEFAULT_BUDGET,
            constants: ConstantsConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KRow {
    pub instance: usize,
    pub kind: GeneratorKind,
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub packing: usize,
    pub vc: usize,
    /// `ln N_sep(t) / max(1, vc(A, t/divisor) ln(2/t))`.
    pub k_emp: f64,
}

impl KRow {
    pub const CSV_HEADER: [&'static str; 8] = ["instance", "kind", "m", "n", "t", "packing", "vc", "k_emp"];

    pub fn csv_record(&self) -> [String; 8] {
        let kind = serde_json::to_value(self.kind).map(|v| v.to_string()).unwrap_or_default();
        [
            self.instance.to_string(),
            kind.trim_matches('"').to_string(),
            self.m.to_string(),
            self.n.to_string(),
            self.t.to_string(),
            self.packing.to_string(),
            self.vc.to_string(),
            self.k_emp.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedInstance {
    pub instance: usize,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremReport {
    pub config: MainTheoremConfig,
    pub rows: Vec<KRow>,
    pub skipped: Vec<SkippedInstance>,
    pub max_k: f64,
    pub quantiles: Quantiles,
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn instance_rows(config: &MainTheoremConfig, instance: usize) -> Result<Vec<KRow>, String> {
    let mut rng = rng::derived(config.seed, instance as u64);
    let m = rng.random_range(1..=config.max_m);
    let n = rng.random_range(1..=config.max_n);
    let kind = config.kinds[instance % config.kinds.len()];
    let fam = gen_random_family::<f64>(m, n, kind, rng.random()).map_err(|e| e.to_string())?;
    let mu = ProbabilityMeasure::uniform(n);
    let mut rows = Vec::with_capacity(config.scales.len());
    for &t in &config.scales {
        let packing = packing_number(&fam, &mu, t, &EntropyOptions::default()).map_err(|e| e.to_string())?.value;
        let vc = vc_real(&fam, t / config.constants.scale_divisor, config.budget).map_err(|e| e.to_string())?.dimension;
        let k_emp = (packing as f64).ln() / (vc as f64 * (2.0 / t).ln()).max(1.0);
        rows.push(KRow { instance, kind, m, n, t, packing, vc, k_emp });
    }
    Ok(rows)
}

/// Computes the empirical constant of `N_sep(t) <= (2/t)^{K vc(A, t/7)}`
/// over a seeded suite. Instances whose exact computations exceed a budget
/// are logged and skipped.
pub fn run_main_theorem_experiment(config: &MainTheoremConfig) -> Result<MainTheoremReport, ExperimentError> {
    if config.kinds.is_empty() || config.max_m == 0 || config.max_n == 0 {
        return Err(ExperimentError::InvalidConfig("need at least one generator kind and m, n >= 1".into()));
    }
    if config.scales.iter().any(|&t| !(t > 0.0 && t < 2.0)) {
        return Err(ExperimentError::InvalidConfig("scales must lie in (0, 2)".into()));
    }
    let results: Vec<Result<Vec<KRow>, String>> =
        (0..config.instances).into_par_iter().map(|i| instance_rows(config, i)).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (instance, r) in results.into_iter().enumerate() {
        match r {
            Ok(mut rs) => rows.append(&mut rs),
            Err(reason) => {
                warn!("instance {instance} skipped: {reason}");
                skipped.push(SkippedInstance { instance, reason });
            }
        }
    }
    let mut ks: Vec<f64> = rows.iter().map(|r| r.k_emp).collect();
    ks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let quantiles = Quantiles { p50: nearest_rank(&ks, 0.5), p90: nearest_rank(&ks, 0.9), p99: nearest_rank(&ks, 0.99) };
    let max_k = ks.last().copied().unwrap_or(0.0);
    info!("main theorem suite: {} rows, {} skipped, max K = {max_k}", rows.len(), skipped.len());
    Ok(MainTheoremReport { config: config.clone(), rows, skipped, max_k, quantiles })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub m: usize,
    pub n: usize,
    pub kind: GeneratorKind,
    /// Working scale; the instance is thinned to be `2t`-separated.
    pub t: f64,
    pub seed: u64,
    pub max_attempts: u64,
    pub budget: u64,
    /// Test hook: swap the sons of the root before validation.
    pub corrupt_tree: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            m: 12,
            n: 6,
            kind: GeneratorKind::UniformReal,
            t: 0.35,
            seed: 0,
            max_attempts: crate::extraction::DEFAULT_MAX_ATTEMPTS,
            budget: DEFAULT_BUDGET,
            corrupt_tree: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    /// Rows of the generated family kept by the separation step.
    pub separated_rows: Vec<usize>,
    pub stages: Vec<StageRecord>,
    pub trivial: bool,
    pub extraction: Option<ExtractionOutcome<f64>>,
    pub tree: Option<SeparatingTree<f64>>,
    pub leaves: usize,
    pub centers: usize,
    pub vc_integer: usize,
    pub vc_real: usize,
}

struct Trace {
    report: PipelineReport,
}

impl Trace {
    fn record(&mut self, stage: &str, passed: bool, detail: serde_json::Value) -> Result<(), ExperimentError> {
        self.report.stages.push(StageRecord { stage: stage.to_string(), passed, detail: detail.clone() });
        if passed {
            Ok(())
        } else {
            Err(ExperimentError::Assertion {
                stage: stage.to_string(),
                message: detail.to_string(),
                report: Box::new(self.report.clone()),
            })
        }
    }
}

fn budget<T>(stage: &str, r: Result<T, ShatterError>) -> Result<T, ExperimentError> {
    r.map_err(|e| match e {
        ShatterError::BudgetExceeded(_) | ShatterError::SupportTooLarge { .. } => {
            ExperimentError::Budget { stage: stage.to_string(), message: e.to_string() }
        }
        other => other.into(),
    })
}

/// Runs separation, extraction, discretization, tree construction and
/// center counting on one seeded instance, checking each conclusion.
pub fn run_pipeline_trace(config: &PipelineConfig) -> Result<PipelineReport, ExperimentError> {
    let t = config.t;
    if !(t > 0.0 && t <= 0.5) {
        return Err(ExperimentError::InvalidConfig(format!("t must lie in (0, 1/2], got {t}")));
    }
    let raw = gen_random_family::<f64>(config.m, config.n, config.kind, config.seed)?;
    let n = raw.domain_size();
    let mu = ProbabilityMeasure::uniform(n);
    let rows = greedy_separated_rows(&raw, &mu, 2.0 * t)?;
    let fam = raw.select_rows(&rows);
    let m = fam.len();
    let mut trace = Trace {
        report: PipelineReport {
            config: config.clone(),
            separated_rows: rows,
            stages: Vec::new(),
            trivial: m < 2,
            extraction: None,
            tree: None,
            leaves: usize::from(m == 1),
            centers: usize::from(m == 1),
            vc_integer: 0,
            vc_real: 0,
        },
    };
    trace.record("separate", is_separated(&fam, &mu, 2.0 * t, LpExponent::L2)?, serde_json::json!({ "m": m, "scale": 2.0 * t }))?;
    if m < 2 {
        info!("single-function instance, nothing to trace");
        return Ok(trace.report);
    }

    // variance identity on every coordinate
    let mut worst = 0.0f64;
    for c in 0..n {
        let dist = Distribution::uniform(&fam.column(c))?;
        let v = dist.variance();
        worst = worst.max((v.pair_expectation - 2.0 * v.variance).abs());
    }
    trace.record("variance-identity", worst <= 1e-12, serde_json::json!({ "max_error": worst }))?;

    let split = find_separating_coordinate(&fam, &mu, 2.0 * t)?;
    let column = Distribution::uniform(&fam.column(split.coordinate))?;
    trace.record(
        "separating-coordinate",
        split.std_dev >= t * (1.0 - 1e-12),
        serde_json::json!({ "coordinate": split.coordinate, "std_dev": split.std_dev, "required": t }),
    )?;
    trace.record(
        "small-deviation-split",
        split.certificate.verify(&column),
        serde_json::to_value(split.certificate).unwrap_or_default(),
    )?;

    let outcome = match extract_coordinates(&fam, 2.0 * t, n, config.seed, config.max_attempts) {
        Ok(o) => o,
        Err(ExtractionError::MaxAttempts { .. }) => {
            info!("extraction with k = n exhausted, retrying with k = 2n");
            extract_coordinates(&fam, 2.0 * t, 2 * n, config.seed, config.max_attempts)?
        }
        Err(e) => return Err(e.into()),
    };
    let restricted = fam.restrict(&outcome.subset)?;
    let mu_sigma = ProbabilityMeasure::uniform(outcome.subset.len());
    let recheck = is_separated(&restricted, &mu_sigma, t, LpExponent::L2)?;
    let sep = min_separation(&restricted, &(0..restricted.domain_size()).collect::<Vec<_>>()).map(|s| s.0);
    trace.report.extraction = Some(outcome.clone());
    trace.record(
        "extraction",
        recheck && outcome.subset.len() <= 2 * n,
        serde_json::json!({ "subset": outcome.subset, "attempts": outcome.attempts, "separation": sep, "required": t }),
    )?;

    let disc = discretize(&restricted, t)?;
    let six = is_separated(&disc, &mu_sigma, 6.0, LpExponent::L2)?;
    trace.record("discretize", six, serde_json::json!({ "range_max": disc.kind(), "scale": 6.0 }))?;

    let mut tree = build_separating_tree(&disc, &mu_sigma, 6.0)?;
    if config.corrupt_tree {
        if let Some(s) = tree.nodes[0].split.as_mut() {
            std::mem::swap(&mut s.plus, &mut s.minus);
        }
    }
    let leaves = tree.leaf_count();
    let valid = validate_tree(&tree, &disc, 1.0);
    trace.report.leaves = leaves;
    trace.report.tree = Some(tree);
    trace.record(
        "tree",
        valid.is_ok(),
        serde_json::json!({ "violation": valid.err().map(|v| v.to_string()), "leaves": leaves }),
    )?;
    trace.record(
        "leaf-count",
        leaves * leaves >= m,
        serde_json::json!({ "leaves": leaves, "m": m }),
    )?;

    let centers = budget("centers", count_shattered_centers(&disc, config.budget))?;
    trace.report.centers = centers;
    trace.record(
        "centers",
        centers >= leaves && centers * centers >= m,
        serde_json::json!({ "centers": centers, "leaves": leaves, "m": m }),
    )?;

    let vi = budget("vc", vc_integer(&disc, config.budget))?;
    let vr = budget("vc", vc_real(&fam, t / 7.0, config.budget))?.dimension;
    trace.report.vc_integer = vi;
    trace.report.vc_real = vr;
    trace.record("vc-comparison", vi <= vr, serde_json::json!({ "vc_integer": vi, "vc_real": vr }))?;
    Ok(trace.report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EltonSuiteConfig {
    pub instances: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    /// Number of functionals is `functional_factor * dim`.
    pub functional_factor: usize,
    pub seed: u64,
    pub options: EltonOptions,
}

impl Default for EltonSuiteConfig {
    fn default() -> Self {
        Self { instances: 24, min_dim: 2, max_dim: 7, functional_factor: 3, seed: 0, options: EltonOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EltonSuiteRow {
    pub instance: usize,
    pub n: usize,
    pub delta: f64,
    pub s: f64,
    pub t: f64,
    pub sigma: CoordinateSubset,
    pub tradeoff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EltonSuiteReport {
    pub config: EltonSuiteConfig,
    pub rows: Vec<EltonSuiteRow>,
    /// `min(s, t) / delta` over the suite.
    pub c_hat: f64,
    /// `s t ln^q(2/t) / delta` minimized over the suite.
    pub c_tradeoff: f64,
}

/// Elton search on random polyhedral norms; instance `i` uses the stream
/// `(seed, i)` and dimension `min_dim + i mod (max_dim - min_dim + 1)`.
pub fn run_elton_suite(config: &EltonSuiteConfig) -> Result<EltonSuiteReport, ExperimentError> {
    if config.min_dim == 0 || config.min_dim > config.max_dim || config.functional_factor == 0 {
        return Err(ExperimentError::InvalidConfig("need 1 <= min_dim <= max_dim and a positive factor".into()));
    }
    let span = config.max_dim - config.min_dim + 1;
    let rows = (0..config.instances)
        .into_par_iter()
        .map(|i| {
            let n = config.min_dim + i % span;
            let inst_seed = rng::derived(config.seed, i as u64).random();
            let (norm, vectors) = random_polyhedral_instance(n, n, config.functional_factor * n, inst_seed)?;
            let options = EltonOptions { seed: inst_seed, ..config.options.clone() };
            let r = elton_subset(&norm, &vectors, &options)?;
            Ok(EltonSuiteRow { instance: i, n, delta: r.delta, s: r.s, t: r.t, sigma: r.sigma, tradeoff: r.tradeoff })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let c_hat = rows.iter().map(|r| r.s.min(r.t) / r.delta).fold(f64::INFINITY, f64::min);
    let c_tradeoff = rows.iter().map(|r| r.tradeoff / r.delta).fold(f64::INFINITY, f64::min);
    Ok(EltonSuiteReport { config: config.clone(), rows, c_hat, c_tradeoff })
}
