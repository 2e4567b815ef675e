//! Gaussian and Rademacher suprema, entropy integrals and Elton's theorem.
//!
//! A finite point set `A` in `R^n` carries the process
//! `X_a = sum_i g_i a(i)`; its expected supremum is estimated by Monte Carlo
//! and compared with Dudley-type entropy integrals and with the integral of
//! `sqrt(vc(A, t) ln(2/t))`. The Elton driver looks for a large coordinate
//! set on which given vectors dominate the `l_1` norm.

mod elton;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class_model::{FamilyError, FunctionFamily, ProbabilityMeasure};
use crate::geometry_lp::GeometryError;
use crate::metric_entropy::{packing_number, covering_number, EntropyError, EntropyOptions};
use crate::rng;
use crate::Scalar;

pub use elton::{
    elton_subset, rudelson_example, rudelson_norm, EltonOptions, EltonResult, RudelsonInstance, SweepPoint,
    RUDELSON_MAX_N,
};

const BLOCK: u64 = 1024;

#[derive(Debug, Error)]
pub enum GaussianError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(u64),
    #[error("point set is empty")]
    NoPoints,
    #[error("point {index} has dimension {found}, expected {expected}")]
    Ragged { index: usize, expected: usize, found: usize },
    #[error("curve is not increasing in t with non-increasing values at entry {0}")]
    UnorderedCurve(usize),
    #[error("curve value at entry {0} is negative or not finite")]
    BadCurveValue(usize),
    #[error("integration limits must satisfy 0 <= lower <= upper, got [{lower}, {upper}]")]
    InvalidLimits { lower: f64, upper: f64 },
    #[error("t = {0} is outside (0, 1)")]
    OutsideUnitInterval(f64),
    #[error("weight exponent must exceed 1, got {0}")]
    InvalidExponent(f64),
    #[error("vector {index} has norm {norm}, above 1")]
    OutsideUnitBall { index: usize, norm: f64 },
    #[error("delta = {delta} is outside [1/sqrt(n), 1] for n = {n}")]
    InvalidDelta { delta: f64, n: usize },
    #[error("n = {n} exceeds the cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("no coordinate carries a cube at any grid scale")]
    NothingShattered,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Gaussian,
    #[default]
    Rademacher,
}

impl ProcessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Rademacher => "rademacher",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate<S> {
    pub mean: S,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: S,
    pub samples: u64,
    pub process_kind: ProcessKind,
}

/// Monte-Carlo estimate of `E sup_{a in points} sum_i g_i a(i)`.
///
/// Samples are drawn in blocks of 1024, block `b` from the stream
/// `(seed, b)`, and merged in block order, so the estimate does not depend
/// on the thread count. Gaussian coordinates come from the ziggurat sampler
/// of `rand_distr::StandardNormal`.
pub fn gaussian_sup_mc<S: Scalar>(
    points: &[Vec<S>],
    samples: u64,
    seed: u64,
    kind: ProcessKind,
) -> Result<SupEstimate<S>, GaussianError> {
    if samples < 2 {
        return Err(GaussianError::TooFewSamples(samples));
    }
    let n = points.first().ok_or(GaussianError::NoPoints)?.len();
    if let Some((index, p)) = points.iter().enumerate().find(|(_, p)| p.len() != n) {
        return Err(GaussianError::Ragged { index, expected: n, found: p.len() });
    }
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|v| v.as_f64()).collect()).collect();
    let blocks = samples.div_ceil(BLOCK);
    let stats: Vec<(f64, f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::derived(seed, b);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut g = vec![0.0f64; n];
            let (mut mean, mut m2) = (0.0f64, 0.0f64);
            for k in 0..count {
                for v in g.iter_mut() {
                    *v = match kind {
                        ProcessKind::Gaussian => rng.sample(StandardNormal),
                        ProcessKind::Rademacher => {
                            if rng.random_bool(0.5) {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                    };
                }
                let sup = pts
                    .iter()
                    .map(|p| p.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                let delta = sup - mean;
                mean += delta / (k + 1) as f64;
                m2 += delta * (sup - mean);
            }
            (count as f64, mean, m2)
        })
        .collect();
    let (mut total, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    for (c, m, q) in stats {
        let combined = total + c;
        let delta = m - mean;
        mean += delta * c / combined;
        m2 += q + delta * delta * total * c / combined;
        total = combined;
    }
    let var = m2 / (total - 1.0);
    Ok(SupEstimate {
        mean: S::of(mean),
        stderr: S::of((var / total).sqrt()),
        samples,
        process_kind: kind,
    })
}

/// [`gaussian_sup_mc`] over the rows of a family.
pub fn family_sup_mc<S: Scalar>(
    family: &FunctionFamily<S>,
    samples: u64,
    seed: u64,
    kind: ProcessKind,
) -> Result<SupEstimate<S>, GaussianError> {
    gaussian_sup_mc(&family.to_rows(), samples, seed, kind)
}

/// Checks that `t` increases strictly, values are finite, non-negative and
/// non-increasing.
fn check_curve<S: Scalar, V: Copy + PartialOrd>(curve: &[(S, V)], valid: impl Fn(V) -> bool) -> Result<(), GaussianError> {
    for (i, &(t, v)) in curve.iter().enumerate() {
        if !t.is_finite() || !(t > S::zero()) || !valid(v) {
            return Err(GaussianError::BadCurveValue(i));
        }
        if i > 0 && (t <= curve[i - 1].0 || v > curve[i - 1].1) {
            return Err(GaussianError::UnorderedCurve(i));
        }
    }
    Ok(())
}

fn check_limits<S: Scalar>(lower: S, upper: S) -> Result<(), GaussianError> {
    if !(lower >= S::zero()) || !(upper >= lower) || !upper.is_finite() {
        return Err(GaussianError::InvalidLimits { lower: lower.as_f64(), upper: upper.as_f64() });
    }
    Ok(())
}

/// Integrates `g(value)` times `w(t)` over `[lower, upper]` for the step
/// function taking `curve[k].1` on `(curve[k-1].0, curve[k].0]`, the first
/// value down to 0 and the last one beyond the final point. `primitive` is
/// an antiderivative of `w`.
fn step_integral<S: Scalar, V: Copy>(
    curve: &[(S, V)],
    lower: S,
    upper: S,
    height: impl Fn(V) -> S,
    primitive: impl Fn(S) -> S,
) -> S {
    let mut total = S::zero();
    let mut left = S::zero();
    for (k, &(t, v)) in curve.iter().enumerate() {
        let right = if k + 1 == curve.len() { S::infinity() } else { t };
        let a = left.max(lower);
        let b = right.min(upper);
        if b > a {
            total = total + height(v) * (primitive(b) - primitive(a));
        }
        left = t;
    }
    total
}

/// `int_lower^upper sqrt(log_count(t)) dt` for a step curve of
/// `(t, ln N(t))` points (natural logarithms).
///
/// The curve takes the value `L_k` on `(t_{k-1}, t_k]`, the first value on
/// `(0, t_1]` and the last value beyond the final point; covering numbers
/// are step functions so the integral is exact.
pub fn entropy_integral<S: Scalar>(curve: &[(S, S)], lower: S, upper: S) -> Result<S, GaussianError> {
    check_limits(lower, upper)?;
    check_curve(curve, |v: S| v.is_finite() && v >= S::zero())?;
    Ok(step_integral(curve, lower, upper, |v| v.sqrt(), |t| t))
}

/// Antiderivative of `sqrt(ln(2/t))` on `(0, 2]` vanishing at 0:
/// `t sqrt(ln(2/t)) + sqrt(pi) erfc(sqrt(ln(2/t)))`.
pub fn sqrt_log_primitive(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let l = (2.0 / t).ln().max(0.0).sqrt();
    t * l + std::f64::consts::PI.sqrt() * libm::erfc(l)
}

/// `int_lower^upper sqrt(vc(t) ln(2/t)) dt` for a step curve of
/// `(t, vc(A, t))`, with the same step convention as [`entropy_integral`].
/// Each piece is integrated in closed form.
pub fn vc_integral<S: Scalar>(vc_curve: &[(S, usize)], lower: S, upper: S) -> Result<S, GaussianError> {
    check_limits(lower, upper)?;
    if upper > S::of(2.0) {
        return Err(GaussianError::InvalidLimits { lower: lower.as_f64(), upper: upper.as_f64() });
    }
    check_curve(vc_curve, |_| true)?;
    Ok(step_integral(vc_curve, lower, upper, |v| S::of_usize(v).sqrt(), |t| S::of(sqrt_log_primitive(t.as_f64()))))
}

/// Largest `t sqrt(ln N_sep(A, t D_n)) / E` over a grid, with `D_n` the
/// Euclidean unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SudakovReport<S> {
    pub ratio: S,
    pub t_at_max: Option<S>,
    /// `(t, packing number)` over the grid.
    pub packing: Vec<(S, usize)>,
}

/// Empirical Sudakov constant of a point set against the expected supremum
/// `e_hat`.
///
/// Packing is taken in the Euclidean metric of `R^n`, the canonical metric
/// of the Gaussian process, i.e. in `L_2` of the uniform measure at scale
/// `t / sqrt(n)`.
pub fn sudakov_ratio<S: Scalar>(
    family: &FunctionFamily<S>,
    t_grid: &[S],
    e_hat: S,
    options: &EntropyOptions,
) -> Result<SudakovReport<S>, GaussianError> {
    if !(e_hat > S::zero()) {
        return Err(GaussianError::InvalidParameter(format!("expected supremum must be positive, got {e_hat}")));
    }
    let n = family.domain_size();
    let mu = ProbabilityMeasure::uniform(n);
    let root_n = S::of_usize(n).sqrt();
    let mut best = (S::zero(), None);
    let mut packing = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let count = packing_number(family, &mu, t / root_n, options)?.value;
        packing.push((t, count));
        let r = t * S::of_usize(count).ln().sqrt() / e_hat;
        if r > best.0 {
            best = (r, Some(t));
        }
    }
    Ok(SudakovReport { ratio: best.0, t_at_max: best.1, packing })
}

/// Empirical constant in `E <= K int_{c E / sqrt(n)}^inf sqrt(ln N(A, t D_n)) dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DudleyReport<S> {
    pub e_hat: S,
    pub lower: S,
    pub integral: S,
    /// `e_hat / integral`; infinite when the integral vanishes.
    pub k_hat: S,
    /// `(t, ln N(A, t D_n))` with Euclidean `t`.
    pub curve: Vec<(S, S)>,
}

/// Covering curve on an increasing Euclidean grid and the fitted constant.
/// The grid should extend to the diameter, past which `ln N = 0`.
pub fn dudley_constant<S: Scalar>(
    family: &FunctionFamily<S>,
    t_grid: &[S],
    e_hat: S,
    c_hat: S,
    options: &EntropyOptions,
) -> Result<DudleyReport<S>, GaussianError> {
    let n = family.domain_size();
    let mu = ProbabilityMeasure::uniform(n);
    let root_n = S::of_usize(n).sqrt();
    let mut curve = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let count = covering_number(family, &mu, t / root_n, options)?.value;
        curve.push((t, S::of_usize(count).ln()));
    }
    let lower = c_hat * e_hat / root_n;
    let upper = t_grid.last().copied().unwrap_or(lower).max(lower);
    let integral = entropy_integral(&curve, lower, upper)?;
    let k_hat = if integral > S::zero() { e_hat / integral } else { S::infinity() };
    Ok(DudleyReport { e_hat, lower, integral, k_hat, curve })
}

/// `h(t) = c0 / (t ln^p(2/t))` on `(0, 1)`, normalized to unit integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub exponent: f64,
    pub c0: f64,
}

impl Default for WeightFunction {
    fn default() -> Self {
        Self::new(1.1).expect("valid exponent")
    }
}

impl WeightFunction {
    /// Substituting `u = ln(2/t)` turns `int_0^1 dt / (t ln^p(2/t))` into
    /// `int_{ln 2}^inf u^{-p} du = (ln 2)^{1-p} / (p - 1)`, so
    /// `c0 = (p - 1) (ln 2)^{p-1}`.
    pub fn new(exponent: f64) -> Result<Self, GaussianError> {
        if !(exponent > 1.0) || !exponent.is_finite() {
            return Err(GaussianError::InvalidExponent(exponent));
        }
        let c0 = (exponent - 1.0) * std::f64::consts::LN_2.powf(exponent - 1.0);
        Ok(Self { exponent, c0 })
    }

    pub fn eval(&self, t: f64) -> Result<f64, GaussianError> {
        if !(t > 0.0 && t < 1.0) {
            return Err(GaussianError::OutsideUnitInterval(t));
        }
        Ok(self.c0 / (t * (2.0 / t).ln().powf(self.exponent)))
    }
}

/// The weight with exponent 1.1.
pub fn weight_h(t: f64) -> Result<f64, GaussianError> {
    WeightFunction::default().eval(t)
}
