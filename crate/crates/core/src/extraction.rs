//! Random coordinate extraction preserving separation.
//!
//! Each coordinate of a `t`-separated class on `n` points is kept
//! independently with probability `k / 2n`. A draw is accepted when it keeps
//! between 1 and `k` coordinates and the class stays `t/2`-separated in
//! `L_2` of the uniform measure on the kept coordinates.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class_model::{CoordinateSubset, FamilyError, FunctionFamily, ProbabilityMeasure};
use crate::metric_entropy::{DistanceMatrix, EntropyError, LpExponent};
use crate::rng;
use crate::Scalar;

pub const DEFAULT_MAX_ATTEMPTS: u64 = 100;

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("target size k must be at least 1")]
    ZeroTargetSize,
    #[error("target size {k} exceeds 2n = {limit}")]
    TargetSizeTooLarge { k: usize, limit: usize },
    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("rows {first} and {second} are at distance {distance}, not more than t = {t}")]
    NotSeparated { first: usize, second: usize, distance: f64, t: f64 },
    #[error("no acceptable subset in {attempts} attempts; best separation seen {best_separation}")]
    MaxAttempts { attempts: u64, best_separation: f64 },
    #[error("number of trials must be positive")]
    NoTrials,
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// `min(1, 2 exp(-u^2 / (2 (b2 + a u / 3))))`: the Bernstein tail bound for
/// a sum of independent centred variables bounded by `a` with total
/// variance `b2`.
pub fn bernstein_bound(u: f64, sup_bound: f64, variance_sum: f64) -> f64 {
    assert!(u > 0.0, "deviation must be positive");
    let denom = 2.0 * (variance_sum + sup_bound * u / 3.0);
    if denom <= 0.0 {
        return 0.0;
    }
    (2.0 * (-u * u / denom).exp()).min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOutcome<S> {
    pub subset: CoordinateSubset,
    pub attempts: u64,
    pub achieved_separation: S,
    pub target_separation: S,
}

/// Minimum pairwise `L_2(mu_sigma)` distance, `mu_sigma` uniform on `sigma`.
/// Returns `None` for a class with fewer than two rows.
pub fn min_separation<S: Scalar>(family: &FunctionFamily<S>, sigma: &[usize]) -> Option<(S, usize, usize)> {
    let m = family.len();
    let scale = S::one() / S::of_usize(sigma.len());
    let mut best: Option<(S, usize, usize)> = None;
    for i in 0..m {
        let f = family.row(i);
        for j in (i + 1)..m {
            let g = family.row(j);
            let sq: S = sigma.iter().map(|&c| (f[c] - g[c]) * (f[c] - g[c])).sum::<S>() * scale;
            if best.is_none_or(|b| sq < b.0) {
                best = Some((sq, i, j));
            }
        }
    }
    best.map(|(sq, i, j)| (sq.sqrt(), i, j))
}

fn check_inputs<S: Scalar>(family: &FunctionFamily<S>, t: S, k: usize) -> Result<(), ExtractionError> {
    if k == 0 {
        return Err(ExtractionError::ZeroTargetSize);
    }
    let n = family.domain_size();
    if k > 2 * n {
        return Err(ExtractionError::TargetSizeTooLarge { k, limit: 2 * n });
    }
    if !(t > S::zero()) || !t.is_finite() {
        return Err(ExtractionError::InvalidScale(t.as_f64()));
    }
    let dm = DistanceMatrix::new(family, &ProbabilityMeasure::uniform(n), LpExponent::L2)?;
    if let Some((i, j)) = dm.first_unseparated_pair(t) {
        return Err(ExtractionError::NotSeparated { first: i, second: j, distance: dm.get(i, j).as_f64(), t: t.as_f64() });
    }
    Ok(())
}

enum Draw<S> {
    Accepted(Vec<usize>, S),
    Rejected(Option<S>),
}

fn single_draw<S: Scalar>(family: &FunctionFamily<S>, t: S, k: usize, rng: &mut rng::Rng) -> Draw<S> {
    let n = family.domain_size();
    let p = k as f64 / (2 * n) as f64;
    let sigma: Vec<usize> = (0..n).filter(|_| rng.random_bool(p)).collect();
    if sigma.is_empty() || sigma.len() > k {
        return Draw::Rejected(None);
    }
    let target = t / S::of(2.0);
    match min_separation(family, &sigma) {
        None => Draw::Accepted(sigma, S::infinity()),
        Some((d, _, _)) if d > target => Draw::Accepted(sigma, d),
        Some((d, _, _)) => Draw::Rejected(Some(d)),
    }
}

/// Draws subsets until one is accepted, attempt `j` using the stream
/// `(seed, j)`.
pub fn extract_coordinates<S: Scalar>(
    family: &FunctionFamily<S>,
    t: S,
    k: usize,
    seed: u64,
    max_attempts: u64,
) -> Result<ExtractionOutcome<S>, ExtractionError> {
    check_inputs(family, t, k)?;
    let mut best = S::neg_infinity();
    for attempt in 0..max_attempts {
        let mut rng = rng::derived(seed, attempt);
        match single_draw(family, t, k, &mut rng) {
            Draw::Accepted(sigma, d) => {
                return Ok(ExtractionOutcome {
                    subset: CoordinateSubset::new(sigma, family.domain_size())?,
                    attempts: attempt + 1,
                    achieved_separation: d,
                    target_separation: t / S::of(2.0),
                });
            }
            Draw::Rejected(Some(d)) => best = best.max(d),
            Draw::Rejected(None) => {}
        }
    }
    Err(ExtractionError::MaxAttempts { attempts: max_attempts, best_separation: best.as_f64() })
}

/// Monte-Carlo acceptance frequency of a single draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub k: usize,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Binomial standard error `sqrt(p (1 - p) / trials)`.
    pub stderr: f64,
}

pub fn extraction_success_probability<S: Scalar>(
    family: &FunctionFamily<S>,
    t: S,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<SuccessEstimate, ExtractionError> {
    if trials == 0 {
        return Err(ExtractionError::NoTrials);
    }
    check_inputs(family, t, k)?;
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = rng::derived(seed, trial);
            matches!(single_draw(family, t, k, &mut rng), Draw::Accepted(..))
        })
        .count() as u64;
    let p = successes as f64 / trials as f64;
    Ok(SuccessEstimate { k, trials, successes, success_rate: p, stderr: (p * (1.0 - p) / trials as f64).sqrt() })
}

/// Success rates over a grid of target sizes; every grid point reuses the
/// same seed.
pub fn success_curve<S: Scalar>(
    family: &FunctionFamily<S>,
    t: S,
    k_grid: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<SuccessEstimate>, ExtractionError> {
    k_grid.iter().map(|&k| extraction_success_probability(family, t, k, trials, seed)).collect()
}

/// Empirical constant in `k ~ ln|A| / (c t^4)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    /// Smallest `k` whose estimated success rate reaches `level`.
    pub k: usize,
    pub level: f64,
    pub success_rate: f64,
    pub c: f64,
}

/// Bisects `k` in `[1, 2n]` for the smallest target size reaching the
/// success `level`. Returns `None` when even `k = 2n` falls short.
pub fn estimate_extraction_constant<S: Scalar>(
    family: &FunctionFamily<S>,
    t: S,
    level: f64,
    trials: u64,
    seed: u64,
) -> Result<Option<ConstantEstimate>, ExtractionError> {
    let (mut lo, mut hi) = (1usize, 2 * family.domain_size());
    let top = extraction_success_probability(family, t, hi, trials, seed)?;
    if top.success_rate < level {
        return Ok(None);
    }
    let mut rate = top.success_rate;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let est = extraction_success_probability(family, t, mid, trials, seed)?;
        if est.success_rate >= level {
            hi = mid;
            rate = est.success_rate;
        } else {
            lo = mid + 1;
        }
    }
    if lo == 2 * family.domain_size() {
        rate = top.success_rate;
    }
    let t4 = t.as_f64().powi(4);
    let c = (family.len() as f64).ln() / (lo as f64 * t4);
    Ok(Some(ConstantEstimate { k: lo, level, success_rate: rate, c }))
}
