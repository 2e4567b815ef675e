//! `L_p(mu)` distances, separation, and packing/covering numbers.
//!
//! Separation is strict (`||f - g|| > t`) and ball membership is closed
//! (`||f - c|| <= t`); covering centers are members of the family. With
//! these conventions `N(t) <= N_sep(t) <= N(t/2)` holds exactly.

mod clique;
mod cover;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class_model::{FamilyError, FunctionFamily, ProbabilityMeasure};
use crate::Scalar;

/// Largest family handled by the exact searches, even when forced.
pub const HARD_SIZE_LIMIT: usize = 128;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("rows have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("exact search refused: {m} functions exceeds the limit {limit}")]
    SizeLimit { m: usize, limit: usize },
    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("L_p exponent must be >= 1, got {0}")]
    InvalidExponent(f64),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Exponent `p` of the `L_p(mu)` norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub const L2: LpExponent = LpExponent::Finite(2.0);

    fn validate(self) -> Result<(), EntropyError> {
        match self {
            LpExponent::Finite(p) if !(p >= 1.0) => Err(EntropyError::InvalidExponent(p)),
            _ => Ok(()),
        }
    }
}

impl Default for LpExponent {
    fn default() -> Self {
        LpExponent::L2
    }
}

/// `(sum_i w_i |f(i) - g(i)|^p)^(1/p)`, or the maximum over the support of
/// `mu` for `p = infinity`.
pub fn lp_distance<S: Scalar>(
    f: &[S],
    g: &[S],
    measure: &ProbabilityMeasure<S>,
    p: LpExponent,
) -> Result<S, EntropyError> {
    if f.len() != g.len() {
        return Err(EntropyError::LengthMismatch { left: f.len(), right: g.len() });
    }
    if f.len() != measure.len() {
        return Err(EntropyError::LengthMismatch { left: f.len(), right: measure.len() });
    }
    p.validate()?;
    Ok(lp_distance_unchecked(f, g, measure.weights(), p))
}

pub(crate) fn lp_distance_unchecked<S: Scalar>(f: &[S], g: &[S], w: &[S], p: LpExponent) -> S {
    let diffs = f.iter().zip(g).zip(w);
    match p {
        LpExponent::Infinity => diffs
            .filter(|(_, &wi)| wi > S::zero())
            .map(|((&a, &b), _)| (a - b).abs())
            .fold(S::zero(), S::max),
        LpExponent::Finite(p) if p == 2.0 => {
            let s: S = diffs.map(|((&a, &b), &wi)| wi * (a - b) * (a - b)).sum();
            s.sqrt()
        }
        LpExponent::Finite(p) if p == 1.0 => diffs.map(|((&a, &b), &wi)| wi * (a - b).abs()).sum(),
        LpExponent::Finite(p) => {
            let ps = S::of(p);
            let s: S = diffs.map(|((&a, &b), &wi)| wi * (a - b).abs().powf(ps)).sum();
            s.powf(S::one() / ps)
        }
    }
}

/// Symmetric matrix of pairwise distances between the rows of a family.
#[derive(Clone, Debug)]
pub struct DistanceMatrix<S> {
    m: usize,
    d: Vec<S>,
}

impl<S: Scalar> DistanceMatrix<S> {
    pub fn new(
        family: &FunctionFamily<S>,
        measure: &ProbabilityMeasure<S>,
        p: LpExponent,
    ) -> Result<Self, EntropyError> {
        measure.check_domain(family.domain_size())?;
        p.validate()?;
        let m = family.len();
        let mut d = vec![S::zero(); m * m];
        for i in 0..m {
            for j in i + 1..m {
                let v = lp_distance_unchecked(family.row(i), family.row(j), measure.weights(), p);
                d[i * m + j] = v;
                d[j * m + i] = v;
            }
        }
        Ok(Self { m, d })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.d[i * self.m + j]
    }

    pub fn diameter(&self) -> S {
        self.d.iter().copied().fold(S::zero(), S::max)
    }

    /// First pair `(i, j)`, `i < j`, whose distance is `<= t`.
    pub fn first_unseparated_pair(&self, t: S) -> Option<(usize, usize)> {
        (0..self.m)
            .flat_map(|i| (i + 1..self.m).map(move |j| (i, j)))
            .find(|&(i, j)| !(self.get(i, j) > t))
    }

    /// Distances strictly greater than `t` as adjacency bitsets.
    fn separation_graph(&self, t: S) -> Vec<u128> {
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .filter(|&j| j != i && self.get(i, j) > t)
                    .fold(0u128, |acc, j| acc | (1u128 << j))
            })
            .collect()
    }

    /// Closed balls of radius `t` around every row.
    fn balls(&self, t: S) -> Vec<u128> {
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .filter(|&j| j == i || self.get(i, j) <= t)
                    .fold(0u128, |acc, j| acc | (1u128 << j))
            })
            .collect()
    }
}

/// Every pair of distinct rows is at distance strictly greater than `t`.
pub fn is_separated<S: Scalar>(
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
    t: S,
    p: LpExponent,
) -> Result<bool, EntropyError> {
    measure.check_domain(family.domain_size())?;
    p.validate()?;
    let w = measure.weights();
    let m = family.len();
    for i in 0..m {
        for j in i + 1..m {
            if !(lp_distance_unchecked(family.row(i), family.row(j), w, p) > t) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMode {
    Exact,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    LowerBound,
    UpperBound,
}

impl Exactness {
    pub fn as_str(self) -> &'static str {
        match self {
            Exactness::Exact => "exact",
            Exactness::LowerBound => "lower-bound",
            Exactness::UpperBound => "upper-bound",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyCount {
    pub value: usize,
    pub exactness: Exactness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport<S> {
    pub scale: S,
    pub packing: EntropyCount,
    pub covering: EntropyCount,
}

impl<S: Scalar> EntropyReport<S> {
    pub const CSV_HEADER: [&'static str; 5] = ["t", "packing", "packing_flag", "covering", "covering_flag"];

    pub fn csv_record(&self) -> [String; 5] {
        [
            self.scale.to_string(),
            self.packing.value.to_string(),
            self.packing.exactness.as_str().to_string(),
            self.covering.value.to_string(),
            self.covering.exactness.as_str().to_string(),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyOptions {
    pub mode: EntropyMode,
    pub p: LpExponent,
    /// Largest family accepted by the exact packing search.
    pub packing_limit: usize,
    /// Largest family accepted by the exact covering search.
    pub covering_limit: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self { mode: EntropyMode::Exact, p: LpExponent::L2, packing_limit: 30, covering_limit: 25 }
    }
}

impl EntropyOptions {
    pub fn greedy() -> Self {
        Self { mode: EntropyMode::Greedy, ..Self::default() }
    }

    /// Exact mode with both limits raised to [`HARD_SIZE_LIMIT`].
    pub fn forced() -> Self {
        Self { packing_limit: HARD_SIZE_LIMIT, covering_limit: HARD_SIZE_LIMIT, ..Self::default() }
    }
}

fn check_scale<S: Scalar>(t: S) -> Result<(), EntropyError> {
    if t > S::zero() {
        Ok(())
    } else {
        Err(EntropyError::InvalidScale(t.as_f64()))
    }
}

fn check_limit(m: usize, limit: usize) -> Result<(), EntropyError> {
    let limit = limit.min(HARD_SIZE_LIMIT);
    if m > limit {
        Err(EntropyError::SizeLimit { m, limit })
    } else {
        Ok(())
    }
}

/// Maximal cardinality of a `t`-separated subset.
pub fn packing_from_matrix<S: Scalar>(
    dm: &DistanceMatrix<S>,
    t: S,
    mode: EntropyMode,
    limit: usize,
) -> Result<EntropyCount, EntropyError> {
    check_scale(t)?;
    match mode {
        EntropyMode::Exact => {
            check_limit(dm.len(), limit)?;
            let graph = dm.separation_graph(t);
            Ok(EntropyCount { value: clique::maximum_clique(&graph), exactness: Exactness::Exact })
        }
        EntropyMode::Greedy => {
            let mut chosen: Vec<usize> = Vec::new();
            for i in 0..dm.len() {
                if chosen.iter().all(|&j| dm.get(i, j) > t) {
                    chosen.push(i);
                }
            }
            Ok(EntropyCount { value: chosen.len(), exactness: Exactness::LowerBound })
        }
    }
}

/// Minimal number of closed `t`-balls centered at rows that cover the family.
pub fn covering_from_matrix<S: Scalar>(
    dm: &DistanceMatrix<S>,
    t: S,
    mode: EntropyMode,
    limit: usize,
) -> Result<EntropyCount, EntropyError> {
    check_scale(t)?;
    let m = dm.len();
    match mode {
        EntropyMode::Exact => {
            check_limit(m, limit)?;
            let balls = dm.balls(t);
            Ok(EntropyCount { value: cover::minimum_cover(&balls, m), exactness: Exactness::Exact })
        }
        EntropyMode::Greedy => {
            if m > HARD_SIZE_LIMIT {
                return Ok(EntropyCount {
                    value: greedy_cover_large(dm, t),
                    exactness: Exactness::UpperBound,
                });
            }
            let balls = dm.balls(t);
            Ok(EntropyCount { value: cover::greedy_cover(&balls, m), exactness: Exactness::UpperBound })
        }
    }
}

fn greedy_cover_large<S: Scalar>(dm: &DistanceMatrix<S>, t: S) -> usize {
    let m = dm.len();
    let mut covered = vec![false; m];
    let mut count = 0;
    while covered.iter().any(|c| !c) {
        let best = (0..m)
            .max_by_key(|&c| {
                let gain = (0..m).filter(|&j| !covered[j] && dm.get(c, j) <= t).count()
                    + usize::from(!covered[c]);
                (gain, std::cmp::Reverse(c))
            })
            .expect("nonempty");
        covered[best] = true;
        for j in 0..m {
            if dm.get(best, j) <= t {
                covered[j] = true;
            }
        }
        count += 1;
    }
    count
}

pub fn packing_number<S: Scalar>(
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
    t: S,
    options: &EntropyOptions,
) -> Result<EntropyCount, EntropyError> {
    check_scale(t)?;
    if options.mode == EntropyMode::Exact {
        check_limit(family.len(), options.packing_limit)?;
    }
    let dm = DistanceMatrix::new(family, measure, options.p)?;
    packing_from_matrix(&dm, t, options.mode, options.packing_limit)
}

pub fn covering_number<S: Scalar>(
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
    t: S,
    options: &EntropyOptions,
) -> Result<EntropyCount, EntropyError> {
    check_scale(t)?;
    if options.mode == EntropyMode::Exact {
        check_limit(family.len(), options.covering_limit)?;
    }
    let dm = DistanceMatrix::new(family, measure, options.p)?;
    covering_from_matrix(&dm, t, options.mode, options.covering_limit)
}

/// Packing and covering numbers at each scale of `scales`.
pub fn entropy_reports<S: Scalar>(
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
    scales: &[S],
    options: &EntropyOptions,
) -> Result<Vec<EntropyReport<S>>, EntropyError> {
    let dm = DistanceMatrix::new(family, measure, options.p)?;
    scales
        .iter()
        .map(|&t| {
            Ok(EntropyReport {
                scale: t,
                packing: packing_from_matrix(&dm, t, options.mode, options.packing_limit)?,
                covering: covering_from_matrix(&dm, t, options.mode, options.covering_limit)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(rows: Vec<Vec<f64>>) -> FunctionFamily<f64> {
        FunctionFamily::real(rows).unwrap()
    }

    fn sign_square() -> FunctionFamily<f64> {
        fam(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]])
    }

    #[test]
    fn distance_examples() {
        let u2 = ProbabilityMeasure::uniform(2);
        assert_eq!(lp_distance(&[1.0, 1.0], &[-1.0, -1.0], &u2, LpExponent::L2).unwrap(), 2.0);
        assert_eq!(lp_distance(&[0.3, 0.1], &[0.3, 0.1], &u2, LpExponent::L2).unwrap(), 0.0);
        let mu = ProbabilityMeasure::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(lp_distance(&[1.0, 0.0], &[0.0, 0.0], &mu, LpExponent::L2).unwrap(), 0.5);
        assert!(matches!(
            lp_distance(&[1.0], &[0.0, 0.0], &mu, LpExponent::L2),
            Err(EntropyError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn infinity_norm_ignores_null_coordinates() {
        let mu = ProbabilityMeasure::new(vec![0.0, 1.0]).unwrap();
        let d: f64 = lp_distance(&[1.0, 0.2], &[-1.0, 0.0], &mu, LpExponent::Infinity).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
        let l1: f64 = lp_distance(&[1.0, 0.2], &[-1.0, 0.0], &mu, LpExponent::Finite(1.0)).unwrap();
        assert!((l1 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn separation_examples() {
        let u2 = ProbabilityMeasure::uniform(2);
        let pair = fam(vec![vec![1.0, 1.0], vec![-1.0, -1.0]]);
        assert!(is_separated(&pair, &u2, 1.9, LpExponent::L2).unwrap());
        let dup = fam(vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(!is_separated(&dup, &u2, 0.1, LpExponent::L2).unwrap());
        // distances 1, sqrt(2), 1: ties at t are not separated
        let three = fam(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]);
        assert!(!is_separated(&three, &u2, 1.0, LpExponent::L2).unwrap());
        assert!(is_separated(&three, &u2, 0.99, LpExponent::L2).unwrap());
    }

    #[test]
    fn packing_examples() {
        let u = ProbabilityMeasure::uniform(3);
        let consts = fam(vec![vec![0.0; 3], vec![1.0; 3]]);
        let opts = EntropyOptions::default();
        assert_eq!(packing_number(&consts, &u, 0.5, &opts).unwrap().value, 2);
        assert_eq!(packing_number(&consts, &u, 1.0, &opts).unwrap().value, 1);
        let u2 = ProbabilityMeasure::uniform(2);
        let sq = sign_square();
        let p = packing_number(&sq, &u2, 1.2, &opts).unwrap();
        assert_eq!(p, EntropyCount { value: 4, exactness: Exactness::Exact });
        assert_eq!(packing_number(&sq, &u2, 1.5, &opts).unwrap().value, 2);
        assert_eq!(packing_number(&sq, &u2, 2.0, &opts).unwrap().value, 1);
    }

    #[test]
    fn covering_examples() {
        let u2 = ProbabilityMeasure::uniform(2);
        let opts = EntropyOptions::default();
        let sq = sign_square();
        assert_eq!(covering_number(&sq, &u2, 2.0, &opts).unwrap().value, 1);
        assert_eq!(covering_number(&sq, &u2, 1.5, &opts).unwrap().value, 2);
        assert_eq!(covering_number(&sq, &u2, 1.0, &opts).unwrap().value, 4);
        let consts = fam(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(covering_number(&consts, &u2, 0.4, &opts).unwrap().value, 2);
        let greedy = covering_number(&sq, &u2, 1.5, &EntropyOptions::greedy()).unwrap();
        assert_eq!(greedy.exactness, Exactness::UpperBound);
        assert!(greedy.value >= 2);
    }

    #[test]
    fn size_limit_refusal_and_force() {
        let rows: Vec<Vec<f64>> = (0..31).map(|i| vec![i as f64 / 31.0]).collect();
        let f = fam(rows);
        let u = ProbabilityMeasure::uniform(1);
        assert!(matches!(
            packing_number(&f, &u, 0.01, &EntropyOptions::default()),
            Err(EntropyError::SizeLimit { m: 31, limit: 30 })
        ));
        assert_eq!(packing_number(&f, &u, 0.01, &EntropyOptions::forced()).unwrap().value, 31);
        let g = packing_number(&f, &u, 0.01, &EntropyOptions::greedy()).unwrap();
        assert_eq!(g, EntropyCount { value: 31, exactness: Exactness::LowerBound });
    }

    #[test]
    fn nonpositive_scale_rejected() {
        let u = ProbabilityMeasure::uniform(2);
        assert!(matches!(
            packing_number(&sign_square(), &u, 0.0, &EntropyOptions::default()),
            Err(EntropyError::InvalidScale(_))
        ));
    }

    #[test]
    fn csv_record_layout() {
        let u2 = ProbabilityMeasure::uniform(2);
        let reps = entropy_reports(&sign_square(), &u2, &[1.5], &EntropyOptions::default()).unwrap();
        assert_eq!(reps[0].csv_record(), ["1.5", "2", "exact", "2", "exact"].map(String::from));
    }
}
