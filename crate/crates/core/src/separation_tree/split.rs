use serde::{Deserialize, Serialize};

use super::{Distribution, TreeError};
use crate::class_model::{FunctionFamily, ProbabilityMeasure};
use crate::metric_entropy::{DistanceMatrix, LpExponent};
use crate::scalar::probability_tolerance;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitSide {
    /// `p_upper >= 1 - beta` and `p_lower >= beta / 2`.
    UpperHeavy,
    /// `p_lower >= 1 - beta` and `p_upper >= beta / 2`.
    LowerHeavy,
}

/// Threshold `a` and mass `beta` with
/// `p_upper = P{X > a + gap}`, `p_lower = P{X < a - gap}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCertificate<S> {
    pub threshold: S,
    pub beta: S,
    pub gap_halfwidth: S,
    pub side: SplitSide,
    pub p_upper: S,
    pub p_lower: S,
}

impl<S: Scalar> SplitCertificate<S> {
    /// Recomputes both tail probabilities from `dist` and checks the side
    /// inequalities.
    pub fn verify(&self, dist: &Distribution<S>) -> bool {
        let tol = probability_tolerance::<S>(dist.atoms().len());
        let upper = dist.prob_above(self.threshold + self.gap_halfwidth);
        let lower = dist.prob_below(self.threshold - self.gap_halfwidth);
        let (heavy, light) = match self.side {
            SplitSide::UpperHeavy => (upper, lower),
            SplitSide::LowerHeavy => (lower, upper),
        };
        self.beta > S::zero()
            && self.beta <= S::of(0.5)
            && heavy >= S::one() - self.beta - tol
            && light >= self.beta / S::of(2.0) - tol
            && light > S::zero()
    }
}

/// Searches for a split with the given gap half-width.
///
/// The tail masses only change when `a +- gap` crosses an atom, so it is
/// enough to try one threshold inside every cell cut out by the points
/// `v +- gap`; the atom values and the midpoints of adjacent atoms are tried
/// as well. For each threshold the admissible `beta` range has an endpoint
/// that is a partial sum of atom masses, so `beta` ranges over those sums
/// and `1/2`. Among valid certificates the one maximizing
/// `min(heavy - (1 - beta), light - beta/2)` wins, ties going to larger
/// `beta`, then to the upper-heavy side, then to the smaller threshold.
pub fn split_with_gap<S: Scalar>(dist: &Distribution<S>, gap: S) -> Option<SplitCertificate<S>> {
    let tol = probability_tolerance::<S>(dist.atoms().len());
    let half = S::of(0.5);
    let two = S::of(2.0);

    let mut atoms = dist.atoms().to_vec();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atoms"));
    let mut values: Vec<S> = atoms.iter().map(|a| a.0).collect();
    values.dedup();

    let mut candidates = values.clone();
    candidates.extend(values.windows(2).map(|w| (w[0] + w[1]) * half));
    let mut breaks: Vec<S> = values.iter().flat_map(|&v| [v - gap, v + gap]).collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    breaks.dedup();
    candidates.extend(breaks.windows(2).map(|w| (w[0] + w[1]) * half));
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    candidates.dedup();

    let mut betas = Vec::new();
    let mut prefix = S::zero();
    for (_, p) in &atoms {
        prefix = prefix + *p;
        betas.push(prefix);
        betas.push(S::one() - prefix);
    }
    betas.push(half);
    betas.retain(|&b| b > tol && b <= half);
    betas.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    betas.dedup();

    let mut best: Option<(S, SplitCertificate<S>)> = None;
    for &a in &candidates {
        let p_upper = dist.prob_above(a + gap);
        let p_lower = dist.prob_below(a - gap);
        for side in [SplitSide::UpperHeavy, SplitSide::LowerHeavy] {
            let (heavy, light) = match side {
                SplitSide::UpperHeavy => (p_upper, p_lower),
                SplitSide::LowerHeavy => (p_lower, p_upper),
            };
            if light <= S::zero() {
                continue;
            }
            for &beta in &betas {
                if heavy < S::one() - beta - tol || light < beta / two - tol {
                    continue;
                }
                let score = (heavy - (S::one() - beta)).min(light - beta / two);
                let better = match &best {
                    None => true,
                    Some((s, c)) => score > *s + tol || ((score - *s).abs() <= tol && beta > c.beta + tol),
                };
                if better {
                    best = Some((
                        score,
                        SplitCertificate { threshold: a, beta, gap_halfwidth: gap, side, p_upper, p_lower },
                    ));
                }
            }
        }
    }
    best.map(|(_, c)| c)
}

/// A split of `dist` with gap half-width `sigma(X) / 6`.
pub fn small_dev_split<S: Scalar>(dist: &Distribution<S>) -> Result<SplitCertificate<S>, TreeError> {
    let sigma = dist.std_dev();
    if !(sigma > S::zero()) {
        return Err(TreeError::ZeroVariance);
    }
    let gap = sigma / S::of(6.0);
    split_with_gap(dist, gap).ok_or(TreeError::SplitNotFound { gap: gap.as_f64() })
}

/// Coordinate chosen to split a separated class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateSplit<S> {
    pub coordinate: usize,
    /// Standard deviation of the coordinate under the uniform law on rows.
    pub std_dev: S,
    pub certificate: SplitCertificate<S>,
}

/// A coordinate and split with gap half-width `t/12` for a `t`-separated
/// class.
///
/// Coordinates are tried by decreasing variance (ties by index); the first
/// one admitting a split wins.
pub fn find_separating_coordinate<S: Scalar>(
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
    t: S,
) -> Result<CoordinateSplit<S>, TreeError> {
    if !(t > S::zero()) {
        return Err(TreeError::InvalidScale(t.as_f64()));
    }
    if family.len() < 2 {
        return Err(TreeError::TooFewFunctions(family.len()));
    }
    let dm = DistanceMatrix::new(family, measure, LpExponent::L2)?;
    if let Some((i, j)) = dm.first_unseparated_pair(t) {
        return Err(TreeError::NotSeparated {
            first: i,
            second: j,
            distance: dm.get(i, j).as_f64(),
            t: t.as_f64(),
        });
    }
    split_unchecked(family, t)
}

pub(super) fn split_unchecked<S: Scalar>(family: &FunctionFamily<S>, t: S) -> Result<CoordinateSplit<S>, TreeError> {
    let gap = t / S::of(12.0);
    let mut order: Vec<(usize, Distribution<S>, S)> = (0..family.domain_size())
        .map(|c| {
            let dist = Distribution::uniform(&family.column(c)).expect("nonempty family");
            let sd = dist.std_dev();
            (c, dist, sd)
        })
        .collect();
    order.sort_by(|a, b| b.2.partial_cmp(&a.2).expect("finite").then(a.0.cmp(&b.0)));
    for (coordinate, dist, std_dev) in order {
        if !(std_dev > S::zero()) {
            break;
        }
        if let Some(certificate) = split_with_gap(&dist, gap) {
            return Ok(CoordinateSplit { coordinate, std_dev, certificate });
        }
    }
    Err(TreeError::SplitNotFound { gap: gap.as_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_point_split() {
        let d: Distribution<f64> = Distribution::new(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let c = small_dev_split(&d).unwrap();
        assert_eq!(c.threshold, 0.0);
        assert_eq!(c.beta, 0.5);
        assert_eq!(c.side, SplitSide::UpperHeavy);
        assert!((c.gap_halfwidth - 1.0 / 6.0).abs() < 1e-15);
        assert!(c.verify(&d));
    }

    #[test]
    fn skewed_two_point_split() {
        let d = Distribution::new(vec![(0.0, 0.75), (1.0, 0.25)]).unwrap();
        let c = small_dev_split(&d).unwrap();
        assert!((c.gap_halfwidth - 3f64.sqrt() / 24.0).abs() < 1e-15);
        assert_eq!(c.threshold, 0.5);
        assert_eq!(c.side, SplitSide::LowerHeavy);
        assert_eq!(c.beta, 0.5);
        assert_eq!((c.p_lower, c.p_upper), (0.75, 0.25));
        assert!(c.verify(&d));
    }

    #[test]
    fn point_mass_has_no_split() {
        let d = Distribution::new(vec![(3.0, 1.0)]).unwrap();
        assert!(matches!(small_dev_split(&d), Err(TreeError::ZeroVariance)));
    }

    #[test]
    fn tampered_certificate_fails_verification() {
        let d = Distribution::new(vec![(0.0, 0.75), (1.0, 0.25)]).unwrap();
        let mut c = small_dev_split(&d).unwrap();
        c.side = SplitSide::UpperHeavy;
        assert!(!c.verify(&d));
    }

    fn fam(rows: Vec<Vec<f64>>) -> FunctionFamily<f64> {
        FunctionFamily::real(rows).unwrap()
    }

    #[test]
    fn coordinate_examples() {
        let mu = ProbabilityMeasure::uniform(2);
        let s = find_separating_coordinate(&fam(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]), &mu, 1.4).unwrap();
        assert_eq!(s.coordinate, 0);
        assert_eq!(s.std_dev, 1.0);
        assert_eq!(s.certificate.threshold, 0.0);
        assert!((s.certificate.gap_halfwidth - 1.4 / 12.0).abs() < 1e-15);

        let s = find_separating_coordinate(&fam(vec![vec![1.0, 1.0], vec![-1.0, -1.0]]), &mu, 1.9).unwrap();
        assert_eq!(s.coordinate, 0);
    }

    #[test]
    fn duplicate_rows_violate_precondition() {
        let mu = ProbabilityMeasure::uniform(2);
        let err = find_separating_coordinate(&fam(vec![vec![0.5, 0.5], vec![0.5, 0.5]]), &mu, 0.3).unwrap_err();
        assert!(matches!(err, TreeError::NotSeparated { first: 0, second: 1, .. }));
        let err = find_separating_coordinate(&fam(vec![vec![0.5, 0.5]]), &mu, 0.3).unwrap_err();
        assert!(matches!(err, TreeError::TooFewFunctions(1)));
    }
}
