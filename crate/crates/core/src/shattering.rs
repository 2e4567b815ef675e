//! Shattered centers of integer classes and the scale-sensitive shattering
//! dimension of real classes.
//!
//! Both searches walk the lattice of (support, level) pairs depth first,
//! adding coordinates in increasing order and keeping, for every sign
//! pattern of the current support, the set of rows that realize it.
//! Shattering is inherited by sub-centers, so a failed extension is never
//! revisited and the walk is complete.
//!
//! Integer centers use strict inequalities (`f > h` / `f < h`); real
//! shattering at scale `t` uses `f <= h` / `f >= h + t`. The two notions are
//! kept apart.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class_model::{CoordinateSubset, FamilyError, FunctionFamily};
use crate::Scalar;

/// Default cap on the number of candidate extensions examined.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Largest support for which `shatters` enumerates all sign patterns.
const MAX_PATTERN_BITS: usize = 24;

#[derive(Debug, Error)]
pub enum ShatterError {
    #[error("operation requires an integer-valued family")]
    NotIntegerValued,
    #[error("center has {support} coordinates but {levels} levels")]
    LevelMismatch { support: usize, levels: usize },
    #[error("center support too large ({0} coordinates)")]
    SupportTooLarge(usize),
    #[error("enumeration budget of {0} candidate centers exceeded")]
    BudgetExceeded(u64),
    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("shattering dimension increases from {low} at t={t_low} to {high} at t={t_high}")]
    NonMonotone { t_low: f64, low: usize, t_high: f64, high: usize },
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// A coordinate subset with one integer level per coordinate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Center {
    pub support: CoordinateSubset,
    pub levels: Vec<i64>,
}

impl Center {
    /// The 0-dimensional center.
    pub fn trivial() -> Self {
        Self { support: CoordinateSubset::empty(), levels: Vec::new() }
    }

    pub fn new(support: CoordinateSubset, levels: Vec<i64>) -> Result<Self, ShatterError> {
        if support.len() != levels.len() {
            return Err(ShatterError::LevelMismatch { support: support.len(), levels: levels.len() });
        }
        Ok(Self { support, levels })
    }

    pub fn dimension(&self) -> usize {
        self.support.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.support.is_empty()
    }
}

/// A shattered center together with one realizing row per sign pattern.
///
/// `assignments[p]` realizes the pattern whose bit `j` is set exactly when
/// the sign at `support[j]` is `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterWitness {
    pub center: Center,
    pub assignments: Vec<usize>,
}

impl ShatterWitness {
    /// Re-checks every assignment against the strict center inequalities.
    pub fn verify<S: Scalar>(&self, family: &FunctionFamily<S>) -> bool {
        let k = self.center.dimension();
        if self.assignments.len() != 1 << k {
            return false;
        }
        self.assignments.iter().enumerate().all(|(pattern, &row)| {
            row < family.len()
                && self.center.support.iter().zip(&self.center.levels).enumerate().all(|(j, (c, &h))| {
                    let v = family.value(row, c).as_f64();
                    if pattern >> j & 1 == 1 {
                        v > h as f64
                    } else {
                        v < h as f64
                    }
                })
        })
    }
}

/// Largest t-shattered set of a real class with its level function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealShattering<S> {
    pub dimension: usize,
    pub support: CoordinateSubset,
    pub levels: Vec<S>,
}

struct LevelSplit {
    below: FixedBitSet,
    above: FixedBitSet,
}

/// Candidate levels per coordinate with the rows strictly/weakly on each side.
struct Engine {
    m: usize,
    splits: Vec<Vec<LevelSplit>>,
    budget: u64,
    used: u64,
}

enum Flow {
    Descend,
    Skip,
    Stop,
}

impl Engine {
    /// Drops every level whose split is dominated by another level of the
    /// same coordinate (both sides contained in the other's). Only valid for
    /// searches that need one shattered center per support. Returns the
    /// kept level indices per coordinate.
    fn prune_dominated(&mut self) -> Vec<Vec<usize>> {
        let mut kept_all = Vec::with_capacity(self.splits.len());
        for splits in &mut self.splits {
            let covers = |a: &LevelSplit, b: &LevelSplit| a.below.is_superset(&b.below) && a.above.is_superset(&b.above);
            let kept: Vec<usize> = (0..splits.len())
                .filter(|&i| {
                    !(0..splits.len()).any(|j| {
                        j != i && covers(&splits[j], &splits[i]) && (!covers(&splits[i], &splits[j]) || j < i)
                    })
                })
                .collect();
            let mut old: Vec<Option<LevelSplit>> = std::mem::take(splits).into_iter().map(Some).collect();
            *splits = kept.iter().map(|&i| old[i].take().expect("kept once")).collect();
            kept_all.push(kept);
        }
        kept_all
    }

    /// Depth-first search for the longest shattered path, skipping subtrees
    /// that cannot beat the best found so far.
    fn longest(&mut self, ceiling: usize) -> Result<Vec<(usize, usize)>, ShatterError> {
        let n = self.splits.len();
        let mut best: Vec<(usize, usize)> = Vec::new();
        self.walk(&mut |path: &[(usize, usize)], _: &[FixedBitSet]| {
            if path.len() > best.len() {
                best = path.to_vec();
            }
            let remaining = path.last().map_or(n, |&(c, _)| n - c - 1);
            if best.len() >= ceiling {
                Flow::Stop
            } else if path.len() >= ceiling || path.len() + remaining <= best.len() {
                Flow::Skip
            } else {
                Flow::Descend
            }
        })?;
        Ok(best)
    }

    fn root(&self) -> Vec<FixedBitSet> {
        let mut all = FixedBitSet::with_capacity(self.m);
        all.insert_range(..);
        vec![all]
    }

    fn extend(&self, patterns: &[FixedBitSet], split: &LevelSplit) -> Option<Vec<FixedBitSet>> {
        let half = patterns.len();
        let mut next = Vec::with_capacity(2 * half);
        for p in patterns {
            let mut low = p.clone();
            low.intersect_with(&split.below);
            if low.is_clear() {
                return None;
            }
            next.push(low);
        }
        for p in patterns {
            let mut high = p.clone();
            high.intersect_with(&split.above);
            if high.is_clear() {
                return None;
            }
            next.push(high);
        }
        Some(next)
    }

    /// Visits every shattered (support, level) pair in lexicographic preorder.
    /// `visit` receives the path of `(coordinate, level index)` and the
    /// pattern row sets.
    fn walk<F>(&mut self, visit: &mut F) -> Result<(), ShatterError>
    where
        F: FnMut(&[(usize, usize)], &[FixedBitSet]) -> Flow,
    {
        let root = self.root();
        let mut path = Vec::new();
        if let Flow::Descend = visit(&path, &root) {
            self.descend(0, &root, &mut path, visit)?;
        }
        Ok(())
    }

    fn descend<F>(
        &mut self,
        start: usize,
        patterns: &[FixedBitSet],
        path: &mut Vec<(usize, usize)>,
        visit: &mut F,
    ) -> Result<bool, ShatterError>
    where
        F: FnMut(&[(usize, usize)], &[FixedBitSet]) -> Flow,
    {
        for c in start..self.splits.len() {
            for l in 0..self.splits[c].len() {
                self.used += 1;
                if self.used > self.budget {
                    return Err(ShatterError::BudgetExceeded(self.budget));
                }
                let Some(next) = self.extend(patterns, &self.splits[c][l]) else {
                    continue;
                };
                path.push((c, l));
                let flow = visit(path, &next);
                let stop = match flow {
                    Flow::Stop => true,
                    Flow::Skip => false,
                    Flow::Descend => self.descend(c + 1, &next, path, visit)?,
                };
                path.pop();
                if stop {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

fn integer_table<S: Scalar>(family: &FunctionFamily<S>) -> Result<Vec<i64>, ShatterError> {
    if !family.is_integer() {
        return Err(ShatterError::NotIntegerValued);
    }
    Ok(family.flat().iter().map(|v| v.as_f64() as i64).collect())
}

/// Integer levels strictly between the smallest and largest value of each
/// coordinate; no other level can be shattered.
fn integer_engine<S: Scalar>(family: &FunctionFamily<S>, budget: u64) -> Result<(Engine, Vec<Vec<i64>>), ShatterError> {
    let table = integer_table(family)?;
    let (m, n) = (family.len(), family.domain_size());
    let mut splits = Vec::with_capacity(n);
    let mut levels = Vec::with_capacity(n);
    for c in 0..n {
        let col: Vec<i64> = (0..m).map(|r| table[r * n + c]).collect();
        let lo = *col.iter().min().expect("nonempty");
        let hi = *col.iter().max().expect("nonempty");
        let mut cs = Vec::new();
        let mut ls = Vec::new();
        for h in lo + 1..hi {
            let mut below = FixedBitSet::with_capacity(m);
            let mut above = FixedBitSet::with_capacity(m);
            for (r, &v) in col.iter().enumerate() {
                below.set(r, v < h);
                above.set(r, v > h);
            }
            cs.push(LevelSplit { below, above });
            ls.push(h);
        }
        splits.push(cs);
        levels.push(ls);
    }
    Ok((Engine { m, splits, budget, used: 0 }, levels))
}

fn center_from_path(path: &[(usize, usize)], levels: &[Vec<i64>]) -> Center {
    Center {
        support: CoordinateSubset::from_sorted_unchecked(path.iter().map(|&(c, _)| c).collect()),
        levels: path.iter().map(|&(c, l)| levels[c][l]).collect(),
    }
}

/// Returns a witness iff `family` shatters `center` (strict inequalities).
/// The trivial center is shattered by every nonempty family.
pub fn shatters<S: Scalar>(
    family: &FunctionFamily<S>,
    center: &Center,
) -> Result<Option<ShatterWitness>, ShatterError> {
    let table = integer_table(family)?;
    let n = family.domain_size();
    if center.support.len() != center.levels.len() {
        return Err(ShatterError::LevelMismatch {
            support: center.support.len(),
            levels: center.levels.len(),
        });
    }
    if let Some(&last) = center.support.indices().last() {
        if last >= n {
            return Err(FamilyError::CoordinateOutOfRange { index: last, domain_size: n }.into());
        }
    }
    let k = center.dimension();
    if k > MAX_PATTERN_BITS {
        return Err(ShatterError::SupportTooLarge(k));
    }
    let mut assignments = Vec::with_capacity(1 << k);
    for pattern in 0..1usize << k {
        let hit = (0..family.len()).find(|&r| {
            center.support.iter().zip(&center.levels).enumerate().all(|(j, (c, &h))| {
                let v = table[r * n + c];
                if pattern >> j & 1 == 1 {
                    v > h
                } else {
                    v < h
                }
            })
        });
        match hit {
            Some(r) => assignments.push(r),
            None => return Ok(None),
        }
    }
    Ok(Some(ShatterWitness { center: center.clone(), assignments }))
}

/// Every center of dimension at most `max_dim` shattered by an integer
/// family, trivial center first, then in lexicographic order.
pub fn enumerate_shattered_centers<S: Scalar>(
    family: &FunctionFamily<S>,
    max_dim: usize,
    budget: u64,
) -> Result<Vec<Center>, ShatterError> {
    enumerate_with_witnesses(family, max_dim, budget).map(|ws| ws.into_iter().map(|w| w.center).collect())
}

/// As [`enumerate_shattered_centers`], with one witness per center.
pub fn enumerate_with_witnesses<S: Scalar>(
    family: &FunctionFamily<S>,
    max_dim: usize,
    budget: u64,
) -> Result<Vec<ShatterWitness>, ShatterError> {
    let (mut engine, levels) = integer_engine(family, budget)?;
    let mut out = Vec::new();
    engine.walk(&mut |path: &[(usize, usize)], patterns: &[FixedBitSet]| {
        out.push(ShatterWitness {
            center: center_from_path(path, &levels),
            assignments: patterns.iter().map(|p| p.ones().next().expect("nonempty")).collect(),
        });
        if path.len() < max_dim {
            Flow::Descend
        } else {
            Flow::Skip
        }
    })?;
    Ok(out)
}

/// Number of shattered centers of any dimension.
pub fn count_shattered_centers<S: Scalar>(family: &FunctionFamily<S>, budget: u64) -> Result<usize, ShatterError> {
    let (mut engine, _) = integer_engine(family, budget)?;
    let mut count = 0usize;
    engine.walk(&mut |_: &[(usize, usize)], _: &[FixedBitSet]| {
        count += 1;
        Flow::Descend
    })?;
    Ok(count)
}

/// Highest-dimensional shattered center; the lexicographically smallest one
/// among ties.
pub fn max_shattered_center<S: Scalar>(family: &FunctionFamily<S>, budget: u64) -> Result<Center, ShatterError> {
    let (mut engine, levels) = integer_engine(family, budget)?;
    let kept = engine.prune_dominated();
    let best = engine.longest(dimension_ceiling(family))?;
    Ok(Center {
        support: CoordinateSubset::from_sorted_unchecked(best.iter().map(|&(c, _)| c).collect()),
        levels: best.iter().map(|&(c, l)| levels[c][kept[c][l]]).collect(),
    })
}

/// Maximal dimension of a center shattered by an integer family.
pub fn vc_integer<S: Scalar>(family: &FunctionFamily<S>, budget: u64) -> Result<usize, ShatterError> {
    max_shattered_center(family, budget).map(|c| c.dimension())
}

/// `2^d` distinct rows are needed to shatter `d` coordinates.
fn dimension_ceiling<S: Scalar>(family: &FunctionFamily<S>) -> usize {
    let distinct = family.distinct_rows();
    (usize::BITS - 1 - distinct.leading_zeros()) as usize
}

/// Largest `sigma` with a level function `h` such that every subset
/// `sigma'` of `sigma` has a row with `f <= h` on `sigma'` and `f >= h + t`
/// on `sigma \ sigma'`. Levels range over attained values.
pub fn vc_real<S: Scalar>(family: &FunctionFamily<S>, t: S, budget: u64) -> Result<RealShattering<S>, ShatterError> {
    if !(t > S::zero()) {
        return Err(ShatterError::InvalidScale(t.as_f64()));
    }
    let (m, n) = (family.len(), family.domain_size());
    let mut splits = Vec::with_capacity(n);
    let mut levels: Vec<Vec<S>> = Vec::with_capacity(n);
    for c in 0..n {
        let col = family.column(c);
        let mut attained = col.clone();
        attained.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        attained.dedup();
        let top = *attained.last().expect("nonempty");
        let mut cs = Vec::new();
        let mut ls = Vec::new();
        for &h in &attained {
            let upper = h + t;
            if upper > top {
                break;
            }
            let mut below = FixedBitSet::with_capacity(m);
            let mut above = FixedBitSet::with_capacity(m);
            for (r, &v) in col.iter().enumerate() {
                below.set(r, v <= h);
                above.set(r, v >= upper);
            }
            cs.push(LevelSplit { below, above });
            ls.push(h);
        }
        splits.push(cs);
        levels.push(ls);
    }
    let mut engine = Engine { m, splits, budget, used: 0 };
    let kept = engine.prune_dominated();
    let best = engine.longest(dimension_ceiling(family))?;
    Ok(RealShattering {
        dimension: best.len(),
        support: CoordinateSubset::from_sorted_unchecked(best.iter().map(|&(c, _)| c).collect()),
        levels: best.iter().map(|&(c, l)| levels[c][kept[c][l]]).collect(),
    })
}

/// `vc_real` at every scale of `grid`, checked to be non-increasing in `t`.
pub fn vc_curve<S: Scalar>(family: &FunctionFamily<S>, grid: &[S], budget: u64) -> Result<Vec<(S, usize)>, ShatterError> {
    let curve = grid
        .iter()
        .map(|&t| vc_real(family, t, budget).map(|r| (t, r.dimension)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sorted = curve.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scales"));
    for w in sorted.windows(2) {
        if w[1].1 > w[0].1 {
            return Err(ShatterError::NonMonotone {
                t_low: w[0].0.as_f64(),
                low: w[0].1,
                t_high: w[1].0.as_f64(),
                high: w[1].1,
            });
        }
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(rows: Vec<Vec<f64>>, p: u32) -> FunctionFamily<f64> {
        FunctionFamily::integer(rows, p).unwrap()
    }

    fn center(support: Vec<usize>, levels: Vec<i64>, n: usize) -> Center {
        Center::new(CoordinateSubset::new(support, n).unwrap(), levels).unwrap()
    }

    fn cube02() -> FunctionFamily<f64> {
        int(vec![vec![0.0, 0.0], vec![0.0, 2.0], vec![2.0, 0.0], vec![2.0, 2.0]], 2)
    }

    #[test]
    fn trivial_center_of_single_function() {
        let fam = int(vec![vec![0.0, 0.0]], 0);
        let w = shatters(&fam, &Center::trivial()).unwrap().unwrap();
        assert_eq!(w.assignments, vec![0]);
    }

    #[test]
    fn strict_inequalities() {
        let fam = int(vec![vec![2.0], vec![0.0]], 2);
        let w = shatters(&fam, &center(vec![0], vec![1], 1)).unwrap().unwrap();
        assert_eq!(w.assignments, vec![1, 0]);
        assert!(w.verify(&fam));
        assert!(shatters(&fam, &center(vec![0], vec![0], 1)).unwrap().is_none());
    }

    #[test]
    fn shatters_rejects_bad_centers() {
        let fam = int(vec![vec![2.0], vec![0.0]], 2);
        assert!(shatters(&fam, &center(vec![0], vec![1], 3)).is_ok());
        let out_of_range = Center { support: CoordinateSubset::full(2), levels: vec![1, 1] };
        assert!(matches!(shatters(&fam, &out_of_range), Err(ShatterError::Family(_))));
        let real = FunctionFamily::<f64>::real(vec![vec![0.5]]).unwrap();
        assert!(matches!(shatters(&real, &Center::trivial()), Err(ShatterError::NotIntegerValued)));
    }

    #[test]
    fn enumeration_of_two_point_family() {
        let fam = int(vec![vec![0.0], vec![2.0]], 2);
        let centers = enumerate_shattered_centers(&fam, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(centers, vec![Center::trivial(), center(vec![0], vec![1], 1)]);
        let only_trivial = enumerate_shattered_centers(&fam, 0, DEFAULT_BUDGET).unwrap();
        assert_eq!(only_trivial, vec![Center::trivial()]);
    }

    #[test]
    fn enumeration_of_cube() {
        let centers = enumerate_shattered_centers(&cube02(), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            centers,
            vec![
                Center::trivial(),
                center(vec![0], vec![1], 2),
                center(vec![0, 1], vec![1, 1], 2),
                center(vec![1], vec![1], 2),
            ]
        );
    }

    #[test]
    fn vc_integer_examples() {
        assert_eq!(vc_integer(&cube02(), DEFAULT_BUDGET).unwrap(), 2);
        assert_eq!(vc_integer(&int(vec![vec![3.0, 1.0]], 3), DEFAULT_BUDGET).unwrap(), 0);
        assert_eq!(vc_integer(&int(vec![vec![0.0], vec![1.0], vec![2.0]], 2), DEFAULT_BUDGET).unwrap(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let fam = int(vec![vec![0.0, 0.0], vec![9.0, 9.0]], 9);
        assert!(matches!(
            enumerate_shattered_centers(&fam, 2, 3),
            Err(ShatterError::BudgetExceeded(3))
        ));
    }

    fn sign_square() -> FunctionFamily<f64> {
        FunctionFamily::real(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]).unwrap()
    }

    #[test]
    fn vc_real_examples() {
        let sq = sign_square();
        let r = vc_real(&sq, 2.0, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.dimension, 2);
        assert_eq!(r.levels, vec![-1.0, -1.0]);
        assert_eq!(vc_real(&sq, 2.5, DEFAULT_BUDGET).unwrap().dimension, 0);
        let fam = FunctionFamily::<f64>::real(vec![vec![0.9, 0.0], vec![0.0, 0.9], vec![0.9, 0.9], vec![0.0, 0.0]]).unwrap();
        let r = vc_real(&fam, 0.9, DEFAULT_BUDGET).unwrap();
        assert_eq!((r.dimension, r.levels.clone()), (2, vec![0.0, 0.0]));
        assert_eq!(vc_real(&fam, 0.91, DEFAULT_BUDGET).unwrap().dimension, 0);
    }

    #[test]
    fn vc_real_prefers_lexicographically_smallest_support() {
        // coordinates 1 and 2 both shatter alone; 0 is constant
        let fam = FunctionFamily::<f64>::real(vec![vec![0.0, -1.0, 1.0], vec![0.0, 1.0, -1.0]]).unwrap();
        let r = vc_real(&fam, 1.0, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.support.indices(), &[1]);
    }

    #[test]
    fn vc_curve_examples() {
        let sq = sign_square();
        let curve = vc_curve(&sq, &[0.5, 1.0, 2.0], DEFAULT_BUDGET).unwrap();
        assert_eq!(curve, vec![(0.5, 2), (1.0, 2), (2.0, 2)]);
        assert_eq!(vc_curve(&sq, &[2.5], DEFAULT_BUDGET).unwrap(), vec![(2.5, 0)]);
        assert!(vc_real(&sq, 0.0, DEFAULT_BUDGET).is_err());
    }
}
