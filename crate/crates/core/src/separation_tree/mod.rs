//! Small-deviation splits and separating trees.
//!
//! A finite `t`-separated class, viewed as a uniform probability space,
//! always has a coordinate of standard deviation at least `t/2`; on that
//! coordinate a threshold `a` and a mass parameter `beta` in `(0, 1/2]`
//! put a `1 - beta` share of the class above `a + t/12` and a `beta/2`
//! share below `a - t/12` (or the mirror image). Splitting recursively on
//! such coordinates gives a `t/6`-separating tree with at least `sqrt(|A|)`
//! leaves.

mod split;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class_model::FamilyError;
use crate::metric_entropy::EntropyError;
use crate::scalar::probability_tolerance;
use crate::Scalar;

pub use split::{find_separating_coordinate, small_dev_split, split_with_gap, CoordinateSplit, SplitCertificate, SplitSide};
pub use tree::{build_separating_tree, validate_tree, NodeSplit, SeparatingTree, TreeNode, TreeViolation};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("distribution has zero variance")]
    ZeroVariance,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("no small-deviation split found (gap {gap}); this is a search defect")]
    SplitNotFound { gap: f64 },
    #[error("rows {first} and {second} are at distance {distance}, not more than t = {t}")]
    NotSeparated { first: usize, second: usize, distance: f64, t: f64 },
    #[error("need at least two functions to split, got {0}")]
    TooFewFunctions(usize),
    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Finite distribution on the real line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution<S> {
    atoms: Vec<(S, S)>,
}

/// `E|X - EX|^2` and `E|X - X'|^2`, the latter by direct double summation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport<S> {
    pub variance: S,
    pub pair_expectation: S,
}

impl<S: Scalar> Distribution<S> {
    /// Atoms are `(value, probability)` pairs.
    pub fn new(atoms: Vec<(S, S)>) -> Result<Self, TreeError> {
        if atoms.is_empty() {
            return Err(TreeError::InvalidDistribution("no atoms".into()));
        }
        for &(v, p) in &atoms {
            if !v.is_finite() || !p.is_finite() || p < S::zero() {
                return Err(TreeError::InvalidDistribution(format!("bad atom ({v}, {p})")));
            }
        }
        let total: S = atoms.iter().map(|a| a.1).sum();
        if (total - S::one()).abs() > probability_tolerance::<S>(atoms.len()) {
            return Err(TreeError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { atoms })
    }

    /// Empirical distribution giving each value weight `1/len`.
    pub fn uniform(values: &[S]) -> Result<Self, TreeError> {
        if values.is_empty() {
            return Err(TreeError::InvalidDistribution("no atoms".into()));
        }
        let w = S::one() / S::of_usize(values.len());
        Ok(Self { atoms: values.iter().map(|&v| (v, w)).collect() })
    }

    pub fn atoms(&self) -> &[(S, S)] {
        &self.atoms
    }

    pub fn mean(&self) -> S {
        self.atoms.iter().map(|&(v, p)| v * p).sum()
    }

    /// `E|X - a|^2`.
    pub fn mean_square_about(&self, a: S) -> S {
        self.atoms.iter().map(|&(v, p)| p * (v - a) * (v - a)).sum()
    }

    pub fn variance(&self) -> VarianceReport<S> {
        let variance = self.mean_square_about(self.mean());
        let pair_expectation = self
            .atoms
            .iter()
            .map(|&(x, p)| self.atoms.iter().map(|&(y, q)| p * q * (x - y) * (x - y)).sum::<S>())
            .sum();
        VarianceReport { variance, pair_expectation }
    }

    pub fn std_dev(&self) -> S {
        self.variance().variance.sqrt()
    }

    /// `P{X > c}`.
    pub fn prob_above(&self, c: S) -> S {
        self.atoms.iter().filter(|a| a.0 > c).map(|a| a.1).sum()
    }

    /// `P{X < c}`.
    pub fn prob_below(&self, c: S) -> S {
        self.atoms.iter().filter(|a| a.0 < c).map(|a| a.1).sum()
    }
}

/// Free-function form of [`Distribution::variance`].
pub fn variance<S: Scalar>(dist: &Distribution<S>) -> VarianceReport<S> {
    dist.variance()
}
