//! Finite function classes, atomic probability measures and coordinate
//! subsets, plus the transformations the rest of the crate relies on:
//! atom splitting, grid discretization and seeded random generation.

mod discretize;
mod generate;
mod io;
mod uniformize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{probability_tolerance, Scalar};

pub use discretize::discretize;
pub use generate::{gen_random_family, GeneratorKind};
pub use io::{family_from_json, family_to_json, load_family, save_family};
pub use uniformize::{best_rational, rational_weights, uniformize};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("family must contain at least one function")]
    Empty,
    #[error("domain must contain at least one coordinate")]
    EmptyDomain,
    #[error("row {row} has {len} values, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("value {value} at row {row}, column {column} is outside {allowed}")]
    ValueOutOfRange { row: usize, column: usize, value: f64, allowed: String },
    #[error("value {value} at row {row}, column {column} is not an integer")]
    NotInteger { row: usize, column: usize, value: f64 },
    #[error("cannot parse number {text:?} at row {row}, column {column}")]
    Number { row: usize, column: usize, text: String },
    #[error("cannot parse measure weight {text:?} at index {index}")]
    WeightNumber { index: usize, text: String },
    #[error("measure has {len} weights, domain has {expected} coordinates")]
    MeasureLength { len: usize, expected: usize },
    #[error("weight {weight} at index {index} is negative or not finite")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },
    #[error("coordinate {index} is outside a domain of size {domain_size}")]
    CoordinateOutOfRange { index: usize, domain_size: usize },
    #[error("coordinate list is not strictly increasing at position {position}")]
    CoordinatesNotIncreasing { position: usize },
    #[error("weights are not representable with denominator <= {bound} (residual {residual:e})")]
    NotRepresentable { bound: u64, residual: f64 },
    #[error("scale {0} is outside (0, 1]")]
    InvalidScale(f64),
    #[error("operation requires a {0} family")]
    WrongKind(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown value_kind {0:?}")]
    UnknownKind(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// How the values of a family are constrained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueKind {
    /// Every value lies in `[-1, 1]`.
    RealBounded,
    /// Every value is an integer in `{0, ..., range_max}`.
    IntegerGrid { range_max: u32 },
}

impl ValueKind {
    fn check<S: Scalar>(&self, row: usize, column: usize, value: S) -> Result<(), FamilyError> {
        let v = value.as_f64();
        if !v.is_finite() {
            return Err(FamilyError::ValueOutOfRange {
                row,
                column,
                value: v,
                allowed: self.describe(),
            });
        }
        match *self {
            ValueKind::RealBounded => {
                if value.abs() > S::one() {
                    return Err(FamilyError::ValueOutOfRange {
                        row,
                        column,
                        value: v,
                        allowed: self.describe(),
                    });
                }
            }
            ValueKind::IntegerGrid { range_max } => {
                if value.fract() != S::zero() {
                    return Err(FamilyError::NotInteger { row, column, value: v });
                }
                if v < 0.0 || v > f64::from(range_max) {
                    return Err(FamilyError::ValueOutOfRange {
                        row,
                        column,
                        value: v,
                        allowed: self.describe(),
                    });
                }
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        match self {
            ValueKind::RealBounded => "[-1, 1]".to_string(),
            ValueKind::IntegerGrid { range_max } => format!("{{0, ..., {range_max}}}"),
        }
    }
}

/// A finite class of functions on `{0, ..., n-1}`, stored row-major: one row
/// per function, one column per coordinate.
///
/// Rows need not be distinct.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionFamily<S> {
    domain_size: usize,
    values: Vec<S>,
    kind: ValueKind,
}

impl<S: Scalar> FunctionFamily<S> {
    pub fn new(rows: Vec<Vec<S>>, kind: ValueKind) -> Result<Self, FamilyError> {
        let first = rows.first().ok_or(FamilyError::Empty)?;
        let domain_size = first.len();
        let mut values = Vec::with_capacity(rows.len() * domain_size);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != domain_size {
                return Err(FamilyError::RaggedRow {
                    row: r,
                    len: row.len(),
                    expected: domain_size,
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(domain_size, values, kind)
    }

    pub fn real(rows: Vec<Vec<S>>) -> Result<Self, FamilyError> {
        Self::new(rows, ValueKind::RealBounded)
    }

    pub fn integer(rows: Vec<Vec<S>>, range_max: u32) -> Result<Self, FamilyError> {
        Self::new(rows, ValueKind::IntegerGrid { range_max })
    }

    /// Builds a family from row-major values.
    pub fn from_flat(domain_size: usize, values: Vec<S>, kind: ValueKind) -> Result<Self, FamilyError> {
        if domain_size == 0 {
            return Err(FamilyError::EmptyDomain);
        }
        if values.is_empty() {
            return Err(FamilyError::Empty);
        }
        if !values.len().is_multiple_of(domain_size) {
            return Err(FamilyError::RaggedRow {
                row: values.len() / domain_size,
                len: values.len() % domain_size,
                expected: domain_size,
            });
        }
        for (k, &v) in values.iter().enumerate() {
            kind.check(k / domain_size, k % domain_size, v)?;
        }
        Ok(Self { domain_size, values, kind })
    }

    /// Number of functions `m`.
    pub fn len(&self) -> usize {
        self.values.len() / self.domain_size
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of coordinates `n`.
    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn is_integer(&self) -> bool {
        matches!(self.kind, ValueKind::IntegerGrid { .. })
    }

    pub fn row(&self, index: usize) -> &[S] {
        &self.values[index * self.domain_size..(index + 1) * self.domain_size]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[S]> + '_ {
        self.values.chunks_exact(self.domain_size)
    }

    pub fn value(&self, row: usize, column: usize) -> S {
        self.values[row * self.domain_size + column]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.rows().map(<[S]>::to_vec).collect()
    }

    /// Values taken by all functions at one coordinate.
    pub fn column(&self, column: usize) -> Vec<S> {
        self.rows().map(|r| r[column]).collect()
    }

    /// Sub-family made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        assert!(!rows.is_empty(), "selection must keep at least one row");
        let mut values = Vec::with_capacity(rows.len() * self.domain_size);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self { domain_size: self.domain_size, values, kind: self.kind }
    }

    /// Restriction of every function to the coordinates in `subset`.
    pub fn restrict(&self, subset: &CoordinateSubset) -> Result<Self, FamilyError> {
        if subset.is_empty() {
            return Err(FamilyError::EmptyDomain);
        }
        if let Some(&last) = subset.indices().last() {
            if last >= self.domain_size {
                return Err(FamilyError::CoordinateOutOfRange {
                    index: last,
                    domain_size: self.domain_size,
                });
            }
        }
        let values = self
            .rows()
            .flat_map(|row| subset.iter().map(move |i| row[i]))
            .collect();
        Ok(Self { domain_size: subset.len(), values, kind: self.kind })
    }

    /// Number of pairwise distinct rows.
    pub fn distinct_rows(&self) -> usize {
        let mut seen: Vec<&[S]> = Vec::new();
        for row in self.rows() {
            if !seen.contains(&row) {
                seen.push(row);
            }
        }
        seen.len()
    }

    /// Indices of the first occurrence of every distinct row.
    pub fn distinct_row_indices(&self) -> Vec<usize> {
        let mut kept: Vec<usize> = Vec::new();
        for (r, row) in self.rows().enumerate() {
            if !kept.iter().any(|&k| self.row(k) == row) {
                kept.push(r);
            }
        }
        kept
    }

    pub(crate) fn flat(&self) -> &[S] {
        &self.values
    }
}

/// Atomic probability measure on `{0, ..., n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMeasure<S> {
    weights: Vec<S>,
    is_uniform: bool,
}

impl<S: Scalar> ProbabilityMeasure<S> {
    pub fn new(weights: Vec<S>) -> Result<Self, FamilyError> {
        if weights.is_empty() {
            return Err(FamilyError::EmptyDomain);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !(w >= S::zero()) || !w.is_finite() {
                return Err(FamilyError::NegativeWeight { index, weight: w.as_f64() });
            }
        }
        let sum: S = weights.iter().copied().sum();
        if (sum - S::one()).abs() > probability_tolerance::<S>(weights.len()) {
            return Err(FamilyError::WeightSum { sum: sum.as_f64() });
        }
        let is_uniform = weights.iter().all(|&w| w == weights[0]);
        Ok(Self { weights, is_uniform })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform measure needs a nonempty domain");
        Self { weights: vec![S::one() / S::of_usize(n); n], is_uniform: true }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> S {
        self.weights[i]
    }

    pub fn is_uniform(&self) -> bool {
        self.is_uniform
    }

    pub fn check_domain(&self, domain_size: usize) -> Result<(), FamilyError> {
        if self.weights.len() != domain_size {
            return Err(FamilyError::MeasureLength {
                len: self.weights.len(),
                expected: domain_size,
            });
        }
        Ok(())
    }
}

/// Strictly increasing list of coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoordinateSubset {
    indices: Vec<usize>,
}

impl CoordinateSubset {
    pub fn new(indices: Vec<usize>, domain_size: usize) -> Result<Self, FamilyError> {
        for (position, w) in indices.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(FamilyError::CoordinatesNotIncreasing { position: position + 1 });
            }
        }
        if let Some(&last) = indices.last() {
            if last >= domain_size {
                return Err(FamilyError::CoordinateOutOfRange { index: last, domain_size });
            }
        }
        Ok(Self { indices })
    }

    /// Sorts and deduplicates `indices`.
    pub fn from_unsorted(mut indices: Vec<usize>, domain_size: usize) -> Result<Self, FamilyError> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices, domain_size)
    }

    pub fn full(n: usize) -> Self {
        Self { indices: (0..n).collect() }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }
}
