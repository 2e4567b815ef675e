use super::{FamilyError, FunctionFamily, ValueKind};
use crate::Scalar;

/// Maps a `[-1, 1]`-valued family onto the integer grid `{0, ..., floor(14/t)}`
/// by `f(i) -> floor(7 (f(i) + 1) / t)`.
///
/// The `+1` shift makes the grid non-negative; it changes neither distances
/// nor shattering. For any two rows the discretized `L_2(mu)` distance is at
/// least `(7/t) ||f - g|| - 1`, so a `t`-separated input becomes
/// 6-separated.
pub fn discretize<S: Scalar>(family: &FunctionFamily<S>, t: S) -> Result<FunctionFamily<S>, FamilyError> {
    if family.kind() != ValueKind::RealBounded {
        return Err(FamilyError::WrongKind("real-valued"));
    }
    if !(t > S::zero() && t <= S::one()) {
        return Err(FamilyError::InvalidScale(t.as_f64()));
    }
    let seven = S::of(7.0);
    let top = (seven * S::of(2.0) / t).floor();
    let range_max = top
        .to_u32()
        .ok_or_else(|| FamilyError::InvalidParameter(format!("grid size {top} too large")))?;
    let values = family
        .flat()
        .iter()
        .map(|&f| (seven * (f + S::one()) / t).floor().min(top).max(S::zero()))
        .collect();
    FunctionFamily::from_flat(family.domain_size(), values, ValueKind::IntegerGrid { range_max })
}
