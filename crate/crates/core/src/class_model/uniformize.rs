//! Atom splitting: turn a rational measure into the uniform measure on a
//! larger domain by replicating coordinates.

use num_integer::Integer;
use num_rational::Ratio;

use super::{FamilyError, FunctionFamily, ProbabilityMeasure};
use crate::scalar::probability_tolerance;
use crate::Scalar;

/// Closest fraction to `x` in `[0, 1]` with denominator at most `max_den`
/// (continued fractions with a final semiconvergent).
pub fn best_rational(x: f64, max_den: u64) -> Ratio<u64> {
    assert!(max_den >= 1);
    assert!((0.0..=1.0).contains(&x), "best_rational expects x in [0, 1]");
    let (mut h0, mut k0, mut h1, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > u64::MAX as f64 / 2.0 {
            break;
        }
        let a = a as u64;
        let k2 = a.saturating_mul(k1).saturating_add(k0);
        if k2 > max_den {
            // best semiconvergent below the bound
            let t = (max_den - k0) / k1.max(1);
            let (hs, ks) = (t * h1 + h0, t * k1 + k0);
            let semi = hs as f64 / ks as f64;
            let conv = h1 as f64 / k1 as f64;
            if k1 == 0 || (ks > 0 && (semi - x).abs() < (conv - x).abs()) {
                return Ratio::new(hs, ks);
            }
            break;
        }
        let h2 = a * h1 + h0;
        h0 = h1;
        k0 = k1;
        h1 = h2;
        k1 = k2;
        let frac = r - a as f64;
        if frac <= 1e-15 || (h1 as f64 / k1 as f64 - x).abs() <= f64::EPSILON * x.max(f64::MIN_POSITIVE) {
            break;
        }
        r = 1.0 / frac;
    }
    Ratio::new(h1, k1.max(1))
}

/// Expresses every weight as `k_i / M` with a common denominator `M <= bound`.
pub fn rational_weights<S: Scalar>(
    measure: &ProbabilityMeasure<S>,
    bound: u64,
) -> Result<Vec<Ratio<u64>>, FamilyError> {
    if bound == 0 {
        return Err(FamilyError::InvalidParameter("denominator bound must be positive".into()));
    }
    let tol = probability_tolerance::<S>(measure.len()).as_f64();
    let mut residual = 0f64;
    let mut ratios = Vec::with_capacity(measure.len());
    for &w in measure.weights() {
        let w = w.as_f64().clamp(0.0, 1.0);
        let r = best_rational(w, bound);
        residual = residual.max((w - *r.numer() as f64 / *r.denom() as f64).abs());
        ratios.push(r);
    }
    if residual > tol {
        return Err(FamilyError::NotRepresentable { bound, residual });
    }
    let common = ratios.iter().fold(1u64, |acc, r| acc.lcm(r.denom()));
    if common > bound {
        return Err(FamilyError::NotRepresentable { bound, residual: 1.0 / bound as f64 });
    }
    let total: u64 = ratios.iter().map(|r| r.numer() * (common / r.denom())).sum();
    if total != common {
        return Err(FamilyError::NotRepresentable {
            bound,
            residual: (total as f64 - common as f64).abs() / common as f64,
        });
    }
    Ok(ratios)
}

/// Replaces atom `i` of weight `k_i / M` by `k_i` copies of coordinate `i`,
/// each of weight `1 / M`. Zero-weight atoms disappear.
///
/// Every `L_p(mu)` distance is preserved exactly.
pub fn uniformize<S: Scalar>(
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
    denominator_bound: u64,
) -> Result<(FunctionFamily<S>, ProbabilityMeasure<S>), FamilyError> {
    measure.check_domain(family.domain_size())?;
    let ratios = rational_weights(measure, denominator_bound)?;
    let common = ratios.iter().fold(1u64, |acc, r| acc.lcm(r.denom()));
    let copies: Vec<usize> = ratios
        .iter()
        .map(|r| (r.numer() * (common / r.denom())) as usize)
        .collect();
    let columns: Vec<usize> = copies
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
        .collect();
    let values = family
        .rows()
        .flat_map(|row| columns.iter().map(move |&i| row[i]))
        .collect();
    let expanded = FunctionFamily::from_flat(columns.len(), values, family.kind())?;
    Ok((expanded, ProbabilityMeasure::uniform(columns.len())))
}
