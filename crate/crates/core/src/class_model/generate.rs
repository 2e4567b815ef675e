use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FamilyError, FunctionFamily, ValueKind};
use crate::{rng, Scalar};

/// Random family generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Independent uniform values in `[-1, 1]`.
    UniformReal,
    /// Independent uniform signs.
    SignVectors,
    /// Independent uniform integers in `{0, ..., range_max}`.
    IntegerGrid { range_max: u32 },
    /// Random convex combinations of `max(2, n)` uniform points of the cube.
    ConvexHullSections,
}

/// Draws an `m x n` family. A pure function of its arguments.
pub fn gen_random_family<S: Scalar>(
    m: usize,
    n: usize,
    kind: GeneratorKind,
    seed: u64,
) -> Result<FunctionFamily<S>, FamilyError> {
    if m == 0 || n == 0 {
        return Err(FamilyError::InvalidParameter(format!("need m, n >= 1 (got {m} x {n})")));
    }
    let mut rng = rng::seeded(seed);
    let (values, value_kind): (Vec<f64>, _) = match kind {
        GeneratorKind::UniformReal => (
            (0..m * n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
            ValueKind::RealBounded,
        ),
        GeneratorKind::SignVectors => (
            (0..m * n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
            ValueKind::RealBounded,
        ),
        GeneratorKind::IntegerGrid { range_max } => (
            (0..m * n).map(|_| f64::from(rng.random_range(0..=range_max))).collect(),
            ValueKind::IntegerGrid { range_max },
        ),
        GeneratorKind::ConvexHullSections => {
            let k = n.max(2);
            let vertices: Vec<f64> = (0..k * n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let mut values = Vec::with_capacity(m * n);
            for _ in 0..m {
                let mut w: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= total);
                for c in 0..n {
                    let v: f64 = (0..k).map(|j| w[j] * vertices[j * n + c]).sum();
                    values.push(v.clamp(-1.0, 1.0));
                }
            }
            (values, ValueKind::RealBounded)
        }
    };
    FunctionFamily::from_flat(n, values.into_iter().map(S::of).collect(), value_kind)
}
