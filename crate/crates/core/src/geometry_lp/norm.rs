use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::polytope::DEFAULT_EXPONENT_BUDGET;
use super::simplex::{lp_solve, LpProblem, LpStatus, Relation, Sense};
use super::GeometryError;
use crate::class_model::CoordinateSubset;
use crate::Scalar;

/// `||x|| = max_j |<f_j, x>|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralNorm<S> {
    pub dimension: usize,
    pub functionals: Vec<Vec<S>>,
}

fn rank<S: Scalar>(rows: &[Vec<S>], dimension: usize) -> usize {
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let scale = m.iter().flatten().fold(S::zero(), |a, x| a.max(x.abs()));
    let eps = S::tolerance() * (S::one() + scale);
    let mut r = 0;
    for col in 0..dimension {
        let Some(p) = (r..m.len()).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).expect("finite"))
        else {
            break;
        };
        if m[p][col].abs() <= eps {
            continue;
        }
        m.swap(r, p);
        for i in (r + 1)..m.len() {
            let f = m[i][col] / m[r][col];
            for k in col..dimension {
                m[i][k] = m[i][k] - f * m[r][k];
            }
        }
        r += 1;
    }
    r
}

impl<S: Scalar> PolyhedralNorm<S> {
    /// The functionals must span the whole space.
    pub fn new(dimension: usize, functionals: Vec<Vec<S>>) -> Result<Self, GeometryError> {
        for f in &functionals {
            if f.len() != dimension {
                return Err(GeometryError::DimensionMismatch { expected: dimension, found: f.len() });
            }
            if f.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        let r = rank(&functionals, dimension);
        if r < dimension {
            return Err(GeometryError::DegenerateNorm { rank: r, dimension });
        }
        Ok(Self { dimension, functionals })
    }

    /// `l_1` norm on `R^n` through its `2^n` sign functionals.
    pub fn ell1(n: usize) -> Self {
        let functionals = (0..1usize << n)
            .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { -S::one() } else { S::one() }).collect())
            .collect();
        Self { dimension: n, functionals }
    }

    /// `l_inf` norm on `R^n`.
    pub fn max_norm(n: usize) -> Self {
        let functionals = (0..n).map(|i| (0..n).map(|k| if k == i { S::one() } else { S::zero() }).collect()).collect();
        Self { dimension: n, functionals }
    }

    pub fn norm(&self, x: &[S]) -> S {
        self.functionals
            .iter()
            .map(|f| f.iter().zip(x).map(|(&a, &b)| a * b).sum::<S>().abs())
            .fold(S::zero(), S::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Constant<S> {
    /// `min ||sum_{i in sigma} a_i x_i||` over `sum |a_i| = 1`.
    pub value: S,
    /// Signs of the orthant attaining the minimum, in `sigma` order.
    pub orthant: Vec<i8>,
}

/// Best constant `c` with `||sum a_i x_i|| >= c sum |a_i|` over `i` in
/// `sigma`.
///
/// Within the orthant with signs `theta`, `a = theta * lambda` with `lambda`
/// in the simplex and the minimum of `max_j |<f_j, .>|` is a matrix-game
/// value; the LP solved is its dual, which has `|sigma| + 1` rows. Orthants
/// `theta` and `-theta` give the same value, so only those with a positive
/// first sign are solved.
pub fn ell1_lower_constant<S: Scalar>(
    norm: &PolyhedralNorm<S>,
    vectors: &[Vec<S>],
    sigma: &CoordinateSubset,
) -> Result<L1Constant<S>, GeometryError> {
    let s = sigma.len();
    if s == 0 {
        return Err(GeometryError::EmptySubset);
    }
    if s > DEFAULT_EXPONENT_BUDGET {
        return Err(GeometryError::SubsetTooLarge { size: s, budget: DEFAULT_EXPONENT_BUDGET });
    }
    if let Some(&index) = sigma.indices().iter().find(|&&i| i >= vectors.len()) {
        return Err(GeometryError::IndexOutOfRange { index, len: vectors.len() });
    }
    for v in vectors {
        if v.len() != norm.dimension {
            return Err(GeometryError::DimensionMismatch { expected: norm.dimension, found: v.len() });
        }
    }
    // images[j][i] = <f_j, x_{sigma_i}>
    let images: Vec<Vec<S>> = norm
        .functionals
        .iter()
        .map(|f| sigma.iter().map(|i| f.iter().zip(&vectors[i]).map(|(&a, &b)| a * b).sum()).collect())
        .collect();
    let orthants: Vec<usize> = (0..1usize << (s - 1)).collect();
    let values: Vec<S> = orthants
        .par_iter()
        .map(|&mask| orthant_value(&images, s, mask))
        .collect::<Result<_, _>>()?;
    let (best, value) = values
        .iter()
        .enumerate()
        .fold((0, S::infinity()), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let orthant = (0..s).map(|i| if i > 0 && (best >> (i - 1)) & 1 == 1 { -1 } else { 1 }).collect();
    Ok(L1Constant { value: value.max(S::zero()), orthant })
}

fn orthant_value<S: Scalar>(images: &[Vec<S>], s: usize, mask: usize) -> Result<S, GeometryError> {
    let sign = |i: usize| if i > 0 && (mask >> (i - 1)) & 1 == 1 { -S::one() } else { S::one() };
    let j = images.len();
    // variables: mu (free), q_{j,+}, q_{j,-}
    let cols = 1 + 2 * j;
    let mut objective = vec![S::zero(); cols];
    objective[0] = S::one();
    let mut lp = LpProblem::new(Sense::Maximize, objective);
    lp.set_free(0);
    for i in 0..s {
        let mut row = vec![S::zero(); cols];
        row[0] = S::one();
        for (k, img) in images.iter().enumerate() {
            let g = sign(i) * img[i];
            row[1 + 2 * k] = -g;
            row[2 + 2 * k] = g;
        }
        lp.constrain(row, Relation::Le, S::zero());
    }
    let mut sum = vec![S::one(); cols];
    sum[0] = S::zero();
    lp.constrain(sum, Relation::Eq, S::one());
    let sol = lp_solve(&lp)?;
    debug_assert_eq!(sol.status, LpStatus::Optimal);
    Ok(sol.objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()).collect()
    }

    #[test]
    fn ell1_basis_in_ell1() {
        let norm = PolyhedralNorm::<f64>::ell1(3);
        let c = ell1_lower_constant(&norm, &basis(3), &CoordinateSubset::full(3)).unwrap();
        assert!((c.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_in_max_norm() {
        let norm = PolyhedralNorm::<f64>::max_norm(2);
        let c = ell1_lower_constant(&norm, &basis(2), &CoordinateSubset::full(2)).unwrap();
        assert!((c.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_vectors_cancel() {
        let norm = PolyhedralNorm::<f64>::max_norm(2);
        let v = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let c = ell1_lower_constant(&norm, &v, &CoordinateSubset::full(2)).unwrap();
        assert!(c.value.abs() < 1e-12);
        assert_eq!(c.orthant, vec![1, -1]);
    }

    #[test]
    fn degenerate_norm_rejected() {
        assert!(matches!(
            PolyhedralNorm::new(2, vec![vec![1.0, 2.0], vec![2.0, 4.0]]),
            Err(GeometryError::DegenerateNorm { rank: 1, dimension: 2 })
        ));
        assert!(PolyhedralNorm::new(2, vec![vec![1.0, 2.0], vec![2.0, 4.5]]).is_ok());
    }

    #[test]
    fn norm_evaluation() {
        let n = PolyhedralNorm::<f64>::ell1(3);
        assert_eq!(n.norm(&[1.0, -2.0, 0.5]), 3.5);
        assert_eq!(PolyhedralNorm::<f64>::max_norm(3).norm(&[1.0, -2.0, 0.5]), 2.0);
    }
}
