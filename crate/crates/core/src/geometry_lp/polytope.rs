use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simplex::{lp_solve, LpProblem, LpStatus, Relation, Sense};
use super::GeometryError;
use crate::class_model::CoordinateSubset;
use crate::Scalar;

/// Largest `|sigma|` for which `2^|sigma|` cube corners are enumerated.
pub const DEFAULT_EXPONENT_BUDGET: usize = 15;

const TRANSLATED_LP_CELLS: usize = 4_000_000;

/// Convex hull of finitely many points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VPolytope<S> {
    pub dimension: usize,
    pub vertices: Vec<Vec<S>>,
    #[serde(default)]
    pub symmetric: bool,
}

impl<S: Scalar> VPolytope<S> {
    /// With `symmetric` set, the vertex list must be closed under negation
    /// up to `1e-12`.
    pub fn new(dimension: usize, vertices: Vec<Vec<S>>, symmetric: bool) -> Result<Self, GeometryError> {
        if vertices.is_empty() {
            return Err(GeometryError::NoVertices);
        }
        for v in &vertices {
            if v.len() != dimension {
                return Err(GeometryError::DimensionMismatch { expected: dimension, found: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        if symmetric {
            let eps = S::of(1e-12);
            for (i, v) in vertices.iter().enumerate() {
                let paired = vertices.iter().any(|w| v.iter().zip(w).all(|(&a, &b)| (a + b).abs() <= eps));
                if !paired {
                    return Err(GeometryError::NotSymmetric(i));
                }
            }
        }
        Ok(Self { dimension, vertices, symmetric })
    }

    /// `conv{+-p}` over the given points.
    pub fn symmetric_hull(points: Vec<Vec<S>>) -> Result<Self, GeometryError> {
        let dimension = points.first().ok_or(GeometryError::NoVertices)?.len();
        let mut vertices = Vec::with_capacity(2 * points.len());
        for p in points {
            vertices.push(p.iter().map(|&x| -x).collect());
            vertices.push(p);
        }
        Self::new(dimension, vertices, true)
    }

    /// Vertices of the projection onto the coordinates in `sigma`, duplicates
    /// removed.
    pub fn project(&self, sigma: &CoordinateSubset) -> Vec<Vec<S>> {
        let mut out: Vec<Vec<S>> = Vec::new();
        for v in &self.vertices {
            let p: Vec<S> = sigma.iter().map(|i| v[i]).collect();
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    fn check_subset(&self, sigma: &CoordinateSubset) -> Result<(), GeometryError> {
        match sigma.indices().last() {
            Some(&last) if last >= self.dimension => {
                Err(GeometryError::DimensionMismatch { expected: self.dimension, found: last + 1 })
            }
            _ => Ok(()),
        }
    }
}

/// Hull membership with the `l1` distance from the point to the hull.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullMembership<S> {
    pub inside: bool,
    pub residual: S,
}

fn hull_residual<S: Scalar>(vertices: &[Vec<S>], point: &[S]) -> Result<S, GeometryError> {
    let n = point.len();
    let v = vertices.len();
    // variables: lambda (v), r+ (n), r- (n)
    let mut objective = vec![S::zero(); v + 2 * n];
    for c in objective.iter_mut().skip(v) {
        *c = S::one();
    }
    let mut lp = LpProblem::new(Sense::Minimize, objective);
    let mut sum = vec![S::zero(); v + 2 * n];
    for c in sum.iter_mut().take(v) {
        *c = S::one();
    }
    lp.constrain(sum, Relation::Eq, S::one());
    for k in 0..n {
        let mut row: Vec<S> = vertices.iter().map(|vert| vert[k]).collect();
        row.resize(v + 2 * n, S::zero());
        row[v + k] = S::one();
        row[v + n + k] = -S::one();
        lp.constrain(row, Relation::Eq, point[k]);
    }
    let sol = lp_solve(&lp)?;
    debug_assert_eq!(sol.status, LpStatus::Optimal);
    Ok(sol.objective.max(S::zero()))
}

fn membership_tolerance<S: Scalar>(point: &[S]) -> S {
    S::tolerance() * (S::one() + point.iter().fold(S::zero(), |m, x| m.max(x.abs())))
}

/// Whether `point` lies in the hull, boundary included.
pub fn point_in_hull<S: Scalar>(poly: &VPolytope<S>, point: &[S]) -> Result<HullMembership<S>, GeometryError> {
    if point.len() != poly.dimension {
        return Err(GeometryError::DimensionMismatch { expected: poly.dimension, found: point.len() });
    }
    let residual = hull_residual(&poly.vertices, point)?;
    Ok(HullMembership { inside: residual <= membership_tolerance(point), residual })
}

/// Cube found inside a projection: `center + [-t/2, t/2]^sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeWitness<S> {
    pub center: Vec<S>,
    /// Largest hull residual over the tested corners.
    pub residual: S,
}

fn corners<S: Scalar>(dim: usize, half: S, first_positive: bool) -> Vec<Vec<S>> {
    let count = if first_positive && dim > 0 { 1usize << (dim - 1) } else { 1usize << dim };
    (0..count)
        .map(|mask| {
            (0..dim)
                .map(|i| {
                    let bit = if first_positive { if i == 0 { 0 } else { (mask >> (i - 1)) & 1 } } else { (mask >> i) & 1 };
                    if bit == 0 { half } else { -half }
                })
                .collect()
        })
        .collect()
}

/// Does `P_sigma(poly)` contain a cube of side `t`?
///
/// Untranslated mode tests the centred cube `[-t/2, t/2]^sigma` corner by
/// corner. Translated mode looks for any center `h` with
/// `h + [-t/2, t/2]^sigma` inside the projection, solving one LP in which
/// every corner is a convex combination of projected vertices.
pub fn cube_in_projection<S: Scalar>(
    poly: &VPolytope<S>,
    sigma: &CoordinateSubset,
    t: S,
    translated: bool,
) -> Result<Option<CubeWitness<S>>, GeometryError> {
    cube_in_projection_with_budget(poly, sigma, t, translated, DEFAULT_EXPONENT_BUDGET)
}

pub(crate) fn cube_in_projection_with_budget<S: Scalar>(
    poly: &VPolytope<S>,
    sigma: &CoordinateSubset,
    t: S,
    translated: bool,
    budget: usize,
) -> Result<Option<CubeWitness<S>>, GeometryError> {
    if !(t > S::zero()) || !t.is_finite() {
        return Err(GeometryError::InvalidScale(t.as_f64()));
    }
    poly.check_subset(sigma)?;
    let s = sigma.len();
    if s > budget {
        return Err(GeometryError::SubsetTooLarge { size: s, budget });
    }
    if s == 0 {
        return Ok(Some(CubeWitness { center: Vec::new(), residual: S::zero() }));
    }
    let verts = poly.project(sigma);
    let half = t / S::of(2.0);
    if translated {
        return translated_cube(&verts, s, half);
    }
    let cs = corners(s, half, poly.symmetric);
    let tol = membership_tolerance(&cs[0]);
    let residuals: Vec<S> = cs.par_iter().map(|c| hull_residual(&verts, c)).collect::<Result<_, _>>()?;
    let worst = residuals.iter().fold(S::zero(), |m, &r| m.max(r));
    Ok((worst <= tol).then(|| CubeWitness { center: vec![S::zero(); s], residual: worst }))
}

fn translated_cube<S: Scalar>(verts: &[Vec<S>], s: usize, half: S) -> Result<Option<CubeWitness<S>>, GeometryError> {
    let cs = corners(s, half, false);
    let v = verts.len();
    let cols = s + cs.len() * v;
    let rows = cs.len() * (s + 1);
    if rows * cols > TRANSLATED_LP_CELLS {
        return Err(GeometryError::ProblemTooLarge { rows, cols });
    }
    // variables: h (free, s) then one lambda block per corner
    let mut lp = LpProblem::new(Sense::Minimize, vec![S::zero(); cols]);
    for k in 0..s {
        lp.set_free(k);
    }
    for (ci, corner) in cs.iter().enumerate() {
        let base = s + ci * v;
        let mut sum = vec![S::zero(); cols];
        for c in sum.iter_mut().skip(base).take(v) {
            *c = S::one();
        }
        lp.constrain(sum, Relation::Eq, S::one());
        for k in 0..s {
            let mut row = vec![S::zero(); cols];
            row[k] = -S::one();
            for (j, vert) in verts.iter().enumerate() {
                row[base + j] = vert[k];
            }
            lp.constrain(row, Relation::Eq, corner[k]);
        }
    }
    let sol = lp_solve(&lp)?;
    Ok((sol.status == LpStatus::Optimal).then(|| CubeWitness {
        center: sol.x[..s].to_vec(),
        residual: lp.max_violation(&sol.x).max(S::zero()),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexVc<S> {
    pub dimension: usize,
    pub subset: CoordinateSubset,
    pub witness: Option<CubeWitness<S>>,
    /// Number of cube-containment tests performed.
    pub tests: usize,
}

/// Largest `|sigma|` such that `P_sigma(poly)` contains a cube of side `t`
/// (centred unless `translated`), with the lexicographically smallest such
/// `sigma`.
///
/// Containment is inherited by coordinate sub-projections, so subsets are
/// explored level by level and a subset is tested only when all of its
/// one-smaller subsets passed.
pub fn convex_vc<S: Scalar>(poly: &VPolytope<S>, t: S, translated: bool) -> Result<ConvexVc<S>, GeometryError> {
    if !(t > S::zero()) || !t.is_finite() {
        return Err(GeometryError::InvalidScale(t.as_f64()));
    }
    let n = poly.dimension;
    let mut tests = 0usize;
    let full = CoordinateSubset::full(n);
    if n <= DEFAULT_EXPONENT_BUDGET {
        tests += 1;
        if let Some(w) = cube_in_projection(poly, &full, t, translated)? {
            return Ok(ConvexVc { dimension: n, subset: full, witness: Some(w), tests });
        }
    }
    let mut level: Vec<(Vec<usize>, CubeWitness<S>)> = vec![(Vec::new(), CubeWitness { center: Vec::new(), residual: S::zero() })];
    loop {
        let passed: BTreeSet<Vec<usize>> = level.iter().map(|(s, _)| s.clone()).collect();
        let mut candidates = Vec::new();
        for (set, _) in &level {
            let start = set.last().map_or(0, |&l| l + 1);
            for i in start..n {
                let mut cand = set.clone();
                cand.push(i);
                let all_subsets_pass = (0..cand.len()).all(|drop| {
                    let mut sub = cand.clone();
                    sub.remove(drop);
                    passed.contains(&sub)
                });
                if all_subsets_pass {
                    candidates.push(cand);
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        if candidates[0].len() > DEFAULT_EXPONENT_BUDGET {
            return Err(GeometryError::SubsetTooLarge { size: candidates[0].len(), budget: DEFAULT_EXPONENT_BUDGET });
        }
        tests += candidates.len();
        let results: Vec<Option<CubeWitness<S>>> = candidates
            .par_iter()
            .map(|c| cube_in_projection(poly, &CoordinateSubset::from_sorted_unchecked(c.clone()), t, translated))
            .collect::<Result<_, _>>()?;
        let next: Vec<(Vec<usize>, CubeWitness<S>)> =
            candidates.into_iter().zip(results).filter_map(|(c, w)| w.map(|w| (c, w))).collect();
        if next.is_empty() {
            break;
        }
        level = next;
    }
    let (set, witness) = level.into_iter().next().expect("level never empty");
    let dimension = set.len();
    Ok(ConvexVc {
        dimension,
        subset: CoordinateSubset::from_sorted_unchecked(set),
        witness: (dimension > 0).then_some(witness),
        tests,
    })
}
