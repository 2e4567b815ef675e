//! Convex geometry through small linear programs.
//!
//! Polytopes are given by vertices and norms by finitely many functionals,
//! so every predicate here (hull membership, cube containment in a
//! coordinate projection, `l1` lower constants) reduces to a dense LP solved
//! by [`lp_solve`].

mod norm;
mod polytope;
mod simplex;

use std::path::Path;

use thiserror::Error;

use crate::class_model::FamilyError;

pub use norm::{ell1_lower_constant, L1Constant, PolyhedralNorm};
pub use polytope::{
    convex_vc, cube_in_projection, point_in_hull, ConvexVc, CubeWitness, HullMembership, VPolytope,
    DEFAULT_EXPONENT_BUDGET,
};
pub use simplex::{lp_solve, Bound, Constraint, LpError, LpProblem, LpSolution, LpStatus, Relation, Sense};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polytope has no vertices")]
    NoVertices,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("vertex {0} has no negated partner, polytope is not symmetric")]
    NotSymmetric(usize),
    #[error("subset of size {size} exceeds the exponent budget {budget}")]
    SubsetTooLarge { size: usize, budget: usize },
    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("functionals span a space of dimension {rank}, need {dimension}")]
    DegenerateNorm { rank: usize, dimension: usize },
    #[error("coordinate subset is empty")]
    EmptySubset,
    #[error("index {index} out of range for {len} vectors")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("translated cube search needs a {rows}x{cols} LP, beyond the size limit")]
    ProblemTooLarge { rows: usize, cols: usize },
    #[error("LP failed: {0}")]
    Lp(#[from] LpError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub fn load_polytope(path: impl AsRef<Path>) -> Result<VPolytope<f64>, GeometryError> {
    let raw: VPolytope<f64> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    VPolytope::new(raw.dimension, raw.vertices, raw.symmetric)
}

pub fn save_polytope(poly: &VPolytope<f64>, path: impl AsRef<Path>) -> Result<(), GeometryError> {
    std::fs::write(path, serde_json::to_string_pretty(poly)?)?;
    Ok(())
}

pub fn load_norm(path: impl AsRef<Path>) -> Result<PolyhedralNorm<f64>, GeometryError> {
    let raw: PolyhedralNorm<f64> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    PolyhedralNorm::new(raw.dimension, raw.functionals)
}

pub fn save_norm(norm: &PolyhedralNorm<f64>, path: impl AsRef<Path>) -> Result<(), GeometryError> {
    std::fs::write(path, serde_json::to_string_pretty(norm)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let poly = VPolytope::symmetric_hull(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let path = dir.path().join("poly.json");
        save_polytope(&poly, &path).unwrap();
        assert_eq!(load_polytope(&path).unwrap(), poly);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"symmetric\": true"));

        let norm = PolyhedralNorm::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let path = dir.path().join("norm.json");
        save_norm(&norm, &path).unwrap();
        assert_eq!(load_norm(&path).unwrap(), norm);

        std::fs::write(&path, r#"{"dimension": 2, "functionals": [[1.0, 1.0]]}"#).unwrap();
        assert!(matches!(load_norm(&path), Err(GeometryError::DegenerateNorm { rank: 1, dimension: 2 })));
    }
}
