//! Combinatorial dimensions and metric entropy of finite function classes.
//!
//! The crate works with an explicit finite class of functions on a finite
//! domain (a matrix of values) together with an atomic probability measure,
//! and provides:
//!
//! * packing and covering numbers in `L_p(mu)`, exact and greedy
//!   ([`metric_entropy`]);
//! * the scale-sensitive shattering dimension of real classes and shattered
//!   centers of integer classes ([`shattering`]);
//! * separating trees built from small-deviation splits ([`separation_tree`]);
//! * random coordinate extraction preserving separation ([`extraction`]);
//! * a dense simplex solver and polytope predicates: cubes in coordinate
//!   projections and `l1` lower constants ([`geometry_lp`]);
//! * Gaussian/Rademacher suprema, entropy integrals and the Elton subset
//!   driver ([`gaussian_elton`]);
//! * experiment drivers that exercise the whole chain ([`experiments`]).
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the type
//! aliases at the crate root fix the scalar to `f64`.

pub mod class_model;
pub mod experiments;
pub mod extraction;
pub mod gaussian_elton;
pub mod geometry_lp;
pub mod metric_entropy;
pub mod rng;
mod scalar;
pub mod separation_tree;
pub mod shattering;

pub use scalar::Scalar;

pub use class_model::{CoordinateSubset, FamilyError, GeneratorKind, ValueKind};
pub use metric_entropy::{EntropyMode, Exactness, LpExponent};

pub type FunctionFamily = class_model::FunctionFamily<f64>;
pub type FunctionFamily32 = class_model::FunctionFamily<f32>;
pub type ProbabilityMeasure = class_model::ProbabilityMeasure<f64>;
pub type ProbabilityMeasure32 = class_model::ProbabilityMeasure<f32>;
pub type Distribution = separation_tree::Distribution<f64>;
pub type SplitCertificate = separation_tree::SplitCertificate<f64>;
pub type SeparatingTree = separation_tree::SeparatingTree<f64>;
pub type ExtractionOutcome = extraction::ExtractionOutcome<f64>;
pub type EntropyReport = metric_entropy::EntropyReport<f64>;
pub type VPolytope = geometry_lp::VPolytope<f64>;
pub type PolyhedralNorm = geometry_lp::PolyhedralNorm<f64>;
pub type LpProblem = geometry_lp::LpProblem<f64>;
pub type LpSolution = geometry_lp::LpSolution<f64>;
pub type SupEstimate = gaussian_elton::SupEstimate<f64>;
pub type EltonResult = gaussian_elton::EltonResult<f64>;
