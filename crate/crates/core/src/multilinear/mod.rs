//! Exterior algebra, Grassmannian geometry, linear sections and
//! quasi-projective maps.

pub mod counterexample;
pub mod grassmann;
pub mod kvector;
pub mod quasi;
pub mod sections;

use thiserror::Error;

pub use counterexample::{verify_counterexample, CounterexampleReport, StepReport};
pub use grassmann::{decomposable_rank, decomposable_subspace, grassmann_distance, principal_angle, residual_norm, Decomposability, GrassmannPoint};
pub use kvector::{binomial, exterior_power, subset_rank, subsets, KVector, KVectorJson};
pub use quasi::{qp_apply, qp_limit, quasi_projective_from, QuasiProjectiveMap};
pub use sections::{arrangement_invariance_check, hyperplane_section, section_intersection, InvariancePair, InvarianceReport, LinearArrangement, LinearSection};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultilinearError {
    #[error("wedge of degrees {0} and {1} exceeds dimension {2}")]
    DegreeOverflow(usize, usize, usize),
    #[error("ambient dimensions do not match")]
    AmbientMismatch,
    #[error("the zero form defines no subspace")]
    ZeroForm,
    #[error("spanning set has rank {0}, expected {1}")]
    RankDeficient(usize, usize),
    #[error("annihilator has dimension {0}, form of degree {1} is not decomposable")]
    NotDecomposable(usize, usize),
    #[error("point is too close to the kernel (image norm {0:.3e})")]
    NearKernel(f64),
    #[error("sequence is not Cauchy (last step {0:.3e})")]
    NotCauchy(f64),
    #[error("empty list")]
    Empty,
    #[error("{0}")]
    Shape(String),
    #[error("could not parse coefficient {0}")]
    Parse(String),
}
