//! Isoparametric foliations of `S^n × S^n` built from symmetric Clifford
//! systems, the cones over their minimal leaves, and Lawlor curvature-criterion
//! certificates for area minimization.

pub mod certify;
pub mod cli;
pub mod clifford;
pub mod error;
pub mod foliation;
pub mod frames;
pub mod lawlor;
pub mod linalg;
pub mod radius;
pub mod rng;

pub use clifford::{build_irreducible, build_system, delta, verify_relations, CliffordSystem};
pub use error::{Error, Result};
pub use foliation::{FoliationParams, LevelPoint, Tolerances};
