//! Space–time reduced-order models for parameterized linear PDEs.
//!
//! The full-order model is a finite-difference discretization of a 2D linear
//! PDE marched with backward Euler. A space–time POD basis built from
//! training trajectories projects the whole space–time system to a dense
//! problem of size `n_s·n_t`, solved once per parameter with either Galerkin
//! or least-squares Petrov–Galerkin projection.
//!
//! The numerical core is generic over [`Real`]; the aliases at the crate
//! root fix the scalar to `f64`.

pub mod analysis;
pub mod banded;
pub mod basis;
pub mod config;
pub mod error;
pub mod fom;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod rom;
pub mod scalar;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Grid2D, ProblemKind};
pub use rom::Flavor;
pub use scalar::Real;

pub type ProblemSpec = model::ProblemSpec;
pub type SpatialSystem = model::SpatialSystem<f64>;
pub type Trajectory = fom::Trajectory<f64>;
pub type TimeSteps = fom::TimeSteps<f64>;
pub type SnapshotMatrix = basis::SnapshotMatrix<f64>;
pub type SpaceTimeBasis = basis::SpaceTimeBasis<f64>;
pub type ReducedSystem = rom::ReducedSystem<f64>;
pub type RomSolution = rom::RomSolution<f64>;
pub type StudyReport = analysis::StudyReport;
