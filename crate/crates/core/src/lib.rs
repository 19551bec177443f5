//! Entropy viscosity shock capturing for Burgers' equation with finite
//! volume, discontinuous Galerkin and Hermite discretizations.

pub mod dg;
pub mod error;
pub mod experiments;
pub mod fv;
pub mod hermite;
pub mod legendre;
pub mod mesh;
pub mod problem;
pub mod taylor;
pub mod time;
pub mod viscosity;

pub use dg::DgScheme;
pub use error::{Error, Result};
pub use fv::FvScheme;
pub use hermite::HermiteScheme;
pub use mesh::{error_norm, BoundaryCondition, Dof, Grid, Method, SolutionState};
pub use problem::{initial_data_catalog, ExperimentId, InitialData, ProblemSpec, ReferenceSolution};
pub use taylor::TaylorPoly;
pub use time::{advance_to, CflRule, RunLog, Scheme, StepController};
pub use viscosity::{EntropyViscosityParams, SensorParams, ViscosityField, ViscosityParams};
