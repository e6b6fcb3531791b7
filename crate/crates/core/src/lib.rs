//! Deterministic simulation of a UAV swarm holding a centroidal Voronoi
//! formation inside a drifting barrier region, with inter-agent collision
//! avoidance and potential-field obstacle avoidance.
//!
//! - [`geometry`]: vectors, diagonal gains, rotations and angle helpers.
//! - [`cvt`]: density-weighted sampling and the probabilistic Lloyd iteration.
//! - [`control`]: formation, collision and obstacle acceleration terms.
//! - [`sim`]: time stepping, phases around building corridors, logging.
//! - [`scenario`]: JSON scenarios and the built-in case presets.

pub mod control;
pub mod cvt;
pub mod geometry;
pub mod random;
pub mod scenario;
pub mod sim;

pub use geometry::{Diag3, Vector3};
pub use scenario::{build_case, load_spec, run_scenario, CaseStudy, ScenarioSpec};
pub use sim::{run_simulation, TrajectoryLog};
