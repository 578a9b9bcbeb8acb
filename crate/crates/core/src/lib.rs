//! Radial nonlinear Klein–Gordon equation u_tt = Δ_γu − u + |u|^{p−1}u with the inverse-square
//! potential Δ_γ = Δ − γ/|x|²: grids and functionals, ground states, time evolution and audits.

pub mod error;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod inequalities;
pub mod monitors;
pub mod ode;
pub mod params;

pub use error::{LabError, Result};
pub use evolution::{evolve, EvolutionConfig, Run, TrajectoryRecord, Verdict};
pub use functionals::{FunctionalRecord, Norms};
pub use grid::{RadialField, RadialGrid, StateSnapshot, C64};
pub use ground_state::{find_ground_state, GroundState};
pub use params::{Canonical, ModelParams, Regime, VirialIndex};
