//! Motion planning for the second-order chained form by switching the coupling state
//! `z2` between 1 and 0 and steering each double integrator with full-period sinusoids.

pub mod chained;
pub mod decomposition;
pub mod error;
pub mod io;
pub mod planner;
pub mod plot;
pub mod simulator;
pub mod steering;

pub use chained::{dynamics, is_equilibrium, EquilibriumPoint, Input2, State6};
pub use error::{Error, Result};
pub use planner::{compress, predict_final_state, synthesize, Plan, PlanningProblem};
pub use simulator::{compare, oracle_trajectory, simulate, SimConfig, Trajectory};
pub use steering::{amplitude_for_displacement, input_at, rest_to_rest_closed_form, Channel, Phase, Sinusoid};
