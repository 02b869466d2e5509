//! Five-phase state-switching maneuver between two equilibria.
//!
//! 1. `u2`: raise `z2` to 1, so the `z3` channel mirrors the `z1` channel.
//! 2. `u1`: move `z3` to its goal; `z1` moves by the same amount.
//! 3. `u2`: lower `z2` to 0, decoupling `z3` from `u1`.
//! 4. `u1`: move `z1` to its goal while `z3` stays put.
//! 5. `u2`: move `z2` to its goal.
//!
//! Every phase is one or more full sinusoid periods, so each phase boundary is at rest.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::chained::{is_equilibrium, EquilibriumPoint, State6, DEFAULT_EQUILIBRIUM_TOL};
use crate::error::{Error, Result};
use crate::steering::{amplitude_for_displacement, closed_form_unchecked, period_count, Channel, Phase, Sinusoid};

/// `z2` level at which the `z3` subsystem shares the `u1` input with `z1`.
pub const COUPLED_LEVEL: f64 = 1.0;
/// `z2` level at which `z3` ignores `u1`.
pub const DECOUPLED_LEVEL: f64 = 0.0;

/// Channel order of the synthesized maneuver.
pub const CHANNEL_SEQUENCE: [Channel; 5] = [Channel::U2, Channel::U1, Channel::U2, Channel::U1, Channel::U2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanningProblem {
    pub start: EquilibriumPoint,
    pub goal: EquilibriumPoint,
    pub phase_duration: f64,
    pub omega: f64,
}

impl PlanningProblem {
    pub fn new(start: EquilibriumPoint, goal: EquilibriumPoint, phase_duration: f64, omega: f64) -> Result<Self> {
        let p = PlanningProblem { start, goal, phase_duration, omega };
        p.validate()?;
        Ok(p)
    }

    /// One sinusoid period per phase of length `phase_duration`.
    pub fn single_period(start: EquilibriumPoint, goal: EquilibriumPoint, phase_duration: f64) -> Result<Self> {
        Self::new(start, goal, phase_duration, TAU / phase_duration)
    }

    /// Goal given as a full state; rejected unless every velocity is zero.
    pub fn with_goal_state(start: EquilibriumPoint, goal: &State6, phase_duration: f64, omega: f64) -> Result<Self> {
        let goal = EquilibriumPoint::from_state(goal, 0.0)?;
        Self::new(start, goal, phase_duration, omega)
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.start, self.goal] {
            EquilibriumPoint::new(p.z1, p.z2, p.z3)?;
        }
        period_count(self.omega, self.phase_duration)?;
        Ok(())
    }
}

/// Ordered phases together with the predicted state at every phase boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub phases: Vec<Phase>,
    /// `phases.len() + 1` states; the first is the start, the last the predicted end.
    pub predicted_waypoints: Vec<State6>,
    pub total_duration: f64,
}

impl Plan {
    /// Builds a plan from `start`, filling in waypoints and total duration.
    pub fn from_phases(start: State6, phases: Vec<Phase>) -> Result<Self> {
        for p in &phases {
            p.signal.validate()?;
        }
        let predicted_waypoints = phase_endpoints(&phases, &start)?;
        let total_duration = phases.iter().map(Phase::duration).sum();
        Ok(Plan { phases, predicted_waypoints, total_duration })
    }

    pub fn start(&self) -> Option<&State6> {
        self.predicted_waypoints.first()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.phases.iter().map(Phase::amplitude).collect()
    }

    /// Start time of each phase followed by the end time of the last.
    pub fn boundary_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.phases.len() + 1);
        out.push(t);
        for p in &self.phases {
            t += p.duration();
            out.push(t);
        }
        out
    }

    /// Checks the structural facts every well-formed plan satisfies.
    pub fn validate(&self) -> Result<()> {
        if self.predicted_waypoints.len() != self.phases.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "plan has {} phases but {} waypoints",
                self.phases.len(),
                self.predicted_waypoints.len()
            )));
        }
        for p in &self.phases {
            p.signal.validate()?;
        }
        for w in &self.predicted_waypoints {
            w.validate()?;
            if !is_equilibrium(w, DEFAULT_EQUILIBRIUM_TOL) {
                return Err(Error::InvalidArgument(format!("waypoint {:?} is not at rest", w.0)));
            }
        }
        let total: f64 = self.phases.iter().map(Phase::duration).sum();
        if (total - self.total_duration).abs() > 1e-12 * total.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "total duration {} does not match phase sum {total}",
                self.total_duration
            )));
        }
        Ok(())
    }
}

/// Exact state `tau` seconds into `phase`, entered at `entry`.
///
/// During a `u1` phase the coupling gain is the entry value of `z2`; this is exact
/// whenever `z5 = 0` on entry, which holds at every rest-to-rest boundary.
pub fn propagate_phase(entry: &State6, phase: &Phase, tau: f64) -> State6 {
    let [z1, z2, z3, z4, z5, z6] = entry.0;
    let s = &phase.signal;
    match phase.channel {
        Channel::U2 => {
            let (x2, v2) = closed_form_unchecked(z2, z5, s, 1.0, tau);
            State6([z1 + z4 * tau, x2, z3 + z6 * tau, z4, v2, z6])
        }
        Channel::U1 => {
            let (x1, v1) = closed_form_unchecked(z1, z4, s, 1.0, tau);
            let (x3, v3) = closed_form_unchecked(z3, z6, s, z2, tau);
            State6([x1, z2 + z5 * tau, x3, v1, z5, v3])
        }
    }
}

fn phase_endpoints(phases: &[Phase], start: &State6) -> Result<Vec<State6>> {
    start.validate()?;
    let mut out = Vec::with_capacity(phases.len() + 1);
    let mut z = *start;
    out.push(z);
    for p in phases {
        z = propagate_phase(&z, p, p.duration());
        out.push(z);
    }
    Ok(out)
}

/// Synthesizes the five-phase maneuver. Zero-amplitude phases are kept; see [`compress`].
pub fn synthesize(problem: &PlanningProblem) -> Result<Plan> {
    problem.validate()?;
    let PlanningProblem { start, goal, phase_duration: dur, omega } = *problem;

    let z3_shift = goal.z3 - start.z3;
    let deltas = [
        COUPLED_LEVEL - start.z2,
        z3_shift,
        DECOUPLED_LEVEL - COUPLED_LEVEL,
        // step 2 dragged z1 along by the same shift
        goal.z1 - (start.z1 + z3_shift),
        goal.z2 - DECOUPLED_LEVEL,
    ];

    let mut phases = Vec::with_capacity(5);
    for (i, (&delta, &channel)) in deltas.iter().zip(CHANNEL_SEQUENCE.iter()).enumerate() {
        let a = amplitude_for_displacement(delta, omega, dur)?;
        let signal = Sinusoid::new(a, omega, dur)?;
        phases.push(Phase::new(channel, signal, format!("Step {}", i + 1)));
    }
    Plan::from_phases(State6::from(start), phases)
}

/// Drops phases with `|amplitude| <= tol` and recomputes waypoints from the plan's start.
pub fn compress(plan: &Plan, tol: f64) -> Plan {
    let start = plan.start().copied().unwrap_or_default();
    let phases: Vec<Phase> = plan.phases.iter().filter(|p| p.amplitude().abs() > tol).cloned().collect();
    Plan::from_phases(start, phases).expect("phases of a valid plan stay valid")
}

/// Final state obtained by composing the exact phase solutions from `start`.
pub fn predict_final_state(plan: &Plan, start: &State6) -> Result<State6> {
    start.validate()?;
    if !is_equilibrium(start, DEFAULT_EQUILIBRIUM_TOL) {
        return Err(Error::InvalidArgument(format!("start {:?} is not at rest", start.0)));
    }
    Ok(phase_endpoints(&plan.phases, start)?.pop().expect("at least the start state"))
}
