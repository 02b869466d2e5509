//! Fixed-step RK4 execution of a [`Plan`] on the full nonlinear dynamics, and the
//! analytic oracle sampled on the same grid.

use serde::{Deserialize, Serialize};

use crate::chained::{is_equilibrium, vector_field, Input2, State6, DEFAULT_EQUILIBRIUM_TOL};
use crate::error::{Error, Result};
use crate::planner::{propagate_phase, Plan};
use crate::steering::Phase;

/// Steps per plan used when no explicit `dt` is configured.
pub const DEFAULT_STEPS: usize = 4000;
/// Relative tolerance on `dt` dividing a phase duration.
pub const STEP_REL_TOL: f64 = 1e-9;

/// One grid point. `input` is the input applied over the step that starts here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: State6,
    pub input: Input2,
    pub phase_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub dt: f64,
    /// Sample index at which each phase starts, followed by the index of the last sample.
    pub phase_boundaries: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first_state(&self) -> Option<State6> {
        self.samples.first().map(|s| s.state)
    }

    pub fn final_state(&self) -> Option<State6> {
        self.samples.last().map(|s| s.state)
    }

    pub fn phase_count(&self) -> usize {
        self.phase_boundaries.len().saturating_sub(1)
    }

    /// Samples of phase `i`, including both boundary samples.
    pub fn phase_samples(&self, i: usize) -> Option<&[Sample]> {
        let lo = *self.phase_boundaries.get(i)?;
        let hi = *self.phase_boundaries.get(i + 1)?;
        self.samples.get(lo..=hi)
    }

    /// First sample at or after time `t`.
    pub fn sample_at(&self, t: f64) -> Option<&Sample> {
        let i = self.samples.partition_point(|s| s.t < t - 0.5 * self.dt);
        self.samples.get(i)
    }

    /// Checks grid spacing, ordering and boundary indices.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let Some(first) = self.samples.first() else {
            return bad("empty trajectory".into());
        };
        if first.t != 0.0 {
            return bad(format!("first sample at t = {}", first.t));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return bad(format!("non-positive dt {}", self.dt));
        }
        for w in self.samples.windows(2) {
            let step = w[1].t - w[0].t;
            if step.is_nan() || step <= 0.0 || (step - self.dt).abs() > 1e-6 * self.dt {
                return bad(format!("irregular spacing {step} at t = {}", w[0].t));
            }
        }
        if self.phase_boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return bad("phase boundaries not strictly increasing".into());
        }
        if self.phase_boundaries.last().is_some_and(|&b| b >= self.samples.len()) {
            return bad("phase boundary past the last sample".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Step size; `None` uses `total_duration / DEFAULT_STEPS`.
    pub dt: Option<f64>,
    /// When false, inputs are stored as zero.
    pub record_inputs: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: None, record_inputs: true }
    }
}

impl SimConfig {
    pub fn with_dt(dt: f64) -> Self {
        SimConfig { dt: Some(dt), ..Default::default() }
    }

    pub fn resolve_dt(&self, plan: &Plan) -> f64 {
        match self.dt {
            Some(dt) => dt,
            None if plan.total_duration > 0.0 => plan.total_duration / DEFAULT_STEPS as f64,
            None => 1.0,
        }
    }
}

/// Classic fourth-order Runge-Kutta step of `y' = f(t, y)`.
pub fn rk4_step<F>(f: F, t: f64, y: &State6, h: f64) -> State6
where
    F: Fn(f64, &State6) -> State6,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &y.add_scaled(0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &y.add_scaled(0.5 * h, &k2));
    let k4 = f(t + h, &y.add_scaled(h, &k3));
    let mut out = y.0;
    for (i, o) in out.iter_mut().enumerate() {
        *o += h / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
    }
    State6(out)
}

fn steps_per_phase(plan: &Plan, dt: f64) -> Result<Vec<usize>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep { dt, duration: plan.total_duration });
    }
    plan.phases
        .iter()
        .map(|p| {
            let duration = p.duration();
            let n = (duration / dt).round();
            if n < 1.0 || (n * dt - duration).abs() > STEP_REL_TOL * duration {
                Err(Error::InvalidStep { dt, duration })
            } else {
                Ok(n as usize)
            }
        })
        .collect()
}

fn check_start(start: &State6) -> Result<()> {
    start.validate()?;
    if !is_equilibrium(start, DEFAULT_EQUILIBRIUM_TOL) {
        return Err(Error::InvalidArgument(format!("start {:?} is not at rest", start.0)));
    }
    Ok(())
}

/// Walks the boundary-aligned grid of `plan`, asking `advance` for the state at
/// each next grid point.
fn sweep<F>(plan: &Plan, start: &State6, dt: f64, record_inputs: bool, mut advance: F) -> Result<Trajectory>
where
    F: FnMut(&Phase, &State6, &State6, f64, f64) -> Result<State6>,
{
    check_start(start)?;
    let steps = steps_per_phase(plan, dt)?;
    let total: usize = steps.iter().sum();
    let record = |phase: &Phase, tau: f64| if record_inputs { phase.input_unchecked(tau) } else { Input2::ZERO };

    let mut samples = Vec::with_capacity(total + 1);
    let mut boundaries = Vec::with_capacity(plan.len() + 1);
    let first_input = plan.phases.first().map_or(Input2::ZERO, |p| record(p, 0.0));
    samples.push(Sample { t: 0.0, state: *start, input: first_input, phase_index: 0 });
    boundaries.push(0);

    let mut offset = 0.0;
    let mut z = *start;
    for (i, (phase, &n)) in plan.phases.iter().zip(steps.iter()).enumerate() {
        let entry = z;
        let duration = phase.duration();
        for k in 0..n {
            let tau0 = duration * (k as f64 / n as f64);
            let tau1 = if k + 1 == n { duration } else { duration * ((k + 1) as f64 / n as f64) };
            z = advance(phase, &entry, &z, tau0, tau1)?;
            if !z.is_finite() {
                return Err(Error::InvalidArgument(format!("state diverged in phase {i} at t = {}", offset + tau1)));
            }
            let (input, phase_index) = match plan.phases.get(i + 1) {
                Some(next) if k + 1 == n => (record(next, 0.0), i + 1),
                _ => (record(phase, tau1), i),
            };
            samples.push(Sample { t: offset + tau1, state: z, input, phase_index });
        }
        offset += duration;
        boundaries.push(samples.len() - 1);
    }
    Ok(Trajectory { samples, dt, phase_boundaries: boundaries })
}

/// Integrates the full dynamics under the plan's inputs with fixed-step RK4.
pub fn simulate(plan: &Plan, start: &State6, config: &SimConfig) -> Result<Trajectory> {
    let dt = config.resolve_dt(plan);
    sweep(plan, start, dt, config.record_inputs, |phase, _, z, tau0, tau1| {
        let rhs = |tau: f64, y: &State6| vector_field(y, &phase.input_unchecked(tau.min(phase.duration())));
        Ok(rk4_step(rhs, tau0, z, tau1 - tau0))
    })
}

/// Samples the exact solution of the plan on the same grid [`simulate`] uses.
pub fn oracle_trajectory(plan: &Plan, start: &State6, dt: f64) -> Result<Trajectory> {
    sweep(plan, start, dt, true, |phase, entry, _, _, tau1| Ok(propagate_phase(entry, phase, tau1)))
}

/// Largest absolute state deviation between two trajectories on the same grid.
pub fn compare(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if (a.dt - b.dt).abs() > 1e-12 * a.dt.abs().max(b.dt.abs()) {
        return Err(Error::InvalidArgument(format!("dt mismatch: {} vs {}", a.dt, b.dt)));
    }
    Ok(a.samples.iter().zip(b.samples.iter()).map(|(x, y)| x.state.max_abs_diff(&y.state)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chained::EquilibriumPoint;
    use crate::planner::{compress, synthesize, PlanningProblem};
    use std::f64::consts::TAU;

    fn example_plan() -> Plan {
        let p = PlanningProblem::single_period(
            EquilibriumPoint::new(3.0, 0.5, 1.0).unwrap(),
            EquilibriumPoint::new(0.0, 0.0, 0.0).unwrap(),
            1.0,
        )
        .unwrap();
        compress(&synthesize(&p).unwrap(), 0.0)
    }

    fn example_start() -> State6 {
        State6([3.0, 0.5, 1.0, 0.0, 0.0, 0.0])
    }

    #[test]
    fn rk4_exact_on_cubic() {
        // y' = 3t^2 is integrated exactly by a Simpson-weighted step.
        let f = |t: f64, _: &State6| State6([3.0 * t * t, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let y = rk4_step(f, 0.5, &State6::ZERO, 0.25);
        assert!((y.0[0] - (0.75f64.powi(3) - 0.5f64.powi(3))).abs() < 1e-15);
    }

    #[test]
    fn example_grid_shape() {
        let plan = example_plan();
        let tr = simulate(&plan, &example_start(), &SimConfig::with_dt(1e-3)).unwrap();
        assert_eq!(tr.len(), 4001);
        assert_eq!(tr.phase_boundaries, vec![0, 1000, 2000, 3000, 4000]);
        assert_eq!(tr.samples.last().unwrap().t, 4.0);
        tr.validate().unwrap();
        assert_eq!(tr.phase_samples(1).unwrap().len(), 1001);
        assert_eq!(tr.samples[1000].phase_index, 1);
        assert_eq!(tr.samples[999].phase_index, 0);
    }

    #[test]
    fn example_endpoint() {
        let plan = example_plan();
        let tr = simulate(&plan, &example_start(), &SimConfig::with_dt(1e-3)).unwrap();
        let err = tr.final_state().unwrap().max_abs_diff(&State6::ZERO);
        assert!(err <= 1e-6, "final error {err}");

        let oracle = oracle_trajectory(&plan, &example_start(), 1e-3).unwrap();
        assert!(oracle.final_state().unwrap().max_abs_diff(&State6::ZERO) <= 1e-12);
        assert_eq!(oracle.samples[0].state, example_start());
        let at1 = oracle.sample_at(1.0).unwrap();
        assert_eq!(at1.t, 1.0);
        assert!(at1.state.max_abs_diff(&State6([3.0, 1.0, 1.0, 0.0, 0.0, 0.0])) <= 1e-12);

        let dev = compare(&tr, &oracle).unwrap();
        assert!(dev <= 1e-8, "deviation {dev}");
        assert_eq!(compare(&tr, &tr).unwrap(), 0.0);
    }

    #[test]
    fn default_dt_is_a_four_thousandth() {
        let plan = example_plan();
        let tr = simulate(&plan, &example_start(), &SimConfig::default()).unwrap();
        assert_eq!(tr.dt, 1e-3);
        assert_eq!(tr.len(), DEFAULT_STEPS + 1);
    }

    #[test]
    fn empty_plan_single_sample() {
        let start = State6([1.0, 2.0, 3.0, 0.0, 0.0, 0.0]);
        let plan = Plan::from_phases(start, vec![]).unwrap();
        let tr = simulate(&plan, &start, &SimConfig::default()).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.final_state().unwrap(), start);
        assert_eq!(tr.phase_count(), 0);
    }

    #[test]
    fn first_phase_only() {
        let mut plan = example_plan();
        plan = Plan::from_phases(example_start(), plan.phases[..1].to_vec()).unwrap();
        let tr = simulate(&plan, &example_start(), &SimConfig::with_dt(1e-3)).unwrap();
        let target = State6([3.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let err = tr.final_state().unwrap().max_abs_diff(&target);
        assert!(err <= 1e-9, "{err}");
    }

    #[test]
    fn rejects_bad_start_and_step() {
        let plan = example_plan();
        let moving = State6([3.0, 0.5, 1.0, 1e-3, 0.0, 0.0]);
        assert!(matches!(simulate(&plan, &moving, &SimConfig::default()), Err(Error::InvalidArgument(_))));
        assert!(matches!(simulate(&plan, &example_start(), &SimConfig::with_dt(0.3)), Err(Error::InvalidStep { .. })));
        assert!(matches!(oracle_trajectory(&plan, &example_start(), -1.0), Err(Error::InvalidStep { .. })));
        assert!(simulate(&plan, &example_start(), &SimConfig::with_dt(2.0)).is_err());
    }

    #[test]
    fn compare_rejects_grid_mismatch() {
        let plan = example_plan();
        let a = oracle_trajectory(&plan, &example_start(), 1e-3).unwrap();
        let b = oracle_trajectory(&plan, &example_start(), 5e-4).unwrap();
        assert!(compare(&a, &b).is_err());
        let mut c = a.clone();
        c.dt = 2e-3;
        assert!(compare(&a, &c).is_err());
    }

    #[test]
    fn fourth_order_convergence() {
        let plan = example_plan();
        let err = |dt: f64| {
            let sim = simulate(&plan, &example_start(), &SimConfig::with_dt(dt)).unwrap();
            compare(&sim, &oracle_trajectory(&plan, &example_start(), dt).unwrap()).unwrap()
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        let ratio = e1 / e2;
        assert!((8.0..=32.0).contains(&ratio), "errors {e1} {e2} ratio {ratio}");
    }

    #[test]
    fn inputs_switch_at_boundaries() {
        let plan = example_plan();
        let tr = simulate(&plan, &example_start(), &SimConfig::with_dt(1e-3)).unwrap();
        let quarter = &tr.samples[250];
        assert_eq!(quarter.input.u1, 0.0);
        assert!((quarter.input.u2 - 0.5 / TAU * TAU * TAU).abs() < 1e-12);
        let mid2 = &tr.samples[1250];
        assert_eq!(mid2.input.u2, 0.0);
        assert!((mid2.input.u1 + TAU).abs() < 1e-12);

        let quiet = simulate(&plan, &example_start(), &SimConfig { dt: Some(1e-3), record_inputs: false }).unwrap();
        assert!(quiet.samples.iter().all(|s| s.input == Input2::ZERO));
        assert_eq!(compare(&quiet, &tr).unwrap(), 0.0);
    }
}
