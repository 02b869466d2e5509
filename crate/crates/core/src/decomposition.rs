//! The chained form viewed as three coupled second-order subsystems:
//! `(z2, z5)` driven by `u2`, `(z1, z4)` driven by `u1`, and `(z3, z6)` driven by
//! `z2 * u1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chained::State6;
use crate::error::{Error, Result};
use crate::simulator::Sample;

/// Default pointwise tolerance for the structural checks below.
pub const DEFAULT_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    /// `(z2, z5)`, the linear double integrator on `u2`.
    Z2Z5,
    /// `(z1, z4)`, the linear double integrator on `u1`.
    Z1Z4,
    /// `(z3, z6)`, whose input gain is the current `z2`.
    Z3Z6,
}

impl Subsystem {
    pub const ALL: [Subsystem; 3] = [Subsystem::Z2Z5, Subsystem::Z1Z4, Subsystem::Z3Z6];

    fn indices(self) -> (usize, usize) {
        match self {
            Subsystem::Z2Z5 => (1, 4),
            Subsystem::Z1Z4 => (0, 3),
            Subsystem::Z3Z6 => (2, 5),
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Subsystem::Z2Z5 => "(z2, z5)",
            Subsystem::Z1Z4 => "(z1, z4)",
            Subsystem::Z3Z6 => "(z3, z6)",
        };
        f.write_str(s)
    }
}

/// (position, velocity) of one subsystem.
pub fn project(state: &State6, which: Subsystem) -> (f64, f64) {
    let (p, v) = which.indices();
    (state.0[p], state.0[v])
}

/// Input gain of the `(z3, z6)` subsystem, i.e. `z2`.
pub fn coupling_gain(state: &State6) -> f64 {
    state.z2()
}

fn non_empty(samples: &[Sample]) -> Result<&Sample> {
    samples.first().ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))
}

/// True iff both components of `which` stay within `tol` of their first-sample values.
pub fn check_frozen(samples: &[Sample], which: Subsystem, tol: f64) -> Result<bool> {
    let (p0, v0) = project(&non_empty(samples)?.state, which);
    Ok(samples.iter().all(|s| {
        let (p, v) = project(&s.state, which);
        (p - p0).abs() <= tol && (v - v0).abs() <= tol
    }))
}

/// True iff the increments of `(z3, z6)` track those of `(z1, z4)` within `tol` at every sample.
pub fn check_coupled(samples: &[Sample], tol: f64) -> Result<bool> {
    let z0 = non_empty(samples)?.state;
    Ok(samples.iter().all(|s| {
        let z = &s.state;
        let d_pos = (z.z3() - z0.z3()) - (z.z1() - z0.z1());
        let d_vel = (z.z6() - z0.z6()) - (z.z4() - z0.z4());
        d_pos.abs() <= tol && d_vel.abs() <= tol
    }))
}

/// Largest deviation of `which` from its first-sample value.
pub fn max_drift(samples: &[Sample], which: Subsystem) -> Result<f64> {
    let (p0, v0) = project(&non_empty(samples)?.state, which);
    Ok(samples
        .iter()
        .map(|s| {
            let (p, v) = project(&s.state, which);
            (p - p0).abs().max((v - v0).abs())
        })
        .fold(0.0, f64::max))
}
