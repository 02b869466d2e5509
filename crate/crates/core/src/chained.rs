//! State space and vector field of the second-order chained form
//!
//! ```text
//! z1'' = u1,   z2'' = u2,   z3'' = z2 * u1
//! ```
//!
//! written as the first-order affine system `z' = f(z) + g1(z) u1 + g2 u2` over
//! `z = (z1, z2, z3, z4, z5, z6)`, where `z4..z6` are the velocities of `z1..z3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Velocity tolerance used when deciding whether a state is at rest.
pub const DEFAULT_EQUILIBRIUM_TOL: f64 = 1e-9;

/// Full state `z = (z1, z2, z3, z4, z5, z6)`: three positions followed by their velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State6(pub [f64; 6]);

impl State6 {
    pub const ZERO: State6 = State6([0.0; 6]);

    pub fn new(z: [f64; 6]) -> Result<Self> {
        let s = State6(z);
        s.validate()?;
        Ok(s)
    }

    pub fn z1(&self) -> f64 {
        self.0[0]
    }
    pub fn z2(&self) -> f64 {
        self.0[1]
    }
    pub fn z3(&self) -> f64 {
        self.0[2]
    }
    pub fn z4(&self) -> f64 {
        self.0[3]
    }
    pub fn z5(&self) -> f64 {
        self.0[4]
    }
    pub fn z6(&self) -> f64 {
        self.0[5]
    }

    /// Positions `(z1, z2, z3)`.
    pub fn positions(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    /// Velocities `(z4, z5, z6)`.
    pub fn velocities(&self) -> [f64; 3] {
        [self.0[3], self.0[4], self.0[5]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("non-finite state {:?}", self.0)))
        }
    }

    /// `self + h * rate`, componentwise.
    pub fn add_scaled(&self, h: f64, rate: &State6) -> State6 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rate.0.iter()) {
            *o += h * r;
        }
        State6(out)
    }

    /// Infinity norm of `self - other`.
    pub fn max_abs_diff(&self, other: &State6) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl From<EquilibriumPoint> for State6 {
    fn from(e: EquilibriumPoint) -> Self {
        State6([e.z1, e.z2, e.z3, 0.0, 0.0, 0.0])
    }
}

/// Control input `(u1, u2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Input2 {
    pub u1: f64,
    pub u2: f64,
}

impl Input2 {
    pub const ZERO: Input2 = Input2 { u1: 0.0, u2: 0.0 };

    pub fn new(u1: f64, u2: f64) -> Self {
        Input2 { u1, u2 }
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }
}

/// A rest configuration: positions only, velocities implicitly zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
}

impl EquilibriumPoint {
    pub fn new(z1: f64, z2: f64, z3: f64) -> Result<Self> {
        if !(z1.is_finite() && z2.is_finite() && z3.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite equilibrium ({z1}, {z2}, {z3})")));
        }
        Ok(EquilibriumPoint { z1, z2, z3 })
    }

    pub fn from_array(p: [f64; 3]) -> Result<Self> {
        Self::new(p[0], p[1], p[2])
    }

    /// Takes the positions of `state`, rejecting it if any velocity exceeds `tol`.
    pub fn from_state(state: &State6, tol: f64) -> Result<Self> {
        state.validate()?;
        if !is_equilibrium(state, tol) {
            return Err(Error::InvalidArgument(format!("state {:?} is not at rest (tol {tol})", state.0)));
        }
        Ok(EquilibriumPoint { z1: state.z1(), z2: state.z2(), z3: state.z3() })
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.z1, self.z2, self.z3]
    }
}

/// Vector field without validation; used on the integrator hot path.
#[inline]
pub(crate) fn vector_field(z: &State6, u: &Input2) -> State6 {
    let [_, z2, _, z4, z5, z6] = z.0;
    State6([z4, z5, z6, u.u1, u.u2, z2 * u.u1])
}

/// Time derivative `z' = (z4, z5, z6, u1, u2, z2 * u1)`.
pub fn dynamics(state: &State6, input: &Input2) -> Result<State6> {
    state.validate()?;
    if !input.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite input ({}, {})", input.u1, input.u2)));
    }
    Ok(vector_field(state, input))
}

/// True iff every velocity component has magnitude at most `tol`. Positions are free.
pub fn is_equilibrium(state: &State6, tol: f64) -> bool {
    state.velocities().iter().all(|v| v.abs() <= tol)
}
