//! Rest-to-rest steering of a double integrator with one or more full periods of
//! sinusoidal acceleration.
//!
//! Driving `x'' = gain * a * w^2 * sin(w t)` from rest over `[0, T]` with `w T = 2 pi k`
//! returns the velocity to its initial value and displaces the position by
//! `gain * a * w * T`.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chained::Input2;
use crate::error::{Error, Result};

/// Relative tolerance on `w T` being a multiple of `2 pi`.
pub const PERIOD_REL_TOL: f64 = 1e-9;

/// Number of full periods contained in `[0, duration]` at angular frequency `omega`.
pub fn period_count(omega: f64, duration: f64) -> Result<u64> {
    let invalid = || Error::InvalidFrequency { omega, duration };
    if !(omega.is_finite() && duration.is_finite()) || omega <= 0.0 || duration <= 0.0 {
        return Err(invalid());
    }
    let cycles = omega * duration / TAU;
    let k = cycles.round();
    if k < 1.0 || (cycles - k).abs() > PERIOD_REL_TOL * k {
        return Err(invalid());
    }
    Ok(k as u64)
}

/// `a * w^2 * sin(w t)` on `[0, T]`. The amplitude is signed and measured in position units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub omega: f64,
    pub duration: f64,
}

impl Sinusoid {
    pub fn new(amplitude: f64, omega: f64, duration: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite amplitude {amplitude}")));
        }
        period_count(omega, duration)?;
        Ok(Sinusoid { amplitude, omega, duration })
    }

    /// One period per `duration`.
    pub fn single_period(amplitude: f64, duration: f64) -> Result<Self> {
        Self::new(amplitude, TAU / duration, duration)
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.amplitude, self.omega, self.duration).map(|_| ())
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.duration).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfRange { t, duration: self.duration })
        }
    }

    /// Signal value at local time `t`, without range checking.
    #[inline]
    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        self.amplitude * self.omega * self.omega * (self.omega * t).sin()
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.value_unchecked(t))
    }

    /// Net displacement of a unit-gain double integrator over the whole phase.
    pub fn displacement(&self) -> f64 {
        self.amplitude * self.omega * self.duration
    }
}

/// Input channel driven during a phase. The other channel is held at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    U1,
    U2,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::U1 => f.write_str("u1"),
            Channel::U2 => f.write_str("u2"),
        }
    }
}

/// One maneuver segment: a sinusoid on a single input channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub channel: Channel,
    pub signal: Sinusoid,
    pub label: String,
}

impl Phase {
    pub fn new(channel: Channel, signal: Sinusoid, label: impl Into<String>) -> Self {
        Phase { channel, signal, label: label.into() }
    }

    pub fn duration(&self) -> f64 {
        self.signal.duration
    }

    pub fn amplitude(&self) -> f64 {
        self.signal.amplitude
    }

    #[inline]
    pub(crate) fn input_unchecked(&self, t: f64) -> Input2 {
        let v = self.signal.value_unchecked(t);
        match self.channel {
            Channel::U1 => Input2 { u1: v, u2: 0.0 },
            Channel::U2 => Input2 { u1: 0.0, u2: v },
        }
    }
}

/// Amplitude that moves a resting double integrator by `delta` over `[0, T]`: `delta / (w T)`.
pub fn amplitude_for_displacement(delta: f64, omega: f64, duration: f64) -> Result<f64> {
    period_count(omega, duration)?;
    if !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite displacement {delta}")));
    }
    Ok(delta / (omega * duration))
}

/// Input pair at phase-local time `t`.
pub fn input_at(phase: &Phase, t: f64) -> Result<Input2> {
    phase.signal.check_time(t)?;
    Ok(phase.input_unchecked(t))
}

/// Exact position and velocity at local time `t` of `x'' = gain * a w^2 sin(w t)`
/// started from `(x0, v0)`.
pub fn rest_to_rest_closed_form(x0: f64, v0: f64, signal: &Sinusoid, gain: f64, t: f64) -> Result<(f64, f64)> {
    signal.check_time(t)?;
    Ok(closed_form_unchecked(x0, v0, signal, gain, t))
}

#[inline]
pub(crate) fn closed_form_unchecked(x0: f64, v0: f64, signal: &Sinusoid, gain: f64, t: f64) -> (f64, f64) {
    let Sinusoid { amplitude: a, omega: w, .. } = *signal;
    let wt = w * t;
    let v = v0 + gain * a * w * (1.0 - wt.cos());
    let x = x0 + v0 * t + gain * a * (wt - wt.sin());
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const W: f64 = TAU;

    // Composite Simpson double integration of the phase input, independent of the closed form.
    fn integrate_numerically(x0: f64, v0: f64, s: &Sinusoid, gain: f64, t_end: f64, n: usize) -> (f64, f64) {
        let h = t_end / n as f64;
        let phase = Phase::new(Channel::U2, *s, "quadrature");
        let acc = |t: f64| gain * input_at(&phase, t.min(t_end)).unwrap().u2;
        let (mut x, mut v) = (x0, v0);
        for i in 0..n {
            let t = i as f64 * h;
            let (a0, am, a1) = (acc(t), acc(t + 0.5 * h), acc(t + h));
            // x gains v*h plus the double integral of acceleration over the step.
            x += v * h + h * h * (a0 + 2.0 * am) / 6.0;
            v += h * (a0 + 4.0 * am + a1) / 6.0;
        }
        (x, v)
    }

    #[test]
    fn period_count_accepts_multiples() {
        assert_eq!(period_count(W, 1.0).unwrap(), 1);
        assert_eq!(period_count(2.0 * W, 1.0).unwrap(), 2);
        assert_eq!(period_count(PI, 2.0).unwrap(), 1);
        assert!(matches!(period_count(3.0, 1.0), Err(Error::InvalidFrequency { .. })));
        assert!(period_count(W / 2.0, 1.0).is_err());
        assert!(period_count(-W, 1.0).is_err());
        assert!(period_count(W, 0.0).is_err());
        assert!(period_count(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn amplitude_examples() {
        assert_eq!(amplitude_for_displacement(0.5, W, 1.0).unwrap(), 0.5 / (2.0 * PI));
        assert_eq!(amplitude_for_displacement(0.0, W, 1.0).unwrap(), 0.0);
        assert_eq!(amplitude_for_displacement(-2.0, W, 1.0).unwrap(), -2.0 / (2.0 * PI));
        assert!(matches!(amplitude_for_displacement(1.0, 3.0, 1.0), Err(Error::InvalidFrequency { .. })));
    }

    #[test]
    fn input_examples() {
        let p = Phase::new(Channel::U2, Sinusoid::new(0.5 / W, W, 1.0).unwrap(), "Step 1");
        let u = input_at(&p, 0.25).unwrap();
        assert_eq!(u.u1, 0.0);
        // direct evaluation of a w^2 sin(w t)
        let brute = (0.5 / (2.0 * PI)) * (2.0 * PI) * (2.0 * PI) * (PI / 2.0).sin();
        assert!((u.u2 - brute).abs() < 1e-15);
        assert!((u.u2 - PI).abs() < 1e-14);

        assert_eq!(input_at(&p, 0.0).unwrap(), Input2::ZERO);
        let q = Phase::new(Channel::U1, Sinusoid::new(-2.0 / W, W, 1.0).unwrap(), "Step 4");
        assert_eq!(input_at(&q, 0.0).unwrap(), Input2::ZERO);

        let u = input_at(&q, 0.75).unwrap();
        let brute = (-2.0 / (2.0 * PI)) * 4.0 * PI * PI * (1.5 * PI).sin();
        assert!((u.u1 - brute).abs() < 1e-14);
        assert!((u.u1 - 4.0 * PI).abs() < 1e-13);
        assert_eq!(u.u2, 0.0);
    }

    #[test]
    fn input_out_of_range() {
        let p = Phase::new(Channel::U1, Sinusoid::new(1.0, W, 1.0).unwrap(), "x");
        assert!(matches!(input_at(&p, -1e-12), Err(Error::OutOfRange { .. })));
        assert!(matches!(input_at(&p, 1.0 + 1e-12), Err(Error::OutOfRange { .. })));
        assert!(input_at(&p, 1.0).is_ok());
    }

    #[test]
    fn closed_form_examples() {
        let s = Sinusoid::new(0.5 / W, W, 1.0).unwrap();
        let (x, v) = rest_to_rest_closed_form(0.5, 0.0, &s, 1.0, 1.0).unwrap();
        assert!((x - 1.0).abs() < 1e-15 && v.abs() < 1e-15);

        let zero = Sinusoid::new(0.0, W, 1.0).unwrap();
        assert_eq!(rest_to_rest_closed_form(7.25, 0.0, &zero, 1.0, 1.0).unwrap(), (7.25, 0.0));

        let s = Sinusoid::new(-1.0 / W, W, 1.0).unwrap();
        let (x, v) = rest_to_rest_closed_form(1.0, 0.0, &s, 1.0, 1.0).unwrap();
        assert!(x.abs() < 1e-15 && v.abs() < 1e-15);

        assert!(rest_to_rest_closed_form(0.0, 0.0, &s, 1.0, 1.5).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let s = Sinusoid::new(0.37, 2.0 * W, 1.5).unwrap();
        for &(x0, v0, gain, t) in &[(0.0, 0.0, 1.0, 1.5), (2.0, -0.3, 0.5, 0.4), (-1.0, 1.2, -2.0, 1.1)] {
            let exact = rest_to_rest_closed_form(x0, v0, &s, gain, t).unwrap();
            let num = integrate_numerically(x0, v0, &s, gain, t, 20_000);
            assert!((exact.0 - num.0).abs() < 1e-10, "{exact:?} vs {num:?}");
            assert!((exact.1 - num.1).abs() < 1e-10, "{exact:?} vs {num:?}");
        }
    }

    #[test]
    fn quadrature_converges_at_fourth_order() {
        let s = Sinusoid::new(0.8, W, 1.0).unwrap();
        let t = 0.63;
        let exact = rest_to_rest_closed_form(0.1, 0.2, &s, 1.0, t).unwrap();
        let err = |n| {
            let (x, v) = integrate_numerically(0.1, 0.2, &s, 1.0, t, n);
            (x - exact.0).abs().max((v - exact.1).abs())
        };
        let ratio = err(40) / err(80);
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    proptest::proptest! {
        #[test]
        fn rest_to_rest_velocity(a in -50.0..50.0f64, v0 in -5.0..5.0f64, k in 1u32..5, dur in 0.1..10.0f64) {
            let s = Sinusoid::new(a, TAU * k as f64 / dur, dur).unwrap();
            let (_, v) = rest_to_rest_closed_form(0.0, v0, &s, 1.0, dur).unwrap();
            proptest::prop_assert!((v - v0).abs() <= 1e-12 * (1.0 + (a * s.omega).abs()));
        }

        #[test]
        fn displacement_is_linear(a in -50.0..50.0f64, gain in -2.0..2.0f64) {
            let s1 = Sinusoid::new(a, W, 1.0).unwrap();
            let s2 = Sinusoid::new(2.0 * a, W, 1.0).unwrap();
            let (x1, _) = rest_to_rest_closed_form(0.0, 0.0, &s1, gain, 1.0).unwrap();
            let (x2, _) = rest_to_rest_closed_form(0.0, 0.0, &s2, gain, 1.0).unwrap();
            let tol = 1e-12 * (1.0 + x1.abs());
            proptest::prop_assert!((x1 - gain * s1.displacement()).abs() <= tol);
            proptest::prop_assert!((x2 - 2.0 * x1).abs() <= 2.0 * tol);
        }

        #[test]
        fn amplitude_round_trip(delta in -1e6..1e6f64, x0 in -10.0..10.0f64) {
            let a = amplitude_for_displacement(delta, W, 1.0).unwrap();
            let s = Sinusoid::new(a, W, 1.0).unwrap();
            let (x, v) = rest_to_rest_closed_form(x0, 0.0, &s, 1.0, 1.0).unwrap();
            // absolute 1e-12 below unit scale, relative above it
            let tol = 1e-12 * delta.abs().max(x0.abs()).max(1.0);
            proptest::prop_assert!(((x - x0) - delta).abs() <= tol, "delta {} got {}", delta, x - x0);
            proptest::prop_assert!(v.abs() <= 1e-12 * (1.0 + delta.abs()));
        }
    }
}
