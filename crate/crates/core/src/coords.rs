//! Cartesian, polar and McGehee coordinates and the rescaled time.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::{radial_rate, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Flavor, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

/// Polar state with `theta` in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub r: f64,
    pub theta: f64,
    pub pr: f64,
    pub ptheta: f64,
}

/// A point `(r, v, theta, u)` of the regularized phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McGeheeState {
    pub r: f64,
    pub v: f64,
    pub theta: f64,
    pub u: f64,
}

/// A point `(r, v, u)` of the reduced phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub r: f64,
    pub v: f64,
    pub u: f64,
}

impl ReducedState {
    pub fn new(r: f64, v: f64, u: f64) -> Self {
        ReducedState { r, v, u }
    }

    pub fn with_theta(self, theta: f64) -> McGeheeState {
        McGeheeState {
            r: self.r,
            v: self.v,
            theta,
            u: self.u,
        }
    }
}

impl McGeheeState {
    pub fn reduced(&self) -> ReducedState {
        ReducedState {
            r: self.r,
            v: self.v,
            u: self.u,
        }
    }
}

impl From<ReducedState> for McGeheeState {
    fn from(s: ReducedState) -> Self {
        s.with_theta(0.0)
    }
}

pub fn cartesian_to_polar(s: CartesianState) -> Result<PolarState> {
    let r = s.x.hypot(s.y);
    if r == 0.0 {
        return Err(Error::Domain("polar angle undefined at the origin".into()));
    }
    Ok(PolarState {
        r,
        theta: s.y.atan2(s.x).rem_euclid(TAU),
        pr: (s.x * s.px + s.y * s.py) / r,
        ptheta: s.x * s.py - s.y * s.px,
    })
}

pub fn polar_to_cartesian(s: PolarState) -> CartesianState {
    let (sin, cos) = s.theta.sin_cos();
    let tangential = s.ptheta / s.r;
    CartesianState {
        x: s.r * cos,
        y: s.r * sin,
        px: s.pr * cos - tangential * sin,
        py: s.pr * sin + tangential * cos,
    }
}

/// Scale factors `(u / p_theta, v / p_r)` at radius `r`.
fn momentum_scales(r: f64, spec: &PotentialSpec) -> (f64, f64) {
    let alpha = spec.alpha();
    match spec.flavor() {
        Flavor::AmendedSmoothed => {
            let s = spec.softened_sq(r);
            (s.powf((alpha - 2.0) / 4.0), s.powf(alpha / 4.0))
        }
        _ => (r.powf((alpha - 2.0) / 2.0), r.powf(alpha / 2.0)),
    }
}

pub fn polar_to_mcgehee(s: PolarState, spec: &PotentialSpec) -> Result<McGeheeState> {
    if s.r < 0.0 || (s.r == 0.0 && !spec.is_amended()) {
        return Err(Error::Domain(format!(
            "McGehee transform needs r > 0 for the {} flavor",
            spec.flavor()
        )));
    }
    let (su, sv) = momentum_scales(s.r, spec);
    Ok(McGeheeState {
        r: s.r,
        v: s.pr * sv,
        theta: s.theta,
        u: s.ptheta * su,
    })
}

pub fn mcgehee_to_polar(s: McGeheeState, spec: &PotentialSpec) -> Result<PolarState> {
    if !(s.r > 0.0) {
        return Err(Error::Domain(
            "collision-manifold points have no physical preimage".into(),
        ));
    }
    let (su, sv) = momentum_scales(s.r, spec);
    Ok(PolarState {
        r: s.r,
        theta: s.theta.rem_euclid(TAU),
        pr: s.v / sv,
        ptheta: s.u / su,
    })
}

/// `dt/dtau = r^{(alpha+2)/2}`, shared by every flavor.
pub fn time_rescale_rate(r: f64, spec: &PotentialSpec) -> f64 {
    r.powf((spec.alpha() + 2.0) / 2.0)
}

/// Physical time along a trajectory, recovered from the rescaled time by
/// cubic Hermite quadrature of `dt/dtau`. The first sample maps to `t = 0`.
pub fn physical_time(traj: &Trajectory, spec: &PotentialSpec) -> Result<Vec<f64>> {
    let samples = traj.samples();
    if samples.is_empty() {
        return Err(Error::Quadrature("empty trajectory".into()));
    }
    let alpha = spec.alpha();
    let rate_and_slope = |r: f64, v: f64| {
        let rate = time_rescale_rate(r, spec);
        let slope = 0.5 * (alpha + 2.0) * r.powf(alpha / 2.0) * radial_rate(r, v, spec);
        (rate, slope)
    };
    let mut out = Vec::with_capacity(samples.len());
    let mut t = 0.0;
    out.push(t);
    let first = &samples[0];
    let mut prev_tau = first.tau;
    let mut prev = rate_and_slope(first.state.r, first.state.v);
    for s in &samples[1..] {
        let dtau = s.tau - prev_tau;
        if !(dtau.is_finite()) || dtau == 0.0 {
            return Err(Error::Quadrature(format!(
                "non-monotone sample spacing at tau = {}",
                s.tau
            )));
        }
        let cur = rate_and_slope(s.state.r, s.state.v);
        let dt = 0.5 * dtau * (prev.0 + cur.0) + dtau * dtau / 12.0 * (prev.1 - cur.1);
        if !dt.is_finite() {
            return Err(Error::Quadrature(format!("non-finite rate at tau = {}", s.tau)));
        }
        t += dt;
        out.push(t);
        prev_tau = s.tau;
        prev = cur;
    }
    Ok(out)
}
