//! Fixed points of the reduced flow and their linear stability on the
//! energy surface.

use serde::{Deserialize, Serialize};

use crate::coords::ReducedState;
use crate::dynamics::{reduced_field, reduced_jacobian};
use crate::error::{Error, Result};
use crate::model::{energy_profile, max_radius, EnergyLevel, Flavor, PotentialSpec};
use crate::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityKind {
    Centre,
    Saddle,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumSource {
    ClosedForm,
    RootFind,
}

/// A relative equilibrium `(r_e, 0, u_e)` of the reduced flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub r: f64,
    pub u: f64,
    pub kind: StabilityKind,
    pub source: EquilibriumSource,
}

impl Equilibrium {
    pub fn state(&self) -> ReducedState {
        ReducedState::new(self.r, 0.0, self.u)
    }
}

/// Eigenvalues of the linearization restricted to the energy surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpectrum {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl SurfaceSpectrum {
    pub fn kind(&self, centre_tol: f64) -> StabilityKind {
        if self.im[0] != 0.0 {
            if self.re[0].abs() < centre_tol {
                StabilityKind::Centre
            } else {
                StabilityKind::Unresolved
            }
        } else if self.re[0] * self.re[1] < 0.0 {
            StabilityKind::Saddle
        } else {
            StabilityKind::Unresolved
        }
    }
}

/// `f_eps'(r)`; may be infinite at `r = 0` for `alpha < 1`.
fn energy_profile_slope(r: f64, spec: &PotentialSpec, h: EnergyLevel) -> f64 {
    let alpha = spec.alpha();
    let abs_h = h.abs();
    match spec.flavor() {
        Flavor::NonSmoothed => -2.0 * abs_h * alpha * r.powf(alpha - 1.0),
        Flavor::PlainSmoothed => {
            let eps2 = spec.epsilon() * spec.epsilon();
            let soft = spec.softened_sq(r);
            2.0 * alpha * r.powf(alpha - 1.0) * (eps2 * soft.powf(-alpha / 2.0 - 1.0) - abs_h)
        }
        Flavor::AmendedSmoothed => {
            -2.0 * abs_h * alpha * r * spec.softened_sq(r).powf(alpha / 2.0 - 1.0)
        }
    }
}

/// Spectrum of the reduced Jacobian restricted to the tangent plane of the
/// energy surface at a fixed point. The tangent plane is invariant because
/// `F' = (const) v F` along the flow.
pub fn surface_spectrum(s: &ReducedState, spec: &PotentialSpec, h: EnergyLevel) -> SurfaceSpectrum {
    let jac = reduced_jacobian(s, spec);
    let slope = energy_profile_slope(s.r, spec, h);
    let normal = if slope.is_finite() {
        normalize([-slope, 2.0 * s.v, 2.0 * s.u])
    } else {
        [1.0, 0.0, 0.0]
    };
    let (t1, t2) = tangent_basis(normal);
    let apply = |x: [f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = (0..3).map(|j| jac[i][j] * x[j]).sum();
        }
        out
    };
    let (jt1, jt2) = (apply(t1), apply(t2));
    let m = [[dot(t1, jt1), dot(t1, jt2)], [dot(t2, jt1), dot(t2, jt2)]];
    let half_trace = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = half_trace * half_trace - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        SurfaceSpectrum {
            re: [half_trace + root, half_trace - root],
            im: [0.0, 0.0],
        }
    } else {
        let root = (-disc).sqrt();
        SurfaceSpectrum {
            re: [half_trace, half_trace],
            im: [root, -root],
        }
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn tangent_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    // Start from the coordinate axis least aligned with the normal.
    let axis = (0..3)
        .min_by(|&a, &b| n[a].abs().partial_cmp(&n[b].abs()).unwrap())
        .unwrap();
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let proj = dot(e, n);
    let t1 = normalize([e[0] - proj * n[0], e[1] - proj * n[1], e[2] - proj * n[2]]);
    let t2 = [
        n[1] * t1[2] - n[2] * t1[1],
        n[2] * t1[0] - n[0] * t1[2],
        n[0] * t1[1] - n[1] * t1[0],
    ];
    (t1, t2)
}

const CENTRE_TOL: f64 = 1e-8;

fn classify_point(s: ReducedState, spec: &PotentialSpec, h: EnergyLevel) -> StabilityKind {
    surface_spectrum(&s, spec, h).kind(CENTRE_TOL)
}

/// `q(r) = (2-alpha) r^2 + 2 eps^2 - 2|h| (r^2+eps^2)^{alpha/2+1}`, whose
/// positive zero is the radius of the smoothed relative equilibrium.
pub fn equilibrium_function(r: f64, spec: &PotentialSpec, h: EnergyLevel) -> f64 {
    let alpha = spec.alpha();
    let eps2 = spec.epsilon() * spec.epsilon();
    (2.0 - alpha) * r * r + 2.0 * eps2 - 2.0 * h.abs() * spec.softened_sq(r).powf(alpha / 2.0 + 1.0)
}

/// Relative equilibria `R^{+}` and `R^{-}` (in that order) of the reduced flow.
pub fn relative_equilibria(spec: &PotentialSpec, h: EnergyLevel) -> Result<Vec<Equilibrium>> {
    let r_max = max_radius(spec, h)?;
    let alpha = spec.alpha();
    let (r, source) = match spec.flavor() {
        Flavor::AmendedSmoothed => {
            return Err(Error::Flavor {
                expected: "none or plain",
            })
        }
        Flavor::NonSmoothed => {
            if alpha >= 2.0 {
                return Ok(Vec::new());
            }
            (
                ((2.0 - alpha) / (2.0 * h.abs())).powf(1.0 / alpha),
                EquilibriumSource::ClosedForm,
            )
        }
        Flavor::PlainSmoothed => {
            let q = |r: f64| equilibrium_function(r, spec, h);
            let hi = 2.0 * r_max;
            if !(q(0.0) > 0.0 && q(hi) < 0.0) {
                return Err(Error::RootBracketFailure { lo: 0.0, hi });
            }
            (bisect(q, 0.0, hi, false)?, EquilibriumSource::RootFind)
        }
    };
    let u = energy_profile(r, spec, h).max(0.0).sqrt();
    Ok([u, -u]
        .into_iter()
        .map(|u| Equilibrium {
            r,
            u,
            kind: classify_point(ReducedState::new(r, 0.0, u), spec, h),
            source,
        })
        .collect())
}

/// Fixed points of the reduced flow on `r = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionSet {
    pub fixed_points: Vec<ReducedState>,
    /// For the amended flavor, the radius of the circle `u^2+v^2 = f_eps(0)`
    /// that forms the collision manifold.
    pub manifold_radius: Option<f64>,
}

pub fn collision_fixed_points(spec: &PotentialSpec, h: EnergyLevel) -> CollisionSet {
    match spec.flavor() {
        Flavor::NonSmoothed => {
            let v = std::f64::consts::SQRT_2;
            CollisionSet {
                fixed_points: vec![ReducedState::new(0.0, v, 0.0), ReducedState::new(0.0, -v, 0.0)],
                manifold_radius: None,
            }
        }
        Flavor::PlainSmoothed => CollisionSet {
            fixed_points: vec![ReducedState::new(0.0, 0.0, 0.0)],
            manifold_radius: None,
        },
        Flavor::AmendedSmoothed => CollisionSet {
            fixed_points: Vec::new(),
            manifold_radius: Some(energy_profile(0.0, spec, h).max(0.0).sqrt()),
        },
    }
}

/// Stability of each collision fixed point.
pub fn collision_stability(spec: &PotentialSpec, h: EnergyLevel) -> Vec<(ReducedState, SurfaceSpectrum)> {
    collision_fixed_points(spec, h)
        .fixed_points
        .into_iter()
        .map(|s| (s, surface_spectrum(&s, spec, h)))
        .collect()
}

/// Max norm of the reduced field at `s`.
pub fn field_norm(s: &ReducedState, spec: &PotentialSpec) -> f64 {
    let d = reduced_field(s, spec);
    d.r.abs().max(d.v.abs()).max(d.u.abs())
}
