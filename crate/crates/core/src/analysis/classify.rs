//! Orbit classification from the intersections of the energy profile
//! `u_{h,eps}(r)` with the angular momentum curve `u_c(r)`.
//!
//! Everything is expressed through the radial discriminant
//! `D(r) = f_eps(r) - u_c(r)^2`: motion happens where `D >= 0` and turning
//! points are its zeros.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    admissible_c_bound, energy_profile, max_radius, momentum_curve, AngularMomentum, EnergyLevel,
    Flavor, PotentialSpec,
};
use crate::roots::{bisect, golden_max};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitTag {
    Void,
    Periodic,
    CollisionEjection,
    SpinlessCollisionEjection,
    RelativeEquilibrium,
}

impl fmt::Display for OrbitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Qualitative orbit type for one `(h, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub tag: OrbitTag,
    /// Ascending.
    pub turning_radii: Vec<f64>,
    pub tangency: bool,
}

impl OrbitClass {
    pub(crate) fn new(tag: OrbitTag, mut turning_radii: Vec<f64>) -> Self {
        turning_radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        OrbitClass {
            tag,
            turning_radii,
            tangency: tag == OrbitTag::RelativeEquilibrium,
        }
    }

    pub fn void() -> Self {
        Self::new(OrbitTag::Void, Vec::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierOptions {
    pub grid_points: usize,
    /// The log grid spans `[R_max 10^{-decades}, R_max]`.
    pub grid_decades: f64,
    pub tangency_value_tol: f64,
    pub tangency_slope_tol: f64,
    /// Roots closer than this fraction of `R_max` need a tangency decision.
    pub separation_fraction: f64,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        ClassifierOptions {
            grid_points: 4096,
            grid_decades: 12.0,
            tangency_value_tol: 1e-10,
            tangency_slope_tol: 1e-6,
            separation_fraction: 1e-6,
        }
    }
}

/// `D(r) = f_eps(r) - u_c(r)^2`.
pub fn radial_discriminant(r: f64, spec: &PotentialSpec, h: EnergyLevel, c: AngularMomentum) -> f64 {
    let u = momentum_curve(r, spec, c).unwrap_or(f64::INFINITY);
    energy_profile(r, spec, h) - u * u
}

/// Sign of `D` as `r -> 0+`, from the leading powers of the two curves.
pub fn boundary_sign(spec: &PotentialSpec, h: EnergyLevel, c: AngularMomentum) -> f64 {
    let alpha = spec.alpha();
    let c = c.value();
    if c == 0.0 {
        return match spec.flavor() {
            Flavor::PlainSmoothed => 0.0,
            _ => 1.0,
        };
    }
    match spec.flavor() {
        // u_c^2 = c^2 r^{alpha-2} against f(0+) = 2.
        Flavor::NonSmoothed => {
            if alpha < 2.0 {
                -1.0
            } else if alpha == 2.0 {
                sign(2.0 - c * c)
            } else {
                1.0
            }
        }
        // f ~ 2 (r/eps)^alpha loses to c^2 r^{alpha-2} for every alpha.
        Flavor::PlainSmoothed => -1.0,
        Flavor::AmendedSmoothed => sign(radial_discriminant(0.0, spec, h, AngularMomentum::new(c).unwrap())),
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn check_amended_bound(spec: &PotentialSpec, h: EnergyLevel, c: AngularMomentum) -> Result<()> {
    if spec.is_amended() && spec.alpha() >= 2.0 {
        let bound = admissible_c_bound(spec, h)?;
        if c.value() > bound * (1.0 + 1e-12) {
            return Err(Error::CExceedsBound {
                c: c.value(),
                bound,
            });
        }
    }
    Ok(())
}

pub fn classify_orbit(spec: &PotentialSpec, h: EnergyLevel, c: AngularMomentum) -> Result<OrbitClass> {
    classify_orbit_with(spec, h, c, &ClassifierOptions::default())
}

pub fn classify_orbit_with(
    spec: &PotentialSpec,
    h: EnergyLevel,
    c: AngularMomentum,
    opts: &ClassifierOptions,
) -> Result<OrbitClass> {
    let r_max = max_radius(spec, h)?;
    check_amended_bound(spec, h, c)?;
    if c.value() == 0.0 {
        // u = 0: the only turning point is where f_eps vanishes.
        return Ok(OrbitClass::new(OrbitTag::SpinlessCollisionEjection, vec![r_max]));
    }
    let d = |r: f64| radial_discriminant(r, spec, h, c);

    let n = opts.grid_points.max(16);
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            let frac = 1.0 - i as f64 / (n - 1) as f64;
            r_max * 10f64.powf(-opts.grid_decades * frac)
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&r| d(r)).collect();

    let mut inner = boundary_sign(spec, h, c);
    if inner == 0.0 {
        inner = sign(values[0]);
    }
    let mut roots = Vec::new();

    // A root below the grid shows up as a mismatch with the limiting sign.
    if inner != 0.0 && values[0] * inner < 0.0 {
        let mut hi = grid[0];
        let mut lo = hi;
        loop {
            lo *= 1e-12;
            if lo < 1e-300 {
                return Err(Error::Domain(
                    "turning radius below floating-point range".into(),
                ));
            }
            if d(lo) * inner > 0.0 {
                roots.push(bisect(d, lo, hi, true)?);
                break;
            }
            hi = lo;
        }
    }
    for i in 0..n - 1 {
        if values[i] * values[i + 1] < 0.0 {
            roots.push(bisect(d, grid[i], grid[i + 1], true)?);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let tangency_at = |lo: f64, hi: f64| -> (f64, f64, bool) {
        let (r_star, d_star) = golden_max(d, lo, hi);
        let step = (1e-7 * r_max).min(0.5 * r_star);
        let slope = (d(r_star + step) - d(r_star - step)) / (2.0 * step);
        let tangent =
            d_star.abs() < opts.tangency_value_tol && slope.abs() < opts.tangency_slope_tol;
        (r_star, d_star, tangent)
    };

    if inner > 0.0 {
        return match roots.len() {
            1 => Ok(OrbitClass::new(OrbitTag::CollisionEjection, roots)),
            k => Err(Error::RootStructure(format!(
                "{k} turning points with D > 0 near the origin"
            ))),
        };
    }

    if roots.is_empty() {
        // The hump of D may hide two close roots between grid points.
        let (imax, _) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let lo = grid[imax.saturating_sub(1)];
        let hi = grid[(imax + 1).min(n - 1)];
        let (r_star, d_star, tangent) = tangency_at(lo, hi);
        if tangent {
            return Ok(OrbitClass::new(OrbitTag::RelativeEquilibrium, vec![r_star]));
        }
        if d_star > 0.0 {
            roots.push(bisect(d, lo, r_star, true)?);
            roots.push(bisect(d, r_star, hi, true)?);
        } else {
            return Ok(OrbitClass::void());
        }
    }

    match roots.len() {
        2 => {
            let (r1, r2) = (roots[0], roots[1]);
            if r2 - r1 < opts.separation_fraction * r_max {
                let (r_star, _, tangent) = tangency_at(r1, r2);
                if tangent {
                    return Ok(OrbitClass::new(OrbitTag::RelativeEquilibrium, vec![r_star]));
                }
                return Err(Error::TangencyAmbiguous { r1, r2 });
            }
            Ok(OrbitClass::new(OrbitTag::Periodic, roots))
        }
        k => Err(Error::RootStructure(format!(
            "{k} turning points with D < 0 near the origin"
        ))),
    }
}
