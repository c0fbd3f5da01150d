//! Orbit classification by direct integration, used to cross-check
//! [`classify_orbit`](super::classify_orbit).
//!
//! The check deliberately avoids the discriminant machinery. Softened
//! problems are integrated in physical time on the radial line,
//! `r' = p_r`, `p_r' = -dV_eff/dr`. The bare problem is integrated in
//! regularized coordinates with `log r` in place of `r`, so that collision
//! is approached at a finite rate instead of a singular one.

use crate::analysis::classify::{check_amended_bound, OrbitClass, OrbitTag};
use crate::dynamics::integrator::{locate_crossing, Crossing, Dopri5, OdeSystem, SolverOptions};
use crate::error::{Error, Result};
use crate::model::{max_radius, AngularMomentum, EnergyLevel, Flavor, PotentialSpec};
use crate::roots::{bisect, golden_max};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Integration horizon: regularized time units for the bare problem,
    /// multiples of `R_max^{(alpha+2)/2}` in physical time otherwise.
    pub span: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Closure tolerance as a fraction of `R_max`.
    pub closure_fraction: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            span: 1e5,
            rtol: 1e-11,
            atol: 1e-13,
            max_steps: 2_000_000,
            closure_fraction: 1e-6,
        }
    }
}

/// Bare collision is declared once `r` drops below this.
const BARE_COLLISION_R: f64 = 1e-300;

/// `2 s^{alpha/2} (h - V_eff(r))`, positive where radial motion is allowed.
/// The rescaling keeps it finite on every representable radius.
fn allowed(r: f64, spec: &PotentialSpec, h: EnergyLevel, c: f64) -> f64 {
    let alpha = spec.alpha();
    let eps = spec.epsilon();
    // ln(r^2 + eps^2) without underflow at tiny r.
    let ln_s = if eps == 0.0 {
        2.0 * r.ln()
    } else {
        (r * r + eps * eps).ln()
    };
    let sa = (0.5 * alpha * ln_s).exp();
    let centrifugal = if c == 0.0 {
        0.0
    } else {
        let denom_ln = match spec.flavor() {
            Flavor::AmendedSmoothed => ln_s,
            _ => 2.0 * r.ln(),
        };
        c * c * (0.5 * alpha * ln_s - denom_ln).exp()
    };
    2.0 - 2.0 * h.abs() * sa - centrifugal
}

struct Radial<'a> {
    spec: &'a PotentialSpec,
    c2: f64,
}

impl OdeSystem<2> for Radial<'_> {
    fn rhs(&self, y: &[f64; 2]) -> [f64; 2] {
        let (r, pr) = (y[0], y[1]);
        let alpha = self.spec.alpha();
        let s = r * r + self.spec.epsilon() * self.spec.epsilon();
        let pull = alpha * r * s.powf(-alpha / 2.0 - 1.0);
        let push = match self.spec.flavor() {
            Flavor::AmendedSmoothed => self.c2 * r / (s * s),
            _ => {
                if self.c2 == 0.0 {
                    0.0
                } else {
                    self.c2 / (r * r * r)
                }
            }
        };
        [pr, push - pull]
    }
}

/// Bare regularized flow in `(log r, v, u)`.
struct LogRadius {
    alpha: f64,
}

impl OdeSystem<3> for LogRadius {
    fn rhs(&self, y: &[f64; 3]) -> [f64; 3] {
        let (v, u) = (y[1], y[2]);
        let a = self.alpha;
        [v, u * u + 0.5 * a * v * v - a, 0.5 * (a - 2.0) * u * v]
    }
}

/// Outcome of one integration leg from a turning point.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Leg {
    Collision,
    Turn(f64),
}

/// Classify by integrating from the outermost turning point.
pub fn classify_by_integration(
    spec: &PotentialSpec,
    h: EnergyLevel,
    c: AngularMomentum,
    opts: &OracleOptions,
) -> Result<OrbitClass> {
    let r_max = max_radius(spec, h)?;
    check_amended_bound(spec, h, c)?;
    let cv = c.value();
    let g = |r: f64| allowed(r, spec, h, cv);

    let r_out = match outer_turning_point(&g, r_max)? {
        Outer::Root(r) => r,
        Outer::Tangent(r) => {
            return Ok(OrbitClass::new(OrbitTag::RelativeEquilibrium, vec![r]));
        }
        Outer::Empty => return Ok(OrbitClass::void()),
    };

    let forward = leg(spec, h, cv, r_out, r_max, 1.0, opts)?;
    let close = opts.closure_fraction * r_max;
    match forward {
        Leg::Collision => {
            let backward = leg(spec, h, cv, r_out, r_max, -1.0, opts)?;
            if backward != Leg::Collision {
                return Err(Error::Inconclusive(
                    "collision forward in time but not backward".into(),
                ));
            }
            let tag = if cv == 0.0 {
                OrbitTag::SpinlessCollisionEjection
            } else {
                OrbitTag::CollisionEjection
            };
            Ok(OrbitClass::new(tag, vec![r_out]))
        }
        Leg::Turn(r1) => {
            if (r1 - r_out).abs() <= 1e-7 * r_max {
                return Ok(OrbitClass::new(OrbitTag::RelativeEquilibrium, vec![r_out]));
            }
            // Continue from the inner turning point and require a return.
            match leg(spec, h, cv, r1, r_max, 1.0, opts)? {
                Leg::Turn(r2) if (r2 - r_out).abs() <= close => {
                    Ok(OrbitClass::new(OrbitTag::Periodic, vec![r1, r_out]))
                }
                other => Err(Error::Inconclusive(format!(
                    "orbit from turning radius {r1} ended in {other:?}, expected {r_out}"
                ))),
            }
        }
    }
}

enum Outer {
    Root(f64),
    Tangent(f64),
    Empty,
}

fn outer_turning_point<G: Fn(f64) -> f64>(g: &G, r_max: f64) -> Result<Outer> {
    if g(r_max) >= 0.0 {
        return Ok(Outer::Root(r_max));
    }
    let mut prev = r_max;
    let mut best = (r_max, g(r_max));
    let mut best_nbrs = (r_max, r_max);
    let floor = 1e-300;
    loop {
        let ratio = if prev > 1e-8 * r_max { 0.995 } else { 0.5 };
        let r = prev * ratio;
        if r < floor {
            break;
        }
        let gr = g(r);
        if gr > 0.0 {
            return Ok(Outer::Root(bisect(g, r, prev, true)?));
        }
        if gr > best.1 {
            best = (r, gr);
            best_nbrs = (r / ratio, r * ratio);
        }
        prev = r;
    }
    let (lo, hi) = (best_nbrs.1, best_nbrs.0.min(r_max));
    let (r_star, g_star) = golden_max(g, lo, hi);
    if g_star > 0.0 {
        return Ok(Outer::Root(bisect(g, r_star, hi, true)?));
    }
    if g_star >= -1e-10 {
        return Ok(Outer::Tangent(r_star));
    }
    Ok(Outer::Empty)
}

fn leg(
    spec: &PotentialSpec,
    h: EnergyLevel,
    c: f64,
    r_start: f64,
    r_max: f64,
    dir: f64,
    opts: &OracleOptions,
) -> Result<Leg> {
    let base = SolverOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        max_step: f64::INFINITY,
        min_step: 0.0,
        max_steps: opts.max_steps,
    };
    match spec.flavor() {
        Flavor::NonSmoothed => {
            let alpha = spec.alpha();
            let sys = LogRadius { alpha };
            let y0 = [r_start.ln(), 0.0, c * r_start.powf((alpha - 2.0) / 2.0)];
            let floor = BARE_COLLISION_R.ln();
            let mut solver = Dopri5::new(
                &sys,
                0.0,
                y0,
                dir * opts.span,
                SolverOptions {
                    max_step: 1.0,
                    ..base
                },
            )?;
            while let Some(step) = solver.step()? {
                if step.y1[0] < floor {
                    return Ok(Leg::Collision);
                }
                if let Some((_, y)) = locate_crossing(&sys, &step, |y| y[1], Crossing::Either) {
                    return Ok(Leg::Turn(y[0].exp()));
                }
                // The residual of u^2 + v^2 = f scales like r^alpha along the
                // flow, so errors made deep inside grow by (r_out/r_in)^alpha
                // on the way out. Keep the state on the surface.
                let [rho, v, u] = step.y1;
                let f = 2.0 - 2.0 * h.abs() * (alpha * rho).exp();
                let norm = u * u + v * v;
                if f > 0.0 && norm > 0.0 {
                    let k = (f / norm).sqrt();
                    solver.set_state([rho, k * v, k * u]);
                }
            }
            Err(Error::Inconclusive(format!(
                "no event within regularized time {}",
                opts.span
            )))
        }
        _ => {
            let sys = Radial { spec, c2: c * c };
            let horizon = opts.span * r_max.max(spec.epsilon()).powf((spec.alpha() + 2.0) / 2.0);
            let mut solver = Dopri5::new(&sys, 0.0, [r_start, 0.0], dir * horizon, base)?;
            while let Some(step) = solver.step()? {
                if step.y1[0] <= 0.0 {
                    return Ok(Leg::Collision);
                }
                if let Some((_, y)) = locate_crossing(&sys, &step, |y| y[1], Crossing::Either) {
                    return Ok(Leg::Turn(y[0]));
                }
                // Same energy correction as above, skipped near turning points
                // where the square root is ill-conditioned.
                let [r, pr] = step.y1;
                let s2 = r * r + spec.epsilon() * spec.epsilon();
                let kinetic = allowed(r, spec, h, c) * s2.powf(-spec.alpha() / 2.0);
                if kinetic > 0.0 && (kinetic - pr * pr).abs() < 1e-6 * pr * pr {
                    solver.set_state([r, kinetic.sqrt().copysign(pr)]);
                }
            }
            Err(Error::Inconclusive(format!(
                "no event within physical time {horizon}"
            )))
        }
    }
}
