//! Regularized flows, trajectory integration with event detection, and
//! invariant-drift monitoring.

mod fields;
pub mod integrator;

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coords::{McGeheeState, ReducedState};
use crate::error::{Error, Result};
use crate::model::{energy_profile, max_radius, EnergyLevel, PotentialSpec};

pub use fields::{
    amended_field_as_printed, cartesian_field, hamiltonian, radial_rate, reduced_field,
    reduced_jacobian, regularized_field,
};
use integrator::{locate_crossing, Crossing, DenseStep, Dopri5, OdeSystem, SolverOptions};

/// Which field to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    /// `(r, v, theta, u)`.
    Full,
    /// `(r, v, u)`.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    TurningPoint,
    CollisionApproach,
    MaxRadiusTouch,
    PeriodClosure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub tau: f64,
    pub state: McGeheeState,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftReport {
    /// Max of `|u^2 + v^2 - f_eps(r)|` over the samples.
    pub max_energy_residual: f64,
    /// Max deviation of the conserved angular momentum from its initial value.
    pub max_momentum_residual: f64,
    /// Max energy residual produced by a single step, before projection.
    pub max_step_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub solver: SolverOptions,
    /// Collision approach fires when `r < collision_fraction * R_max` ...
    pub collision_fraction: f64,
    /// ... and `u^2 + v^2` is within this of `f_eps(0)`.
    pub collision_energy_tol: f64,
    pub stop_on_collision: bool,
    /// Relative distance to the start that counts as a closed orbit.
    pub closure_tol: f64,
    pub stop_on_closure: bool,
    /// Allowed `|u^2 + v^2 - f_eps(r)|` at the initial state.
    pub surface_tol: f64,
    /// Rescale `(v, u)` back onto the energy surface after every step.
    /// Without it, round-off near `r = 0` is amplified like `r^alpha`.
    pub project_to_surface: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            solver: SolverOptions::default(),
            collision_fraction: 1e-6,
            collision_energy_tol: 1e-3,
            stop_on_collision: true,
            closure_tol: 1e-6,
            stop_on_closure: false,
            surface_tol: 1e-10,
            project_to_surface: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    /// `theta` is reduced to `[0, 2pi)`; see `winding`.
    pub state: McGeheeState,
    /// Completed turns of `theta` since the start (full field only).
    pub winding: i64,
}

/// A sampled solution of one of the regularized flows.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    spec: PotentialSpec,
    energy: EnergyLevel,
    field: FieldKind,
    samples: Vec<Sample>,
    events: Vec<Event>,
    drift: DriftReport,
}

impl Trajectory {
    /// Assemble a trajectory from externally produced samples.
    pub fn from_samples(
        spec: PotentialSpec,
        energy: EnergyLevel,
        field: FieldKind,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("trajectory needs at least one sample".into()));
        }
        let mut traj = Trajectory {
            spec,
            energy,
            field,
            samples,
            events: Vec::new(),
            drift: DriftReport::default(),
        };
        traj.drift = drift_report(&traj, &spec, energy);
        Ok(traj)
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn energy(&self) -> EnergyLevel {
        self.energy
    }

    pub fn field(&self) -> FieldKind {
        self.field
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn drift(&self) -> DriftReport {
        self.drift
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Unwrapped polar angle of a sample.
    pub fn total_angle(&self, index: usize) -> f64 {
        let s = &self.samples[index];
        s.state.theta + TAU * s.winding as f64
    }

    /// Trajectory export: `tau,r,v,u[,theta],energy_residual`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let full = self.field == FieldKind::Full;
        let mut out = String::from(if full {
            "tau,r,v,u,theta,energy_residual\n"
        } else {
            "tau,r,v,u,energy_residual\n"
        });
        for s in &self.samples {
            let st = &s.state;
            let res = energy_residual(&st.reduced(), &self.spec, self.energy);
            let _ = write!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", s.tau, st.r, st.v, st.u);
            if full {
                let _ = write!(out, ",{:.16e}", st.theta);
            }
            let _ = writeln!(out, ",{:.16e}", res);
        }
        out
    }

    /// Event sidecar: `[{kind,tau,r,v,u}]`.
    pub fn events_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.events
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "kind": e.kind,
                        "tau": e.tau,
                        "r": e.state.r,
                        "v": e.state.v,
                        "u": e.state.u,
                    })
                })
                .collect(),
        )
    }
}

/// `u^2 + v^2 - f_eps(r)` (signed).
pub fn energy_residual(s: &ReducedState, spec: &PotentialSpec, h: EnergyLevel) -> f64 {
    s.u * s.u + s.v * s.v - energy_profile(s.r, spec, h)
}

/// The conserved angular momentum expressed in McGehee variables; `None`
/// on the collision manifold of the non-amended flavors.
pub fn momentum_invariant(s: &ReducedState, spec: &PotentialSpec) -> Option<f64> {
    let alpha = spec.alpha();
    if spec.is_amended() {
        Some(s.u * spec.softened_sq(s.r).powf((2.0 - alpha) / 4.0))
    } else if s.r > 0.0 {
        Some(s.u * s.r.powf((2.0 - alpha) / 2.0))
    } else {
        None
    }
}

pub fn drift_report(traj: &Trajectory, spec: &PotentialSpec, h: EnergyLevel) -> DriftReport {
    let mut report = DriftReport::default();
    let mut reference = None;
    for s in traj.samples() {
        let red = s.state.reduced();
        let e = energy_residual(&red, spec, h).abs();
        report.max_energy_residual = report.max_energy_residual.max(e);
        if let Some(c) = momentum_invariant(&red, spec) {
            match reference {
                None => reference = Some(c),
                Some(c0) => {
                    report.max_momentum_residual =
                        report.max_momentum_residual.max((c - c0 as f64).abs())
                }
            }
        }
    }
    report
}

struct FullSystem<'a>(&'a PotentialSpec);

impl OdeSystem<4> for FullSystem<'_> {
    fn rhs(&self, y: &[f64; 4]) -> [f64; 4] {
        let d = regularized_field(
            &McGeheeState {
                r: y[0],
                v: y[1],
                theta: y[2],
                u: y[3],
            },
            self.0,
        );
        [d.r, d.v, d.theta, d.u]
    }
}

struct ReducedSystem<'a>(&'a PotentialSpec);

impl OdeSystem<3> for ReducedSystem<'_> {
    fn rhs(&self, y: &[f64; 3]) -> [f64; 3] {
        let d = reduced_field(&ReducedState::new(y[0], y[1], y[2]), self.0);
        [d.r, d.v, d.u]
    }
}

fn full_state(y: &[f64; 4]) -> (McGeheeState, i64) {
    let winding = (y[2] / TAU).floor();
    (
        McGeheeState {
            r: y[0],
            v: y[1],
            theta: y[2] - TAU * winding,
            u: y[3],
        },
        winding as i64,
    )
}

fn reduced_state(y: &[f64; 3]) -> (McGeheeState, i64) {
    (
        McGeheeState {
            r: y[0],
            v: y[1],
            theta: 0.0,
            u: y[2],
        },
        0,
    )
}

/// Integrate one of the regularized fields over `tau_span`, recording
/// turning points, collision approaches, max-radius touches and closures.
pub fn integrate(
    spec: &PotentialSpec,
    h: EnergyLevel,
    field: FieldKind,
    s0: McGeheeState,
    tau_span: (f64, f64),
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    let r_max = max_radius(spec, h)?;
    if !(s0.r >= 0.0) {
        return Err(Error::Domain(format!("initial radius {} is negative", s0.r)));
    }
    let residual = energy_residual(&s0.reduced(), spec, h);
    if !(residual.abs() <= opts.surface_tol) {
        return Err(Error::EnergyViolation { residual });
    }
    let ctx = RunContext {
        spec,
        h,
        r_max,
        opts,
    };
    let (samples, events, max_step_defect) = match field {
        FieldKind::Full => run(
            &ctx,
            &FullSystem(spec),
            [s0.r, s0.v, s0.theta, s0.u],
            tau_span,
            full_state,
            [0, 1, 3],
        )?,
        FieldKind::Reduced => run(
            &ctx,
            &ReducedSystem(spec),
            [s0.r, s0.v, s0.u],
            tau_span,
            reduced_state,
            [0, 1, 2],
        )?,
    };
    let mut traj = Trajectory {
        spec: *spec,
        energy: h,
        field,
        samples,
        events,
        drift: DriftReport::default(),
    };
    traj.drift = drift_report(&traj, spec, h);
    traj.drift.max_step_defect = max_step_defect;
    Ok(traj)
}

struct RunContext<'a> {
    spec: &'a PotentialSpec,
    h: EnergyLevel,
    r_max: f64,
    opts: &'a IntegrationOptions,
}

fn run<S, const N: usize>(
    ctx: &RunContext<'_>,
    sys: &S,
    y0: [f64; N],
    tau_span: (f64, f64),
    to_state: fn(&[f64; N]) -> (McGeheeState, i64),
    reduced_idx: [usize; 3],
) -> Result<(Vec<Sample>, Vec<Event>, f64)>
where
    S: OdeSystem<N>,
{
    let opts = ctx.opts;
    let collision_r = opts.collision_fraction * ctx.r_max;
    let f0 = energy_profile(0.0, ctx.spec, ctx.h);

    // Poincaré section through the start, transverse to the flow.
    let start_red = reduced_idx.map(|i| y0[i]);
    let start_dir = {
        let d = sys.rhs(&y0);
        reduced_idx.map(|i| d[i])
    };
    let dir_norm = start_dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let start_scale = 1.0 + start_red.iter().map(|x| x * x).sum::<f64>().sqrt();
    let section = |y: &[f64; N]| -> f64 {
        (0..3)
            .map(|k| (y[reduced_idx[k]] - start_red[k]) * start_dir[k])
            .sum()
    };

    let mut solver = Dopri5::new(sys, tau_span.0, y0, tau_span.1, opts.solver)?;
    let (st0, w0) = to_state(&y0);
    let mut samples = vec![Sample {
        tau: tau_span.0,
        state: st0,
        winding: w0,
    }];
    let mut events = Vec::new();
    let mut max_defect: f64 = 0.0;

    while let Some(step) = solver.step()? {
        let mut hits: Vec<(f64, EventKind, [f64; N], bool)> = Vec::new();
        if let Some((t, y)) = locate_crossing(sys, &step, |y| y[reduced_idx[1]], Crossing::Either) {
            let r = y[reduced_idx[0]];
            if r > 0.0 {
                hits.push((t, EventKind::TurningPoint, y, false));
                if (r - ctx.r_max).abs() <= 1e-8 * ctx.r_max {
                    hits.push((t, EventKind::MaxRadiusTouch, y, false));
                }
            }
        }
        if let Some((t, y)) =
            locate_crossing(sys, &step, |y| y[reduced_idx[0]] - collision_r, Crossing::Falling)
        {
            let (v, u) = (y[reduced_idx[1]], y[reduced_idx[2]]);
            if (u * u + v * v - f0).abs() <= opts.collision_energy_tol {
                hits.push((t, EventKind::CollisionApproach, y, opts.stop_on_collision));
            }
        }
        if dir_norm > 0.0 {
            if let Some((t, y)) = locate_crossing(sys, &step, section, Crossing::Rising) {
                let dist = (0..3)
                    .map(|k| (y[reduced_idx[k]] - start_red[k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if dist <= opts.closure_tol * start_scale {
                    hits.push((t, EventKind::PeriodClosure, y, opts.stop_on_closure));
                }
            }
        }
        let forward = tau_span.1 >= tau_span.0;
        hits.sort_by(|a, b| {
            let ord = a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal);
            if forward {
                ord
            } else {
                ord.reverse()
            }
        });
        let mut stop = None;
        for (t, kind, y, terminal) in hits {
            if let Some(ts) = stop {
                if t != ts {
                    break;
                }
            }
            let (state, _) = to_state(&y);
            events.push(Event {
                kind,
                tau: t,
                state,
            });
            if terminal && stop.is_none() {
                stop = Some(t);
            }
        }
        if let Some(t) = stop {
            push_sample(&mut samples, &step, t, to_state, sys);
            break;
        }
        let mut y1 = step.y1;
        let (r, v, u) = (y1[reduced_idx[0]], y1[reduced_idx[1]], y1[reduced_idx[2]]);
        let f = energy_profile(r, ctx.spec, ctx.h);
        let norm2 = u * u + v * v;
        max_defect = max_defect.max((norm2 - f).abs());
        if opts.project_to_surface && f > 0.0 && norm2 > 0.0 {
            let scale = (f / norm2).sqrt();
            y1[reduced_idx[1]] *= scale;
            y1[reduced_idx[2]] *= scale;
            solver.set_state(y1);
        }
        let (state, winding) = to_state(&y1);
        samples.push(Sample {
            tau: step.t1,
            state,
            winding,
        });
    }
    Ok((samples, events, max_defect))
}

fn push_sample<S: OdeSystem<N>, const N: usize>(
    samples: &mut Vec<Sample>,
    step: &DenseStep<N>,
    t: f64,
    to_state: fn(&[f64; N]) -> (McGeheeState, i64),
    sys: &S,
) {
    if t == step.t0 {
        return;
    }
    let y = integrator::single_step(sys, &step.y0, t - step.t0);
    let (state, winding) = to_state(&y);
    samples.push(Sample {
        tau: t,
        state,
        winding,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AngularMomentum;

    fn circular_kepler() -> (PotentialSpec, EnergyLevel, McGeheeState) {
        let spec = PotentialSpec::non_smoothed(1.0).unwrap();
        let h = EnergyLevel::new(-0.5).unwrap();
        (
            spec,
            h,
            McGeheeState {
                r: 1.0,
                v: 0.0,
                theta: 0.0,
                u: 1.0,
            },
        )
    }

    #[test]
    fn fixed_point_stays_put() {
        let (spec, h, s0) = circular_kepler();
        let traj = integrate(&spec, h, FieldKind::Reduced, s0, (0.0, 50.0), &Default::default()).unwrap();
        for s in traj.samples() {
            let d = (s.state.r - 1.0).abs() + s.state.v.abs() + (s.state.u - 1.0).abs();
            assert!(d < 1e-8);
        }
        assert!(traj.drift().max_energy_residual < 1e-12);
        assert!(traj.drift().max_momentum_residual < 1e-12);
        assert!((traj.last().tau - 50.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_off_surface_start() {
        let (spec, h, mut s0) = circular_kepler();
        s0.u = 1.1;
        assert!(matches!(
            integrate(&spec, h, FieldKind::Reduced, s0, (0.0, 1.0), &Default::default()),
            Err(Error::EnergyViolation { .. })
        ));
    }

    #[test]
    fn spinless_plane_preserved() {
        let spec = PotentialSpec::non_smoothed(1.5).unwrap();
        let h = EnergyLevel::new(-1.0).unwrap();
        let r = 0.6;
        let v = energy_profile(r, &spec, h).sqrt();
        let s0 = McGeheeState { r, v, theta: 0.0, u: 0.0 };
        let traj = integrate(&spec, h, FieldKind::Full, s0, (0.0, 20.0), &Default::default()).unwrap();
        assert!(traj.samples().iter().all(|s| s.state.u == 0.0));
    }

    #[test]
    fn periodic_orbit_turns_twice_then_closes() {
        let spec = PotentialSpec::non_smoothed(1.0).unwrap();
        let h = EnergyLevel::new(-0.5).unwrap();
        let c = AngularMomentum::new(0.5).unwrap();
        // D(r) = (2 - r) - c^2 / r; outer root of r^2 - 2r + 0.25 = 0.
        let r_out = 1.0 + 0.75f64.sqrt();
        let u = crate::model::momentum_curve(r_out, &spec, c).unwrap();
        let s0 = McGeheeState { r: r_out, v: 0.0, theta: 0.0, u };
        let opts = IntegrationOptions {
            stop_on_closure: true,
            ..Default::default()
        };
        let traj = integrate(&spec, h, FieldKind::Reduced, s0, (0.0, 200.0), &opts).unwrap();
        let mut radii: Vec<f64> = traj.events_of(EventKind::TurningPoint).map(|e| e.state.r).collect();
        assert!(traj.events_of(EventKind::PeriodClosure).count() == 1);
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        radii.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        assert_eq!(radii.len(), 2, "{radii:?}");
        assert!((radii[0] - (1.0 - 0.75f64.sqrt())).abs() < 1e-8);
        for e in traj.events_of(EventKind::TurningPoint) {
            assert!(e.state.v.abs() < 1e-10);
        }
    }

    #[test]
    fn perturbation_is_detected() {
        let (spec, h, s0) = circular_kepler();
        let traj = integrate(&spec, h, FieldKind::Reduced, s0, (0.0, 5.0), &Default::default()).unwrap();
        let scaled: Vec<Sample> = traj
            .samples()
            .iter()
            .map(|s| Sample {
                tau: s.tau,
                state: McGeheeState {
                    r: s.state.r * 1.01,
                    v: s.state.v * 1.01,
                    theta: s.state.theta,
                    u: s.state.u * 1.01,
                },
                winding: s.winding,
            })
            .collect();
        let bad = Trajectory::from_samples(spec, h, FieldKind::Reduced, scaled).unwrap();
        assert!(bad.drift().max_energy_residual > 0.01);
    }

    #[test]
    fn csv_header_and_precision() {
        let (spec, h, s0) = circular_kepler();
        let traj = integrate(&spec, h, FieldKind::Full, s0, (0.0, 0.2), &Default::default()).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "tau,r,v,u,theta,energy_residual");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 6);
        assert_eq!(first[1], "1.0000000000000000e0");
    }

    #[test]
    fn winding_accumulates() {
        let (spec, h, s0) = circular_kepler();
        let traj = integrate(&spec, h, FieldKind::Full, s0, (0.0, 20.0), &Default::default()).unwrap();
        let last = traj.samples().len() - 1;
        assert!((traj.total_angle(last) - 20.0).abs() < 1e-9);
        assert_eq!(traj.last().winding, 3);
    }
}
