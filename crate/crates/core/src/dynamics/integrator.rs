//! Dormand–Prince 5(4) stepping with 4th-order dense output and event
//! localization on the interpolant.

use crate::error::{Error, Result};
use crate::roots::brent;

/// An autonomous first-order system `y' = F(y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, y: &[f64; N]) -> [f64; N];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rtol: 1e-12,
            atol: 1e-14,
            max_step: 0.05,
            min_step: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..N {
            out[i] += h * coef * k[i];
        }
    }
    out
}

struct Trial<const N: usize> {
    y1: [f64; N],
    k: [[f64; N]; 7],
    err: [f64; N],
}

fn trial_step<S: OdeSystem<N>, const N: usize>(sys: &S, y: &[f64; N], k1: &[f64; N], h: f64) -> Trial<N> {
    let k2 = sys.rhs(&axpy(y, h, &[(A21, k1)]));
    let k3 = sys.rhs(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = sys.rhs(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = sys.rhs(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = sys.rhs(&axpy(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y1 = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = sys.rhs(&y1);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Trial {
        y1,
        k: [*k1, k2, k3, k4, k5, k6, k7],
        err,
    }
}

/// Advance `y` by one unadaptive Dormand–Prince step of size `h`.
pub fn single_step<S: OdeSystem<N>, const N: usize>(sys: &S, y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = sys.rhs(y);
    trial_step(sys, y, &k1, h).y1
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rc: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    fn new(t0: f64, y0: [f64; N], h: f64, trial: &Trial<N>) -> Self {
        let k = &trial.k;
        let mut rc = [[0.0; N]; 4];
        for i in 0..N {
            let ydiff = trial.y1[i] - y0[i];
            let bspl = h * k[0][i] - ydiff;
            rc[0][i] = ydiff;
            rc[1][i] = bspl;
            rc[2][i] = ydiff - h * k[6][i] - bspl;
            rc[3][i] = h
                * (D1 * k[0][i]
                    + D3 * k[2][i]
                    + D4 * k[3][i]
                    + D5 * k[4][i]
                    + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
        DenseStep {
            t0,
            t1: t0 + h,
            y0,
            y1: trial.y1,
            rc,
        }
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / (self.t1 - self.t0);
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.y0[i]
                + s * (self.rc[0][i]
                    + s1 * (self.rc[1][i] + s * (self.rc[2][i] + s1 * self.rc[3][i])));
        }
        out
    }
}

/// Adaptive Dormand–Prince driver from `t0` towards `t_end` (either direction).
pub struct Dopri5<'a, S, const N: usize> {
    sys: &'a S,
    opts: SolverOptions,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    t_end: f64,
    dir: f64,
    steps: usize,
}

fn wrms<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &SolverOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

impl<'a, S: OdeSystem<N>, const N: usize> Dopri5<'a, S, N> {
    pub fn new(sys: &'a S, t0: f64, y0: [f64; N], t_end: f64, opts: SolverOptions) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "tau_span",
                reason: "integration interval must be finite".into(),
            });
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "initial_state",
                reason: "initial state must be finite".into(),
            });
        }
        let k1 = sys.rhs(&y0);
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let mut solver = Dopri5 {
            sys,
            opts,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            t_end,
            dir,
            steps: 0,
        };
        solver.h = solver.initial_step();
        Ok(solver)
    }

    fn initial_step(&self) -> f64 {
        let scale = |i: usize| self.opts.atol + self.opts.rtol * self.y[i].abs();
        let (mut d0, mut d1) = (0.0, 0.0);
        for i in 0..N {
            d0 += (self.y[i] / scale(i)).powi(2);
            d1 += (self.k1[i] / scale(i)).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 || !d1.is_finite() {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(self.opts.max_step).min((self.t_end - self.t).abs()).max(self.opts.min_step)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    /// Replace the current state, e.g. after projecting it onto an
    /// invariant manifold.
    pub fn set_state(&mut self, y: [f64; N]) {
        self.y = y;
        self.k1 = self.sys.rhs(&y);
    }

    pub fn finished(&self) -> bool {
        (self.t_end - self.t) * self.dir <= 0.0
    }

    /// Take one accepted step; `None` once `t_end` has been reached.
    pub fn step(&mut self) -> Result<Option<DenseStep<N>>> {
        if self.finished() {
            return Ok(None);
        }
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepFailure {
                    tau: self.t,
                    min_step: self.opts.min_step,
                });
            }
            let remaining = (self.t_end - self.t).abs();
            let mut h_abs = self.h.min(self.opts.max_step);
            let last = h_abs >= remaining;
            if last {
                h_abs = remaining;
            }
            let h = h_abs * self.dir;
            let trial = trial_step(self.sys, &self.y, &self.k1, h);
            let err = wrms(&trial.err, &self.y, &trial.y1, &self.opts);
            self.steps += 1;
            let finite = err.is_finite() && trial.y1.iter().all(|v| v.is_finite());
            if finite && err <= 1.0 {
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                let dense = DenseStep::new(self.t, self.y, h, &trial);
                self.t = if last { self.t_end } else { self.t + h };
                self.y = trial.y1;
                self.k1 = trial.k[6];
                self.h = (h_abs * fac).min(self.opts.max_step);
                return Ok(Some(dense));
            }
            let fac = if finite {
                (0.9 * err.powf(-0.25)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            self.h = h_abs * fac;
            if self.h < self.opts.min_step {
                return Err(Error::StepFailure {
                    tau: self.t,
                    min_step: self.opts.min_step,
                });
            }
        }
    }
}

/// Crossing direction of an event function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

impl Crossing {
    fn accepts(self, before: f64, after: f64) -> bool {
        match self {
            Crossing::Rising => before < 0.0 && after > 0.0,
            Crossing::Falling => before > 0.0 && after < 0.0,
            Crossing::Either => before * after < 0.0,
        }
    }
}

/// Locate a zero of `g` inside `step` on the dense output. The matching
/// state is recomputed with a direct step from the step start.
pub fn locate_crossing<S, G, const N: usize>(
    sys: &S,
    step: &DenseStep<N>,
    g: G,
    crossing: Crossing,
) -> Option<(f64, [f64; N])>
where
    S: OdeSystem<N>,
    G: Fn(&[f64; N]) -> f64,
{
    let g0 = g(&step.y0);
    let g1 = g(&step.y1);
    if !crossing.accepts(g0, g1) {
        return None;
    }
    let width = (step.t1 - step.t0).abs();
    let t_star = brent(|t| g(&step.eval(t)), step.t0, step.t1, width * 1e-15).ok()?;
    let y_star = if t_star == step.t0 {
        step.y0
    } else {
        single_step(sys, &step.y0, t_star - step.t0)
    };
    Some((t_star, y_star))
}
