//! Problem parameters and the scalar radial profiles of the reduced flow.
//!
//! A problem is a homogeneous attracting potential `-1/r^alpha`, optionally
//! softened with length `epsilon`. Softening is applied either to the bare
//! potential (`PlainSmoothed`) or to the whole amended potential
//! `c^2/(2 r^2) - 1/r^alpha` (`AmendedSmoothed`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which smoothing, if any, is applied to the singular potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "none")]
    NonSmoothed,
    #[serde(rename = "plain")]
    PlainSmoothed,
    #[serde(rename = "amended")]
    AmendedSmoothed,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::NonSmoothed => "none",
            Flavor::PlainSmoothed => "plain",
            Flavor::AmendedSmoothed => "amended",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "non-smoothed" => Ok(Flavor::NonSmoothed),
            "plain" => Ok(Flavor::PlainSmoothed),
            "amended" => Ok(Flavor::AmendedSmoothed),
            other => Err(Error::InvalidParameter {
                field: "flavor",
                reason: format!("unknown flavor `{other}` (expected none|plain|amended)"),
            }),
        }
    }
}

/// Exponent, softening length and smoothing flavor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    alpha: f64,
    epsilon: f64,
    flavor: Flavor,
}

impl PotentialSpec {
    pub fn new(alpha: f64, epsilon: f64, flavor: Flavor) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter {
                field: "alpha",
                reason: format!("alpha must be positive, got {alpha}"),
            });
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "epsilon",
                reason: format!("epsilon must be non-negative, got {epsilon}"),
            });
        }
        match (flavor, epsilon > 0.0) {
            (Flavor::NonSmoothed, true) => Err(Error::InvalidParameter {
                field: "epsilon",
                reason: "the non-smoothed flavor requires epsilon = 0".into(),
            }),
            (Flavor::PlainSmoothed | Flavor::AmendedSmoothed, false) => {
                Err(Error::InvalidParameter {
                    field: "epsilon",
                    reason: format!("the {flavor} flavor requires epsilon > 0"),
                })
            }
            _ => Ok(PotentialSpec {
                alpha,
                epsilon,
                flavor,
            }),
        }
    }

    pub fn non_smoothed(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, Flavor::NonSmoothed)
    }

    pub fn plain(alpha: f64, epsilon: f64) -> Result<Self> {
        Self::new(alpha, epsilon, Flavor::PlainSmoothed)
    }

    pub fn amended(alpha: f64, epsilon: f64) -> Result<Self> {
        Self::new(alpha, epsilon, Flavor::AmendedSmoothed)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn is_amended(&self) -> bool {
        self.flavor == Flavor::AmendedSmoothed
    }

    /// Amended smoothing is only analyzed for `alpha >= 2`; for smaller
    /// exponents the library computes it but reports flag it.
    pub fn within_analyzed_scope(&self) -> bool {
        !(self.is_amended() && self.alpha < 2.0)
    }

    /// `r^2 + epsilon^2`.
    #[inline]
    pub(crate) fn softened_sq(&self, r: f64) -> f64 {
        r * r + self.epsilon * self.epsilon
    }
}

/// A negative energy level `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel(f64);

impl EnergyLevel {
    pub fn new(h: f64) -> Result<Self> {
        if !h.is_finite() || h >= 0.0 {
            return Err(Error::InvalidParameter {
                field: "h",
                reason: format!("h must be negative, got {h}"),
            });
        }
        Ok(EnergyLevel(h))
    }

    pub fn h(&self) -> f64 {
        self.0
    }

    pub fn abs(&self) -> f64 {
        -self.0
    }
}

/// Non-negative angular momentum. Negative inputs are reflected `u -> -u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMomentum {
    value: f64,
    reflected: bool,
}

impl AngularMomentum {
    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter {
                field: "c",
                reason: format!("c must be finite, got {c}"),
            });
        }
        Ok(AngularMomentum {
            value: c.abs(),
            reflected: c < 0.0,
        })
    }

    pub fn zero() -> Self {
        AngularMomentum {
            value: 0.0,
            reflected: false,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// True when the caller passed a negative `c`.
    pub fn reflected(&self) -> bool {
        self.reflected
    }
}

/// `|h| epsilon^alpha`, which must stay below one for the energy surface to
/// have a bounded, non-empty radial range.
pub fn softening_product(spec: &PotentialSpec, h: EnergyLevel) -> f64 {
    h.abs() * spec.epsilon.powf(spec.alpha)
}

pub fn check_softening(spec: &PotentialSpec, h: EnergyLevel) -> Result<()> {
    let value = softening_product(spec, h);
    if spec.epsilon > 0.0 && value >= 1.0 {
        return Err(Error::InvalidSoftening { value });
    }
    Ok(())
}

/// The energy-surface profile `f_eps(r)`, so that `u^2 + v^2 = f_eps(r)`.
pub fn energy_profile(r: f64, spec: &PotentialSpec, h: EnergyLevel) -> f64 {
    let alpha = spec.alpha;
    let abs_h = h.abs();
    match spec.flavor {
        // 2 r^a / (r^2)^{a/2} collapses to 2, including its extension to r = 0.
        Flavor::NonSmoothed => 2.0 - 2.0 * abs_h * r.powf(alpha),
        Flavor::PlainSmoothed => {
            let ra = r.powf(alpha);
            2.0 * ra / spec.softened_sq(r).powf(alpha / 2.0) - 2.0 * abs_h * ra
        }
        Flavor::AmendedSmoothed => 2.0 * (1.0 - abs_h * spec.softened_sq(r).powf(alpha / 2.0)),
    }
}

/// The angular momentum curve `u_c(r)` in McGehee variables.
pub fn momentum_curve(r: f64, spec: &PotentialSpec, c: AngularMomentum) -> Result<f64> {
    let c = c.value;
    if c == 0.0 {
        return Ok(0.0);
    }
    let alpha = spec.alpha;
    match spec.flavor {
        Flavor::AmendedSmoothed => Ok(c * spec.softened_sq(r).powf((alpha - 2.0) / 4.0)),
        _ => {
            if r == 0.0 && alpha < 2.0 {
                return Err(Error::Domain(
                    "u_c(r) diverges at r = 0 for alpha < 2".into(),
                ));
            }
            if r < 0.0 {
                return Err(Error::Domain(format!("negative radius {r}")));
            }
            Ok(c * r.powf((alpha - 2.0) / 2.0))
        }
    }
}

/// Largest radius reachable on the energy surface.
pub fn max_radius(spec: &PotentialSpec, h: EnergyLevel) -> Result<f64> {
    check_softening(spec, h)?;
    let outer = (1.0 / h.abs()).powf(2.0 / spec.alpha);
    Ok((outer - spec.epsilon * spec.epsilon).sqrt())
}

/// `V_eps(r) = c^2 / (2(r^2+eps^2)) - 1/(r^2+eps^2)^{alpha/2}`.
pub fn amended_potential(r: f64, spec: &PotentialSpec, c: AngularMomentum) -> Result<f64> {
    let s = spec.softened_sq(r);
    if s == 0.0 {
        return Err(Error::Domain(
            "the amended potential is singular at r = 0 when epsilon = 0".into(),
        ));
    }
    let c = c.value;
    Ok(c * c / (2.0 * s) - s.powf(-spec.alpha / 2.0))
}

/// The largest `c` for which the amended-smoothed energy surface meets the
/// momentum curve at `r = 0`, i.e. `u_{c,eps}(0) = u_{h,eps}(0)`.
pub fn admissible_c_bound(spec: &PotentialSpec, h: EnergyLevel) -> Result<f64> {
    if !spec.is_amended() {
        return Err(Error::Flavor {
            expected: "amended",
        });
    }
    check_softening(spec, h)?;
    let eps = spec.epsilon;
    let alpha = spec.alpha;
    let numerator = 2.0 * (1.0 - h.abs() * eps.powf(alpha));
    Ok((numerator / eps.powf(alpha - 2.0)).max(0.0).sqrt())
}
