//! Equivalence of two flows judged by their orbit class functions
//! `c -> OrbitTag` at fixed `(alpha, h)`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::classify::{classify_orbit, OrbitTag};
use crate::error::{Error, Result};
use crate::model::{
    admissible_c_bound, energy_profile, max_radius, momentum_curve, AngularMomentum, EnergyLevel,
    Flavor, PotentialSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleClass {
    pub c_a: f64,
    pub c_b: f64,
    /// `None` when the classifier returned an error.
    pub tag_a: Option<OrbitTag>,
    pub tag_b: Option<OrbitTag>,
}

impl SampleClass {
    fn comparable(&self) -> bool {
        match (self.tag_a, self.tag_b) {
            (Some(a), Some(b)) => {
                a != OrbitTag::RelativeEquilibrium && b != OrbitTag::RelativeEquilibrium
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub spec_a: PotentialSpec,
    pub spec_b: PotentialSpec,
    pub h: EnergyLevel,
    pub c_range_a: CRange,
    pub c_range_b: CRange,
    pub samples: Vec<SampleClass>,
    pub verdict: Verdict,
    /// `c_a` values whose tags differ.
    pub witnesses: Vec<f64>,
    /// `c_a` values left out of the comparison (tangencies, failures).
    pub excluded: Vec<f64>,
    pub outside_analyzed_scope: bool,
}

/// Upper end of the admissible `c` range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CRange {
    pub c_max: f64,
    /// The class stays non-Void for every `c`; `c_max` is then the value at
    /// which the turning radius has shrunk to [`UNBOUNDED_RADIUS_FRACTION`]
    /// of `R_max`.
    pub capped: bool,
}

pub const UNBOUNDED_RADIUS_FRACTION: f64 = 1e-3;

fn is_void(spec: &PotentialSpec, h: EnergyLevel, c: f64) -> Result<bool> {
    match classify_orbit(spec, h, AngularMomentum::new(c)?) {
        Ok(cls) => Ok(cls.tag == OrbitTag::Void),
        Err(Error::TangencyAmbiguous { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// The largest `c` with a non-Void class, located by bisection on the class
/// boundary.
pub fn admissible_c_range(spec: &PotentialSpec, h: EnergyLevel) -> Result<CRange> {
    let r_max = max_radius(spec, h)?;
    if spec.is_amended() && spec.alpha() >= 2.0 {
        return Ok(CRange {
            c_max: admissible_c_bound(spec, h)?,
            capped: false,
        });
    }
    let capped = || -> Result<CRange> {
        let r = UNBOUNDED_RADIUS_FRACTION * r_max;
        let unit = momentum_curve(r, spec, AngularMomentum::new(1.0)?)?;
        Ok(CRange {
            c_max: energy_profile(r, spec, h).max(0.0).sqrt() / unit,
            capped: true,
        })
    };
    // The bare field with alpha > 2 has an orbit for every c. Its turning
    // radius shrinks like c^(-2/(alpha-2)), which underflows quickly near 2.
    if spec.flavor() == Flavor::NonSmoothed && spec.alpha() > 2.0 {
        return capped();
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while !is_void(spec, h, hi)? {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 10 {
            return capped();
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if is_void(spec, h, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CRange {
        c_max: lo,
        capped: false,
    })
}

/// Compare the class functions of two specs at `n_samples` matched quantiles
/// `q_k = (k + 1/2)/n` of their admissible `c` ranges.
pub fn equivalence_report(
    spec_a: &PotentialSpec,
    spec_b: &PotentialSpec,
    h: EnergyLevel,
    n_samples: usize,
) -> Result<EquivalenceReport> {
    if spec_a.alpha() != spec_b.alpha() {
        return Err(Error::InvalidParameter {
            field: "alpha",
            reason: "both specs must share the exponent".into(),
        });
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            reason: "at least one sample is required".into(),
        });
    }
    let range_a = admissible_c_range(spec_a, h)?;
    let range_b = admissible_c_range(spec_b, h)?;
    let tag = |spec: &PotentialSpec, c: f64| -> Option<OrbitTag> {
        let c = AngularMomentum::new(c).ok()?;
        classify_orbit(spec, h, c).ok().map(|cls| cls.tag)
    };
    let mut samples = Vec::with_capacity(n_samples);
    let mut witnesses = Vec::new();
    let mut excluded = Vec::new();
    for k in 0..n_samples {
        let q = (k as f64 + 0.5) / n_samples as f64;
        let (c_a, c_b) = (q * range_a.c_max, q * range_b.c_max);
        let sample = SampleClass {
            c_a,
            c_b,
            tag_a: tag(spec_a, c_a),
            tag_b: tag(spec_b, c_b),
        };
        if !sample.comparable() {
            excluded.push(c_a);
        } else if sample.tag_a != sample.tag_b {
            witnesses.push(c_a);
        }
        samples.push(sample);
    }
    let verdict = if witnesses.is_empty() {
        Verdict::Equivalent
    } else {
        Verdict::NotEquivalent
    };
    Ok(EquivalenceReport {
        spec_a: *spec_a,
        spec_b: *spec_b,
        h,
        c_range_a: range_a,
        c_range_b: range_b,
        samples,
        verdict,
        witnesses,
        excluded,
        outside_analyzed_scope: !(spec_a.within_analyzed_scope()
            && spec_b.within_analyzed_scope()),
    })
}

fn tag_json(tag: Option<OrbitTag>) -> Value {
    match tag {
        Some(t) => json!(t.to_string()),
        None => Value::Null,
    }
}

impl EquivalenceReport {
    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.spec_a.alpha(),
            "h": self.h.h(),
            "flavor_a": self.spec_a.flavor().as_str(),
            "flavor_b": self.spec_b.flavor().as_str(),
            "epsilon_a": self.spec_a.epsilon(),
            "epsilon_b": self.spec_b.epsilon(),
            "n_samples": self.samples.len(),
            "c_max_a": self.c_range_a.c_max,
            "c_max_b": self.c_range_b.c_max,
            "c_range_capped": self.c_range_a.capped || self.c_range_b.capped,
            "verdict": format!("{:?}", self.verdict),
            "witnesses": self.witnesses,
            "excluded": self.excluded,
            "outside_analyzed_scope": self.outside_analyzed_scope,
            "classes": self.samples.iter().map(|s| json!({
                "c": s.c_a,
                "c_b": s.c_b,
                "tag_a": tag_json(s.tag_a),
                "tag_b": tag_json(s.tag_b),
            })).collect::<Vec<_>>(),
        })
    }
}

/// The verdict expected from the analysis for a non-smoothed flow against a
/// smoothed one; `None` where no verdict is claimed.
pub fn expected_verdict(alpha: f64, smoothed: Flavor) -> Option<Verdict> {
    match smoothed {
        Flavor::PlainSmoothed => Some(if alpha < 2.0 {
            Verdict::Equivalent
        } else {
            Verdict::NotEquivalent
        }),
        Flavor::AmendedSmoothed if alpha >= 2.0 => Some(Verdict::Equivalent),
        _ => None,
    }
}
