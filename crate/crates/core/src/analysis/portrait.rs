//! Sampled curves in the `(r, u)` plane: the energy profile of the bare and
//! the softened potential, and the angular momentum curves for a set of `c`.

use std::fmt::Write as _;

use crate::error::Result;
use crate::model::{energy_profile, max_radius, momentum_curve, AngularMomentum, EnergyLevel, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// `u_{h,0}(r)` of the bare potential.
    BareEnergy,
    /// `u_{h,eps}(r)` of the requested spec.
    Energy,
    Momentum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub kind: CurveKind,
    pub c: Option<f64>,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

impl Curve {
    pub fn name(&self) -> String {
        match (self.kind, self.c) {
            (CurveKind::BareEnergy, _) => "u_h0".into(),
            (CurveKind::Energy, _) => "u_heps".into(),
            // Twelve significant decimals hide grid round-off like 0.6000000000000001.
            (CurveKind::Momentum, Some(c)) => format!("u_c_{}", (c * 1e12).round() / 1e12),
            (CurveKind::Momentum, None) => "u_c".into(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u\n");
        for (r, u) in self.r.iter().zip(&self.u) {
            let _ = writeln!(out, "{r:.16e},{u:.16e}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Portrait {
    pub spec: PotentialSpec,
    pub h: EnergyLevel,
    pub curves: Vec<Curve>,
}

impl Portrait {
    pub fn curve(&self, kind: CurveKind) -> Option<&Curve> {
        self.curves.iter().find(|c| c.kind == kind)
    }

    pub fn momentum_curves(&self) -> impl Iterator<Item = &Curve> {
        self.curves.iter().filter(|c| c.kind == CurveKind::Momentum)
    }

    /// All curves in long format, `curve,c,r,u`.
    pub fn combined_csv(&self) -> String {
        let mut out = String::from("curve,c,r,u\n");
        for curve in &self.curves {
            let name = curve.name();
            let c = curve.c.map(|c| format!("{c:.16e}")).unwrap_or_default();
            for (r, u) in curve.r.iter().zip(&curve.u) {
                let _ = writeln!(out, "{name},{c},{r:.16e},{u:.16e}");
            }
        }
        out
    }
}

fn uniform(upper: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| upper * i as f64 / (n - 1) as f64).collect()
}

fn energy_curve(kind: CurveKind, spec: &PotentialSpec, h: EnergyLevel, n: usize) -> Result<Curve> {
    let r = uniform(max_radius(spec, h)?, n);
    let u = r.iter().map(|&r| energy_profile(r, spec, h).max(0.0).sqrt()).collect();
    Ok(Curve { kind, c: None, r, u })
}

/// Sample every curve on `n_points` uniform radii (at least two).
pub fn portrait(spec: &PotentialSpec, h: EnergyLevel, cs: &[f64], n_points: usize) -> Result<Portrait> {
    let n = n_points.max(2);
    let bare = PotentialSpec::non_smoothed(spec.alpha())?;
    let mut curves = vec![
        energy_curve(CurveKind::BareEnergy, &bare, h, n)?,
        energy_curve(CurveKind::Energy, spec, h, n)?,
    ];
    let grid = curves[1].r.clone();
    for &c in cs {
        let mom = AngularMomentum::new(c)?;
        let (mut r, mut u) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for &x in &grid {
            // Skip the radius where the curve diverges.
            if let Ok(val) = momentum_curve(x, spec, mom) {
                r.push(x);
                u.push(val);
            }
        }
        curves.push(Curve {
            kind: CurveKind::Momentum,
            c: Some(c),
            r,
            u,
        });
    }
    Ok(Portrait {
        spec: *spec,
        h,
        curves,
    })
}

/// Sign changes of `u_{h,eps} - u_c` along the sampled grid.
pub fn intersection_count(portrait: &Portrait, momentum: &Curve) -> usize {
    let Some(energy) = portrait.curve(CurveKind::Energy) else {
        return 0;
    };
    let offset = energy.r.len() - momentum.r.len();
    let diffs: Vec<f64> = energy.u[offset..]
        .iter()
        .zip(&momentum.u)
        .map(|(e, m)| e - m)
        .collect();
    diffs.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> EnergyLevel {
        EnergyLevel::new(v).unwrap()
    }

    #[test]
    fn plain_profile_starts_at_zero() {
        let spec = PotentialSpec::plain(1.0, 0.1).unwrap();
        let p = portrait(&spec, h(-1.0), &[0.5], 101).unwrap();
        assert_eq!(p.curve(CurveKind::Energy).unwrap().u[0], 0.0);
        assert!((p.curve(CurveKind::BareEnergy).unwrap().u[0] - 2f64.sqrt()).abs() < 1e-15);
        // The divergent r = 0 sample is dropped.
        assert_eq!(p.momentum_curves().next().unwrap().r.len(), 100);
    }

    #[test]
    fn inverse_square_momentum_is_flat() {
        let spec = PotentialSpec::plain(2.0, 0.1).unwrap();
        let p = portrait(&spec, h(-1.0), &[0.2, 1.2], 64).unwrap();
        for m in p.momentum_curves() {
            assert!(m.u.iter().all(|&u| u == m.c.unwrap()));
        }
    }

    #[test]
    fn amended_momentum_starts_positive() {
        let spec = PotentialSpec::amended(3.0, 0.1).unwrap();
        let p = portrait(&spec, h(-1.0), &[0.5], 64).unwrap();
        let m = p.momentum_curves().next().unwrap();
        assert_eq!(m.r[0], 0.0);
        assert!((m.u[0] - 0.5 * 0.1f64.powf(0.5)).abs() < 1e-15);
    }

    #[test]
    fn csv_shape() {
        let spec = PotentialSpec::non_smoothed(1.0).unwrap();
        let p = portrait(&spec, h(-1.0), &[0.3], 5).unwrap();
        let csv = p.curves[0].to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(p.combined_csv().starts_with("curve,c,r,u\nu_h0,,0.0000000000000000e0,"));
    }
}
