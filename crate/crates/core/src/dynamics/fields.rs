//! Vector fields: Cartesian Hamiltonian, regularized McGehee and reduced.

use crate::coords::{CartesianState, McGeheeState, ReducedState};
use crate::error::{Error, Result};
use crate::model::{Flavor, PotentialSpec};

/// `H = |p|^2/2 - 1/(r^2+eps^2)^{alpha/2}`.
pub fn hamiltonian(s: &CartesianState, spec: &PotentialSpec) -> Result<f64> {
    let soft = s.x * s.x + s.y * s.y + spec.epsilon() * spec.epsilon();
    if soft == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(0.5 * (s.px * s.px + s.py * s.py) - soft.powf(-spec.alpha() / 2.0))
}

/// Hamiltonian field of the plainly smoothed (or bare) potential.
pub fn cartesian_field(s: &CartesianState, spec: &PotentialSpec) -> Result<CartesianState> {
    if spec.is_amended() {
        return Err(Error::Flavor {
            expected: "none or plain",
        });
    }
    let soft = s.x * s.x + s.y * s.y + spec.epsilon() * spec.epsilon();
    if soft == 0.0 {
        return Err(Error::Singularity);
    }
    let pull = spec.alpha() * soft.powf(-spec.alpha() / 2.0 - 1.0);
    Ok(CartesianState {
        x: s.px,
        y: s.py,
        px: -pull * s.x,
        py: -pull * s.y,
    })
}

/// `alpha r^{alpha+2} / (r^2+eps^2)^{alpha/2+1}`, identically `alpha` when
/// unsmoothed.
#[inline]
fn radial_force(r: f64, spec: &PotentialSpec) -> f64 {
    let alpha = spec.alpha();
    match spec.flavor() {
        Flavor::NonSmoothed => alpha,
        _ => {
            if r == 0.0 {
                return 0.0;
            }
            let ratio = r * r / spec.softened_sq(r);
            alpha * ratio.powf(alpha / 2.0 + 1.0)
        }
    }
}

/// `r'` in McGehee time.
pub fn radial_rate(r: f64, v: f64, spec: &PotentialSpec) -> f64 {
    match spec.flavor() {
        Flavor::AmendedSmoothed => {
            let alpha = spec.alpha();
            v * r.powf((alpha + 2.0) / 2.0) * spec.softened_sq(r).powf(-alpha / 4.0)
        }
        _ => r * v,
    }
}

/// The regularized field in `(r, v, theta, u)`.
///
/// For the amended flavor this is the field obtained from the amended
/// Hamiltonian, the rescaled momenta `u = p_theta s^{(alpha-2)/4}`,
/// `v = p_r s^{alpha/4}` (with `s = r^2+eps^2`) and `dt = r^{(alpha+2)/2} dtau`.
pub fn regularized_field(s: &McGeheeState, spec: &PotentialSpec) -> McGeheeState {
    let alpha = spec.alpha();
    let k = (alpha - 2.0) / 2.0;
    match spec.flavor() {
        Flavor::AmendedSmoothed => {
            let soft = spec.softened_sq(s.r);
            let rescale = s.r.powf((alpha + 2.0) / 2.0);
            let inner = rescale * s.r * soft.powf(-(alpha + 4.0) / 4.0);
            McGeheeState {
                r: s.v * rescale * soft.powf(-alpha / 4.0),
                v: inner * (s.u * s.u + 0.5 * alpha * s.v * s.v - alpha),
                theta: s.u * rescale * soft.powf(-(alpha + 2.0) / 4.0),
                u: k * inner * s.u * s.v,
            }
        }
        _ => McGeheeState {
            r: s.r * s.v,
            v: s.u * s.u + 0.5 * alpha * s.v * s.v - radial_force(s.r, spec),
            theta: s.u,
            u: k * s.u * s.v,
        },
    }
}

/// The amended-flavor field with the exponents exactly as they appear in
/// the original typeset system. It does not preserve the energy relation and
/// exists only to compare drift against [`regularized_field`].
pub fn amended_field_as_printed(s: &McGeheeState, spec: &PotentialSpec) -> McGeheeState {
    let alpha = spec.alpha();
    let soft = spec.softened_sq(s.r);
    McGeheeState {
        r: s.v * s.r.powf((alpha + 2.0) / 2.0) * soft.powf(-alpha / 4.0),
        v: s.r.powf((alpha + 4.0) / 2.0)
            * soft.powf(-(alpha + 4.0) / 2.0)
            * (s.u * s.u + 0.5 * alpha * s.v * s.v - alpha),
        theta: s.u * s.r.powf((alpha + 2.0) / 4.0) * soft.powf(-(alpha + 2.0) / 4.0),
        u: 0.5 * (alpha - 2.0)
            * s.r.powf((alpha + 2.0) / 4.0)
            * soft.powf(-(alpha + 4.0) / 4.0)
            * s.u
            * s.v,
    }
}

/// The `theta`-free field on the reduced space `(r, v, u)`.
pub fn reduced_field(s: &ReducedState, spec: &PotentialSpec) -> ReducedState {
    regularized_field(&s.with_theta(0.0), spec).reduced()
}

/// Jacobian of [`reduced_field`], rows/columns ordered `(r, v, u)`.
pub fn reduced_jacobian(s: &ReducedState, spec: &PotentialSpec) -> [[f64; 3]; 3] {
    let alpha = spec.alpha();
    let k = (alpha - 2.0) / 2.0;
    match spec.flavor() {
        Flavor::AmendedSmoothed => {
            // Central differences; the amended field is smooth for r > 0.
            let mut jac = [[0.0; 3]; 3];
            let base = [s.r, s.v, s.u];
            for j in 0..3 {
                let step = 1e-6 * base[j].abs().max(1e-3);
                let mut plus = base;
                let mut minus = base;
                plus[j] += step;
                minus[j] -= step;
                let fp = reduced_field(&ReducedState::new(plus[0], plus[1], plus[2]), spec);
                let fm = reduced_field(&ReducedState::new(minus[0], minus[1], minus[2]), spec);
                let d = [fp.r - fm.r, fp.v - fm.v, fp.u - fm.u];
                for i in 0..3 {
                    jac[i][j] = d[i] / (2.0 * step);
                }
            }
            jac
        }
        _ => {
            let force_slope = match spec.flavor() {
                Flavor::NonSmoothed => 0.0,
                _ => {
                    let soft = spec.softened_sq(s.r);
                    let eps2 = spec.epsilon() * spec.epsilon();
                    alpha * (alpha + 2.0) * s.r.powf(alpha + 1.0) * eps2
                        * soft.powf(-alpha / 2.0 - 2.0)
                }
            };
            [
                [s.v, s.r, 0.0],
                [-force_slope, alpha * s.v, 2.0 * s.u],
                [0.0, k * s.u, k * s.v],
            ]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn kepler_circular_point() {
        let spec = PotentialSpec::non_smoothed(1.0).unwrap();
        let d = cartesian_field(
            &CartesianState {
                x: 1.0,
                y: 0.0,
                px: 0.0,
                py: 1.0,
            },
            &spec,
        )
        .unwrap();
        assert_eq!((d.x, d.y, d.px, d.py), (0.0, 1.0, -1.0, 0.0));
    }

    #[test]
    fn origin_singular_only_without_softening() {
        let origin = CartesianState {
            x: 0.0,
            y: 0.0,
            px: 0.3,
            py: -0.4,
        };
        let ns = PotentialSpec::non_smoothed(1.0).unwrap();
        assert_eq!(cartesian_field(&origin, &ns), Err(Error::Singularity));
        let p = PotentialSpec::plain(1.5, 0.1).unwrap();
        let d = cartesian_field(&origin, &p).unwrap();
        assert_eq!((d.x, d.y, d.px, d.py), (0.3, -0.4, 0.0, 0.0));
    }

    #[test]
    fn collision_fixed_point_is_stationary() {
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let spec = PotentialSpec::non_smoothed(alpha).unwrap();
            let d = regularized_field(
                &McGeheeState {
                    r: 0.0,
                    v: SQRT_2,
                    theta: 1.2,
                    u: 0.0,
                },
                &spec,
            );
            assert_eq!(d.r, 0.0);
            assert!(d.v.abs() < 1e-15);
            assert_eq!(d.theta, 0.0);
            assert_eq!(d.u, 0.0);
        }
    }

    #[test]
    fn inverse_square_sample_point() {
        let spec = PotentialSpec::non_smoothed(2.0).unwrap();
        let d = regularized_field(
            &McGeheeState {
                r: 1.0,
                v: 0.0,
                theta: 0.0,
                u: 1.0,
            },
            &spec,
        );
        assert_eq!((d.r, d.v, d.theta, d.u), (0.0, -1.0, 1.0, 0.0));
        let d = reduced_field(&ReducedState::new(0.7, -0.3, 1.1), &spec);
        assert_eq!(d.u, 0.0);
    }

    #[test]
    fn spinless_plane_is_invariant() {
        for spec in [
            PotentialSpec::non_smoothed(1.5).unwrap(),
            PotentialSpec::plain(2.5, 0.1).unwrap(),
            PotentialSpec::amended(3.0, 0.1).unwrap(),
        ] {
            let d = reduced_field(&ReducedState::new(0.4, 0.9, 0.0), &spec);
            assert_eq!(d.u, 0.0);
        }
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let spec = PotentialSpec::plain(1.7, 0.2).unwrap();
        let s = ReducedState::new(0.6, -0.4, 0.9);
        let jac = reduced_jacobian(&s, &spec);
        let base = [s.r, s.v, s.u];
        for j in 0..3 {
            let h = 1e-6;
            let mut p = base;
            let mut m = base;
            p[j] += h;
            m[j] -= h;
            let fp = reduced_field(&ReducedState::new(p[0], p[1], p[2]), &spec);
            let fm = reduced_field(&ReducedState::new(m[0], m[1], m[2]), &spec);
            let col = [(fp.r - fm.r) / (2.0 * h), (fp.v - fm.v) / (2.0 * h), (fp.u - fm.u) / (2.0 * h)];
            for i in 0..3 {
                assert!((jac[i][j] - col[i]).abs() < 1e-8, "({i},{j})");
            }
        }
    }
}
