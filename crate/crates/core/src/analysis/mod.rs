pub mod classify;
pub mod equilibria;
pub mod equivalence;
pub mod oracle;
pub mod portrait;

pub use classify::{
    boundary_sign, classify_orbit, classify_orbit_with, radial_discriminant, ClassifierOptions,
    OrbitClass, OrbitTag,
};
pub use equilibria::{
    collision_fixed_points, collision_stability, relative_equilibria, surface_spectrum,
    CollisionSet, Equilibrium, EquilibriumSource, StabilityKind, SurfaceSpectrum,
};
pub use equivalence::{
    admissible_c_range, equivalence_report, expected_verdict, CRange, EquivalenceReport,
    SampleClass, Verdict,
};
pub use oracle::{classify_by_integration, OracleOptions};
pub use portrait::{intersection_count, portrait, Curve, CurveKind, Portrait};
