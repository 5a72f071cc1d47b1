//! Weighted equilibrium measures on the unit sphere S^(d-1), d >= 3, under
//! the Newtonian interaction 1/r^(d-2) and a rotationally symmetric external
//! field Q(theta).
//!
//! For the built-in fields (none, an external point charge above a pole, the
//! quadratic field |x - p|^2) and for user-supplied axially symmetric fields,
//! the crate finds the spherical cap supporting the equilibrium measure, the
//! Robin constant F_Q, the density normalization C_Q, and the density f(eta)
//! itself, then verifies the result against the variational characterization
//! by direct numerical evaluation of the potential.
//!
//! Entry point: [`ProblemSpec`] -> [`EquilibriumSolution`] ->
//! [`variational_check`].
//!
//! ```
//! use capflow::{Dimension, ExternalField, ProblemSpec};
//!
//! let d = Dimension::new(3).unwrap();
//! let field = ExternalField::point_charge(1.0).unwrap();
//! let sol = ProblemSpec::new(d, field).solve().unwrap();
//! assert!((sol.alpha0 - 1.2562687275811028).abs() < 1e-10);
//! ```

// reference constants are transcribed at full printed precision on purpose
#![allow(clippy::excessive_precision)]
// validation uses !(x > 0.0) style comparisons to reject NaN along with the
// out-of-range values; partial_cmp would obscure that
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abel;
pub mod equilibrium;
pub mod error;
pub mod fields;
pub mod functional;
pub mod problem;
pub mod quadrature;
pub mod specfun;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{
    check_south_cap_admissible, AdmissibilityReport, CubicSpline, CustomField, ExternalField,
};
pub use problem::{EquilibriumSolution, ProblemSpec};
pub use quadrature::QuadratureConfig;
pub use sphere::{CapGeometry, Dimension, Pole};

pub use equilibrium::{
    cap_capacity, cap_density_no_field, mass_integral, no_field_normalizer, Density,
};
pub use functional::{
    f_functional_generic, f_functional_point_charge, f_functional_quadratic, f_functional_sweep,
    solve_alpha_generic, solve_alpha_point_charge, solve_alpha_quadratic, SolveMethod,
    SupportSolveResult,
};
pub use verify::{
    funk_hecke_check, kernel_identity_check, potential_eval, variational_check, OracleDiscrepancy,
    VerificationReport,
};
