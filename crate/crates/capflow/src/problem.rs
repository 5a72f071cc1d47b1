//! Problem assembly: from a problem description (dimension, field, pole
//! convention, optional forced support angle) to the solved equilibrium
//! measure with its support angle, constants, and density evaluator.
//!
//! Everything is solved in the South frame; `pole: North` mirrors the whole
//! configuration, so the field is always stated in the solving frame (a point
//! charge sits at the pole antipodal to the support cap) and results are
//! reported back through eta -> pi - eta.

use crate::abel;
use crate::equilibrium::{
    assemble_density, c_q_from_f, cap_capacity, cq_from_robin, no_field_normalizer, robin_from_cq,
    Density, FieldTerm,
};
use crate::error::{Error, Result};
use crate::fields::{check_south_cap_admissible, CubicSpline, ExternalField};
use crate::functional::{
    f_functional_generic, pc_braces, quad_braces, solve_alpha_generic, solve_alpha_point_charge,
    solve_alpha_quadratic, SolveMethod, SupportSolveResult,
};
use crate::quadrature::QuadratureConfig;
use crate::sphere::{CapGeometry, Dimension, Pole};
use std::f64::consts::PI;
use std::sync::Arc;

/// Full input of a solve.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub d: Dimension,
    /// External field in the solving frame (see the module docs for `pole`).
    pub field: ExternalField,
    /// Which pole the support cap is centered at in the caller's frame.
    pub pole: Pole,
    /// Forced support angle in the caller's frame; skips the solver and the
    /// admissibility screen.
    pub alpha_override: Option<f64>,
    pub quad: QuadratureConfig,
}

impl ProblemSpec {
    pub fn new(d: Dimension, field: ExternalField) -> Self {
        Self {
            d,
            field,
            pole: Pole::South,
            alpha_override: None,
            quad: QuadratureConfig::default(),
        }
    }
}

/// Full output of a solve.
#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub d: Dimension,
    pub pole: Pole,
    /// Support cap in the caller's frame; None when the support is the whole
    /// sphere.
    pub cap: Option<CapGeometry>,
    /// Field in the solving frame, as given in the problem.
    pub field: ExternalField,
    /// Support angle in the caller's frame; 0 encodes the full sphere.
    pub alpha0: f64,
    pub method: SolveMethod,
    pub residual: f64,
    pub c_q: f64,
    /// Robin constant F_Q = C_Q * 2 pi^((d+1)/2) / Gamma((d-1)/2).
    pub f_q: f64,
    pub density: Density,
    pub warning: Option<String>,
}

impl EquilibriumSolution {
    /// Support interval [lo, hi] in the caller's frame.
    pub fn support(&self) -> (f64, f64) {
        self.density.support()
    }

    /// Support angle of the South solving frame (0 for the full sphere).
    pub fn alpha_south(&self) -> f64 {
        self.density.alpha_south()
    }

    /// Q at a colatitude in the caller's frame (the mirror of the solving
    /// frame when the cap is at the North pole).
    pub fn field_at(&self, theta: f64) -> f64 {
        match self.pole {
            Pole::South => self.field.eval(self.d, theta),
            Pole::North => self.field.eval(self.d, PI - theta),
        }
    }

    pub fn is_full_sphere(&self) -> bool {
        matches!(self.density, Density::Uniform { .. })
    }
}

/// Closed-form density coefficient C_Q for a built-in field at support angle
/// alpha (South frame): the no-field normalizer times the same braces term
/// that appears in the functional.
fn closed_c_q(d: Dimension, field: &ExternalField, alpha: f64) -> Result<f64> {
    let base = no_field_normalizer(d, alpha)?;
    match field {
        ExternalField::Zero => Ok(base),
        ExternalField::PointCharge { q } => Ok(base * pc_braces(d, alpha, *q)?),
        ExternalField::Quadratic => Ok(base * quad_braces(d, alpha)?),
        ExternalField::Custom(_) => Err(Error::InvalidInput(
            "no closed-form constants for custom fields".into(),
        )),
    }
}

impl ProblemSpec {
    pub fn solve(&self) -> Result<EquilibriumSolution> {
        self.quad.validate()?;
        let forced_south = match self.alpha_override {
            None => None,
            Some(a) => {
                if !(a > 0.0 && a < PI) {
                    return Err(Error::InvalidInput(format!(
                        "forced support angle {a} outside (0, pi)"
                    )));
                }
                Some(match self.pole {
                    Pole::South => a,
                    Pole::North => PI - a,
                })
            }
        };

        if matches!(self.field, ExternalField::Zero) && forced_south.is_none() {
            return self.full_sphere_solution(
                SolveMethod::FMinimization,
                0.0,
                Some("zero field: the support is the full sphere".into()),
            );
        }

        let solve_res = match forced_south {
            Some(a) => SupportSolveResult {
                alpha0: a,
                method: SolveMethod::UserForced,
                residual: 0.0,
                bracket: (a, a),
                warning: None,
            },
            None => match &self.field {
                ExternalField::Zero => unreachable!("zero field handled above"),
                ExternalField::PointCharge { q } => solve_alpha_point_charge(self.d, *q)?,
                ExternalField::Quadratic => solve_alpha_quadratic(self.d)?,
                ExternalField::Custom(_) => {
                    if !self.field.is_smooth_on_support() {
                        return Err(Error::NotAdmissible(
                            "custom field is not declared smooth; the transform pipeline \
                             cannot differentiate through it"
                                .into(),
                        ));
                    }
                    let report = check_south_cap_admissible(&self.field, self.d);
                    if !report.admissible {
                        return Err(Error::NotAdmissible(format!(
                            "{}; a cap support is not guaranteed (force an angle to override)",
                            report.message()
                        )));
                    }
                    solve_alpha_generic(self.d, &self.field, &self.quad)?
                }
            },
        };

        if solve_res.alpha0 == 0.0 {
            // minimizer ran to the full-sphere boundary (defensive for the
            // built-in fields, reachable for weak custom fields)
            return self.full_sphere_solution(
                solve_res.method,
                solve_res.residual,
                solve_res.warning,
            );
        }
        if solve_res.alpha0 >= PI {
            return Err(Error::SolveFailure(
                "the support degenerates toward a single point; no unit-mass cap equilibrium"
                    .into(),
            ));
        }

        let alpha_south = solve_res.alpha0;
        let alpha_user = match self.pole {
            Pole::South => alpha_south,
            Pole::North => PI - alpha_south,
        };
        let cap = CapGeometry::new(self.pole, alpha_user)?;

        let (c_q, f_q, term, tab_warning) = match &self.field {
            ExternalField::Zero => (
                no_field_normalizer(self.d, alpha_south)?,
                1.0 / cap_capacity(self.d, alpha_south)?,
                FieldTerm::Zero,
                None,
            ),
            ExternalField::PointCharge { .. } | ExternalField::Quadratic => {
                let c_q = closed_c_q(self.d, &self.field, alpha_south)?;
                let term = FieldTerm::from_field(&self.field).expect("built-in field term");
                (c_q, robin_from_cq(self.d, c_q)?, term, None)
            }
            ExternalField::Custom(_) => {
                if !self.field.is_smooth_on_support() {
                    return Err(Error::NotAdmissible(
                        "custom field is not declared smooth; the transform pipeline \
                         cannot differentiate through it"
                            .into(),
                    ));
                }
                let (spline, c_q, f_q) =
                    tabulate_field_term(self.d, &self.field, alpha_south, &self.quad)?;
                (
                    c_q,
                    f_q,
                    FieldTerm::TabulatedEdge(spline),
                    Some(
                        "field term tabulated numerically; constants carry quadrature and \
                         spline error"
                            .to_string(),
                    ),
                )
            }
        };

        let warning = match (solve_res.warning, tab_warning) {
            (Some(a), Some(b)) => Some(format!("{a}; {b}")),
            (Some(a), None) => Some(a),
            (None, b) => b,
        };
        let density = assemble_density(self.d, cap, c_q, term);
        Ok(EquilibriumSolution {
            d: self.d,
            pole: self.pole,
            cap: Some(cap),
            field: self.field.clone(),
            alpha0: alpha_user,
            method: solve_res.method,
            residual: solve_res.residual,
            c_q,
            f_q,
            density,
            warning,
        })
    }

    /// The measure when the support is everything: uniform density, Robin
    /// constant 1 for the zero field (full-sphere capacity is 1), and the
    /// boundary-limit functional value otherwise.
    fn full_sphere_solution(
        &self,
        method: SolveMethod,
        residual: f64,
        warning: Option<String>,
    ) -> Result<EquilibriumSolution> {
        let f_q = if matches!(self.field, ExternalField::Zero) {
            1.0
        } else {
            f_functional_generic(self.d, 1e-4, &self.field, &self.quad)?
        };
        Ok(EquilibriumSolution {
            d: self.d,
            pole: self.pole,
            cap: None,
            field: self.field.clone(),
            alpha0: 0.0,
            method,
            residual,
            c_q: cq_from_robin(self.d, f_q)?,
            f_q,
            density: Density::Uniform { d: self.d },
            warning,
        })
    }
}

/// Builds the numeric field term for a custom field: g on a colatitude grid,
/// then F(eta(t)) * t on an edge-variable grid, each interpolated by a cubic
/// spline, and the constants from the mass-normalization quadrature.
///
/// The F grid cannot reach the cap edge itself (the last 1e-3 rad stress the
/// finite differences), so the spline is anchored at t = 0 by quadratic
/// extrapolation; the anchored panel carries the dominant tabulation error.
fn tabulate_field_term(
    d: Dimension,
    field: &ExternalField,
    alpha_south: f64,
    cfg: &QuadratureConfig,
) -> Result<(Arc<CubicSpline>, f64, f64)> {
    const G_POINTS: usize = 200;
    const F_POINTS: usize = 160;
    const END_PAD: f64 = 1e-3;
    if !(alpha_south > 2.0 * END_PAD && alpha_south < PI - 2.0 * END_PAD) {
        return Err(Error::SolveFailure(format!(
            "support angle {alpha_south} too close to the domain boundary to tabulate"
        )));
    }

    let guard = 0.5 * alpha_south;
    let z_hi = PI - END_PAD;
    let mut g_pts = Vec::with_capacity(G_POINTS);
    for i in 0..G_POINTS {
        let z = alpha_south + (z_hi - alpha_south) * i as f64 / (G_POINTS - 1) as f64;
        g_pts.push((z, abel::g_numeric(field, d, guard, z, cfg)?));
    }
    let g_spline = CubicSpline::new(&g_pts)?;
    let g_fn = |z: f64| -> Result<f64> { Ok(g_spline.eval(z)) };

    let ca = alpha_south.cos();
    let t_lo = (ca - (alpha_south + END_PAD).cos()).max(0.0).sqrt();
    let t_hi = (ca - (PI - END_PAD).cos()).sqrt();
    let mut f_pts = Vec::with_capacity(F_POINTS + 1);
    for j in 0..F_POINTS {
        let t = t_lo + (t_hi - t_lo) * j as f64 / (F_POINTS - 1) as f64;
        let eta = (ca - t * t).clamp(-1.0, 1.0).acos();
        let f_eta = abel::f_numeric(g_fn, d, alpha_south, eta, cfg)?;
        f_pts.push((t, f_eta * t));
    }

    // quadratic extrapolation of the first three samples to t = 0
    let (x0, y0) = f_pts[0];
    let (x1, y1) = f_pts[1];
    let (x2, y2) = f_pts[2];
    let anchor = y0 * x1 * x2 / ((x0 - x1) * (x0 - x2))
        + y1 * x0 * x2 / ((x1 - x0) * (x1 - x2))
        + y2 * x0 * x1 / ((x2 - x0) * (x2 - x1));
    f_pts.insert(0, (0.0, anchor));

    let spline = Arc::new(CubicSpline::new(&f_pts)?);
    let edge = spline.clone();
    let (c_q, f_q) = c_q_from_f(d, alpha_south, |t| Ok(edge.eval(t)), cfg)?;
    Ok((spline, c_q, f_q))
}
