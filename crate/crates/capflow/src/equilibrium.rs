//! Cap capacities, the no-field cap density, and assembly of the weighted
//! equilibrium density f(eta) = C_Q * core(eta) + F(eta) on a spherical cap.
//!
//! Everything solves in the "South frame" (support is the cap around the
//! South pole, eta in [alpha, pi]); North-cap problems are reflected onto it
//! and reported back in the caller's frame. The density has an integrable
//! (cos alpha - cos eta)^(-1/2) blow-up at the cap edge, so every integral
//! against it runs in the edge variable t^2 = cos alpha - cos eta.

use crate::abel;
use crate::error::{Error, Result};
use crate::fields::{CubicSpline, ExternalField};
use crate::quadrature::{integrate_tol, QuadratureConfig};
use crate::specfun::{inc_beta, ln_gamma};
use crate::sphere::{surface_area, CapGeometry, Dimension, Pole};
use std::f64::consts::PI;
use std::sync::Arc;

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= PI) {
        return Err(Error::InvalidInput(format!(
            "cap angle alpha = {alpha} outside (0, pi]"
        )));
    }
    Ok(())
}

/// Newtonian capacity of the South cap of angle alpha:
/// 2^(d-2) Gamma((d-1)/2) / (sqrt(pi) Gamma(d/2-1)) * B(cos^2(alpha/2); (d-2)/2, d/2).
///
/// Normalized so the full sphere (alpha -> 0) has capacity 1 in every
/// dimension; strictly decreasing in alpha, 0 at alpha = pi.
pub fn cap_capacity(d: Dimension, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    let df = d.as_f64();
    let u = (0.5 * alpha).cos().powi(2);
    let ln_coef = (df - 2.0) * 2f64.ln() + ln_gamma((df - 1.0) / 2.0)?
        - 0.5 * PI.ln()
        - ln_gamma(df / 2.0 - 1.0)?;
    Ok(ln_coef.exp() * inc_beta(u, 0.5 * (df - 2.0), 0.5 * df)?)
}

/// Normalizing constant of the no-field cap density:
/// Gamma(d/2-1) / (2^(d-1) pi^(d/2) B(cos^2(alpha/2); (d-2)/2, d/2)).
pub fn no_field_normalizer(d: Dimension, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    let df = d.as_f64();
    let u = (0.5 * alpha).cos().powi(2);
    let ln_coef = ln_gamma(df / 2.0 - 1.0)? - (df - 1.0) * 2f64.ln() - 0.5 * df * PI.ln();
    Ok(ln_coef.exp() / inc_beta(u, 0.5 * (df - 2.0), 0.5 * df)?)
}

/// Unnormalized radial profile of the cap density in the South frame, the
/// factor multiplying C_Q in f(eta):
/// ((1-cos a)/(1-cos e))^((d-1)/2) sqrt((1-cos a)/(cos a - cos e)) *
/// hyp2f1_core(z, d), z = (cos a - cos e)/(1 - cos e).
///
/// Evaluated in the expanded form
/// ((1-cos a)/(1-cos e))^((d-1)/2) sqrt((1-cos a)/(cos a - cos e)) +
/// (d-1)/2 * B(z; 1/2, d/2),
/// which the hypergeometric identity reduces to; the factored form loses
/// precision through (1-z)^(-d/2) when 1 - cos a is tiny against t^2.
pub(crate) fn profile_south(d: Dimension, alpha: f64, eta: f64) -> Result<f64> {
    let ca = alpha.cos();
    let ce = eta.cos();
    let df = d.as_f64();
    let z = ((ca - ce) / (1.0 - ce)).clamp(0.0, 1.0);
    let head = ((1.0 - ca) / (1.0 - ce)).powf(0.5 * (df - 1.0)) * ((1.0 - ca) / (ca - ce)).sqrt();
    Ok(head + 0.5 * (df - 1.0) * inc_beta(z, 0.5, 0.5 * df)?)
}

/// profile_south(eta(t)) * t in the edge variable t^2 = cos alpha - cos eta;
/// finite at t = 0 (value sqrt(1 - cos alpha)).
pub(crate) fn profile_south_edge(d: Dimension, alpha: f64, t: f64) -> Result<f64> {
    let ca = alpha.cos();
    let ce = (ca - t * t).clamp(-1.0, 1.0);
    let df = d.as_f64();
    let z = (t * t / (1.0 - ce)).clamp(0.0, 1.0);
    let head = ((1.0 - ca) / (1.0 - ce)).powf(0.5 * (df - 1.0)) * (1.0 - ca).sqrt();
    Ok(head + 0.5 * (df - 1.0) * inc_beta(z, 0.5, 0.5 * df)? * t)
}

/// The same profile written directly in the North frame (support
/// eta in [0, alpha_n)), with arguments cos eta - cos alpha_n and 1 + cos eta.
/// Mathematically equal to profile_south reflected; computed through a
/// different expression, which is what the reflection cross-check exercises.
pub(crate) fn profile_north(d: Dimension, alpha_n: f64, eta: f64) -> Result<f64> {
    let ca = alpha_n.cos();
    let ce = eta.cos();
    let df = d.as_f64();
    let z = ((ce - ca) / (1.0 + ce)).clamp(0.0, 1.0);
    let head = ((1.0 + ca) / (1.0 + ce)).powf(0.5 * (df - 1.0)) * ((1.0 + ca) / (ce - ca)).sqrt();
    Ok(head + 0.5 * (df - 1.0) * inc_beta(z, 0.5, 0.5 * df)?)
}

/// Density of the no-field equilibrium measure of the South cap of angle
/// alpha, at colatitude eta in (alpha, pi]. Blows up like
/// (cos alpha - cos eta)^(-1/2) as eta -> alpha+, so the edge itself is a
/// domain error.
pub fn cap_density_no_field(d: Dimension, alpha: f64, eta: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    if !(eta > alpha && eta <= PI) {
        return Err(Error::InvalidInput(format!(
            "eta = {eta} outside the support interior ({alpha}, pi]"
        )));
    }
    Ok(no_field_normalizer(d, alpha)? * profile_south(d, alpha, eta)?)
}

/// Robin constant from the density coefficient:
/// F_Q = C_Q * 2 pi^((d+1)/2) / Gamma((d-1)/2).
pub fn robin_from_cq(d: Dimension, c_q: f64) -> Result<f64> {
    let df = d.as_f64();
    Ok(c_q * (2f64.ln() + 0.5 * (df + 1.0) * PI.ln() - ln_gamma((df - 1.0) / 2.0)?).exp())
}

/// Density coefficient from the Robin constant (inverse of [`robin_from_cq`]).
pub fn cq_from_robin(d: Dimension, f_q: f64) -> Result<f64> {
    let df = d.as_f64();
    Ok(f_q * (ln_gamma((df - 1.0) / 2.0)? - 2f64.ln() - 0.5 * (df + 1.0) * PI.ln()).exp())
}

/// The field term F(eta) of a density, evaluated in the South frame.
#[derive(Debug, Clone)]
pub enum FieldTerm {
    Zero,
    PointCharge {
        q: f64,
    },
    Quadratic,
    /// Spline of F(eta(t)) * t in the edge variable; used for fields without
    /// closed forms. Carries the edge-extrapolation error documented on the
    /// custom-field solve path.
    TabulatedEdge(Arc<CubicSpline>),
}

impl FieldTerm {
    /// The closed-form term for a built-in field; None for custom fields.
    pub fn from_field(field: &ExternalField) -> Option<Self> {
        match field {
            ExternalField::Zero => Some(FieldTerm::Zero),
            ExternalField::PointCharge { q } => Some(FieldTerm::PointCharge { q: *q }),
            ExternalField::Quadratic => Some(FieldTerm::Quadratic),
            ExternalField::Custom(_) => None,
        }
    }

    /// F(eta), South frame, eta in (alpha, pi].
    pub fn eval(&self, d: Dimension, alpha: f64, eta: f64) -> Result<f64> {
        match self {
            FieldTerm::Zero => Ok(0.0),
            FieldTerm::PointCharge { q } => {
                abel::f_closed(&ExternalField::PointCharge { q: *q }, d, alpha, eta)
            }
            FieldTerm::Quadratic => abel::f_closed(&ExternalField::Quadratic, d, alpha, eta),
            FieldTerm::TabulatedEdge(spline) => {
                let t2 = alpha.cos() - eta.cos();
                if t2 <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "eta = {eta} outside the support interior ({alpha}, pi]"
                    )));
                }
                let t = t2.sqrt();
                Ok(spline.eval(t) / t)
            }
        }
    }

    /// F(eta(t)) * t, South frame; finite at t = 0.
    pub fn eval_edge(&self, d: Dimension, alpha: f64, t: f64) -> Result<f64> {
        match self {
            FieldTerm::Zero => Ok(0.0),
            FieldTerm::PointCharge { q } => {
                abel::f_closed_edge(&ExternalField::PointCharge { q: *q }, d, alpha, t)
            }
            FieldTerm::Quadratic => abel::f_closed_edge(&ExternalField::Quadratic, d, alpha, t),
            FieldTerm::TabulatedEdge(spline) => Ok(spline.eval(t)),
        }
    }
}

/// Equilibrium density: either the uniform full-sphere measure or a cap
/// density C_Q * core + F in the frame of its pole.
#[derive(Debug, Clone)]
pub enum Density {
    Uniform { d: Dimension },
    Cap(CapDensity),
}

#[derive(Debug, Clone)]
pub struct CapDensity {
    d: Dimension,
    pole: Pole,
    alpha_south: f64,
    c_q: f64,
    term: FieldTerm,
}

/// Builds the cap density from its constants; `cap` is in the caller's frame
/// (a North cap of angle a solves as a South cap of angle pi - a).
pub fn assemble_density(d: Dimension, cap: CapGeometry, c_q: f64, term: FieldTerm) -> Density {
    let alpha_south = match cap.pole {
        Pole::South => cap.alpha,
        Pole::North => PI - cap.alpha,
    };
    Density::Cap(CapDensity {
        d,
        pole: cap.pole,
        alpha_south,
        c_q,
        term,
    })
}

impl CapDensity {
    /// f(eta) in the caller's frame, through the frame's own direct formula.
    pub fn eval(&self, eta: f64) -> Result<f64> {
        match self.pole {
            Pole::South => {
                if !(eta > self.alpha_south && eta <= PI) {
                    return Err(Error::InvalidInput(format!(
                        "eta = {eta} outside the support interior ({}, pi]",
                        self.alpha_south
                    )));
                }
                Ok(self.c_q * profile_south(self.d, self.alpha_south, eta)?
                    + self.term.eval(self.d, self.alpha_south, eta)?)
            }
            Pole::North => {
                let alpha_n = PI - self.alpha_south;
                if !(eta >= 0.0 && eta < alpha_n) {
                    return Err(Error::InvalidInput(format!(
                        "eta = {eta} outside the support interior [0, {alpha_n})"
                    )));
                }
                Ok(self.c_q * profile_north(self.d, alpha_n, eta)?
                    + self.term.eval(self.d, self.alpha_south, PI - eta)?)
            }
        }
    }

    /// f(eta) computed through the opposite frame's formula and the
    /// reflection eta -> pi - eta; dual route to `eval` for cross-checking.
    pub fn eval_mirrored(&self, eta: f64) -> Result<f64> {
        match self.pole {
            Pole::South => Ok(
                self.c_q * profile_north(self.d, PI - self.alpha_south, PI - eta)?
                    + self.term.eval(self.d, self.alpha_south, eta)?,
            ),
            Pole::North => Ok(
                self.c_q * profile_south(self.d, self.alpha_south, PI - eta)?
                    + self.term.eval(self.d, self.alpha_south, PI - eta)?,
            ),
        }
    }

    /// f(eta(t)) * t in the South solving frame.
    pub fn eval_edge_south(&self, t: f64) -> Result<f64> {
        Ok(self.c_q * profile_south_edge(self.d, self.alpha_south, t)?
            + self.term.eval_edge(self.d, self.alpha_south, t)?)
    }

    pub fn d(&self) -> Dimension {
        self.d
    }
    pub fn pole(&self) -> Pole {
        self.pole
    }
    pub fn c_q(&self) -> f64 {
        self.c_q
    }
    pub fn alpha_south(&self) -> f64 {
        self.alpha_south
    }
    pub fn term(&self) -> &FieldTerm {
        &self.term
    }
}

impl Density {
    pub fn d(&self) -> Dimension {
        match self {
            Density::Uniform { d } => *d,
            Density::Cap(c) => c.d,
        }
    }

    /// Support angle of the South solving frame (0 for the full sphere).
    pub fn alpha_south(&self) -> f64 {
        match self {
            Density::Uniform { .. } => 0.0,
            Density::Cap(c) => c.alpha_south,
        }
    }

    /// Support interval [lo, hi] in the caller's frame.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Density::Uniform { .. } => (0.0, PI),
            Density::Cap(c) => match c.pole {
                Pole::South => (c.alpha_south, PI),
                Pole::North => (0.0, PI - c.alpha_south),
            },
        }
    }

    pub fn eval(&self, eta: f64) -> Result<f64> {
        match self {
            Density::Uniform { d } => {
                if !(0.0..=PI).contains(&eta) {
                    return Err(Error::InvalidInput(format!("eta = {eta} outside [0, pi]")));
                }
                Ok(1.0 / surface_area(d.get())?)
            }
            Density::Cap(c) => c.eval(eta),
        }
    }

    /// f(eta(t)) * t in the South solving frame, t in [0, sqrt(1 + cos alpha)].
    pub fn eval_edge_south(&self, t: f64) -> Result<f64> {
        match self {
            Density::Uniform { d } => Ok(t / surface_area(d.get())?),
            Density::Cap(c) => c.eval_edge_south(t),
        }
    }
}

/// Total mass omega_{d-1} int f(eta) sin^(d-2)(eta) deta over the support,
/// integrated in the edge variable; 1 for a valid equilibrium density.
pub fn mass_integral(density: &Density, cfg: &QuadratureConfig) -> Result<f64> {
    let d = density.d();
    let df = d.as_f64();
    let ca = density.alpha_south().cos();
    let tmax = (1.0 + ca).sqrt();
    let integral = integrate_tol(
        |t| {
            let ce = (ca - t * t).clamp(-1.0, 1.0);
            let s2 = ((1.0 - ce) * (1.0 + ce)).max(0.0);
            Ok(2.0 * density.eval_edge_south(t)? * s2.powf(0.5 * (df - 3.0)))
        },
        0.0,
        tmax,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_intervals,
    )?;
    Ok(surface_area(d.get() - 1)? * integral)
}

/// The density coefficient from the mass normalization, by quadrature of the
/// field term: C_Q = Gamma(d/2-1) / (2^(d-2) sqrt(pi) Gamma((d-1)/2)) *
/// B(cos^2(alpha/2); (d-2)/2, d/2)^(-1) *
/// { Gamma((d-1)/2) / (2 pi^((d-1)/2)) - int_alpha^pi F(eta) sin^(d-2) deta }.
/// Returns (C_Q, F_Q). Redundant route to the closed-form constants.
pub fn c_q_from_f<F>(
    d: Dimension,
    alpha: f64,
    f_edge: F,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    validate_alpha(alpha)?;
    let df = d.as_f64();
    let ca = alpha.cos();
    let tmax = (1.0 + ca).sqrt();
    let int_f = integrate_tol(
        |t| {
            let ce = (ca - t * t).clamp(-1.0, 1.0);
            let s2 = ((1.0 - ce) * (1.0 + ce)).max(0.0);
            Ok(2.0 * f_edge(t)? * s2.powf(0.5 * (df - 3.0)))
        },
        0.0,
        tmax,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_intervals,
    )?;
    let u = (0.5 * alpha).cos().powi(2);
    let ln_front = ln_gamma(df / 2.0 - 1.0)?
        - (df - 2.0) * 2f64.ln()
        - 0.5 * PI.ln()
        - ln_gamma((df - 1.0) / 2.0)?;
    let mass_term = (ln_gamma((df - 1.0) / 2.0)? - 2f64.ln() - 0.5 * (df - 1.0) * PI.ln()).exp();
    let c_q = ln_front.exp() / inc_beta(u, 0.5 * (df - 2.0), 0.5 * df)? * (mass_term - int_f);
    Ok((c_q, robin_from_cq(d, c_q)?))
}
