//! The cap-energy functional F(alpha) whose minimizer locates the support
//! angle, its closed forms for the built-in fields, the per-field
//! characteristic equations, and the support-angle solvers.

use crate::equilibrium::cap_capacity;
use crate::error::{Error, Result};
use crate::fields::ExternalField;
use crate::quadrature::{differentiate, integrate_tol, QuadratureConfig};
use crate::specfun::{inc_beta, ln_gamma};
use crate::sphere::Dimension;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;

/// How a support angle was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    CharacteristicRoot,
    FMinimization,
    UserForced,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::CharacteristicRoot => "characteristic-root",
            SolveMethod::FMinimization => "f-minimization",
            SolveMethod::UserForced => "user-forced",
        })
    }
}

/// Result of a support-angle solve. alpha0 = 0 encodes "support is the full
/// sphere"; residual is |LHS - RHS| of the characteristic equation for root
/// solves and the final localization width for minimization solves.
#[derive(Debug, Clone)]
pub struct SupportSolveResult {
    pub alpha0: f64,
    pub method: SolveMethod,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub warning: Option<String>,
}

/// The braces term of the point-charge functional and density coefficient,
/// 1 + q 2^((d-2)/2) Gamma((d-1)/2) / (sqrt(pi) Gamma(d/2-1))
/// * B(cos^2(alpha/2); (d-2)/2, 1/2).
pub(crate) fn pc_braces(d: Dimension, alpha: f64, q: f64) -> Result<f64> {
    let df = d.as_f64();
    let u = (0.5 * alpha).cos().powi(2);
    let coef = (0.5 * (df - 2.0) * 2f64.ln() + ln_gamma((df - 1.0) / 2.0)?
        - 0.5 * PI.ln()
        - ln_gamma(df / 2.0 - 1.0)?)
    .exp();
    Ok(1.0 + q * coef * inc_beta(u, 0.5 * (df - 2.0), 0.5)?)
}

/// The braces term of the quadratic-field functional and density coefficient,
/// 1 + 2^d Gamma((d+3)/2) / (sqrt(pi) Gamma(d/2+1)) * B(cos^2(alpha/2); d/2+1, d/2).
pub(crate) fn quad_braces(d: Dimension, alpha: f64) -> Result<f64> {
    let df = d.as_f64();
    let u = (0.5 * alpha).cos().powi(2);
    let coef =
        (df * 2f64.ln() + ln_gamma((df + 3.0) / 2.0)? - 0.5 * PI.ln() - ln_gamma(df / 2.0 + 1.0)?)
            .exp();
    Ok(1.0 + coef * inc_beta(u, 0.5 * df + 1.0, 0.5 * df)?)
}

/// F(alpha) for the point-charge field: pc_braces / cap_capacity.
pub fn f_functional_point_charge(d: Dimension, alpha: f64, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidInput(format!("q = {q} must be positive")));
    }
    check_open_interval(alpha)?;
    Ok(pc_braces(d, alpha, q)? / cap_capacity(d, alpha)?)
}

/// F(alpha) for the quadratic field: quad_braces / cap_capacity.
pub fn f_functional_quadratic(d: Dimension, alpha: f64) -> Result<f64> {
    check_open_interval(alpha)?;
    Ok(quad_braces(d, alpha)? / cap_capacity(d, alpha)?)
}

/// F(alpha) for any field, by quadrature:
/// cap^(-1) * { 1 + (1/pi) int_alpha^pi Q(eta) core(eta) sin^(d-2) deta },
/// the integral taken in the edge variable t^2 = cos alpha - cos eta.
pub fn f_functional_generic(
    d: Dimension,
    alpha: f64,
    field: &ExternalField,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_open_interval(alpha)?;
    if matches!(field, ExternalField::Zero) {
        return Ok(1.0 / cap_capacity(d, alpha)?);
    }
    let df = d.as_f64();
    let ca = alpha.cos();
    let tmax = (1.0 + ca).sqrt();
    let weighted_q = integrate_tol(
        |t| {
            let ce = (ca - t * t).clamp(-1.0, 1.0);
            let s2 = ((1.0 - ce) * (1.0 + ce)).max(0.0);
            Ok(2.0
                * field.eval(d, ce.acos())
                * crate::equilibrium::profile_south_edge(d, alpha, t)?
                * s2.powf(0.5 * (df - 3.0)))
        },
        0.0,
        tmax,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_intervals,
    )?;
    Ok((1.0 + weighted_q / PI) / cap_capacity(d, alpha)?)
}

fn check_open_interval(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::InvalidInput(format!(
            "alpha = {alpha} outside (0, pi)"
        )));
    }
    Ok(())
}

/// Left side of the point-charge critical-angle equation,
/// csc^(d-1)(alpha/2) B(u; (d-2)/2, d/2) - B(u; (d-2)/2, 1/2) with
/// u = cos^2(alpha/2); strictly decreasing from +inf to 0 on (0, pi).
pub fn pc_char_lhs(d: Dimension, alpha: f64) -> Result<f64> {
    check_open_interval(alpha)?;
    let df = d.as_f64();
    let u = (0.5 * alpha).cos().powi(2);
    let csc = (0.5 * alpha).sin().powi(1 - d.get() as i32);
    Ok(csc * inc_beta(u, 0.5 * (df - 2.0), 0.5 * df)? - inc_beta(u, 0.5 * (df - 2.0), 0.5)?)
}

/// Right side of the point-charge critical-angle equation,
/// sqrt(pi) Gamma(d/2-1) / (q 2^((d-2)/2) Gamma((d-1)/2)).
pub fn pc_char_rhs(d: Dimension, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidInput(format!("q = {q} must be positive")));
    }
    let df = d.as_f64();
    Ok((0.5 * PI.ln() + ln_gamma(df / 2.0 - 1.0)?
        - 0.5 * (df - 2.0) * 2f64.ln()
        - ln_gamma((df - 1.0) / 2.0)?)
    .exp()
        / q)
}

/// Left side of the quadratic-field critical-angle equation,
/// u^2 B(u; d/2-1, d/2) - B(u; d/2+1, d/2), u = cos^2(alpha/2).
/// Accepts alpha = 0 (its value there brackets the root from above).
pub fn quad_char_lhs(d: Dimension, alpha: f64) -> Result<f64> {
    if !(0.0..PI).contains(&alpha) {
        return Err(Error::InvalidInput(format!(
            "alpha = {alpha} outside [0, pi)"
        )));
    }
    let df = d.as_f64();
    let u = (0.5 * alpha).cos().powi(2);
    Ok(u * u * inc_beta(u, 0.5 * df - 1.0, 0.5 * df)? - inc_beta(u, 0.5 * df + 1.0, 0.5 * df)?)
}

/// Right side of the quadratic-field critical-angle equation,
/// sqrt(pi) d (d-2) Gamma(d/2-1) / (2^d (d^2-1) Gamma((d-1)/2)).
pub fn quad_char_rhs(d: Dimension) -> Result<f64> {
    let df = d.as_f64();
    Ok(
        (0.5 * PI.ln() + (df * (df - 2.0)).ln() + ln_gamma(df / 2.0 - 1.0)?
            - df * 2f64.ln()
            - (df * df - 1.0).ln()
            - ln_gamma((df - 1.0) / 2.0)?)
        .exp(),
    )
}

fn bisect_root<F>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo > 0.0) == (fhi > 0.0) {
        return Err(Error::SolveFailure(format!(
            "no sign change on [{lo}, {hi}] (f(lo) = {flo}, f(hi) = {fhi})"
        )));
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval at floating-point resolution
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const ROOT_BRACKET: (f64, f64) = (1e-9, PI - 1e-9);

/// Support angle of the point-charge problem as the root of the
/// characteristic equation; the left side decreases strictly from +inf to 0,
/// so the root exists and is unique for every q > 0.
pub fn solve_alpha_point_charge(d: Dimension, q: f64) -> Result<SupportSolveResult> {
    let rhs = pc_char_rhs(d, q)?;
    let alpha0 = bisect_root(
        |a| Ok(pc_char_lhs(d, a)? - rhs),
        ROOT_BRACKET.0,
        ROOT_BRACKET.1,
        200,
    )?;
    Ok(SupportSolveResult {
        alpha0,
        method: SolveMethod::CharacteristicRoot,
        residual: (pc_char_lhs(d, alpha0)? - rhs).abs(),
        bracket: ROOT_BRACKET,
        warning: None,
    })
}

/// Support angle of the quadratic-field problem. The characteristic equation
/// has an interior root for every d checked (3 through 8); if the bracket
/// ever fails to change sign the support is the full sphere and alpha0 = 0 is
/// returned with a warning.
pub fn solve_alpha_quadratic(d: Dimension) -> Result<SupportSolveResult> {
    let rhs = quad_char_rhs(d)?;
    match bisect_root(
        |a| Ok(quad_char_lhs(d, a)? - rhs),
        ROOT_BRACKET.0,
        ROOT_BRACKET.1,
        200,
    ) {
        Ok(alpha0) => Ok(SupportSolveResult {
            alpha0,
            method: SolveMethod::CharacteristicRoot,
            residual: (quad_char_lhs(d, alpha0)? - rhs).abs(),
            bracket: ROOT_BRACKET,
            warning: None,
        }),
        Err(Error::SolveFailure(_)) => Ok(SupportSolveResult {
            alpha0: 0.0,
            method: SolveMethod::FMinimization,
            residual: 0.0,
            bracket: ROOT_BRACKET,
            warning: Some("no interior critical angle; support is the full sphere".into()),
        }),
        Err(e) => Err(e),
    }
}

fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d)?;
        }
        if d <= c {
            break; // floating-point resolution
        }
    }
    Ok((0.5 * (a + b), b - a))
}

const MIN_CLEARANCE: f64 = 1e-4;

/// Support angle by direct minimization of the quadrature functional: coarse
/// scan for a bracket (warning on a non-unimodal pattern), golden-section
/// localization, then bisection on the sign of the Richardson-extrapolated
/// derivative to push below the noise floor of the quadrature functional.
/// A minimum at a domain boundary is snapped to 0 or pi and flagged.
pub fn solve_alpha_generic(
    d: Dimension,
    field: &ExternalField,
    cfg: &QuadratureConfig,
) -> Result<SupportSolveResult> {
    const SCAN: usize = 33;
    let lo = MIN_CLEARANCE;
    let hi = PI - MIN_CLEARANCE;
    let f = |a: f64| f_functional_generic(d, a, field, cfg);

    let grid: Vec<f64> = (0..SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / (SCAN - 1) as f64)
        .collect();
    let values = grid.iter().map(|&a| f(a)).collect::<Result<Vec<f64>>>()?;

    let mut local_minima = 0usize;
    for i in 1..SCAN - 1 {
        if values[i] < values[i - 1] && values[i] < values[i + 1] {
            local_minima += 1;
        }
    }
    let mut warning = if local_minima > 1 {
        Some(format!(
            "scan found {local_minima} local minima; the functional does not look unimodal and \
             the returned angle is only a local answer"
        ))
    } else {
        None
    };

    let argmin = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("scan grid is nonempty");

    if argmin == 0 {
        warning.get_or_insert_with(|| {
            "minimum at the lower domain boundary; support is the full sphere".into()
        });
        return Ok(SupportSolveResult {
            alpha0: 0.0,
            method: SolveMethod::FMinimization,
            residual: 0.0,
            bracket: (lo, hi),
            warning,
        });
    }
    if argmin == SCAN - 1 {
        warning.get_or_insert_with(|| {
            "minimum at the upper domain boundary; the support degenerates toward a point".into()
        });
        return Ok(SupportSolveResult {
            alpha0: PI,
            method: SolveMethod::FMinimization,
            residual: 0.0,
            bracket: (lo, hi),
            warning,
        });
    }

    let bracket = (grid[argmin - 1], grid[argmin + 1]);
    let (mut alpha0, mut width) = golden_section(f, bracket.0, bracket.1, 1e-8)?;

    // Refine with the derivative: its sign is reliable much closer to the
    // minimum than value comparisons against quadrature noise.
    let deriv = |a: f64| differentiate(f, a, lo, hi, cfg);
    let (mut dl, mut dh) = (
        (alpha0 - 1e-3).max(bracket.0),
        (alpha0 + 1e-3).min(bracket.1),
    );
    if let (Ok(sl), Ok(sh)) = (deriv(dl), deriv(dh)) {
        if sl < 0.0 && sh > 0.0 {
            for _ in 0..50 {
                let mid = 0.5 * (dl + dh);
                if mid <= dl || mid >= dh {
                    break;
                }
                match deriv(mid) {
                    Ok(dm) if dm < 0.0 => dl = mid,
                    Ok(_) => dh = mid,
                    Err(_) => break,
                }
            }
            alpha0 = 0.5 * (dl + dh);
            width = dh - dl;
        }
    }

    Ok(SupportSolveResult {
        alpha0,
        method: SolveMethod::FMinimization,
        residual: width,
        bracket,
        warning,
    })
}

/// Robin constant as the functional value at the support angle,
/// F_Q = F(alpha0); closed forms for the built-in fields, quadrature
/// otherwise. alpha0 = 0 (full sphere) gives the sphere's constant, 1.
pub fn robin_from_functional(
    d: Dimension,
    field: &ExternalField,
    alpha0: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if alpha0 == 0.0 {
        if matches!(field, ExternalField::Zero) {
            return Ok(1.0);
        }
        return Err(Error::InvalidInput(
            "the functional route needs a cap support (alpha0 > 0)".into(),
        ));
    }
    match field {
        ExternalField::Zero => Ok(1.0 / cap_capacity(d, alpha0)?),
        ExternalField::PointCharge { q } => f_functional_point_charge(d, alpha0, *q),
        ExternalField::Quadratic => f_functional_quadratic(d, alpha0),
        ExternalField::Custom(_) => f_functional_generic(d, alpha0, field, cfg),
    }
}

/// Tabulates F(alpha) over a grid, in parallel; the output order follows the
/// input grid, so the result is identical to a serial evaluation.
pub fn f_functional_sweep(
    d: Dimension,
    field: &ExternalField,
    alphas: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<(f64, f64)>> {
    alphas
        .par_iter()
        .map(|&a| {
            let v = match field {
                ExternalField::Zero => 1.0 / cap_capacity(d, a)?,
                ExternalField::PointCharge { q } => f_functional_point_charge(d, a, *q)?,
                ExternalField::Quadratic => f_functional_quadratic(d, a)?,
                ExternalField::Custom(_) => f_functional_generic(d, a, field, cfg)?,
            };
            Ok((a, v))
        })
        .collect()
}
