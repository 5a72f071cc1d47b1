//! Field-to-density pipeline: the auxiliary transform g(zeta) obtained from
//! the external field, the field term F(eta) that enters the equilibrium
//! density, closed forms for the two built-in fields, and numerical routes
//! for arbitrary smooth fields.
//!
//! The numerical routes never differentiate under the integral sign; each
//! singular integral is desingularized by an explicit substitution first and
//! the resulting smooth function of the endpoint is differentiated by central
//! differences.

use crate::error::{Error, Result};
use crate::fields::ExternalField;
use crate::quadrature::{differentiate, integrate_tol, GaussJacobi, QuadratureConfig};
use crate::specfun::{inc_beta, ln_gamma};
use crate::sphere::Dimension;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

type RuleCache = Mutex<HashMap<(usize, u32), Arc<GaussJacobi>>>;

/// Gauss-Jacobi rules keyed by (node count, dimension); rebuilding the
/// Golub-Welsch eigendecomposition per call would dominate the transform cost.
fn jacobi_rule(n: usize, d: u32) -> Result<Arc<GaussJacobi>> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("jacobi cache poisoned");
    if let Some(rule) = map.get(&(n, d)) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(GaussJacobi::new(n, -0.5, (f64::from(d) - 3.0) / 2.0)?);
    map.insert((n, d), rule.clone());
    Ok(rule)
}

fn check_angle(name: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(value > lo && value <= hi) {
        return Err(Error::InvalidInput(format!(
            "{name} = {value} outside ({lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Closed form of g(zeta) for the built-in fields.
///
/// Point charge q: -q sqrt(pi) (d-2) Gamma((d-1)/2) / (2^((d-1)/2) Gamma(d/2))
/// * csc(zeta/2). Quadratic: -2^(5/2) sqrt(pi) Gamma((d+3)/2) / Gamma(d/2+1)
/// * sin^(d-2)(zeta/2) cos^4(zeta/2).
pub fn g_closed(field: &ExternalField, d: Dimension, zeta: f64) -> Result<f64> {
    check_angle("zeta", zeta, 0.0, PI)?;
    let df = d.as_f64();
    match field {
        ExternalField::Zero => Ok(0.0),
        ExternalField::PointCharge { q } => {
            let ln_coef = 0.5 * PI.ln() + (df - 2.0).ln() + ln_gamma((df - 1.0) / 2.0)?
                - 0.5 * (df - 1.0) * 2f64.ln()
                - ln_gamma(df / 2.0)?;
            Ok(-q * ln_coef.exp() / (0.5 * zeta).sin())
        }
        ExternalField::Quadratic => {
            let ln_coef = 2.5 * 2f64.ln() + 0.5 * PI.ln() + ln_gamma((df + 3.0) / 2.0)?
                - ln_gamma(df / 2.0 + 1.0)?;
            let (s, c) = (0.5 * zeta).sin_cos();
            Ok(-ln_coef.exp() * s.powi(d.get() as i32 - 2) * c.powi(4))
        }
        ExternalField::Custom(_) => Err(Error::InvalidInput(
            "closed-form g is only available for the built-in fields".into(),
        )),
    }
}

/// The inner integral G(zeta) = int_zeta^pi Q(theta) cos^(d-3)(theta/2)
/// sin(theta) / sqrt(cos zeta - cos theta) dtheta, desingularized by
/// 1 + cos theta = (1 + cos zeta) s, which turns it into a fixed Jacobi
/// integral over [0,1] with weight s^((d-3)/2) (1-s)^(-1/2).
pub(crate) fn g_inner(
    field: &ExternalField,
    d: Dimension,
    zeta: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_angle("zeta", zeta, 0.0, PI)?;
    let df = d.as_f64();
    let c = 1.0 + zeta.cos();
    let rule = jacobi_rule(cfg.jacobi_nodes, d.get())?;
    let integral = rule.integrate_01(|s| {
        let ct = (c * s - 1.0).clamp(-1.0, 1.0);
        field.eval(d, ct.acos())
    });
    Ok(c.powf(0.5 * (df - 2.0)) * 2f64.powf(-0.5 * (df - 3.0)) * integral)
}

/// g(zeta) = tan^(d-3)(zeta/2) * dG/dzeta for a smooth field, with the
/// derivative taken by Richardson-extrapolated central differences of the
/// desingularized G.
pub fn g_numeric(
    field: &ExternalField,
    d: Dimension,
    alpha: f64,
    zeta: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(alpha < zeta && zeta < PI) {
        return Err(Error::InvalidInput(format!(
            "zeta = {zeta} outside the support interior ({alpha}, pi)"
        )));
    }
    if matches!(field, ExternalField::Zero) {
        return Ok(0.0);
    }
    if !field.is_smooth_on_support() {
        return Err(Error::InvalidInput(
            "the transform differentiates through the field; it was not declared smooth".into(),
        ));
    }
    let dg = differentiate(|z| g_inner(field, d, z, cfg), zeta, 1e-9, PI - 1e-9, cfg)?;
    Ok((0.5 * zeta).tan().powi(d.get() as i32 - 3) * dg)
}

/// Closed form of the field term F(eta) in the density, for the built-in
/// fields at support angle alpha0.
pub fn f_closed(field: &ExternalField, d: Dimension, alpha0: f64, eta: f64) -> Result<f64> {
    if !(eta > alpha0 && eta <= PI) {
        return Err(Error::InvalidInput(format!(
            "eta = {eta} outside the support interior ({alpha0}, pi]"
        )));
    }
    let df = d.as_f64();
    let ca = alpha0.cos();
    let ce = eta.cos();
    match field {
        ExternalField::Zero => Ok(0.0),
        ExternalField::PointCharge { q } => {
            let ln_coef =
                ln_gamma((df - 1.0) / 2.0)? - 0.5 * 2f64.ln() - 0.5 * (df + 1.0) * PI.ln();
            Ok(-q
                * ln_coef.exp()
                * (1.0 - ce).powf(-0.5 * (df - 1.0))
                * ((1.0 - ca) / (ca - ce)).sqrt())
        }
        ExternalField::Quadratic => {
            let z = (ca - ce) / (1.0 - ce);
            let head = ((1.0 - ca) / (1.0 - ce)).powf(0.5 * df)
                * ((1.0 - ce) / (ca - ce)).sqrt()
                * (1.0 + ca)
                * (1.0 + ca);
            Ok(quadratic_coef(df)? * (head + quadratic_beta_terms(df, z, ce)?))
        }
        ExternalField::Custom(_) => Err(Error::InvalidInput(
            "closed-form F is only available for the built-in fields".into(),
        )),
    }
}

/// F(eta(t)) * t in the edge variable t^2 = cos(alpha0) - cos(eta); finite at
/// t = 0, which is what the mass and potential quadratures integrate.
pub(crate) fn f_closed_edge(
    field: &ExternalField,
    d: Dimension,
    alpha0: f64,
    t: f64,
) -> Result<f64> {
    let df = d.as_f64();
    let ca = alpha0.cos();
    let ce = (ca - t * t).clamp(-1.0, 1.0);
    match field {
        ExternalField::Zero => Ok(0.0),
        ExternalField::PointCharge { q } => {
            let ln_coef =
                ln_gamma((df - 1.0) / 2.0)? - 0.5 * 2f64.ln() - 0.5 * (df + 1.0) * PI.ln();
            Ok(-q * ln_coef.exp() * (1.0 - ce).powf(-0.5 * (df - 1.0)) * (1.0 - ca).sqrt())
        }
        ExternalField::Quadratic => {
            let z = t * t / (1.0 - ce);
            let head = ((1.0 - ca) / (1.0 - ce)).powf(0.5 * df)
                * (1.0 - ce).sqrt()
                * (1.0 + ca)
                * (1.0 + ca);
            Ok(quadratic_coef(df)? * (head + t * quadratic_beta_terms(df, z, ce)?))
        }
        ExternalField::Custom(_) => Err(Error::InvalidInput(
            "closed-form F is only available for the built-in fields".into(),
        )),
    }
}

fn quadratic_coef(df: f64) -> Result<f64> {
    let ln_coef = 2f64.ln() + ln_gamma((df + 3.0) / 2.0)?
        - (df * (df - 2.0)).ln()
        - 0.5 * (df + 1.0) * PI.ln();
    Ok(-ln_coef.exp())
}

fn quadratic_beta_terms(df: f64, z: f64, ce: f64) -> Result<f64> {
    let z = z.clamp(0.0, 1.0);
    Ok(2.0 * (df - 1.0) * inc_beta(z, 0.5, 0.5 * df)?
        - 2.0 * (df + 1.0) * (1.0 - ce) * inc_beta(z, 0.5, 0.5 * df + 1.0)?
        + 0.5 * (df + 3.0) * (1.0 - ce) * (1.0 - ce) * inc_beta(z, 0.5, 0.5 * df + 2.0)?)
}

/// F(eta) recovered from g by the inverse transform: with
/// H(eta) = int_alpha^eta g(zeta) sin(zeta) / sqrt(cos zeta - cos eta) dzeta
/// (desingularized by t^2 = cos zeta - cos eta),
/// F(eta) = Gamma((d-2)/2) / (2 pi^((d+2)/2)) csc^(d-3)(eta/2) / sin(eta)
/// * dH/deta.
pub fn f_numeric<G>(g: G, d: Dimension, alpha: f64, eta: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    if !(eta > alpha && eta < PI) {
        return Err(Error::InvalidInput(format!(
            "eta = {eta} outside the support interior ({alpha}, pi)"
        )));
    }
    let df = d.as_f64();
    let ca = alpha.cos();
    let h = |e: f64| -> Result<f64> {
        let t1 = (ca - e.cos()).max(0.0).sqrt();
        let val = integrate_tol(
            |t| {
                let cz = (e.cos() + t * t).clamp(-1.0, 1.0);
                g(cz.acos())
            },
            0.0,
            t1,
            cfg.rel_tol,
            cfg.abs_tol,
            cfg.max_intervals,
        )?;
        Ok(2.0 * val)
    };
    let dh = differentiate(h, eta, alpha + 1e-9, PI - 1e-9, cfg)?;
    let ln_coef = ln_gamma((df - 2.0) / 2.0)? - 2f64.ln() - 0.5 * (df + 2.0) * PI.ln();
    Ok(ln_coef.exp() * (0.5 * eta).sin().powi(3 - d.get() as i32) / eta.sin() * dh)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::CustomField;

    fn d(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    const PC_ALPHA0_D3_Q1: f64 = 1.2562687275811028049;

    #[test]
    fn g_closed_point_charge_values() {
        let f = ExternalField::point_charge(1.0).unwrap();
        // d=3: coefficient -q sqrt(pi) Gamma(1) / (2 Gamma(3/2)) = -q, so g(pi) = -1
        let g = g_closed(&f, d(3), PI).unwrap();
        assert!((g + 1.0).abs() < 1e-14, "g(pi) = {g}");
        // frozen oracle, d=5 zeta=2.0
        let g = g_closed(&f, d(5), 2.0).unwrap();
        let want = -1.1883951057781212163;
        assert!((g - want).abs() < 1e-14 * want.abs(), "g = {g}");
    }

    #[test]
    fn g_closed_quadratic_vanishes_at_pi() {
        // cos^4(zeta/2) floors at ~1e-65 rather than 0 because cos(pi/2)
        // rounds to ~6e-17
        assert!(g_closed(&ExternalField::Quadratic, d(4), PI).unwrap().abs() < 1e-60);
        assert!(g_closed(&ExternalField::Quadratic, d(4), 2.9).unwrap() < 0.0);
    }

    #[test]
    fn g_closed_rejects_custom() {
        let f = ExternalField::Custom(CustomField::new(|_| 1.0, true, "flat"));
        assert!(g_closed(&f, d(3), 1.0).is_err());
    }

    #[test]
    fn inner_integral_matches_closed_forms() {
        for dd in [3u32, 4, 5, 7] {
            for &zeta in &[1.1, 1.5, 2.5] {
                let pc = ExternalField::point_charge(1.0).unwrap();
                let got = g_inner(&pc, d(dd), zeta, &cfg()).unwrap();
                let want = inner_oracles::g_inner_point_charge(d(dd), 1.0, zeta).unwrap();
                assert!(
                    (got - want).abs() < 1e-8 * (1.0 + want.abs()),
                    "pc inner d={dd} zeta={zeta}: got {got} want {want}"
                );
                let got = g_inner(&ExternalField::Quadratic, d(dd), zeta, &cfg()).unwrap();
                let want = inner_oracles::g_inner_quadratic(d(dd), zeta).unwrap();
                assert!(
                    (got - want).abs() < 1e-8 * (1.0 + want.abs()),
                    "quadratic inner d={dd} zeta={zeta}: got {got} want {want}"
                );
            }
        }
    }

    #[test]
    fn g_numeric_matches_g_closed() {
        let pc = ExternalField::point_charge(1.0).unwrap();
        for (dd, zeta, alpha) in [(4u32, 2.0, 1.0), (3, 1.9, 1.2), (7, 2.4, 1.3)] {
            let got = g_numeric(&pc, d(dd), alpha, zeta, &cfg()).unwrap();
            let want = g_closed(&pc, d(dd), zeta).unwrap();
            assert!(
                (got - want).abs() < 1e-6 * (1.0 + want.abs()),
                "pc d={dd} zeta={zeta}: got {got} want {want}"
            );
        }
        for (dd, zeta) in [(3u32, 2.5), (5, 2.0)] {
            let got = g_numeric(&ExternalField::Quadratic, d(dd), 1.4, zeta, &cfg()).unwrap();
            let want = g_closed(&ExternalField::Quadratic, d(dd), zeta).unwrap();
            assert!(
                (got - want).abs() < 1e-6 * (1.0 + want.abs()),
                "quadratic d={dd} zeta={zeta}: got {got} want {want}"
            );
        }
    }

    #[test]
    fn g_numeric_zero_field_is_zero() {
        assert_eq!(
            g_numeric(&ExternalField::Zero, d(5), 1.0, 2.0, &cfg()).unwrap(),
            0.0
        );
    }

    #[test]
    fn g_numeric_is_linear_in_the_field() {
        let q1 = ExternalField::Custom(CustomField::new(
            |th: f64| (1.3 - th.cos()).powi(3),
            true,
            "cubic",
        ));
        let q3 = ExternalField::Custom(CustomField::new(
            |th: f64| 3.0 * (1.3 - th.cos()).powi(3),
            true,
            "cubic x3",
        ));
        for &zeta in &[1.2, 2.0, 2.8] {
            let a = g_numeric(&q1, d(4), 0.5, zeta, &cfg()).unwrap();
            let b = g_numeric(&q3, d(4), 0.5, zeta, &cfg()).unwrap();
            assert!((b - 3.0 * a).abs() < 1e-10 * (1.0 + a.abs()), "zeta={zeta}");
        }
    }

    #[test]
    fn f_closed_point_charge_values() {
        let pc = ExternalField::point_charge(1.0).unwrap();
        let a0 = PC_ALPHA0_D3_Q1;
        // at eta = pi the closed form collapses to -tan(alpha0/2)/(2 sqrt(2) pi^2)
        let got = f_closed(&pc, d(3), a0, PI).unwrap();
        let simple = -(0.5 * a0).tan() / (2.0 * 2f64.sqrt() * PI * PI);
        assert!((got - simple).abs() < 1e-15 * simple.abs());
        let frozen = -0.026016453496057837636;
        assert!((got - frozen).abs() < 1e-14 * frozen.abs(), "got {got}");
        let got = f_closed(&pc, d(3), a0, 2.8).unwrap();
        let frozen = -0.027401788512741436639;
        assert!((got - frozen).abs() < 1e-14 * frozen.abs(), "got {got}");
    }

    #[test]
    fn f_closed_edge_consistency() {
        // F_edge(t) must equal F(eta(t)) * t away from the endpoint
        let quad = ExternalField::Quadratic;
        let a0 = 1.5763778528547420811f64; // quadratic support angle, d=4
                                           // t stays below sqrt(1 + cos a0) ~ 0.997
        for &t in &[0.3, 0.7, 0.95] {
            let eta = (a0.cos() - t * t).acos();
            let fe = f_closed_edge(&quad, d(4), a0, t).unwrap();
            let f = f_closed(&quad, d(4), a0, eta).unwrap();
            assert!((fe - f * t).abs() < 1e-12 * (1.0 + (f * t).abs()), "t={t}");
        }
        let pc = ExternalField::point_charge(0.5).unwrap();
        let a0 = 0.99207847192802009216f64; // point-charge support angle, d=3 q=0.5
        for &t in &[0.2, 0.9] {
            let eta = (a0.cos() - t * t).acos();
            let fe = f_closed_edge(&pc, d(3), a0, t).unwrap();
            let f = f_closed(&pc, d(3), a0, eta).unwrap();
            assert!((fe - f * t).abs() < 1e-12 * (1.0 + (f * t).abs()), "t={t}");
        }
    }

    #[test]
    fn f_closed_domain_errors() {
        let pc = ExternalField::point_charge(1.0).unwrap();
        assert!(f_closed(&pc, d(3), 1.2, 1.1).is_err());
        assert!(f_closed(&pc, d(3), 1.2, 1.2).is_err());
        assert!(f_closed(&pc, d(3), 1.2, 3.5).is_err());
    }

    #[test]
    fn f_numeric_matches_f_closed() {
        let pc = ExternalField::point_charge(1.0).unwrap();
        let a0 = PC_ALPHA0_D3_Q1;
        for &eta in &[2.3, 2.8] {
            let got = f_numeric(|z| g_closed(&pc, d(3), z), d(3), a0, eta, &cfg()).unwrap();
            let want = f_closed(&pc, d(3), a0, eta).unwrap();
            assert!(
                (got - want).abs() < 1e-6 * (1.0 + want.abs()),
                "pc eta={eta}: got {got} want {want}"
            );
        }
        let a0 = 1.4680623959133604127; // quadratic support angle, d=5
        for &eta in &[2.3, 3.0] {
            let got = f_numeric(
                |z| g_closed(&ExternalField::Quadratic, d(5), z),
                d(5),
                a0,
                eta,
                &cfg(),
            )
            .unwrap();
            let want = f_closed(&ExternalField::Quadratic, d(5), a0, eta).unwrap();
            assert!(
                (got - want).abs() < 1e-6 * (1.0 + want.abs()),
                "quadratic eta={eta}: got {got} want {want}"
            );
        }
    }

    #[test]
    fn f_numeric_zero_g_is_zero() {
        let got = f_numeric(|_| Ok(0.0), d(4), 1.0, 2.0, &cfg()).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn f_numeric_is_linear_in_g() {
        let pc = ExternalField::point_charge(1.0).unwrap();
        let a0 = PC_ALPHA0_D3_Q1;
        let one = f_numeric(|z| g_closed(&pc, d(3), z), d(3), a0, 2.5, &cfg()).unwrap();
        let five = f_numeric(
            |z| g_closed(&pc, d(3), z).map(|v| 5.0 * v),
            d(3),
            a0,
            2.5,
            &cfg(),
        )
        .unwrap();
        assert!((five - 5.0 * one).abs() < 1e-10 * (1.0 + one.abs()));
    }
}
