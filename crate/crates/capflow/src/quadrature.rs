//! Shared numeric machinery: an adaptive Gauss-Kronrod integrator, Gauss-Jacobi
//! rules with the endpoint weight folded into the nodes, and Richardson-refined
//! central differences. Every routine draws its budget from [`QuadratureConfig`]
//! so tolerances are set in one place.

use crate::error::{Error, Result};
use crate::specfun::ln_gamma;
use nalgebra::DMatrix;
use std::collections::BinaryHeap;

/// Tolerances, node counts, and differentiation step policy shared by all
/// numeric routines.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Relative target for adaptive integrals.
    pub rel_tol: f64,
    /// Absolute floor for adaptive integrals.
    pub abs_tol: f64,
    /// Subdivision budget for one adaptive integral.
    pub max_intervals: usize,
    /// Node count for fixed Gauss-Jacobi rules.
    pub jacobi_nodes: usize,
    /// Largest central-difference step (radians).
    pub diff_step_max: f64,
    /// Smallest admissible central-difference step.
    pub diff_step_min: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_intervals: 4000,
            jacobi_nodes: 80,
            diff_step_max: 1e-3,
            diff_step_min: 1e-6,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidInput(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.jacobi_nodes < 2 {
            return Err(Error::InvalidInput(
                "jacobi_nodes must be at least 2".into(),
            ));
        }
        if !(self.diff_step_min > 0.0 && self.diff_step_min <= self.diff_step_max) {
            return Err(Error::InvalidInput(
                "differentiation steps must satisfy 0 < min <= max".into(),
            ));
        }
        Ok(())
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (positive abscissae).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-Kronrod 15(7) pass over [a, b]: returns (estimate, error bound).
fn kronrod15<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let hlgth = 0.5 * (b - a);
    let centr = 0.5 * (a + b);

    let fc = f(centr)?;
    let mut resg = WG[3] * fc;
    let mut resk = WGK[7] * fc;
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = hlgth * XGK[j];
        let f1 = f(centr - dx)?;
        let f2 = f(centr + dx)?;
        fv[j] = f1;
        fv[14 - j] = f2;
        let fsum = f1 + f2;
        resk += WGK[j] * fsum;
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - reskh).abs() + (fv[14 - j] - reskh).abs());
    }
    resasc *= hlgth.abs();
    let result = resk * hlgth;
    let mut abserr = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && abserr != 0.0 {
        abserr = resasc * 1.0f64.min((200.0 * abserr / resasc).powf(1.5));
    }
    Ok((result, abserr))
}

#[derive(Debug)]
struct Interval {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integral of `f` over [a, b] to the config tolerances.
///
/// Subdivides the interval with the largest error bound first, so integrable
/// endpoint singularities converge geometrically. A non-finite integrand
/// value or an exhausted budget yields an error rather than a silent result,
/// and an integrand error aborts the pass.
pub fn integrate<F: Fn(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    integrate_tol(f, a, b, cfg.rel_tol, cfg.abs_tol, cfg.max_intervals)
}

/// [`integrate`] with explicit tolerances (used where a caller budgets a
/// double integral between outer and inner passes).
pub fn integrate_tol<F: Fn(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integration endpoints must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Err(Error::InvalidInput(format!(
            "integration endpoints out of order: [{a}, {b}]"
        )));
    }

    let (val, err) = kronrod15(&f, a, b)?;
    if !val.is_finite() {
        return Err(Error::QuadratureNonConvergence(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Interval { err, a, b, val });
    let mut total_val = val;
    let mut total_err = err;

    while total_err > abs_tol.max(rel_tol * total_val.abs()) {
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureNonConvergence(format!(
                "error {total_err:.3e} after {} subdivisions on [{a}, {b}]",
                heap.len()
            )));
        }
        let worst = heap
            .pop()
            .ok_or_else(|| Error::QuadratureNonConvergence("adaptive heap exhausted".into()))?;
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution: accept its estimate as-is
            total_err -= worst.err;
            heap.push(Interval { err: 0.0, ..worst });
            continue;
        }
        let (lv, le) = kronrod15(&f, worst.a, mid)?;
        let (rv, re) = kronrod15(&f, mid, worst.b)?;
        if !(lv.is_finite() && rv.is_finite()) {
            return Err(Error::QuadratureNonConvergence(format!(
                "integrand not finite near [{:.6}, {:.6}]",
                worst.a, worst.b
            )));
        }
        total_val += lv + rv - worst.val;
        total_err += le + re - worst.err;
        heap.push(Interval {
            err: le,
            a: worst.a,
            b: mid,
            val: lv,
        });
        heap.push(Interval {
            err: re,
            a: mid,
            b: worst.b,
            val: rv,
        });
    }
    Ok(total_val)
}

/// Gauss-Jacobi rule on [-1, 1] absorbing the weight (1-x)^alpha (1+x)^beta.
///
/// Nodes and weights come from the Golub-Welsch eigendecomposition of the
/// Jacobi recurrence matrix; the zeroth moment is 2^(alpha+beta+1) B(alpha+1,
/// beta+1).
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl GaussJacobi {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "Gauss-Jacobi needs at least 2 nodes, got {n}"
            )));
        }
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(Error::InvalidInput(format!(
                "Gauss-Jacobi exponents must exceed -1, got alpha={alpha}, beta={beta}"
            )));
        }
        let mut jm = DMatrix::<f64>::zeros(n, n);
        let mut diag = (beta - alpha) / (2.0 + alpha + beta);
        for k in 0..n - 1 {
            let kp1 = (k + 1) as f64;
            let denom = 2.0 * kp1 + alpha + beta;
            let off = 2.0 / denom
                * (kp1 * (kp1 + alpha) * (kp1 + beta) * (kp1 + alpha + beta)
                    / ((denom + 1.0) * (denom - 1.0)))
                    .sqrt();
            jm[(k, k)] = diag;
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
            diag = (beta * beta - alpha * alpha) / (denom * (denom + 2.0));
        }
        jm[(n - 1, n - 1)] = diag;

        let eigen = jm.symmetric_eigen();
        let mu0 = ((alpha + beta + 1.0) * std::f64::consts::LN_2
            + ln_gamma(alpha + 1.0)?
            + ln_gamma(beta + 1.0)?
            - ln_gamma(alpha + beta + 2.0)?)
        .exp();

        let mut pairs: Vec<(f64, f64)> = eigen
            .eigenvalues
            .iter()
            .copied()
            .zip(eigen.eigenvectors.row(0).iter().map(|v| mu0 * v * v))
            .collect();
        pairs.sort_unstable_by(|p, q| p.0.total_cmp(&q.0));
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
            alpha,
            beta,
        })
    }

    /// int_{-1}^{1} (1-x)^alpha (1+x)^beta f(x) dx.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// int_0^1 t^beta (1-t)^alpha f(t) dt via the map t = (x+1)/2.
    pub fn integrate_01<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let scale = 0.5f64.powf(self.alpha + self.beta + 1.0);
        scale
            * self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * f(0.5 * (x + 1.0)))
                .sum::<f64>()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Derivative of `f` at `x` by central differences with one Richardson
/// refinement. The step starts at `diff_step_max`, shrinks to keep the
/// stencil inside (lo, hi), and must stay above `diff_step_min`.
pub fn differentiate<F: Fn(f64) -> Result<f64>>(
    f: F,
    x: f64,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let room = (hi - x).min(x - lo);
    let h = cfg.diff_step_max.min(0.5 * room);
    if !(h >= cfg.diff_step_min) {
        return Err(Error::InvalidInput(format!(
            "differentiation stencil does not fit: x={x} in ({lo}, {hi})"
        )));
    }
    let coarse = (f(x + h)? - f(x - h)?) / (2.0 * h);
    let h2 = 0.5 * h;
    let fine = (f(x + h2)? - f(x - h2)?) / (2.0 * h2);
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn integrates_smooth_functions() {
        let v = integrate(|x: f64| Ok(x.sin()), 0.0, PI, &cfg()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x: f64| Ok((-x * x).exp()), -6.0, 6.0, &cfg()).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn integrates_endpoint_singularities() {
        // int_0^1 x^(-1/2) dx = 2
        let v = integrate(|x: f64| Ok(1.0 / x.sqrt()), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "got {v}");
        // int_0^1 ln x dx = -1
        let v = integrate(|x: f64| Ok(x.ln()), 0.0, 1.0, &cfg()).unwrap();
        assert!((v + 1.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn rejects_bad_intervals_and_nan() {
        assert!(integrate(Ok, 1.0, 0.0, &cfg()).is_err());
        assert!(integrate(|_| Ok(f64::NAN), 0.0, 1.0, &cfg()).is_err());
        assert_eq!(integrate(Ok, 2.0, 2.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn propagates_integrand_errors() {
        let r = integrate(
            |x| {
                if x > 0.9 {
                    Err(Error::InvalidInput("domain".into()))
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            &cfg(),
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn gauss_jacobi_matches_moments() {
        // weight (1-x)^0 (1+x)^0: plain Gauss-Legendre moments
        let rule = GaussJacobi::new(16, 0.0, 0.0).unwrap();
        assert!((rule.integrate(|_| 1.0) - 2.0).abs() < 1e-14);
        assert!((rule.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-14);
        assert!(rule.integrate(|x| x * x * x).abs() < 1e-14);

        // weight (1-x^2)^(1/2): int = pi/2, int x^2 (1-x^2)^(1/2) = pi/8
        let rule = GaussJacobi::new(24, 0.5, 0.5).unwrap();
        assert!((rule.integrate(|_| 1.0) - PI / 2.0).abs() < 1e-13);
        assert!((rule.integrate(|x| x * x) - PI / 8.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_jacobi_unit_interval_map() {
        // int_0^1 t^(1/2) (1-t)^(-1/2) dt = B(3/2, 1/2) = pi/2
        let rule = GaussJacobi::new(24, -0.5, 0.5).unwrap();
        let v = rule.integrate_01(|_| 1.0);
        assert!((v - PI / 2.0).abs() < 1e-13, "got {v}");
        // smooth factor: int_0^1 t^(1/2)(1-t)^(-1/2) e^t dt, reference from
        // adaptive integration after t = 1 - u^2 removes the endpoint
        let want = integrate_tol(
            |u: f64| {
                let t = 1.0 - u * u;
                Ok(2.0 * t.sqrt() * t.exp())
            },
            0.0,
            1.0,
            1e-12,
            1e-14,
            4000,
        )
        .unwrap();
        let got = rule.integrate_01(|t| t.exp());
        assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
    }

    #[test]
    fn gauss_jacobi_rejects_bad_parameters() {
        assert!(GaussJacobi::new(1, 0.0, 0.0).is_err());
        assert!(GaussJacobi::new(8, -1.0, 0.0).is_err());
        assert!(GaussJacobi::new(8, 0.0, -1.5).is_err());
    }

    #[test]
    fn differentiates_with_richardson() {
        let d = differentiate(|x| Ok(x.sin()), 1.0, 0.0, PI, &cfg()).unwrap();
        assert!((d - 1.0f64.cos()).abs() < 1e-11);
        // stencil clipped near the boundary still works
        let d = differentiate(|x| Ok(x * x), 0.001, 0.0, 1.0, &cfg()).unwrap();
        assert!((d - 0.002).abs() < 1e-10);
        // no room at all: error
        assert!(differentiate(Ok, 1e-9, 0.0, 1.0, &cfg()).is_err());
    }
}
