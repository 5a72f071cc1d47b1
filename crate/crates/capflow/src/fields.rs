//! External fields on the sphere: the built-in rotationally symmetric fields,
//! user-supplied fields, and the admissibility screen that justifies a cap
//! support.

use crate::error::{Error, Result};
use crate::sphere::Dimension;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// A rotationally symmetric external field Q(theta), theta the colatitude.
#[derive(Clone)]
pub enum ExternalField {
    /// No field; the support is the whole sphere unless a cap is forced.
    Zero,
    /// Field of a positive charge q at the North pole: q (1-cos theta)^(-(d-2)/2).
    PointCharge { q: f64 },
    /// The convex polynomial field (1 + cos theta)^2.
    Quadratic,
    /// Arbitrary user field.
    Custom(CustomField),
}

/// User-supplied field: an evaluator plus a smoothness declaration that
/// decides whether the Abel pipeline may differentiate through it.
#[derive(Clone)]
pub struct CustomField {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub smooth: bool,
    pub label: String,
}

impl CustomField {
    pub fn new<F>(eval: F, smooth: bool, label: impl Into<String>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            smooth,
            label: label.into(),
        }
    }
}

impl fmt::Debug for ExternalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExternalField::Zero => write!(f, "Zero"),
            ExternalField::PointCharge { q } => write!(f, "PointCharge {{ q: {q} }}"),
            ExternalField::Quadratic => write!(f, "Quadratic"),
            ExternalField::Custom(c) => write!(f, "Custom({})", c.label),
        }
    }
}

impl ExternalField {
    pub fn point_charge(q: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::InvalidInput(format!(
                "point charge requires q > 0, got {q}"
            )));
        }
        Ok(ExternalField::PointCharge { q })
    }

    /// Q(theta). The point-charge field diverges at theta = 0 and returns
    /// +infinity there.
    pub fn eval(&self, d: Dimension, theta: f64) -> f64 {
        match self {
            ExternalField::Zero => 0.0,
            ExternalField::PointCharge { q } => {
                let one_minus = 1.0 - theta.cos();
                if one_minus <= 0.0 {
                    f64::INFINITY
                } else {
                    q * one_minus.powf(-0.5 * (d.as_f64() - 2.0))
                }
            }
            ExternalField::Quadratic => {
                let c = 1.0 + theta.cos();
                c * c
            }
            ExternalField::Custom(c) => (c.eval)(theta),
        }
    }

    /// True when closed-form support equations, densities, and Abel transforms
    /// exist for this field.
    pub fn has_closed_forms(&self) -> bool {
        matches!(
            self,
            ExternalField::Zero | ExternalField::PointCharge { .. } | ExternalField::Quadratic
        )
    }

    /// True when the Abel pipeline may differentiate through the field.
    pub fn is_smooth_on_support(&self) -> bool {
        match self {
            ExternalField::Custom(c) => c.smooth,
            _ => true,
        }
    }

    /// The reflected field theta -> Q(pi - theta), used to solve North-cap
    /// problems on the South-cap code path.
    pub fn reflected(&self, d: Dimension) -> ExternalField {
        let inner = self.clone();
        let label = format!("{:?} reflected", self);
        ExternalField::Custom(CustomField::new(
            move |theta| inner.eval(d, PI - theta),
            self.is_smooth_on_support(),
            label,
        ))
    }

    /// Compact descriptor used in CLI output.
    pub fn describe(&self) -> String {
        match self {
            ExternalField::Zero => "zero".into(),
            ExternalField::PointCharge { q } => format!("point-charge q={q}"),
            ExternalField::Quadratic => "quadratic".into(),
            ExternalField::Custom(c) => format!("custom {}", c.label),
        }
    }
}

/// Outcome of the South-cap admissibility screen.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// First grid pair (x1_left, x1_right) with Q decreasing, if any.
    pub monotonicity_violation: Option<(f64, f64)>,
    /// First grid pair (x1_left, x1_right) whose midpoint lies above the
    /// chord, if any.
    pub convexity_violation: Option<(f64, f64)>,
}

impl AdmissibilityReport {
    pub fn message(&self) -> String {
        if self.admissible {
            return "field is admissible for a South-cap support".into();
        }
        let mut parts = Vec::new();
        if let Some((a, b)) = self.monotonicity_violation {
            parts.push(format!(
                "Q decreases in x1 = cos(theta) between x1={a:.9} and x1={b:.9}"
            ));
        }
        if let Some((a, b)) = self.convexity_violation {
            parts.push(format!(
                "Q violates midpoint convexity in x1 on the pair x1={a:.9}, x1={b:.9}"
            ));
        }
        parts.join("; ")
    }
}

/// Screens the field for the structure that guarantees a South-cap support:
/// Q as a function of x1 = cos(theta) must be nondecreasing and convex.
///
/// Both properties are sampled on a 1000-point uniform grid over
/// [-1 + 1e-9, 1 - 1e-9]; the report names the first violated pair. A sampled
/// check cannot prove admissibility, only refute it, which is why the solver
/// also accepts a user-forced support angle.
pub fn check_south_cap_admissible(field: &ExternalField, d: Dimension) -> AdmissibilityReport {
    const N: usize = 1000;
    const EDGE: f64 = 1e-9;
    let lo = -1.0 + EDGE;
    let hi = 1.0 - EDGE;
    let step = (hi - lo) / (N - 1) as f64;

    let xs: Vec<f64> = (0..N).map(|i| lo + step * i as f64).collect();
    let qs: Vec<f64> = xs
        .iter()
        .map(|&x| field.eval(d, x.clamp(-1.0, 1.0).acos()))
        .collect();

    let mut monotonicity_violation = None;
    for i in 0..N - 1 {
        let scale = qs[i].abs().max(qs[i + 1].abs()).max(1.0);
        if qs[i + 1] - qs[i] < -1e-10 * scale {
            monotonicity_violation = Some((xs[i], xs[i + 1]));
            break;
        }
    }
    let mut convexity_violation = None;
    for i in 0..N - 2 {
        let scale = qs[i]
            .abs()
            .max(qs[i + 1].abs())
            .max(qs[i + 2].abs())
            .max(1.0);
        if qs[i] + qs[i + 2] - 2.0 * qs[i + 1] < -1e-10 * scale {
            convexity_violation = Some((xs[i], xs[i + 2]));
            break;
        }
    }
    AdmissibilityReport {
        admissible: monotonicity_violation.is_none() && convexity_violation.is_none(),
        monotonicity_violation,
        convexity_violation,
    }
}

/// Natural cubic spline through (theta_i, Q_i) pairs, used for field files.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    /// Points must be strictly increasing in theta; at least four are needed
    /// for a meaningful field table.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "field table needs at least 4 points, got {}",
                points.len()
            )));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidInput(format!(
                    "field table abscissae must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        let n = points.len();
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();

        // tridiagonal solve for natural boundary conditions
        let mut second = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * second[i - 1] + 2.0;
            second[i] = (sig - 1.0) / p;
            let dy1 = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            let dy0 = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            u[i] = (6.0 * (dy1 - dy0) / (xs[i + 1] - xs[i - 1]) - sig * u[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            second[i] = second[i] * second[i + 1] + u[i];
        }
        Ok(Self { xs, ys, second })
    }

    /// Evaluate the spline, clamping outside the table range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let x = x.clamp(self.xs[0], self.xs[n - 1]);
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let h = self.xs[hi] - self.xs[lo];
        let a = (self.xs[hi] - x) / h;
        let b = (x - self.xs[lo]) / h;
        a * self.ys[lo]
            + b * self.ys[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h / 6.0
    }
}
