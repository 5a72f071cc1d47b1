//! Sphere geometry: dimension and cap types, surface areas, and the
//! Funk-Hecke reduction of zonal integrals to a weighted 1-D integral.

use crate::error::{Error, Result};
use crate::quadrature::{GaussJacobi, QuadratureConfig};
use crate::specfun::ln_gamma;
use serde::Serialize;
use std::f64::consts::PI;

/// Ambient dimension d of the sphere S^(d-1), restricted to d >= 3 where the
/// Newtonian kernel |x - y|^(2-d) is the relevant one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidInput(format!(
                "dimension must be at least 3, got {d}"
            )));
        }
        Ok(Self(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which pole a spherical cap is centered on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pole {
    North,
    South,
}

/// A spherical cap, parameterized by its boundary colatitude alpha in (0, pi].
///
/// With the colatitude theta measured from the North pole, the North cap is
/// {theta <= alpha} and the South cap is {theta >= alpha}; alpha = pi makes
/// the North cap the full sphere and the South cap a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapGeometry {
    pub pole: Pole,
    pub alpha: f64,
}

impl CapGeometry {
    pub fn new(pole: Pole, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > PI {
            return Err(Error::InvalidInput(format!(
                "cap angle must lie in (0, pi], got {alpha}"
            )));
        }
        Ok(Self { pole, alpha })
    }

    /// The same cap described from the opposite pole: theta -> pi - theta.
    pub fn reflected(self) -> Self {
        Self {
            pole: match self.pole {
                Pole::North => Pole::South,
                Pole::South => Pole::North,
            },
            alpha: PI - self.alpha,
        }
    }

    /// True if the colatitude eta lies inside the cap.
    pub fn contains(&self, eta: f64) -> bool {
        match self.pole {
            Pole::North => eta <= self.alpha,
            Pole::South => eta >= self.alpha,
        }
    }
}

/// Surface area of S^(d-1): 2 pi^(d/2) / Gamma(d/2). Accepts d >= 2.
pub fn surface_area(d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "surface_area requires d >= 2, got {d}"
        )));
    }
    let df = f64::from(d);
    Ok(2.0 * (0.5 * df * PI.ln() - ln_gamma(0.5 * df)?).exp())
}

/// Funk-Hecke reduction: for a kernel k depending only on t = <x, y>,
///
///   int_{S^(d-1)} k(<x, y>) dS(y)
///     = (2 pi^((d-1)/2) / Gamma((d-1)/2)) int_{-1}^{1} k(t) (1-t^2)^((d-3)/2) dt,
///
/// computed with the (1-t^2)^((d-3)/2) weight folded into Gauss-Jacobi nodes.
pub fn funk_hecke_integral<F: Fn(f64) -> f64>(
    d: Dimension,
    kernel: F,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let df = d.as_f64();
    let exponent = 0.5 * (df - 3.0);
    let rule = GaussJacobi::new(cfg.jacobi_nodes, exponent, exponent)?;
    let constant = 2.0 * (0.5 * (df - 1.0) * PI.ln() - ln_gamma(0.5 * (df - 1.0))?).exp();
    Ok(constant * rule.integrate(kernel))
}
