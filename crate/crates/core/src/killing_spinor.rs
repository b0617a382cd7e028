//! Imaginary Killing spinors of `H^3` and their squared norms, which are the
//! restrictions of the linear forms `F(X) = -<<X, η>>` to the hyperboloid.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::ah_metric::AHFamily;
use crate::embed_h3::{embed_surface, Branch, EmbeddedSurface};
use crate::error::{Error, Result};
use crate::lorentz::{hopf_eta, hyperboloid_point, MinkowskiVector, SpinorParameter};
use crate::quadrature::QuadratureGrid;
use crate::sphere_geometry::{coordinate_sphere, surface_laplacian, SurfaceSample};

/// Off-hyperboloid tolerance for [`norm_field_at`].
pub const HYPERBOLOID_TOL: f64 = 1e-8;

/// The squared-norm field of the Killing spinor with parameter `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingNormField {
    pub z: Option<SpinorParameter>,
    pub eta: MinkowskiVector,
}

impl KillingNormField {
    pub fn new(z: SpinorParameter) -> Result<Self> {
        if z.is_zero() {
            return Err(Error::InvalidArgument("spinor parameter must be nonzero".into()));
        }
        Ok(Self {
            z: Some(z),
            eta: hopf_eta(&z),
        })
    }

    /// The linear form `-<<X, η>>` for any nonzero `η`, null or not.
    /// Timelike `η` is useful for pinning sign conventions.
    pub fn from_eta(eta: MinkowskiVector) -> Result<Self> {
        if eta.max_abs() == 0.0 || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("η = {eta} must be finite and nonzero")));
        }
        Ok(Self { z: None, eta })
    }

    /// Evaluates the form without the hyperboloid check.
    pub fn eval(&self, x: MinkowskiVector) -> f64 {
        -x.inner(self.eta)
    }

    /// Gradient on `H^3`: the tangential projection of `-η`, which is
    /// `-η + F X`.
    pub fn gradient_at(&self, x: MinkowskiVector) -> MinkowskiVector {
        -self.eta + x * self.eval(x)
    }

    /// Directional derivative along a tangent vector `v`.
    pub fn derivative(&self, v: MinkowskiVector) -> f64 {
        -v.inner(self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorValue(pub [Complex64; 2]);

impl SpinorValue {
    pub fn norm_sq(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }
}

/// The spinor field in polar coordinates `(r, θ, ϑ)` about the `x1` axis.
pub fn spinor_at(z: &SpinorParameter, r: f64, theta: f64, phi: f64) -> SpinorValue {
    let ep = Complex64::from_polar(1.0, phi / 2.0);
    let em = ep.conj();
    let (s, c) = (theta / 2.0).sin_cos();
    let up = (r / 2.0).exp();
    let down = (-r / 2.0).exp();
    SpinorValue([
        (z.z1 * ep * c + z.z2 * em * s) * up,
        -(z.z1 * ep * s - z.z2 * em * c) * down,
    ])
}

/// Position vector of the polar chart used by [`spinor_at`]: the polar
/// axis is `x1` and `ϑ` turns from `x2` towards `x3`.
pub fn spinor_chart_point(r: f64, theta: f64, phi: f64) -> MinkowskiVector {
    let p = hyperboloid_point(r, theta, phi);
    MinkowskiVector::new(p.x3, p.x1, p.x2, p.t)
}

/// `-<<X, η>>` for `X` on the hyperboloid.
pub fn norm_field_at(field: &KillingNormField, x: MinkowskiVector) -> Result<f64> {
    let defect = (x.norm_sq() + 1.0).abs();
    if defect > HYPERBOLOID_TOL || x.t <= 0.0 {
        return Err(Error::OffHyperboloid(defect));
    }
    Ok(field.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicFit {
    pub a: f64,
    pub b: f64,
    pub max_residual: f64,
}

/// Least-squares fit of `u(t) = F(cosh t X0 + sinh t V)` to `A e^t + B e^{-t}`.
pub fn geodesic_norm_check(
    field: &KillingNormField,
    start: MinkowskiVector,
    direction: MinkowskiVector,
    ts: &[f64],
) -> Result<GeodesicFit> {
    if (start.norm_sq() + 1.0).abs() > HYPERBOLOID_TOL
        || (direction.norm_sq() - 1.0).abs() > HYPERBOLOID_TOL
        || start.inner(direction).abs() > HYPERBOLOID_TOL
    {
        return Err(Error::InvalidArgument("not a unit-speed geodesic".into()));
    }
    let mut m = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    let samples: Vec<(f64, f64, f64)> = ts
        .iter()
        .map(|&t| {
            let u = norm_field_at(field, start * t.cosh() + direction * t.sinh())?;
            Ok((t.exp(), (-t).exp(), u))
        })
        .collect::<Result<_>>()?;
    for &(p, q, u) in &samples {
        let row = Vector2::new(p, q);
        m += row * row.transpose();
        rhs += row * u;
    }
    let scale = m.abs().max();
    if ts.len() < 2 || m.determinant().abs() <= 1e-12 * scale * scale {
        return Err(Error::Degenerate("need at least two distinct samples".into()));
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("singular normal equations".into()))?;
    let (a, b) = (sol[0], sol[1]);
    let max_residual = samples
        .iter()
        .map(|&(p, q, u)| (a * p + b * q - u).abs())
        .fold(0.0, f64::max);
    Ok(GeodesicFit { a, b, max_residual })
}

/// Samples of `F` at the nodes of an embedding.
pub fn sample_on(field: &KillingNormField, emb: &EmbeddedSurface) -> Vec<f64> {
    emb.x.iter().map(|p| field.eval(*p)).collect()
}

/// Per-node `Δ_Σ F - 2F - H0 ν(F)`, with `ν` the inward unit normal.
pub fn minkowski_identity_defect(
    field: &KillingNormField,
    surf: &SurfaceSample,
    emb: &EmbeddedSurface,
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    emb.check_grid(grid)?;
    if emb.normal.len() != emb.len() || emb.h0.len() != emb.len() {
        return Err(Error::InvalidArgument("embedding lacks normal data".into()));
    }
    let f = sample_on(field, emb);
    let lap = surface_laplacian(surf, &f, grid)?;
    Ok((0..f.len())
        .map(|k| lap[k] - 2.0 * f[k] - emb.h0[k] * field.derivative(emb.normal[k]))
        .collect())
}

/// `max |Δ_Σ F - 2F - H0 ν(F)|` over the nodes.
pub fn minkowski_identity_residual(
    field: &KillingNormField,
    surf: &SurfaceSample,
    emb: &EmbeddedSurface,
    grid: &QuadratureGrid,
) -> Result<f64> {
    Ok(minkowski_identity_defect(field, surf, emb, grid)?
        .into_iter()
        .fold(0.0, |m, d| m.max(d.abs())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// `max F ≈ C ε^{-p}`.
    pub p: f64,
    pub log_c: f64,
    pub max_norm: Vec<f64>,
}

/// Fits the largest node value of `F` on `Σ_ε` against `ε^{-p}`.
pub fn exhaustion_norm_growth(
    field: &KillingNormField,
    family: &AHFamily,
    eps: &[f64],
    grid: &QuadratureGrid,
) -> Result<GrowthFit> {
    if eps.len() < 2 {
        return Err(Error::InvalidArgument("need at least two ε values".into()));
    }
    let mut max_norm = Vec::with_capacity(eps.len());
    for &e in eps {
        let surf = coordinate_sphere(family, e, grid)?;
        let emb = embed_surface(&surf, Branch::Plus, grid)?;
        max_norm.push(sample_on(field, &emb).into_iter().fold(f64::NEG_INFINITY, f64::max));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = max_norm.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("ε values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(GrowthFit {
        p: -slope,
        log_c: my - slope * mx,
        max_norm,
    })
}
