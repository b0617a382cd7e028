//! Asymptotically hyperbolic metrics in collar form
//! `g = sinh^{-2}(ρ) (dρ^2 + h_ρ)` with `h_ρ = h0 + (ρ^3/3) h + e`,
//! and the mass vector built from the mass aspect `h`.
//!
//! All shipped families are conformal in the collar, `h_ρ = φ(ρ, θ) h0`,
//! and rotationally symmetric.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{unit_direction, MinkowskiVector};
use crate::quadrature::{gauss_legendre, QuadratureGrid};

pub const DEFAULT_RHO_MAX: f64 = 0.5;

/// Finite cosine series `Σ c_k cos(kθ)`. Every term is a polynomial in
/// `cos θ`, so the series is smooth on the sphere.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CosineSeries {
    pub coeffs: Vec<f64>,
}

impl CosineSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (k as f64 * theta).cos())
            .sum()
    }

    pub fn d1(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let k = k as f64;
                -c * k * (k * theta).sin()
            })
            .sum()
    }

    pub fn d2(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let k = k as f64;
                -c * k * k * (k * theta).cos()
            })
            .sum()
    }

    /// Round Laplacian `q'' + cot θ q'`, using the pole limit `2 q''` at
    /// `θ ∈ {0, π}`.
    pub fn round_laplacian(&self, theta: f64) -> f64 {
        let s = theta.sin();
        if s.abs() < 1e-8 {
            2.0 * self.d2(theta)
        } else {
            self.d2(theta) + theta.cos() / s * self.d1(theta)
        }
    }

    pub fn max_abs_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AHFamily {
    Hyperbolic,
    AdsSchwarzschild {
        m: f64,
    },
    /// `h_ρ = (1 + ρ^3 ψ(θ)/3 + ρ^4 e4(θ)) h0`.
    PerturbedRound {
        psi: CosineSeries,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        e4: Option<CosineSeries>,
    },
}

/// Conformal factor `φ` of `h_ρ = φ h0` with its ρ- and θ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalJet {
    pub phi: f64,
    pub phi_r: f64,
    pub phi_rr: f64,
    pub phi_t: f64,
    pub phi_tt: f64,
}

impl ConformalJet {
    const FLAT: Self = Self {
        phi: 1.0,
        phi_r: 0.0,
        phi_rr: 0.0,
        phi_t: 0.0,
        phi_tt: 0.0,
    };
}

/// Components of `h_ρ` in `(θ, ϑ)` and their ρ-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarComponents {
    pub h: [f64; 3],
    pub dh: [f64; 3],
}

impl AHFamily {
    pub fn ads_schwarzschild(m: f64) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidFamily(format!("AdS-Schwarzschild mass {m} < 0")));
        }
        Ok(Self::AdsSchwarzschild { m })
    }

    pub fn perturbed_round(psi: CosineSeries, e4: Option<CosineSeries>) -> Self {
        Self::PerturbedRound { psi, e4 }
    }

    pub fn name(&self) -> String {
        match self {
            AHFamily::Hyperbolic => "hyperbolic".into(),
            AHFamily::AdsSchwarzschild { m } => format!("ads_schwarzschild(m={m})"),
            AHFamily::PerturbedRound { psi, .. } => format!("perturbed_round(psi={:?})", psi.coeffs),
        }
    }

    pub fn rho_max(&self) -> f64 {
        DEFAULT_RHO_MAX
    }

    /// Structural checks: finite parameters, pole regularity of ψ and a
    /// positive conformal factor throughout the collar.
    pub fn validate(&self) -> Result<()> {
        match self {
            AHFamily::Hyperbolic => Ok(()),
            AHFamily::AdsSchwarzschild { m } => {
                if !(*m >= 0.0 && m.is_finite()) {
                    return Err(Error::InvalidFamily(format!("mass {m} < 0")));
                }
                // the whole collar must lie outside the horizon
                ads_collar_transform(*m, self.rho_max()).map(|_| ())
            }
            AHFamily::PerturbedRound { psi, e4 } => {
                let all = psi.coeffs.iter().chain(e4.iter().flat_map(|e| e.coeffs.iter()));
                if all.clone().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidFamily("non-finite coefficient".into()));
                }
                for t in [0.0, PI] {
                    if psi.d1(t).abs() > 1e-12 {
                        return Err(Error::InvalidFamily("psi not smooth at the poles".into()));
                    }
                }
                let r = self.rho_max();
                let bound = r.powi(3) / 3.0 * psi.max_abs_bound()
                    + r.powi(4) * e4.as_ref().map_or(0.0, |e| e.max_abs_bound());
                if bound >= 1.0 {
                    return Err(Error::InvalidFamily(
                        "h_rho may fail to be positive definite in the collar".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn check_rho(&self, rho: f64) -> Result<()> {
        if !(rho > 0.0 && rho <= self.rho_max()) {
            return Err(Error::OutsideCollar {
                rho,
                rho_max: self.rho_max(),
            });
        }
        Ok(())
    }

    /// Conformal factor and derivatives at `(ρ, θ)`.
    pub fn conformal_jet(&self, rho: f64, theta: f64) -> Result<ConformalJet> {
        self.check_rho(rho)?;
        match self {
            AHFamily::Hyperbolic => Ok(ConformalJet::FLAT),
            AHFamily::AdsSchwarzschild { m } => ads_jet(*m, rho),
            AHFamily::PerturbedRound { psi, e4 } => {
                let (e, e1, e2) = e4
                    .as_ref()
                    .map_or((0.0, 0.0, 0.0), |e| (e.value(theta), e.d1(theta), e.d2(theta)));
                let p = psi.value(theta);
                let r2 = rho * rho;
                let r3 = r2 * rho;
                let r4 = r3 * rho;
                Ok(ConformalJet {
                    phi: 1.0 + r3 * p / 3.0 + r4 * e,
                    phi_r: r2 * p + 4.0 * r3 * e,
                    phi_rr: 2.0 * rho * p + 12.0 * r2 * e,
                    phi_t: r3 * psi.d1(theta) / 3.0 + r4 * e1,
                    phi_tt: r3 * psi.d2(theta) / 3.0 + r4 * e2,
                })
            }
        }
    }

    /// `h_ρ` and `∂_ρ h_ρ` in `(θ, ϑ)` components `[θθ, θϑ, ϑϑ]`.
    pub fn collar_components(&self, rho: f64, theta: f64) -> Result<CollarComponents> {
        let j = self.conformal_jet(rho, theta)?;
        let s2 = theta.sin().powi(2);
        Ok(CollarComponents {
            h: [j.phi, 0.0, j.phi * s2],
            dh: [j.phi_r, 0.0, j.phi_r * s2],
        })
    }

    /// Remainder `e = h_ρ - h0 - (ρ^3/3) h` as a multiple of `h0`.
    pub fn remainder(&self, rho: f64, theta: f64) -> Result<f64> {
        let j = self.conformal_jet(rho, theta)?;
        let tr = self.aspect_trace_at(theta)?;
        Ok(j.phi - 1.0 - rho.powi(3) * tr / 6.0)
    }

    fn aspect_trace_at(&self, theta: f64) -> Result<f64> {
        Ok(match self {
            AHFamily::Hyperbolic => 0.0,
            AHFamily::AdsSchwarzschild { m } => ads_aspect_trace(*m)?,
            AHFamily::PerturbedRound { psi, .. } => 2.0 * psi.value(theta),
        })
    }
}

/// One collar slice `{ρ} × S^2` sampled on a grid.
#[derive(Debug, Clone)]
pub struct CollarSample {
    pub rho: f64,
    /// `h_ρ` components `[θθ, θϑ, ϑϑ]` per node.
    pub h: Vec<[f64; 3]>,
    /// `g` components `[ρρ, θθ, θϑ, ϑϑ]` per node (`g_{ρθ} = g_{ρϑ} = 0`).
    pub g: Vec<[f64; 4]>,
}

pub fn metric_at(family: &AHFamily, rho: f64, grid: &QuadratureGrid) -> Result<CollarSample> {
    family.check_rho(rho)?;
    let inv = rho.sinh().powi(-2);
    let mut h = Vec::with_capacity(grid.len());
    let mut g = Vec::with_capacity(grid.len());
    for (k, (_, _, theta, _)) in grid.nodes().enumerate() {
        let c = family.collar_components(rho, theta)?;
        if !(c.h[0] > 0.0 && c.h[0] * c.h[2] - c.h[1] * c.h[1] > 0.0) {
            return Err(Error::DegenerateMetric(k));
        }
        h.push(c.h);
        g.push([inv, inv * c.h[0], inv * c.h[1], inv * c.h[2]]);
    }
    Ok(CollarSample { rho, h, g })
}

// ---------------------------------------------------------------------------
// AdS-Schwarzschild: static form V^{-1} dr^2 + r^2 h0 with V = 1 + r^2 - 2m/r.
//
// Matching sinh^{-2}ρ dρ^2 = V^{-1} dr^2 gives d ln tanh(ρ/2) = -dr/√V. The
// constant is fixed by requiring the hyperbolic asymptotics at r -> ∞:
//
//   ln tanh(ρ/2) = -asinh(r) + I(r),
//   I(r) = ∫_0^{1/r} [(1+u^2-2mu^3)^{-1/2} - (1+u^2)^{-1/2}] du/u,
//
// which reduces to r = 1/sinh ρ at m = 0. Then h_ρ = r^2 sinh^2 ρ h0.
// ---------------------------------------------------------------------------

const ADS_QUAD_NODES: usize = 48;

fn ads_potential(m: f64, r: f64) -> f64 {
    1.0 + r * r - 2.0 * m / r
}

/// Largest root of `r^3 + r - 2m`, i.e. the horizon radius (0 for m = 0).
pub fn ads_horizon(m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    let mut r = (2.0 * m).cbrt().max(2.0 * m);
    for _ in 0..200 {
        let f = r * r * r + r - 2.0 * m;
        let d = 3.0 * r * r + 1.0;
        let dr = f / d;
        r -= dr;
        if dr.abs() < 1e-15 * r {
            break;
        }
    }
    r
}

fn ads_correction_integral(m: f64, r: f64, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
    let b = 1.0 / r;
    let (x, w) = nodes;
    x.iter()
        .zip(w)
        .map(|(xi, wi)| {
            let u = 0.5 * b * (xi + 1.0);
            let a = 1.0 + u * u - 2.0 * m * u * u * u;
            let c = 1.0 + u * u;
            let (sa, sc) = (a.sqrt(), c.sqrt());
            // difference of inverse roots without cancellation, divided by u
            let integrand = 2.0 * m * u * u / (sa * sc * (sa + sc));
            0.5 * b * wi * integrand
        })
        .sum()
}

/// Areal radius `r` of the coordinate sphere `{ρ}` of AdS-Schwarzschild with
/// mass `m`, solved by Newton iteration on the collar relation.
pub fn ads_collar_transform(m: f64, rho: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(Error::CollarTransform(format!("negative mass {m}")));
    }
    if !(rho > 0.0) {
        return Err(Error::CollarTransform(format!("rho = {rho} must be positive")));
    }
    let r0 = 1.0 / rho.sinh();
    if m == 0.0 {
        return Ok(r0);
    }
    let nodes = gauss_legendre(ADS_QUAD_NODES);
    let target = (rho / 2.0).tanh().ln();
    let horizon = ads_horizon(m);
    let residual = |r: f64| r.asinh() - ads_correction_integral(m, r, &nodes) + target;

    // residual is increasing in r (derivative 1/√V); bracket from r0 upward
    let mut lo = r0.max(horizon * (1.0 + 1e-12));
    if residual(lo) > 0.0 {
        return Err(Error::CollarTransform(format!(
            "rho = {rho} lies inside the horizon region for m = {m}"
        )));
    }
    let mut hi = lo * 2.0 + 1.0;
    while residual(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::CollarTransform("no root in bracket".into()));
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = residual(r);
        if f.abs() <= 1e-15 * (1.0 + r.asinh().abs()) {
            break;
        }
        if f < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let v = ads_potential(m, r);
        let mut next = r - f * v.sqrt();
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 1e-16 * r {
            r = next;
            break;
        }
        r = next;
    }
    let res = residual(r);
    if !(res.abs() <= 1e-12) {
        return Err(Error::CollarTransform(format!("residual {res:e} after Newton")));
    }
    Ok(r)
}

fn ads_jet(m: f64, rho: f64) -> Result<ConformalJet> {
    let r = ads_collar_transform(m, rho)?;
    let v = ads_potential(m, r);
    let sv = v.sqrt();
    let (sh, ch) = (rho.sinh(), rho.cosh());
    let dv = 2.0 * r + 2.0 * m / (r * r);
    // dr/dρ = -√V / sinh ρ
    let phi = r * r * sh * sh;
    let phi_r = -2.0 * r * sv * sh + r * r * (2.0 * rho).sinh();
    let phi_rr = 2.0 * v + r * dv - 6.0 * r * sv * ch + 2.0 * r * r * (2.0 * rho).cosh();
    Ok(ConformalJet {
        phi,
        phi_r,
        phi_rr,
        phi_t: 0.0,
        phi_tt: 0.0,
    })
}

/// Least-squares fit of `φ(ρ) - 1 = Σ_{k=3}^{7} c_k ρ^k` over `window`.
/// Returns `(tr_{h0} h, relative residual)` with `tr_{h0} h = 6 c_3`.
pub fn ads_aspect_fit(m: f64, window: (f64, f64), samples: usize) -> Result<(f64, f64)> {
    let (a, b) = window;
    if !(0.0 < a && a < b && b <= DEFAULT_RHO_MAX) || samples < 8 {
        return Err(Error::InvalidArgument(format!("bad fit window {window:?}")));
    }
    const POWERS: [i32; 5] = [3, 4, 5, 6, 7];
    let mut design = DMatrix::zeros(samples, POWERS.len());
    let mut rhs = DVector::zeros(samples);
    for i in 0..samples {
        let rho = a + (b - a) * i as f64 / (samples - 1) as f64;
        let r = ads_collar_transform(m, rho)?;
        let phi = r * r * rho.sinh().powi(2);
        let s = rho / b;
        for (k, p) in POWERS.iter().enumerate() {
            design[(i, k)] = s.powi(*p);
        }
        rhs[i] = phi - 1.0;
    }
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::CollarTransform(e.to_string()))?;
    let c3 = coef[0] / b.powi(3);
    let resid = (&design * &coef - &rhs).amax();
    let lead = (c3 * a.powi(3)).abs().max(f64::MIN_POSITIVE);
    Ok((6.0 * c3, resid / lead))
}

/// Default fitting window and sample count for the AdS-Schwarzschild aspect.
pub const ADS_FIT_WINDOW: (f64, f64) = (0.02, 0.1);
pub const ADS_FIT_SAMPLES: usize = 17;

/// `tr_{h0} h` for AdS-Schwarzschild, obtained from the collar fit.
pub fn ads_aspect_trace(m: f64) -> Result<f64> {
    if m == 0.0 {
        return Ok(0.0);
    }
    let (tr, rel) = ads_aspect_fit(m, ADS_FIT_WINDOW, ADS_FIT_SAMPLES)?;
    if rel > 1e-6 {
        return Err(Error::AspectFit(rel));
    }
    Ok(tr)
}

/// Mass aspect tensor `h` sampled on a grid, stored per node.
#[derive(Debug, Clone)]
pub struct MassAspect {
    /// `[h_θθ, h_θϑ, h_ϑϑ]` per node.
    pub components: Vec<[f64; 3]>,
    /// `tr_{h0} h = h_θθ + h_ϑϑ / sin^2 θ` per node.
    pub trace: Vec<f64>,
}

impl MassAspect {
    /// Aspect `(τ/2) h0` with prescribed trace field `τ`.
    pub fn conformal(trace: Vec<f64>, grid: &QuadratureGrid) -> Self {
        let components = grid
            .nodes()
            .zip(&trace)
            .map(|((i, _, _, _), t)| {
                let s2 = grid.sin_theta()[i].powi(2);
                [t / 2.0, 0.0, t / 2.0 * s2]
            })
            .collect();
        Self { components, trace }
    }
}

pub fn mass_aspect(family: &AHFamily, grid: &QuadratureGrid) -> Result<MassAspect> {
    let trace: Vec<f64> = match family {
        AHFamily::Hyperbolic => vec![0.0; grid.len()],
        AHFamily::AdsSchwarzschild { m } => vec![ads_aspect_trace(*m)?; grid.len()],
        AHFamily::PerturbedRound { psi, .. } => grid
            .nodes()
            .map(|(_, _, theta, _)| 2.0 * psi.value(theta))
            .collect(),
    };
    Ok(MassAspect::conformal(trace, grid))
}

/// Mass vector `(1/16π) (∫ x tr h dμ, ∫ tr h dμ)` of a mass aspect.
///
/// The grid should have at least 16 θ-nodes.
pub fn wang_mass(aspect: &MassAspect, grid: &QuadratureGrid) -> MinkowskiVector {
    debug_assert_eq!(aspect.trace.len(), grid.len());
    let mut acc = MinkowskiVector::ZERO;
    for ((i, j, theta, phi), tr) in grid.nodes().zip(&aspect.trace) {
        let x = unit_direction(theta, phi);
        acc += MinkowskiVector::from_spatial(x, 1.0) * (grid.weight(i, j) * tr);
    }
    acc * (1.0 / (16.0 * PI))
}

/// Scalar curvature of the conformal collar metric
/// `g = sinh^{-2}ρ (dρ^2 + φ h0)`.
///
/// Writing `ḡ = dρ^2 + φ h0` and `g = e^{2w} ḡ` with `w = -ln sinh ρ`,
/// `R_g = sinh^2ρ (R_ḡ - 4 Δ_ḡ w - 2 |dw|^2_ḡ)`, where
/// `R_ḡ = 2(1 - Δ_{h0} ln φ / 2)/φ - 2 ∂_ρ(φ_ρ/φ) - (3/2)(φ_ρ/φ)^2` and
/// `Δ_ḡ w = 1/sinh^2ρ - coth ρ φ_ρ/φ`.
pub fn conformal_collar_scalar_curvature(rho: f64, theta: f64, j: &ConformalJet) -> f64 {
    let (sh, ch) = (rho.sinh(), rho.cosh());
    let coth = ch / sh;
    let l = j.phi_r / j.phi;
    let dl = j.phi_rr / j.phi - l * l;
    // Δ_{h0} ln φ, θ-dependence only
    let lt = j.phi_t / j.phi;
    let ltt = j.phi_tt / j.phi - lt * lt;
    let st = theta.sin();
    let lap_log = if st.abs() < 1e-8 {
        2.0 * ltt
    } else {
        ltt + theta.cos() / st * lt
    };
    let r_bar = 2.0 * (1.0 - 0.5 * lap_log) / j.phi - 2.0 * dl - 1.5 * l * l;
    let lap_w = 1.0 / (sh * sh) - coth * l;
    sh * sh * (r_bar - 4.0 * lap_w - 2.0 * coth * coth)
}

pub fn scalar_curvature(family: &AHFamily, rho: f64, theta: f64) -> Result<f64> {
    match family {
        AHFamily::Hyperbolic | AHFamily::AdsSchwarzschild { .. } => {
            family.check_rho(rho)?;
            Ok(-6.0)
        }
        AHFamily::PerturbedRound { .. } => {
            let j = family.conformal_jet(rho, theta)?;
            Ok(conformal_collar_scalar_curvature(rho, theta, &j))
        }
    }
}

/// Samples `|e| / ρ^4` at `samples` log-spaced radii in `[rho_min, rho_max]`
/// and every θ-node; returns the largest ratio and whether it is below `bound`.
pub fn validate_remainder(
    family: &AHFamily,
    grid: &QuadratureGrid,
    (rho_min, rho_max): (f64, f64),
    samples: usize,
    bound: f64,
) -> Result<(f64, bool)> {
    if !(0.0 < rho_min && rho_min < rho_max) || samples < 2 {
        return Err(Error::InvalidArgument("bad remainder sampling range".into()));
    }
    let mut worst = 0.0_f64;
    let (la, lb) = (rho_min.ln(), rho_max.ln());
    for k in 0..samples {
        let rho = (la + (lb - la) * k as f64 / (samples - 1) as f64).exp();
        for &theta in grid.theta() {
            let e = family.remainder(rho, theta)?;
            worst = worst.max(e.abs() / rho.powi(4));
        }
    }
    Ok((worst, worst <= bound))
}
