//! Isometric embedding of rotationally symmetric sphere metrics into the
//! hyperboloid model `H^3 ⊂ R^{3,1}`.
//!
//! The surface is `X(θ, ϑ) = (f cos ϑ, f sin ϑ, u, w)` with `f = √G`,
//! `w = √(1 + f^2 + u^2)`. Matching `|X_θ|^2 = E` is a quadratic in `u_θ`;
//! in the variable `x = cos θ` and with `f = sin θ · b(x)` the chosen root is
//!
//! `u_x = (σ w √D̃ - b f_θ u) / (1 + f^2)`,
//! `D̃ = (E(1 + f^2) - f_θ^2) / sin^2 θ`,
//!
//! which is regular at both poles. `σ = +1` puts the north pole (θ = 0) at
//! positive `x3`, matching [`embed_round`].

use std::io::Write;

use crate::error::{Error, Result};
use crate::lorentz::{unit_direction, LorentzMap, MinkowskiVector};
use crate::ode::{dopri5, Tolerance};
use crate::quadrature::QuadratureGrid;
use crate::sphere_geometry::{gauss_curvature_revolution, SurfaceSample};

/// Largest tolerated `|A - B| / A` at the poles.
const POLE_TOL: f64 = 1e-6;
/// Accepted profiles must reproduce the metric to this absolute tolerance.
pub const ISOMETRY_TOL: f64 = 1e-6;
pub const HYPERBOLOID_TOL: f64 = 1e-9;
/// Below this parallel curvature the meridian curvature is taken from the
/// second derivatives instead of the Gauss equation.
const GAUSS_MIN_KAPPA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Meridian profile of an embedded surface of revolution, sampled at the
/// θ-nodes of the grid.
#[derive(Debug, Clone)]
pub struct RevolutionProfile {
    pub theta: Vec<f64>,
    pub f: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    /// `du/dx` from the embedding equation.
    pub u_x: Vec<f64>,
    /// `d^2u/dx^2` from differentiating the embedding equation.
    pub u_xx: Vec<f64>,
    pub branch: Branch,
    /// Target metric rows.
    pub e_target: Vec<f64>,
    pub g_target: Vec<f64>,
    /// `max|Ẽ - E| + max|G̃ - G|`, with `Ẽ, G̃` recomputed from `(f, u, w)`
    /// by spectral differentiation.
    pub isometry_residual: f64,
    /// `max |<<X, X>> + 1|`.
    pub hyperboloid_residual: f64,
    // smooth metric data used for the curvature
    b: Vec<f64>,
    b_x: Vec<f64>,
    b_xx: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EmbeddedSurface {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Position vector per node.
    pub x: Vec<MinkowskiVector>,
    /// Inward unit normal per node, tangent to `H^3`.
    pub normal: Vec<MinkowskiVector>,
    /// Mean curvature in `H^3` per node, `2 coth R` on geodesic spheres.
    pub h0: Vec<f64>,
    pub isometry_residual: f64,
    pub hyperboloid_residual: f64,
    /// `ε` of the source surface (0 when built directly).
    pub source_eps: f64,
    pub profile: Option<RevolutionProfile>,
}

impl EmbeddedSurface {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Smallest and largest geodesic distance from the origin `(0,0,0,1)`.
    pub fn radii(&self) -> (f64, f64) {
        self.x.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), p| {
            let r = p.t.max(1.0).acosh();
            (lo.min(r), hi.max(r))
        })
    }

    pub fn check_grid(&self, grid: &QuadratureGrid) -> Result<()> {
        if self.n_theta != grid.n_theta() || self.n_phi != grid.n_phi() {
            return Err(Error::GridMismatch(format!(
                "embedding is {}x{}, grid is {}x{}",
                self.n_theta,
                self.n_phi,
                grid.n_theta(),
                grid.n_phi()
            )));
        }
        Ok(())
    }

    /// Writes `theta,f,u,w,H0` rows for external plotting.
    pub fn write_profile_csv<W: Write>(&self, out: W) -> Result<()> {
        let profile = self
            .profile
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("embedding has no revolution profile".into()))?;
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["theta", "f", "u", "w", "H0"])?;
        for i in 0..profile.theta.len() {
            let h0 = self.h0[i * self.n_phi];
            wr.write_record(&[
                format!("{:.17e}", profile.theta[i]),
                format!("{:.17e}", profile.f[i]),
                format!("{:.17e}", profile.u[i]),
                format!("{:.17e}", profile.w[i]),
                format!("{:.17e}", h0),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Geodesic sphere of radius `r` centred at the origin.
pub fn embed_round(r: f64, grid: &QuadratureGrid) -> Result<EmbeddedSurface> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
    }
    let (sh, ch) = (r.sinh(), r.cosh());
    let mut x = Vec::with_capacity(grid.len());
    let mut normal = Vec::with_capacity(grid.len());
    for (_, _, theta, phi) in grid.nodes() {
        let w = unit_direction(theta, phi);
        x.push(MinkowskiVector::from_spatial([sh * w[0], sh * w[1], sh * w[2]], ch));
        normal.push(-MinkowskiVector::from_spatial([ch * w[0], ch * w[1], ch * w[2]], sh));
    }
    Ok(EmbeddedSurface {
        n_theta: grid.n_theta(),
        n_phi: grid.n_phi(),
        x,
        normal,
        h0: vec![2.0 * ch / sh; grid.len()],
        isometry_residual: 0.0,
        hyperboloid_residual: 0.0,
        source_eps: 0.0,
        profile: None,
    })
}

struct MetricData<'a> {
    grid: &'a QuadratureGrid,
    b: Vec<f64>,
    b_x: Vec<f64>,
    b_xx: Vec<f64>,
    dt: Vec<f64>,
    dt_x: Vec<f64>,
}

impl<'a> MetricData<'a> {
    fn new(e_rows: &[f64], g_rows: &[f64], grid: &'a QuadratureGrid) -> Result<Self> {
        let x = grid.x();
        let a = e_rows.to_vec();
        let bsq: Vec<f64> = g_rows.iter().zip(x).map(|(g, x)| g / (1.0 - x * x)).collect();
        let bary = grid.spectral();
        for pole in [1.0, -1.0] {
            let ap = bary.interpolate(&a, pole);
            let bp = bary.interpolate(&bsq, pole);
            if ((ap - bp) / ap).abs() > POLE_TOL {
                return Err(Error::PoleRegularity(format!(
                    "E = {ap} but G/sin^2 = {bp} at x = {pole}"
                )));
            }
        }
        let b: Vec<f64> = bsq.iter().map(|v| v.sqrt()).collect();
        let (b_x, b_xx) = grid.smooth_dx2(&b);
        let bsq_x = grid.smooth_dx(&bsq);
        // D̃ = (A - B)/(1 - x^2) + B + AB + x B_x - (1 - x^2) B_x^2 / (4B)
        let dt: Vec<f64> = (0..x.len())
            .map(|i| {
                let om = 1.0 - x[i] * x[i];
                (a[i] - bsq[i]) / om + bsq[i] + a[i] * bsq[i] + x[i] * bsq_x[i]
                    - om * bsq_x[i] * bsq_x[i] / (4.0 * bsq[i])
            })
            .collect();
        for (i, d) in dt.iter().enumerate() {
            if *d < 0.0 {
                return Err(Error::NegativeDiscriminant {
                    theta: grid.theta()[i],
                    value: *d,
                });
            }
        }
        // also probe between nodes
        let probes = 4 * x.len();
        for k in 0..=probes {
            let xp = 1.0 - 2.0 * k as f64 / probes as f64;
            let d = bary.interpolate(&dt, xp);
            if d < 0.0 {
                return Err(Error::NegativeDiscriminant {
                    theta: xp.acos(),
                    value: d,
                });
            }
        }
        let dt_x = grid.smooth_dx(&dt);
        Ok(Self {
            grid,
            b,
            b_x,
            b_xx,
            dt,
            dt_x,
        })
    }

    fn at(&self, x: f64) -> (f64, f64, f64) {
        let bary = self.grid.spectral();
        (
            bary.interpolate(&self.b, x),
            bary.interpolate(&self.b_x, x),
            bary.interpolate(&self.dt, x).max(0.0),
        )
    }

    fn rhs(&self, x: f64, u: f64, sigma: f64) -> f64 {
        let (b, b_x, dt) = self.at(x);
        rhs_from(x, u, sigma, b, b_x, dt)
    }
}

fn rhs_from(x: f64, u: f64, sigma: f64, b: f64, b_x: f64, dt: f64) -> f64 {
    let om = (1.0 - x * x).max(0.0);
    let f2 = om * b * b;
    let f_theta = x * b - om * b_x;
    let w = (1.0 + f2 + u * u).sqrt();
    (sigma * w * dt.sqrt() - b * f_theta * u) / (1.0 + f2)
}

fn integrate_profile(data: &MetricData<'_>, u0: f64, sigma: f64) -> Result<Vec<f64>> {
    let tol = Tolerance {
        rtol: 1e-13,
        atol: 1e-13 * (1.0 + u0.abs()),
        ..Tolerance::default()
    };
    let ys = dopri5(
        |x, y| vec![data.rhs(x, y[0], sigma)],
        1.0,
        &[u0],
        data.grid.x(),
        tol,
    )?;
    Ok(ys.into_iter().map(|y| y[0]).collect())
}

/// `∫_0^π u f dθ = ∫_{-1}^{1} u b dx`.
fn centering_moment(data: &MetricData<'_>, u: &[f64]) -> f64 {
    u.iter()
        .zip(&data.b)
        .zip(data.grid.theta_weights())
        .map(|((u, b), w)| u * b * w)
        .sum()
}

fn solve_centered(data: &MetricData<'_>, sigma: f64) -> Result<(f64, Vec<f64>)> {
    let scale = data.b.iter().fold(0.0_f64, |m, v| m.max(*v));
    let moment = |u0: f64| -> Result<(f64, Vec<f64>)> {
        let u = integrate_profile(data, u0, sigma)?;
        Ok((centering_moment(data, &u), u))
    };
    // the moment increases with u0 (axial boosts); bracket around the
    // centred round value σ b(1)
    let guess = sigma * data.grid.spectral().interpolate(&data.b, 1.0);
    let step0 = 0.1 * (1.0 + scale);
    let (m_guess, u_guess) = moment(guess)?;
    if m_guess == 0.0 {
        return Ok((guess, u_guess));
    }
    let dir = if m_guess > 0.0 { -1.0 } else { 1.0 };
    let (mut a, mut fa) = (guess, m_guess);
    let mut step = step0;
    let (mut b, mut fb);
    loop {
        b = a + dir * step;
        fb = moment(b)?.0;
        if fb.signum() != fa.signum() {
            break;
        }
        a = b;
        fa = fb;
        step *= 2.0;
        if step > 1e6 * (1.0 + scale) {
            return Err(Error::RootFinding("cannot bracket the centring offset".into()));
        }
    }
    // Illinois false position
    let tol = 1e-14 * (1.0 + scale) * (1.0 + scale);
    let mut side = 0;
    let mut best = (a, fa);
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let (fc, _) = moment(c)?;
        if fc.abs() < best.1.abs() {
            best = (c, fc);
        }
        if fc.abs() <= tol || (b - a).abs() <= 1e-15 * (1.0 + c.abs()) {
            break;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
    }
    let (u0, _) = best;
    let (_, u) = moment(u0)?;
    Ok((u0, u))
}

/// Embeds `E(θ) dθ^2 + G(θ) dϑ^2` (θ-node rows) as a surface of revolution.
///
/// The axial offset is fixed by `∫ u f dθ = 0`. If the requested branch
/// fails, the other one is tried.
pub fn embed_revolution(
    e_rows: &[f64],
    g_rows: &[f64],
    branch: Branch,
    grid: &QuadratureGrid,
) -> Result<RevolutionProfile> {
    let nt = grid.n_theta();
    if e_rows.len() != nt || g_rows.len() != nt {
        return Err(Error::GridMismatch("metric rows do not match the grid".into()));
    }
    if e_rows.iter().chain(g_rows).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateMetric(0));
    }
    let data = MetricData::new(e_rows, g_rows, grid)?;
    let (branch, u) = match solve_centered(&data, branch.sign()) {
        Ok((_, u)) => (branch, u),
        Err(first) => match solve_centered(&data, branch.flip().sign()) {
            Ok((_, u)) => (branch.flip(), u),
            Err(_) => return Err(first),
        },
    };
    let sigma = branch.sign();
    let x = grid.x();
    let s = grid.sin_theta();

    let f: Vec<f64> = (0..nt).map(|i| s[i] * data.b[i]).collect();
    let w: Vec<f64> = (0..nt).map(|i| (1.0 + f[i] * f[i] + u[i] * u[i]).sqrt()).collect();
    let u_x: Vec<f64> = (0..nt)
        .map(|i| rhs_from(x[i], u[i], sigma, data.b[i], data.b_x[i], data.dt[i]))
        .collect();
    let u_xx: Vec<f64> = (0..nt)
        .map(|i| {
            let (xi, ui, uxi) = (x[i], u[i], u_x[i]);
            let (b, bx, bxx) = (data.b[i], data.b_x[i], data.b_xx[i]);
            let om = 1.0 - xi * xi;
            let f2 = om * b * b;
            let f2_x = -2.0 * xi * b * b + 2.0 * om * b * bx;
            let ft = xi * b - om * bx;
            let ft_x = b + 3.0 * xi * bx - om * bxx;
            let wi = (1.0 + f2 + ui * ui).sqrt();
            let w_x = (f2_x + 2.0 * ui * uxi) / (2.0 * wi);
            let sd = data.dt[i].max(0.0).sqrt();
            let sd_x = if sd > 0.0 { data.dt_x[i] / (2.0 * sd) } else { 0.0 };
            let num = sigma * wi * sd - b * ft * ui;
            let num_x = sigma * (w_x * sd + wi * sd_x) - (bx * ft * ui + b * ft_x * ui + b * ft * uxi);
            let den = 1.0 + f2;
            (num_x * den - num * f2_x) / (den * den)
        })
        .collect();

    // independent check: recompute E, G from the sampled profile
    let u_x_spec = grid.dx(&u);
    let mut e_err = 0.0_f64;
    let mut g_err = 0.0_f64;
    let mut hyp = 0.0_f64;
    for i in 0..nt {
        let f_t = x[i] * data.b[i] - s[i] * s[i] * data.b_x[i];
        let u_t = -s[i] * u_x_spec[i];
        let w_t = (f[i] * f_t + u[i] * u_t) / w[i];
        let e_re = f_t * f_t + u_t * u_t - w_t * w_t;
        e_err = e_err.max((e_re - e_rows[i]).abs());
        g_err = g_err.max((f[i] * f[i] - g_rows[i]).abs());
        hyp = hyp.max((f[i] * f[i] + u[i] * u[i] - w[i] * w[i] + 1.0).abs());
    }

    Ok(RevolutionProfile {
        theta: grid.theta().to_vec(),
        f,
        u,
        w,
        u_x,
        u_xx,
        branch,
        e_target: e_rows.to_vec(),
        g_target: g_rows.to_vec(),
        isometry_residual: e_err + g_err,
        hyperboloid_residual: hyp,
        b: data.b,
        b_x: data.b_x,
        b_xx: data.b_xx,
    })
}

/// Mean curvature `κ1 + κ2` of the profile in `H^3` and the inward unit
/// normal `(n_f, n_u, n_w)` of the meridian, per θ-node.
///
/// The meridian curvature comes from the Gauss equation
/// `κ_meridian κ_parallel = K + 1` whenever `|κ_parallel|` stays away from
/// zero; this needs only first derivatives of the profile, and on nearly
/// round spheres the error of `κ_parallel` cancels to first order.
///
/// `II(Y, Z) = <<∂_Y ∂_Z X, N>>` with `N` tangent to the hyperboloid; the
/// normal is oriented towards the axis where the profile is widest, which
/// makes geodesic spheres come out at `+2 coth R`.
pub fn mean_curvature_h0(profile: &RevolutionProfile, grid: &QuadratureGrid) -> Result<(Vec<f64>, Vec<[f64; 3]>)> {
    let nt = profile.theta.len();
    if nt != grid.n_theta() {
        return Err(Error::GridMismatch("profile does not match grid".into()));
    }
    let x = grid.x();
    let s = grid.sin_theta();
    let mut n_raw = Vec::with_capacity(nt);
    let mut curv = Vec::with_capacity(nt);
    for i in 0..nt {
        let (xi, si) = (x[i], s[i]);
        let (b, bx, bxx) = (profile.b[i], profile.b_x[i], profile.b_xx[i]);
        let (f, u, w) = (profile.f[i], profile.u[i], profile.w[i]);
        let f_t = xi * b - si * si * bx;
        let f_tt = -si * (b + 3.0 * xi * bx - si * si * bxx);
        let u_t = -si * profile.u_x[i];
        let u_tt = si * si * profile.u_xx[i] - xi * profile.u_x[i];
        let w_t = (f * f_t + u * u_t) / w;
        let w_tt = (f_t * f_t + f * f_tt + u_t * u_t + u * u_tt - w_t * w_t) / w;
        // Lorentz cross product of X and X_θ inside the meridian 3-space
        let nf = u * w_t - w * u_t;
        let nu = w * f_t - f * w_t;
        let nw = -(f * u_t - u * f_t);
        let nn = nf * nf + nu * nu - nw * nw;
        if !(nn > 0.0) {
            return Err(Error::Degenerate(format!("tangent plane degenerate at node {i}")));
        }
        let inv = 1.0 / nn.sqrt();
        let n = [nf * inv, nu * inv, nw * inv];
        let e = f_t * f_t + u_t * u_t - w_t * w_t;
        n_raw.push(n);
        curv.push((e, [f_tt, u_tt, w_tt]));
    }
    let widest = (0..nt)
        .max_by(|&a, &b| profile.f[a].total_cmp(&profile.f[b]))
        .unwrap_or(0);
    let orient = if n_raw[widest][0] < 0.0 { 1.0 } else { -1.0 };
    let normals: Vec<[f64; 3]> = n_raw.iter().map(|n| [orient * n[0], orient * n[1], orient * n[2]]).collect();
    let kappa_parallel: Vec<f64> = normals.iter().zip(&profile.f).map(|(n, f)| -n[0] / f).collect();
    let k = gauss_curvature_revolution(&profile.e_target, &profile.g_target, grid);
    let use_gauss = kappa_parallel.iter().all(|kp| kp.abs() >= GAUSS_MIN_KAPPA);
    let h0 = normals
        .iter()
        .zip(&curv)
        .zip(&kappa_parallel)
        .zip(&k)
        .map(|(((n, (e, tt)), kp), k)| {
            if use_gauss {
                // Gauss equation in H^3: κ_meridian κ_parallel = K + 1
                kp + (k + 1.0) / kp
            } else {
                let l = tt[0] * n[0] + tt[1] * n[1] - tt[2] * n[2];
                kp + l / e
            }
        })
        .collect();
    Ok((h0, normals))
}

/// Embeds a rotationally symmetric surface sample into `H^3`.
pub fn embed_surface(surface: &SurfaceSample, branch: Branch, grid: &QuadratureGrid) -> Result<EmbeddedSurface> {
    if !surface.is_revolution() {
        return Err(Error::NotRevolution);
    }
    if surface.n_theta != grid.n_theta() || surface.n_phi != grid.n_phi() {
        return Err(Error::GridMismatch("surface does not match grid".into()));
    }
    let e_rows = surface.row(&surface.e);
    let g_rows = surface.row(&surface.g);
    let profile = embed_revolution(&e_rows, &g_rows, branch, grid)?;
    let (h0_rows, n_rows) = mean_curvature_h0(&profile, grid)?;
    let mut x = Vec::with_capacity(grid.len());
    let mut normal = Vec::with_capacity(grid.len());
    let mut h0 = Vec::with_capacity(grid.len());
    for (i, _, _, phi) in grid.nodes() {
        let (sp, cp) = phi.sin_cos();
        let f = profile.f[i];
        x.push(MinkowskiVector::new(f * cp, f * sp, profile.u[i], profile.w[i]));
        let n = n_rows[i];
        normal.push(MinkowskiVector::new(n[0] * cp, n[0] * sp, n[1], n[2]));
        h0.push(h0_rows[i]);
    }
    Ok(EmbeddedSurface {
        n_theta: grid.n_theta(),
        n_phi: grid.n_phi(),
        x,
        normal,
        h0,
        isometry_residual: profile.isometry_residual,
        hyperboloid_residual: profile.hyperboloid_residual,
        source_eps: surface.eps,
        profile: Some(profile),
    })
}

/// Applies an ambient isometry. Positions and normals move, `H0` does not.
pub fn boost_surface(map: &LorentzMap, surface: &EmbeddedSurface) -> Result<EmbeddedSurface> {
    let checked = LorentzMap::new(*map.matrix())?;
    Ok(EmbeddedSurface {
        x: surface.x.iter().map(|p| checked.apply(*p)).collect(),
        normal: surface.normal.iter().map(|n| checked.apply(*n)).collect(),
        profile: None,
        ..surface.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ah_metric::{AHFamily, CosineSeries};
    use crate::sphere_geometry::coordinate_sphere;

    fn grid() -> QuadratureGrid {
        QuadratureGrid::new(64, 4).unwrap()
    }

    fn round_rows(r: f64, grid: &QuadratureGrid) -> (Vec<f64>, Vec<f64>) {
        let s2 = r.sinh().powi(2);
        let e = vec![s2; grid.n_theta()];
        let g = grid.theta().iter().map(|t| s2 * t.sin().powi(2)).collect();
        (e, g)
    }

    #[test]
    fn round_embedding_closed_form() {
        let g = grid();
        let r = 1.0_f64;
        let s = embed_round(r, &g).unwrap();
        assert!((s.h0[0] - 2.0 * r.cosh() / r.sinh()).abs() < 1e-15);
        assert!((s.h0[0] - 2.626_070_570_998_663).abs() < 1e-12, "{}", s.h0[0]);
        for p in &s.x {
            assert!((p.norm_sq() + 1.0).abs() < 1e-13);
        }
        // sinh R = 1 / sinh ε gives 2 coth R = 2 cosh ε
        let eps = 0.3_f64;
        let r = (1.0 / eps.sinh()).asinh();
        let s = embed_round(r, &g).unwrap();
        assert!((s.h0[0] - 2.0 * eps.cosh()).abs() < 1e-13);
    }

    #[test]
    fn revolution_round_trip_matches_round() {
        let g = grid();
        for r in [0.3, 1.0, 2.0, 4.0] {
            let (e, gg) = round_rows(r, &g);
            let p = embed_revolution(&e, &gg, Branch::Plus, &g).unwrap();
            let emb = embed_round(r, &g).unwrap();
            for i in 0..g.n_theta() {
                let k = g.index(i, 0);
                assert!((p.f[i] - emb.x[k].x1).abs() < 1e-8, "r={r} f");
                assert!((p.u[i] - emb.x[k].x3).abs() < 1e-8, "r={r} u: {} vs {}", p.u[i], emb.x[k].x3);
                assert!((p.w[i] - emb.x[k].t).abs() < 1e-8, "r={r} w");
            }
            assert!(p.isometry_residual < 1e-6, "r={r}: {:e}", p.isometry_residual);
            assert!(p.hyperboloid_residual < 1e-9);
            let (h0, _) = mean_curvature_h0(&p, &g).unwrap();
            for h in h0 {
                assert!((h - 2.0 / r.tanh()).abs() < 1e-9, "r={r}: {h}");
            }
        }
    }

    #[test]
    fn minus_branch_is_mirror_image() {
        let g = grid();
        let (e, gg) = round_rows(1.2, &g);
        let p = embed_revolution(&e, &gg, Branch::Minus, &g).unwrap();
        assert_eq!(p.branch, Branch::Minus);
        let q = embed_revolution(&e, &gg, Branch::Plus, &g).unwrap();
        for (a, b) in p.u.iter().zip(&q.u) {
            assert!((a + b).abs() < 1e-8);
        }
        let (h0, _) = mean_curvature_h0(&p, &g).unwrap();
        assert!(h0.iter().all(|h| (h - 2.0 / 1.2_f64.tanh()).abs() < 1e-9));
    }

    #[test]
    fn hyperbolic_sphere_reembeds_with_same_curvature() {
        let g = grid();
        for eps in [0.2, 0.05, 0.02] {
            let s = coordinate_sphere(&AHFamily::Hyperbolic, eps, &g).unwrap();
            let emb = embed_surface(&s, Branch::Plus, &g).unwrap();
            for (a, b) in emb.h0.iter().zip(&s.h) {
                assert!((a - b).abs() < 1e-8, "eps={eps}: {a} vs {b}");
            }
            assert!(emb.isometry_residual < 1e-6, "{:e}", emb.isometry_residual);
        }
    }

    #[test]
    fn ads_sphere_is_geodesic_sphere() {
        let g = grid();
        let fam = AHFamily::AdsSchwarzschild { m: 1.0 };
        let s = coordinate_sphere(&fam, 0.1, &g).unwrap();
        let emb = embed_surface(&s, Branch::Plus, &g).unwrap();
        // sinh R = sqrt(G(π/2)) for the round intrinsic metric
        let r = s.row(&s.e)[0].sqrt().asinh();
        let round = embed_round(r, &g).unwrap();
        for (a, b) in emb.x.iter().zip(&round.x) {
            assert!((*a - *b).max_abs() < 1e-8);
        }
        for h in &emb.h0 {
            assert!((h - round.h0[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbed_embedding_residuals() {
        let g = grid();
        let fam = AHFamily::perturbed_round(CosineSeries::new(vec![0.0, 0.1]), None);
        let s = coordinate_sphere(&fam, 0.1, &g).unwrap();
        let emb = embed_surface(&s, Branch::Plus, &g).unwrap();
        assert!(emb.isometry_residual <= 1e-6, "{:e}", emb.isometry_residual);
        assert!(emb.hyperboloid_residual <= 1e-9);
        for p in &emb.x {
            assert!((p.norm_sq() + 1.0).abs() <= 1e-9);
        }
        for (p, n) in emb.x.iter().zip(&emb.normal) {
            assert!(p.inner(*n).abs() < 1e-9);
            assert!((n.norm_sq() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_irregular_and_non_realizable_metrics() {
        let g = grid();
        let (mut e, gg) = round_rows(1.0, &g);
        // E != G/sin^2 at the poles
        e.iter_mut().for_each(|v| *v *= 1.5);
        assert!(matches!(
            embed_revolution(&e, &gg, Branch::Plus, &g),
            Err(Error::PoleRegularity(_))
        ));
        // a long thin spindle whose meridian is too short to reach around
        let e: Vec<f64> = g.x().iter().map(|x| 0.01 + 0.0 * x).collect();
        let gg: Vec<f64> = g.x().iter().map(|x| 0.01 * 40.0 * (1.0 - x * x)).collect();
        assert!(embed_revolution(&e, &gg, Branch::Plus, &g).is_err());
    }

    #[test]
    fn boost_preserves_curvature_and_constraint() {
        let g = grid();
        let emb = embed_round(1.5, &g).unwrap();
        let b = LorentzMap::boost(0, 0.3);
        let moved = boost_surface(&b, &emb).unwrap();
        for (a, c) in emb.h0.iter().zip(&moved.h0) {
            assert!((a - c).abs() < 1e-12);
        }
        for p in &moved.x {
            assert!((p.norm_sq() + 1.0).abs() < 1e-12);
        }
        let same = boost_surface(&LorentzMap::identity(), &emb).unwrap();
        assert_eq!(same.x, emb.x);
    }

    #[test]
    fn profile_csv_has_header_and_rows() {
        let g = QuadratureGrid::new(16, 4).unwrap();
        let s = coordinate_sphere(&AHFamily::Hyperbolic, 0.3, &g).unwrap();
        let emb = embed_surface(&s, Branch::Plus, &g).unwrap();
        let mut buf = Vec::new();
        emb.write_profile_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("theta,f,u,w,H0"));
        assert_eq!(lines.count(), 16);
    }
}
