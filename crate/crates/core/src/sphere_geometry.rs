//! Induced geometry of coordinate spheres `Σ_ε = {ρ = ε}` and integration on
//! them.
//!
//! Surfaces are rotationally symmetric, so every θ-derivative is taken
//! spectrally in `x = cos θ` on the Gauss-Legendre nodes, and ϑ is handled
//! by Fourier modes. Metric coefficients `E dθ^2 + 2F dθ dϑ + G dϑ^2` are in
//! the `(θ, ϑ)` chart; internally `A = E` and `B = G / sin^2 θ` are the
//! smooth functions of `x` that carry the metric.

use crate::ah_metric::AHFamily;
use crate::error::{Error, Result};
use crate::lorentz::MinkowskiVector;
use crate::quadrature::QuadratureGrid;

/// `τ_K` of [`embeddability_check`].
pub const EMBEDDABILITY_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub eps: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `sqrt(EG - F^2)` per node.
    pub area_element: Vec<f64>,
    /// Mean curvature `κ1 + κ2`, positive on geodesic spheres.
    pub h: Vec<f64>,
    /// Gauss curvature.
    pub k: Vec<f64>,
}

impl SurfaceSample {
    /// Surface of revolution `E(θ) dθ^2 + G(θ) dϑ^2` with mean curvature
    /// `H(θ)`, all given per θ-node. Gauss curvature comes from Brioschi.
    pub fn from_revolution(
        eps: f64,
        e_rows: &[f64],
        g_rows: &[f64],
        h_rows: &[f64],
        grid: &QuadratureGrid,
    ) -> Result<Self> {
        let nt = grid.n_theta();
        if e_rows.len() != nt || g_rows.len() != nt || h_rows.len() != nt {
            return Err(Error::GridMismatch(format!(
                "expected {nt} θ-rows, got {}/{}/{}",
                e_rows.len(),
                g_rows.len(),
                h_rows.len()
            )));
        }
        for (i, (e, g)) in e_rows.iter().zip(g_rows).enumerate() {
            if !(*e > 0.0 && *g > 0.0 && e.is_finite() && g.is_finite()) {
                return Err(Error::DegenerateMetric(grid.index(i, 0)));
            }
        }
        let k_rows = gauss_curvature_revolution(e_rows, g_rows, grid);
        let np = grid.n_phi();
        let spread = |rows: &[f64]| -> Vec<f64> {
            rows.iter().flat_map(|v| std::iter::repeat(*v).take(np)).collect()
        };
        let area: Vec<f64> = e_rows.iter().zip(g_rows).map(|(e, g)| (e * g).sqrt()).collect();
        Ok(Self {
            eps,
            n_theta: nt,
            n_phi: np,
            e: spread(e_rows),
            f: vec![0.0; nt * np],
            g: spread(g_rows),
            area_element: spread(&area),
            h: spread(h_rows),
            k: spread(&k_rows),
        })
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    pub fn check_grid(&self, grid: &QuadratureGrid) -> Result<()> {
        if self.n_theta != grid.n_theta() || self.n_phi != grid.n_phi() {
            return Err(Error::GridMismatch(format!(
                "surface is {}x{}, grid is {}x{}",
                self.n_theta,
                self.n_phi,
                grid.n_theta(),
                grid.n_phi()
            )));
        }
        Ok(())
    }

    /// Values on the first meridian (`ϑ = 0`), one per θ-node.
    pub fn row(&self, field: &[f64]) -> Vec<f64> {
        field.iter().step_by(self.n_phi).copied().collect()
    }

    /// True if `F = 0` and nothing depends on ϑ.
    pub fn is_revolution(&self) -> bool {
        if self.f.iter().any(|v| *v != 0.0) {
            return false;
        }
        self.e
            .chunks(self.n_phi)
            .zip(self.g.chunks(self.n_phi))
            .all(|(e, g)| e.iter().all(|v| *v == e[0]) && g.iter().all(|v| *v == g[0]))
    }

    pub fn area(&self, grid: &QuadratureGrid) -> Result<f64> {
        integrate_scalar(self, &vec![1.0; self.len()], grid)
    }

    pub fn min_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_k(&self) -> f64 {
        self.k.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_k(&self) -> f64 {
        self.k.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Gauss curvature of `E(θ) dθ^2 + G(θ) dϑ^2` by the Brioschi formula
/// written in the chart `(x = cos θ, ϑ)`:
/// `K = -1/(2√(ẼG)) ∂_x(G_x / √(ẼG))`, `Ẽ = E / (1 - x^2)`.
pub fn gauss_curvature_revolution(e_rows: &[f64], g_rows: &[f64], grid: &QuadratureGrid) -> Vec<f64> {
    let x = grid.x();
    let root: Vec<f64> = e_rows
        .iter()
        .zip(g_rows)
        .zip(x)
        .map(|((e, g), x)| (e / (1.0 - x * x) * g).sqrt())
        .collect();
    let g_x = grid.smooth_dx(g_rows);
    let q: Vec<f64> = g_x.iter().zip(&root).map(|(a, b)| a / b).collect();
    let q_x = grid.smooth_dx(&q);
    q_x.iter().zip(&root).map(|(d, r)| -d / (2.0 * r)).collect()
}

/// Coordinate sphere `{ρ = ε}` of `family`.
///
/// With `γ = sinh^{-2}ε h_ε` the induced metric and the unit normal
/// `sinh ρ ∂_ρ` pointing away from infinity, `H = -(1/2) sinh ε tr(γ^{-1} ∂_ρ γ)`,
/// which is `2 cosh ε` on the hyperbolic background.
pub fn coordinate_sphere(family: &AHFamily, eps: f64, grid: &QuadratureGrid) -> Result<SurfaceSample> {
    if !(eps > 0.0 && eps <= family.rho_max()) {
        return Err(Error::OutsideCollar {
            rho: eps,
            rho_max: family.rho_max(),
        });
    }
    let (sh, ch) = (eps.sinh(), eps.cosh());
    let inv = 1.0 / (sh * sh);
    let nt = grid.n_theta();
    let mut e_rows = Vec::with_capacity(nt);
    let mut g_rows = Vec::with_capacity(nt);
    let mut h_rows = Vec::with_capacity(nt);
    for (i, &theta) in grid.theta().iter().enumerate() {
        let c = family.collar_components(eps, theta)?;
        if c.h[1] != 0.0 {
            return Err(Error::NotRevolution);
        }
        let gam = [inv * c.h[0], inv * c.h[1], inv * c.h[2]];
        // ∂_ρ(sinh^{-2}ρ h) = sinh^{-2}ρ (∂_ρ h - 2 coth ρ h)
        let coth = ch / sh;
        let dgam: Vec<f64> = (0..3).map(|k| inv * (c.dh[k] - 2.0 * coth * c.h[k])).collect();
        let det = gam[0] * gam[2] - gam[1] * gam[1];
        if !(gam[0] > 0.0 && det > 0.0) {
            return Err(Error::DegenerateMetric(grid.index(i, 0)));
        }
        let tr = (gam[2] * dgam[0] - 2.0 * gam[1] * dgam[1] + gam[0] * dgam[2]) / det;
        e_rows.push(gam[0]);
        g_rows.push(gam[2]);
        h_rows.push(-0.5 * sh * tr);
    }
    SurfaceSample::from_revolution(eps, &e_rows, &g_rows, &h_rows, grid)
}

/// `∫_Σ field dΣ` with node weights `w_ij sqrt(EG - F^2) / sin θ`.
pub fn integrate_scalar(surface: &SurfaceSample, field: &[f64], grid: &QuadratureGrid) -> Result<f64> {
    surface.check_grid(grid)?;
    if field.len() != surface.len() {
        return Err(Error::GridMismatch(format!(
            "field has {} values, surface {}",
            field.len(),
            surface.len()
        )));
    }
    let mut s = 0.0;
    for (i, j, _, _) in grid.nodes() {
        let k = grid.index(i, j);
        let density = surface.area_element[k] / grid.sin_theta()[i];
        s += grid.weight(i, j) * field[k] * density;
    }
    Ok(s)
}

pub fn integrate_vector(
    surface: &SurfaceSample,
    field: &[MinkowskiVector],
    grid: &QuadratureGrid,
) -> Result<MinkowskiVector> {
    surface.check_grid(grid)?;
    if field.len() != surface.len() {
        return Err(Error::GridMismatch(format!(
            "field has {} values, surface {}",
            field.len(),
            surface.len()
        )));
    }
    let mut acc = MinkowskiVector::ZERO;
    for (i, j, _, _) in grid.nodes() {
        let k = grid.index(i, j);
        let density = surface.area_element[k] / grid.sin_theta()[i];
        acc += field[k] * (grid.weight(i, j) * density);
    }
    Ok(acc)
}

/// True iff `min K > -1 + τ_K`.
pub fn embeddability_check(surface: &SurfaceSample) -> bool {
    surface.min_k() > -1.0 + EMBEDDABILITY_MARGIN
}

/// Intrinsic Laplacian of a node field on a surface of revolution.
///
/// The field is split into ϑ-modes `c_k(x) e^{ikϑ}`; each mode is written
/// `c_k = s^k g_k` with `s = sin θ` and `g_k` smooth in `x`, and the
/// Laplace-Beltrami operator of `A dθ^2 + (1-x^2) B dϑ^2` is applied to
/// `g_k` in closed form. With `P = √(B/A)`, `Q = √(AB)`:
///
/// * `k = 0`: `Δc = Q^{-1} ∂_x((1-x^2) P c_x)`
/// * `k ≥ 1`: `Δc = s^k Q^{-1} [W_x - k x P g_x - k^2 g ((1-P^2)/(1-x^2) + P^2)/P]`,
///   `W = P((1-x^2) g_x - k x g)`.
pub fn surface_laplacian(surface: &SurfaceSample, field: &[f64], grid: &QuadratureGrid) -> Result<Vec<f64>> {
    surface.check_grid(grid)?;
    if !surface.is_revolution() {
        return Err(Error::NotRevolution);
    }
    if field.len() != surface.len() {
        return Err(Error::GridMismatch("field length".into()));
    }
    let nt = grid.n_theta();
    let np = grid.n_phi();
    let x = grid.x();
    let s = grid.sin_theta();
    let a_rows = surface.row(&surface.e);
    let b_rows: Vec<f64> = surface
        .row(&surface.g)
        .iter()
        .zip(x)
        .map(|(g, x)| g / (1.0 - x * x))
        .collect();
    let p: Vec<f64> = a_rows.iter().zip(&b_rows).map(|(a, b)| (b / a).sqrt()).collect();
    let q: Vec<f64> = a_rows.iter().zip(&b_rows).map(|(a, b)| (a * b).sqrt()).collect();

    let scale = field.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut out = vec![0.0; field.len()];
    let kmax = np / 2;
    for k in 0..=kmax {
        // real DFT over ϑ of mode k: cosine and sine parts
        let parts: &[bool] = if k == 0 || 2 * k == np { &[true] } else { &[true, false] };
        for &is_cos in parts {
            let norm = if k == 0 || 2 * k == np { 1.0 } else { 2.0 } / np as f64;
            let basis = |j: usize| {
                let a = k as f64 * grid.phi()[j];
                if is_cos {
                    a.cos()
                } else {
                    a.sin()
                }
            };
            let coeff: Vec<f64> = (0..nt)
                .map(|i| norm * (0..np).map(|j| field[grid.index(i, j)] * basis(j)).sum::<f64>())
                .collect();
            if coeff.iter().all(|c| c.abs() <= 1e-15 * scale) {
                continue;
            }
            let lap = mode_laplacian(k, &coeff, x, s, &p, &q, grid);
            for i in 0..nt {
                for j in 0..np {
                    out[grid.index(i, j)] += lap[i] * basis(j);
                }
            }
        }
    }
    Ok(out)
}

fn mode_laplacian(
    k: usize,
    c: &[f64],
    x: &[f64],
    s: &[f64],
    p: &[f64],
    q: &[f64],
    grid: &QuadratureGrid,
) -> Vec<f64> {
    let n = c.len();
    if k == 0 {
        let c_x = grid.dx(c);
        let flux: Vec<f64> = (0..n).map(|i| (1.0 - x[i] * x[i]) * p[i] * c_x[i]).collect();
        let d = grid.dx(&flux);
        return (0..n).map(|i| d[i] / q[i]).collect();
    }
    let kf = k as f64;
    let g: Vec<f64> = (0..n).map(|i| c[i] / s[i].powi(k as i32)).collect();
    let g_x = grid.dx(&g);
    let w: Vec<f64> = (0..n)
        .map(|i| p[i] * ((1.0 - x[i] * x[i]) * g_x[i] - kf * x[i] * g[i]))
        .collect();
    let w_x = grid.dx(&w);
    (0..n)
        .map(|i| {
            let om = 1.0 - x[i] * x[i];
            let reg = (1.0 - p[i] * p[i]) / om + p[i] * p[i];
            let bracket = w_x[i] - kf * x[i] * p[i] * g_x[i] - kf * kf * g[i] * reg / p[i];
            s[i].powi(k as i32) * bracket / q[i]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ah_metric::CosineSeries;
    use std::f64::consts::PI;

    fn round(grid: &QuadratureGrid, radius: f64) -> SurfaceSample {
        let nt = grid.n_theta();
        let e = vec![radius * radius; nt];
        let g: Vec<f64> = grid.theta().iter().map(|t| (radius * t.sin()).powi(2)).collect();
        SurfaceSample::from_revolution(0.0, &e, &g, &vec![2.0 / radius; nt], grid).unwrap()
    }

    #[test]
    fn hyperbolic_spheres_are_geodesic_spheres() {
        let grid = QuadratureGrid::new(64, 4).unwrap();
        for eps in [0.5, 0.2, 0.05, 0.01] {
            let s = coordinate_sphere(&AHFamily::Hyperbolic, eps, &grid).unwrap();
            for (h, k) in s.h.iter().zip(&s.k) {
                assert!((h - 2.0 * eps.cosh()).abs() < 1e-10);
                assert!((k - eps.sinh().powi(2)).abs() < 1e-10, "eps={eps}: {k}");
            }
        }
    }

    #[test]
    fn brioschi_on_exact_round_metric() {
        let grid = QuadratureGrid::new(64, 1).unwrap();
        for r in [0.6, 1.0, 2.5, 4.0] {
            let rr = f64::sinh(r);
            let s = round(&grid, rr);
            for k in &s.k {
                assert!((k - 1.0 / (rr * rr)).abs() < 1e-9, "r={r}: {:e}", k - 1.0 / (rr * rr));
            }
        }
    }

    #[test]
    fn perturbed_sphere_is_revolution_and_embeddable() {
        let grid = QuadratureGrid::new(64, 4).unwrap();
        let fam = AHFamily::perturbed_round(CosineSeries::new(vec![0.0, 0.1]), None);
        let s = coordinate_sphere(&fam, 0.1, &grid).unwrap();
        assert!(s.f.iter().all(|f| *f == 0.0));
        assert!(s.k.iter().all(|k| *k > -1.0));
        assert!(embeddability_check(&s));
        for eps in [0.2, 0.1, 0.05] {
            let s = coordinate_sphere(&fam, eps, &grid).unwrap();
            assert!(embeddability_check(&s));
        }
    }

    #[test]
    fn constant_minus_one_curvature_is_not_embeddable() {
        let grid = QuadratureGrid::new(8, 1).unwrap();
        let mut s = round(&grid, 1.0);
        s.k.iter_mut().for_each(|k| *k = -1.0);
        assert!(!embeddability_check(&s));
    }

    #[test]
    fn integration_examples() {
        let grid = QuadratureGrid::new(64, 4).unwrap();
        let unit = round(&grid, 1.0);
        let one = vec![1.0; unit.len()];
        assert!((integrate_scalar(&unit, &one, &grid).unwrap() - 4.0 * PI).abs() < 1e-13);
        let odd: Vec<f64> = grid.nodes().map(|(_, _, t, _)| t.cos()).collect();
        assert!(integrate_scalar(&unit, &odd, &grid).unwrap().abs() < 1e-13);

        let v = MinkowskiVector::new(1.0, -2.0, 0.5, 3.0);
        let c = integrate_vector(&unit, &vec![v; unit.len()], &grid).unwrap();
        assert!((c - v * (4.0 * PI)).max_abs() < 1e-12);
        let pos: Vec<MinkowskiVector> = grid
            .nodes()
            .map(|(_, _, t, p)| MinkowskiVector::from_spatial(crate::lorentz::unit_direction(t, p), 1.0))
            .collect();
        let c = integrate_vector(&unit, &pos, &grid).unwrap();
        assert!((c - MinkowskiVector::new(0.0, 0.0, 0.0, 4.0 * PI)).max_abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_sphere_area_is_closed_form() {
        let grid = QuadratureGrid::new(64, 4).unwrap();
        for eps in [0.3, 0.1, 0.02] {
            let s = coordinate_sphere(&AHFamily::Hyperbolic, eps, &grid).unwrap();
            let area = s.area(&grid).unwrap();
            let exact = 4.0 * PI / eps.sinh().powi(2);
            assert!(((area - exact) / exact).abs() < 1e-13, "{area} vs {exact}");
        }
    }

    #[test]
    fn area_growth_rate() {
        let grid = QuadratureGrid::new(32, 4).unwrap();
        let fam = AHFamily::AdsSchwarzschild { m: 1.0 };
        let defect = |eps: f64| {
            let s = coordinate_sphere(&fam, eps, &grid).unwrap();
            (s.area(&grid).unwrap() * eps * eps - 4.0 * PI).abs()
        };
        let (a, b) = (defect(0.04), defect(0.02));
        let order = (a / b).log2();
        assert!((order - 2.0).abs() < 0.1, "{order}");
    }

    #[test]
    fn mismatched_grid_rejected() {
        let g1 = QuadratureGrid::new(16, 4).unwrap();
        let g2 = QuadratureGrid::new(18, 4).unwrap();
        let s = round(&g1, 1.0);
        assert!(matches!(
            integrate_scalar(&s, &vec![1.0; s.len()], &g2),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn laplacian_on_spherical_harmonics() {
        let grid = QuadratureGrid::new(24, 8).unwrap();
        let radius = 1.7;
        let s = round(&grid, radius);
        let fields: Vec<(Box<dyn Fn(f64, f64) -> f64>, f64)> = vec![
            (Box::new(|t: f64, _| t.cos()), 2.0),
            (Box::new(|t: f64, p: f64| t.sin() * p.cos()), 2.0),
            (Box::new(|t: f64, _| 3.0 * t.cos().powi(2) - 1.0), 6.0),
            (Box::new(|t: f64, p: f64| t.cos() * t.sin() * p.sin()), 6.0),
            (Box::new(|t: f64, p: f64| t.sin().powi(2) * (2.0 * p).cos()), 6.0),
            (Box::new(|t: f64, p: f64| t.sin().powi(3) * (3.0 * p).sin()), 12.0),
        ];
        for (f, ev) in fields {
            let vals: Vec<f64> = grid.nodes().map(|(_, _, t, p)| f(t, p)).collect();
            let lap = surface_laplacian(&s, &vals, &grid).unwrap();
            for (l, v) in lap.iter().zip(&vals) {
                assert!((l + ev / (radius * radius) * v).abs() < 1e-10, "{l} vs {}", -ev * v);
            }
        }
    }

    #[test]
    fn laplacian_divergence_and_symmetry_on_non_conformal_metric() {
        let grid = QuadratureGrid::new(40, 8).unwrap();
        let nt = grid.n_theta();
        // A = B (1 + 0.3 sin^2 θ) keeps A = B at the poles
        let b: Vec<f64> = grid.x().iter().map(|x| 1.0 + 0.2 * x + 0.1 * x * x).collect();
        let e: Vec<f64> = b.iter().zip(grid.x()).map(|(b, x)| b * (1.0 + 0.3 * (1.0 - x * x))).collect();
        let g: Vec<f64> = b.iter().zip(grid.x()).map(|(b, x)| b * (1.0 - x * x)).collect();
        let s = SurfaceSample::from_revolution(0.0, &e, &g, &vec![1.0; nt], &grid).unwrap();
        let f1: Vec<f64> = grid.nodes().map(|(_, _, t, p)| (t.cos()).exp() + t.sin() * p.cos()).collect();
        let f2: Vec<f64> = grid.nodes().map(|(_, _, t, p)| t.cos().powi(2) + t.sin() * t.cos() * p.sin()).collect();
        let l1 = surface_laplacian(&s, &f1, &grid).unwrap();
        let l2 = surface_laplacian(&s, &f2, &grid).unwrap();
        assert!(integrate_scalar(&s, &l1, &grid).unwrap().abs() < 1e-10);
        let a: Vec<f64> = f2.iter().zip(&l1).map(|(x, y)| x * y).collect();
        let c: Vec<f64> = f1.iter().zip(&l2).map(|(x, y)| x * y).collect();
        let lhs = integrate_scalar(&s, &a, &grid).unwrap();
        let rhs = integrate_scalar(&s, &c, &grid).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }
}
