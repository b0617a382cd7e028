//! Vector-valued quasi-local masses of a surface with an isometric
//! embedding into `H^3`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::embed_h3::EmbeddedSurface;
use crate::error::{Error, Result};
use crate::lorentz::{causal_classify, default_causal_tolerance, CausalClass, MinkowskiVector};
use crate::quadrature::QuadratureGrid;
use crate::sphere_geometry::{integrate_scalar, integrate_vector, surface_laplacian, SurfaceSample};

/// Mean curvature must exceed `-2 + H_MARGIN` wherever `H + 2` is divided by.
pub const H_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassResult {
    pub eps: f64,
    pub m_by: MinkowskiVector,
    pub m_hat: MinkowskiVector,
    pub m_alpha: Option<MinkowskiVector>,
    pub euclid_by: Option<f64>,
    pub tag_by: CausalClass,
    pub tag_hat: CausalClass,
    pub tag_alpha: Option<CausalClass>,
}

impl MassResult {
    pub fn new(eps: f64, m_by: MinkowskiVector, m_hat: MinkowskiVector, m_alpha: Option<MinkowskiVector>) -> Self {
        let tag = |v: MinkowskiVector| causal_classify(v, default_causal_tolerance(v));
        Self {
            eps,
            m_by,
            m_hat,
            m_alpha,
            euclid_by: None,
            tag_by: tag(m_by),
            tag_hat: tag(m_hat),
            tag_alpha: m_alpha.map(tag),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.m_by.is_finite()
            && self.m_hat.is_finite()
            && self.m_alpha.map_or(true, |v| v.is_finite())
            && self.euclid_by.map_or(true, f64::is_finite)
    }
}

fn check_aligned(surf: &SurfaceSample, emb: &EmbeddedSurface, grid: &QuadratureGrid) -> Result<()> {
    surf.check_grid(grid)?;
    emb.check_grid(grid)?;
    if emb.len() != surf.len() || emb.h0.len() != surf.len() {
        return Err(Error::GridMismatch("surface and embedding are not node-aligned".into()));
    }
    Ok(())
}

fn check_h_bound(h: &[f64]) -> Result<()> {
    for (node, &h) in h.iter().enumerate() {
        if !(h > -2.0 + H_MARGIN) {
            return Err(Error::MeanCurvatureBound { node, h });
        }
    }
    Ok(())
}

/// `(1/8π) ∫ (H0 - H) X dΣ`.
pub fn by_mass(surf: &SurfaceSample, emb: &EmbeddedSurface, grid: &QuadratureGrid) -> Result<MinkowskiVector> {
    check_aligned(surf, emb, grid)?;
    let field: Vec<MinkowskiVector> = (0..surf.len())
        .map(|k| emb.x[k] * (emb.h0[k] - surf.h[k]))
        .collect();
    Ok(integrate_vector(surf, &field, grid)? * (1.0 / (8.0 * PI)))
}

/// `(1/8π) ∫ (H0^2 - H^2) / (H + 2) X dΣ`.
pub fn hat_mass(surf: &SurfaceSample, emb: &EmbeddedSurface, grid: &QuadratureGrid) -> Result<MinkowskiVector> {
    check_aligned(surf, emb, grid)?;
    check_h_bound(&surf.h)?;
    let field: Vec<MinkowskiVector> = (0..surf.len())
        .map(|k| {
            let (h, h0) = (surf.h[k], emb.h0[k]);
            emb.x[k] * ((h0 - h) * (h0 + h) / (h + 2.0))
        })
        .collect();
    Ok(integrate_vector(surf, &field, grid)? * (1.0 / (8.0 * PI)))
}

/// `∫ (H - H0) (x, α t) dΣ`, without the `1/8π` factor.
pub fn shitam_alpha_mass(
    surf: &SurfaceSample,
    emb: &EmbeddedSurface,
    grid: &QuadratureGrid,
    alpha: f64,
) -> Result<MinkowskiVector> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be >= 1")));
    }
    check_aligned(surf, emb, grid)?;
    let field: Vec<MinkowskiVector> = (0..surf.len())
        .map(|k| {
            let p = emb.x[k];
            MinkowskiVector::new(p.x1, p.x2, p.x3, alpha * p.t) * (surf.h[k] - emb.h0[k])
        })
        .collect();
    integrate_vector(surf, &field, grid)
}

/// `α` for a surface lying between geodesic spheres of radii `r1 <= r2`.
pub fn alpha_from_radii(r1: f64, r2: f64) -> Result<f64> {
    if !(r1 > 0.0 && r1 <= r2 && r2.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < R1 <= R2, got {r1}, {r2}")));
    }
    let s1 = r1.sinh();
    let ratio = (r2.sinh() / s1).powi(2) - 1.0;
    Ok(r1.cosh() / s1 + ratio.max(0.0).sqrt() / s1)
}

/// Euclidean Brown-York mass `(1/8π) ∫ (H0 - H) dΣ` from supplied data.
pub fn euclid_by_mass(surf: &SurfaceSample, h0: &[f64], grid: &QuadratureGrid) -> Result<f64> {
    if h0.len() != surf.len() {
        return Err(Error::GridMismatch("H0 field length".into()));
    }
    let field: Vec<f64> = h0.iter().zip(&surf.h).map(|(a, b)| a - b).collect();
    Ok(integrate_scalar(surf, &field, grid)? / (8.0 * PI))
}

/// `∫ (H0^2 - H^2)/(H + 2) F dΣ + 4 ∫ Δ_Σ F / (H + 2) dΣ`.
pub fn mainhyp_functional(
    surf: &SurfaceSample,
    emb: &EmbeddedSurface,
    f: &[f64],
    grid: &QuadratureGrid,
) -> Result<f64> {
    check_aligned(surf, emb, grid)?;
    check_h_bound(&surf.h)?;
    if f.len() != surf.len() {
        return Err(Error::GridMismatch("F field length".into()));
    }
    let lap = surface_laplacian(surf, f, grid)?;
    let field: Vec<f64> = (0..surf.len())
        .map(|k| {
            let (h, h0) = (surf.h[k], emb.h0[k]);
            ((h0 * h0 - h * h) * f[k] + 4.0 * lap[k]) / (h + 2.0)
        })
        .collect();
    integrate_scalar(surf, &field, grid)
}

/// `∫ Δ_Σ F / (H + 2) dΣ`, which tends to zero along exhaustions.
pub fn laplacian_term(surf: &SurfaceSample, f: &[f64], grid: &QuadratureGrid) -> Result<f64> {
    check_h_bound(&surf.h)?;
    let lap = surface_laplacian(surf, f, grid)?;
    let field: Vec<f64> = lap.iter().zip(&surf.h).map(|(l, h)| l / (h + 2.0)).collect();
    integrate_scalar(surf, &field, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ah_metric::{AHFamily, CosineSeries};
    use crate::embed_h3::{boost_surface, embed_round, embed_surface, Branch};
    use crate::lorentz::{hopf_eta, LorentzMap, SpinorParameter};
    use crate::sphere_geometry::coordinate_sphere;

    fn grid() -> QuadratureGrid {
        QuadratureGrid::new(64, 4).unwrap()
    }

    fn geodesic_sphere(r: f64, grid: &QuadratureGrid) -> (SurfaceSample, EmbeddedSurface) {
        let s2 = r.sinh().powi(2);
        let e = vec![s2; grid.n_theta()];
        let g: Vec<f64> = grid.theta().iter().map(|t| s2 * t.sin().powi(2)).collect();
        let h = vec![2.0 / r.tanh(); grid.n_theta()];
        let surf = SurfaceSample::from_revolution(0.0, &e, &g, &h, grid).unwrap();
        (surf, embed_round(r, grid).unwrap())
    }

    #[test]
    fn hyperbolic_spheres_have_zero_mass() {
        let g = grid();
        for eps in [0.2, 0.05] {
            let s = coordinate_sphere(&AHFamily::Hyperbolic, eps, &g).unwrap();
            let emb = embed_surface(&s, Branch::Plus, &g).unwrap();
            assert!(by_mass(&s, &emb, &g).unwrap().max_abs() < 1e-9);
            assert!(hat_mass(&s, &emb, &g).unwrap().max_abs() < 1e-9);
            assert!(shitam_alpha_mass(&s, &emb, &g, 1.0).unwrap().max_abs() < 8.0 * PI * 1e-9);
        }
    }

    #[test]
    fn alpha_one_is_scaled_by_mass() {
        let g = grid();
        let fam = AHFamily::perturbed_round(CosineSeries::new(vec![0.0, 0.1]), None);
        let s = coordinate_sphere(&fam, 0.1, &g).unwrap();
        let emb = embed_surface(&s, Branch::Plus, &g).unwrap();
        let by = by_mass(&s, &emb, &g).unwrap();
        let a = shitam_alpha_mass(&s, &emb, &g, 1.0).unwrap();
        assert!((a + by * (8.0 * PI)).max_abs() < 1e-12 * (1.0 + a.max_abs()));
        assert!(shitam_alpha_mass(&s, &emb, &g, 0.5).is_err());
    }

    #[test]
    fn alpha_from_radii_examples() {
        let r = 1.3_f64;
        assert!((alpha_from_radii(r, r).unwrap() - 1.0 / r.tanh()).abs() < 1e-15);
        assert!((alpha_from_radii(30.0, 30.0).unwrap() - 1.0).abs() < 1e-12);
        let expected = 1f64.cosh() / 1f64.sinh() + ((2f64.sinh() / 1f64.sinh()).powi(2) - 1.0).sqrt() / 1f64.sinh();
        assert!((alpha_from_radii(1.0, 2.0).unwrap() - expected).abs() < 1e-15);
        assert!((alpha_from_radii(1.0, 2.0).unwrap() - 3.797_423_536_739_248).abs() < 1e-12);
        assert!(alpha_from_radii(2.0, 1.0).is_err());
    }

    #[test]
    fn euclid_by_examples() {
        let g = grid();
        let r = 1.7;
        let e = vec![r * r; g.n_theta()];
        let gg: Vec<f64> = g.theta().iter().map(|t| r * r * t.sin().powi(2)).collect();
        let h0 = vec![2.0 / r; g.len()];
        for (h, expect) in [(2.0 / r, 0.0), (0.0, r), (1.0 / r, r / 2.0)] {
            let s = SurfaceSample::from_revolution(0.0, &e, &gg, &vec![h; g.n_theta()], &g).unwrap();
            assert!((euclid_by_mass(&s, &h0, &g).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn round_ball_equality() {
        let g = grid();
        let z = SpinorParameter::from_reals(0.3, -0.2, 0.7, 0.1);
        let eta = hopf_eta(&z);
        for r in [0.5, 1.0, 2.0] {
            let (s, emb) = geodesic_sphere(r, &g);
            let f: Vec<f64> = emb.x.iter().map(|p| -p.inner(eta)).collect();
            let v = mainhyp_functional(&s, &emb, &f, &g).unwrap();
            assert!(v.abs() < 1e-8, "r={r}: {v:e}");
            assert_eq!(mainhyp_functional(&s, &emb, &vec![0.0; g.len()], &g).unwrap(), 0.0);
            assert!(hat_mass(&s, &emb, &g).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn h_bound_is_enforced() {
        let g = QuadratureGrid::new(8, 2).unwrap();
        let (mut s, emb) = geodesic_sphere(1.0, &g);
        s.h[3] = -2.0;
        assert!(matches!(hat_mass(&s, &emb, &g), Err(Error::MeanCurvatureBound { node: 3, .. })));
    }

    #[test]
    fn by_mass_is_lorentz_equivariant() {
        let g = grid();
        let fam = AHFamily::ads_schwarzschild(1.0).unwrap();
        let s = coordinate_sphere(&fam, 0.1, &g).unwrap();
        let emb = embed_surface(&s, Branch::Plus, &g).unwrap();
        let by = by_mass(&s, &emb, &g).unwrap();
        let map = LorentzMap::boost(1, 0.4).compose(&LorentzMap::rotation(2, 0.7));
        let moved = boost_surface(&map, &emb).unwrap();
        let by2 = by_mass(&s, &moved, &g).unwrap();
        assert!((by2 - map.apply(by)).max_abs() < 1e-10);
        let r = MassResult::new(0.1, by, hat_mass(&s, &emb, &g).unwrap(), None);
        assert_eq!(r.tag_by, CausalClass::FutureTimelike);
        assert!(r.is_finite());
    }

    #[test]
    fn misaligned_inputs_rejected() {
        let g = grid();
        let g2 = QuadratureGrid::new(32, 4).unwrap();
        let (s, _) = geodesic_sphere(1.0, &g);
        let emb = embed_round(1.0, &g2).unwrap();
        assert!(by_mass(&s, &emb, &g).is_err());
    }
}
