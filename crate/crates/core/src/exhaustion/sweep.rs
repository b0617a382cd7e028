use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cone::{cone_pairing_report, cone_pairing_report_with, ConeReport};
use super::config::{AlphaConfig, GridConfig, SweepConfig};
use crate::ah_metric::{mass_aspect, wang_mass, AHFamily};
use crate::embed_h3::{embed_surface, EmbeddedSurface};
use crate::error::{Error, Result};
use crate::fit::{fit_limit, fit_limit_or_plateau, LimitFit};
use crate::killing_spinor::{minkowski_identity_residual, sample_on, KillingNormField};
use crate::lorentz::{causal_classify, default_causal_tolerance, CausalClass, MinkowskiVector};
use crate::quadrature::QuadratureGrid;
use crate::quasilocal::{
    alpha_from_radii, by_mass, hat_mass, laplacian_term, mainhyp_functional, shitam_alpha_mass, MassResult,
};
use crate::sphere_geometry::{coordinate_sphere, embeddability_check, SurfaceSample};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub isometry_residual: f64,
    pub hyperboloid_residual: f64,
    /// Minkowski-identity residual divided by `max F`.
    pub minkowski_identity: f64,
    /// `∫ Δ_Σ F / (H + 2) dΣ`.
    pub funclim: f64,
    pub mainhyp: f64,
    pub max_norm: f64,
    pub area: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub alpha: Option<f64>,
    /// `2 cosh ε - H` per θ-row.
    pub h_defect_rows: Vec<f64>,
    /// `max |H0 - 2 cosh ε|`.
    pub h0_defect: f64,
    /// `max |K - sinh^2 ε|`.
    pub k_defect: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonRecord {
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    /// `max |m̂ - m_BY|` over components.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    /// Cone-sampling tags of `m_BY` and `m̂` agree with the classification.
    pub tags_agree: bool,
}

impl EpsilonRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitVector {
    pub value: MinkowskiVector,
    pub std_error: MinkowskiVector,
    pub fits: Vec<LimitFit>,
    /// Classification tolerance: the default one or three standard
    /// errors, whichever is larger.
    pub tolerance: f64,
    pub tag: CausalClass,
    pub cone: ConeReport,
    pub tags_agree: bool,
}

pub fn limit_tolerance(value: MinkowskiVector, std_error: MinkowskiVector) -> f64 {
    let se = std_error.max_abs();
    default_causal_tolerance(value).max(if se.is_finite() { 3.0 * se } else { 0.0 })
}

impl LimitVector {
    pub fn from_samples(vectors: &[MinkowskiVector], eps: &[f64], eta_samples: usize) -> Result<Self> {
        let comps = |f: fn(&MinkowskiVector) -> f64| -> Vec<f64> { vectors.iter().map(f).collect() };
        let fits = vec![
            fit_limit_or_plateau(&comps(|v| v.x1), eps)?,
            fit_limit_or_plateau(&comps(|v| v.x2), eps)?,
            fit_limit_or_plateau(&comps(|v| v.x3), eps)?,
            fit_limit_or_plateau(&comps(|v| v.t), eps)?,
        ];
        let value = MinkowskiVector::new(fits[0].v_inf, fits[1].v_inf, fits[2].v_inf, fits[3].v_inf);
        let std_error = MinkowskiVector::new(fits[0].se_v_inf, fits[1].se_v_inf, fits[2].se_v_inf, fits[3].se_v_inf);
        let tolerance = limit_tolerance(value, std_error);
        let tag = causal_classify(value, tolerance);
        let cone = cone_pairing_report_with(value, eta_samples, tolerance);
        Ok(Self {
            value,
            std_error,
            tolerance,
            fits,
            tag,
            cone,
            tags_agree: cone.tag == tag,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassSweepRecord {
    pub family: AHFamily,
    pub family_name: String,
    pub grid: GridConfig,
    pub records: Vec<EpsilonRecord>,
    /// ε values the limits were fitted on.
    pub fit_epsilons: Vec<f64>,
    pub wang_mass: MinkowskiVector,
    pub wang_tag: CausalClass,
    pub limit_by: Option<LimitVector>,
    pub limit_hat: Option<LimitVector>,
    /// Fit of `max |m̂ - m_BY|` against ε.
    pub gap_fit: Option<LimitFit>,
    /// `max |m̂ - m_BY|` is non-increasing as ε decreases.
    pub gap_monotone: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl MassSweepRecord {
    pub fn successful(&self) -> impl Iterator<Item = &EpsilonRecord> {
        self.records.iter().filter(|r| r.is_ok())
    }
}

/// Everything computed for one ε.
pub struct Stage {
    pub surface: SurfaceSample,
    pub embedding: EmbeddedSurface,
    pub mass: MassResult,
    pub diagnostics: Diagnostics,
}

pub fn run_stage(cfg: &SweepConfig, grid: &QuadratureGrid, eps: f64) -> Result<Stage> {
    let surf = coordinate_sphere(&cfg.family, eps, grid)?;
    if !embeddability_check(&surf) {
        return Err(Error::Degenerate(format!("K = {} too close to -1", surf.min_k())));
    }
    let emb = embed_surface(&surf, cfg.branch.into(), grid)?;
    let tol = &cfg.tolerances;
    if emb.isometry_residual > tol.isometry || emb.hyperboloid_residual > tol.hyperboloid {
        return Err(Error::Degenerate(format!(
            "embedding residuals {:e} / {:e} exceed tolerance",
            emb.isometry_residual, emb.hyperboloid_residual
        )));
    }
    let m_by = by_mass(&surf, &emb, grid)?;
    let m_hat = hat_mass(&surf, &emb, grid)?;
    let (r_inner, r_outer) = emb.radii();
    let alpha = match cfg.alpha {
        None => None,
        Some(AlphaConfig::Fixed(a)) => Some(a),
        Some(AlphaConfig::Named(_)) => Some(alpha_from_radii(r_inner, r_outer)?),
    };
    let m_alpha = alpha.map(|a| shitam_alpha_mass(&surf, &emb, grid, a)).transpose()?;
    let mass = MassResult::new(eps, m_by, m_hat, m_alpha);

    let field = KillingNormField::new(cfg.spinor())?;
    let f = sample_on(&field, &emb);
    let max_norm = f.iter().fold(0.0_f64, |m, v| m.max(*v));
    let mink = minkowski_identity_residual(&field, &surf, &emb, grid)? / max_norm;
    let funclim = laplacian_term(&surf, &f, grid)?;
    let mainhyp = mainhyp_functional(&surf, &emb, &f, grid)?;

    let (sh, ch) = (eps.sinh(), eps.cosh());
    let h_defect_rows = surf.row(&surf.h).iter().map(|h| 2.0 * ch - h).collect();
    let h0_defect = emb.h0.iter().fold(0.0_f64, |m, h| m.max((h - 2.0 * ch).abs()));
    let k_defect = surf.k.iter().fold(0.0_f64, |m, k| m.max((k - sh * sh).abs()));

    let diagnostics = Diagnostics {
        isometry_residual: emb.isometry_residual,
        hyperboloid_residual: emb.hyperboloid_residual,
        minkowski_identity: mink,
        funclim,
        mainhyp,
        max_norm,
        area: surf.area(grid)?,
        h_min: surf.min_h(),
        h_max: surf.max_h(),
        k_min: surf.min_k(),
        k_max: surf.max_k(),
        r_inner,
        r_outer,
        alpha,
        h_defect_rows,
        h0_defect,
        k_defect,
    };
    Ok(Stage {
        surface: surf,
        embedding: emb,
        mass,
        diagnostics,
    })
}

fn tags_agree(v: MinkowskiVector, n: usize) -> bool {
    cone_pairing_report(v, n).tag == causal_classify(v, default_causal_tolerance(v))
}

fn record_for(cfg: &SweepConfig, grid: &QuadratureGrid, eps: f64) -> EpsilonRecord {
    match run_stage(cfg, grid, eps) {
        Ok(stage) => {
            let m = &stage.mass;
            let agree = tags_agree(m.m_by, cfg.eta_samples) && tags_agree(m.m_hat, cfg.eta_samples);
            EpsilonRecord {
                eps,
                error: None,
                gap: Some((m.m_hat - m.m_by).max_abs()),
                mass: Some(stage.mass),
                diagnostics: Some(stage.diagnostics),
                tags_agree: agree,
            }
        }
        Err(e) => EpsilonRecord {
            eps,
            error: Some(e.to_string()),
            mass: None,
            diagnostics: None,
            gap: None,
            tags_agree: true,
        },
    }
}

/// The smallest `⌈n/2⌉` entries of a decreasing ε list.
pub fn fit_window(eps: &[f64]) -> Vec<f64> {
    let n = eps.len();
    eps[n / 2..].to_vec()
}

/// Runs the configured ε-sweep. Stages run in parallel; records keep the
/// order of the configured ε list.
pub fn run_sweep(cfg: &SweepConfig) -> Result<MassSweepRecord> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let eps = cfg.epsilons();
    let records: Vec<EpsilonRecord> = eps.par_iter().map(|&e| record_for(cfg, &grid, e)).collect();

    let mut failures = Vec::new();
    for r in &records {
        if let Some(err) = &r.error {
            failures.push(format!("ε = {}: {err}", r.eps));
        } else if !r.tags_agree {
            failures.push(format!("ε = {}: cone and classification tags differ", r.eps));
        }
    }

    let window = fit_window(&eps);
    let used: Vec<&EpsilonRecord> = records
        .iter()
        .filter(|r| r.is_ok() && window.contains(&r.eps))
        .collect();
    let fit_eps: Vec<f64> = used.iter().map(|r| r.eps).collect();
    let masses: Vec<&MassResult> = used.iter().filter_map(|r| r.mass.as_ref()).collect();
    let (limit_by, limit_hat, gap_fit) = if used.len() >= 3 {
        let by: Vec<MinkowskiVector> = masses.iter().map(|m| m.m_by).collect();
        let hat: Vec<MinkowskiVector> = masses.iter().map(|m| m.m_hat).collect();
        let gaps: Vec<f64> = used.iter().filter_map(|r| r.gap).collect();
        (
            Some(LimitVector::from_samples(&by, &fit_eps, cfg.eta_samples)?),
            Some(LimitVector::from_samples(&hat, &fit_eps, cfg.eta_samples)?),
            Some(fit_limit(&gaps, &fit_eps)?),
        )
    } else {
        failures.push(format!("only {} usable ε in the fit window", used.len()));
        (None, None, None)
    };
    for (name, lim) in [("m_BY", &limit_by), ("m_hat", &limit_hat)] {
        if let Some(l) = lim {
            if !l.tags_agree {
                failures.push(format!("{name} limit: cone tag {} vs {}", l.cone.tag, l.tag));
            }
        }
    }
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.gap).collect();
    let gap_floor = 1e-12 * (1.0 + gaps.iter().fold(0.0_f64, |m, g| m.max(*g)));
    let gap_monotone = gaps.windows(2).all(|w| w[1] <= w[0] + gap_floor);

    let aspect = mass_aspect(&cfg.family, &grid)?;
    let wang = wang_mass(&aspect, &grid);
    Ok(MassSweepRecord {
        family: cfg.family.clone(),
        family_name: cfg.family.name(),
        grid: cfg.grid,
        records,
        fit_epsilons: fit_eps,
        wang_mass: wang,
        wang_tag: causal_classify(wang, default_causal_tolerance(wang)),
        limit_by,
        limit_hat,
        gap_fit,
        gap_monotone,
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_window_takes_smallest_half() {
        assert_eq!(fit_window(&[0.4, 0.3, 0.2, 0.1]), vec![0.2, 0.1]);
        assert_eq!(fit_window(&[0.5, 0.4, 0.3, 0.2, 0.1]), vec![0.3, 0.2, 0.1]);
    }

    #[test]
    fn hyperbolic_sweep_is_massless() {
        let mut cfg = SweepConfig::new(AHFamily::Hyperbolic, "unused");
        cfg.grid.n_theta = 32;
        let rec = run_sweep(&cfg).unwrap();
        assert!(rec.passed, "{:?}", rec.failures);
        for r in &rec.records {
            let m = r.mass.as_ref().unwrap();
            assert!(m.m_by.max_abs() <= 1e-8 && m.m_hat.max_abs() <= 1e-8);
        }
        assert_eq!(rec.limit_by.as_ref().unwrap().tag, CausalClass::Zero);
        assert_eq!(rec.wang_mass, MinkowskiVector::ZERO);
    }

    #[test]
    fn failures_are_recorded_without_aborting() {
        let mut cfg = SweepConfig::new(AHFamily::Hyperbolic, "unused");
        cfg.grid.n_theta = 16;
        cfg.tolerances.hyperboloid = 1e-300;
        cfg.tolerances.isometry = 1e-300;
        let rec = run_sweep(&cfg).unwrap();
        assert_eq!(rec.records.len(), 8);
        assert!(!rec.passed);
        assert!(rec.records.iter().any(|r| !r.is_ok()));
    }
}
