use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::SweepConfig;
use super::sweep::{run_stage, Stage};
use crate::ah_metric::mass_aspect;
use crate::embed_h3::{embed_round, embed_surface};
use crate::error::Result;
use crate::fit::fit_limit;
use crate::killing_spinor::{
    exhaustion_norm_growth, geodesic_norm_check, minkowski_identity_residual, sample_on, spinor_at,
    spinor_chart_point, KillingNormField,
};
use crate::lorentz::{hyperboloid_point, MinkowskiVector, SpinorParameter};
use crate::quadrature::QuadratureGrid;
use crate::sphere_geometry::{coordinate_sphere, integrate_scalar, surface_laplacian, SurfaceSample};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family_name: String,
    pub checks: Vec<IdentityCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = format!("identities for {}\n", self.family_name);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<28} {:>12.4e} (tol {:.1e})  {}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance,
                c.detail
            );
        }
        out
    }
}

struct Checks(Vec<IdentityCheck>);

impl Checks {
    /// Records `value <= tolerance`.
    fn at_most(&mut self, name: &str, value: f64, tolerance: f64, detail: String) {
        self.0.push(IdentityCheck {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
            detail,
        });
    }

    fn flag(&mut self, name: &str, value: f64, tolerance: f64, pass: bool, detail: String) {
        self.0.push(IdentityCheck {
            name: name.into(),
            value,
            tolerance,
            pass,
            detail,
        });
    }
}

pub fn random_spinor(rng: &mut ChaCha8Rng) -> SpinorParameter {
    loop {
        let z = SpinorParameter::from_reals(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if z.norm_sq() > 1e-2 {
            return z;
        }
    }
}

/// Largest `|spinor norm^2 - F|` and smallest `F` over random samples with
/// `r ∈ [0, 3]`.
pub fn spinor_norm_samples(n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut min_f = f64::INFINITY;
    for _ in 0..n {
        let z = random_spinor(&mut rng);
        let field = KillingNormField::new(z).expect("nonzero spinor");
        let (r, t, p) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let f = field.eval(spinor_chart_point(r, t, p));
        worst = worst.max((spinor_at(&z, r, t, p).norm_sq() - f).abs());
        min_f = min_f.min(f);
    }
    (worst, min_f)
}

/// Largest residual of the `A e^t + B e^{-t}` fit over random geodesics.
pub fn geodesic_samples(n: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts: Vec<f64> = (0..21).map(|k| -1.5 + 0.15 * k as f64).collect();
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let field = KillingNormField::new(random_spinor(&mut rng))?;
        let x0 = hyperboloid_point(rng.gen_range(0.0..1.5), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let w = MinkowskiVector::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            0.0,
        );
        let v = w + x0 * w.inner(x0);
        let norm = v.norm_sq().sqrt();
        if norm < 1e-3 {
            continue;
        }
        let fit = geodesic_norm_check(&field, x0, v * (1.0 / norm), &ts)?;
        worst = worst.max(fit.max_residual);
    }
    Ok(worst)
}

/// Largest `| |∇F|^2 - F^2 |` over random points with `r ∈ [0, 2]`.
pub fn gradient_samples(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let field = KillingNormField::new(random_spinor(&mut rng)).expect("nonzero spinor");
        let x = hyperboloid_point(rng.gen_range(0.0..2.0), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let f = field.eval(x);
        worst = worst.max((field.gradient_at(x).norm_sq() - f * f).abs());
    }
    worst
}

/// Geodesic sphere of radius `r` as intrinsic data plus its embedding.
pub fn geodesic_sphere(r: f64, grid: &QuadratureGrid) -> Result<(SurfaceSample, crate::embed_h3::EmbeddedSurface)> {
    let s2 = r.sinh().powi(2);
    let e = vec![s2; grid.n_theta()];
    let g: Vec<f64> = grid.theta().iter().map(|t| s2 * t.sin().powi(2)).collect();
    let h = vec![2.0 / r.tanh(); grid.n_theta()];
    let surf = SurfaceSample::from_revolution(0.0, &e, &g, &h, grid)?;
    Ok((surf, embed_round(r, grid)?))
}

/// Least-squares fit of `y ≈ a ε^3 + b ε^4`; returns `a`.
fn cubic_coefficient(eps: &[f64], ys: &[f64]) -> f64 {
    let (mut s66, mut s67, mut s77, mut r6, mut r7) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (e, y) in eps.iter().zip(ys) {
        let (a, b) = (e.powi(3), e.powi(4));
        s66 += a * a;
        s67 += a * b;
        s77 += b * b;
        r6 += a * y;
        r7 += b * y;
    }
    let det = s66 * s77 - s67 * s67;
    (r6 * s77 - r7 * s67) / det
}

/// Limit of `ε^2 · area` from a least-squares fit of `a + b ε^2 + c ε^3`.
fn area_limit(eps: &[f64], ys: &[f64]) -> f64 {
    let n = eps.len();
    let m = DMatrix::from_fn(n, 3, |i, j| if j == 0 { 1.0 } else { eps[i].powi(j as i32 + 1) });
    let rhs = DVector::from_column_slice(ys);
    match m.svd(true, true).solve(&rhs, 1e-14) {
        Ok(sol) => sol[0],
        Err(_) => f64::NAN,
    }
}

/// Runs the Killing-spinor and sphere-geometry identity suites on the
/// configured family.
pub fn verify_identities(cfg: &SweepConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let eps = cfg.epsilons();
    let tol = cfg.tolerances;
    let mut c = Checks(Vec::new());

    let (worst, min_f) = spinor_norm_samples(10_000, cfg.seed);
    c.at_most("spinor_norm", worst, 1e-12, "10^4 random samples".into());
    c.flag("norm_positivity", min_f, 0.0, min_f > 0.0, "smallest F".into());
    let geo = geodesic_samples(100, cfg.seed.wrapping_add(1))?;
    c.at_most("geodesic_hessian", geo, 1e-10, "100 random geodesics".into());
    let grad = gradient_samples(10_000, cfg.seed.wrapping_add(2));
    c.at_most("gradient_identity", grad, 1e-10, "| |∇F|^2 - F^2 |".into());

    let field = KillingNormField::new(cfg.spinor())?;
    let mut round = 0.0_f64;
    for r in [0.5, 1.0, 2.0, 3.0, 4.0] {
        let (s, emb) = geodesic_sphere(r, &grid)?;
        round = round.max(minkowski_identity_residual(&field, &s, &emb, &grid)?);
    }
    c.at_most("minkowski_identity_round", round, 1e-7, "geodesic spheres R = 0.5..4".into());

    let stages: Vec<(f64, Result<Stage>)> = eps.iter().map(|&e| (e, run_stage(cfg, &grid, e))).collect();
    let ok: Vec<(f64, &Stage)> = stages
        .iter()
        .filter_map(|(e, s)| s.as_ref().ok().map(|s| (*e, s)))
        .collect();
    let failed = stages.len() - ok.len();
    c.flag(
        "embedding",
        failed as f64,
        0.0,
        failed == 0,
        format!("{} of {} surfaces embedded", ok.len(), stages.len()),
    );
    if ok.is_empty() {
        return Ok(VerifyReport {
            family_name: cfg.family.name(),
            checks: c.0,
        });
    }
    let ok_eps: Vec<f64> = ok.iter().map(|(e, _)| *e).collect();
    let iso = ok.iter().fold(0.0_f64, |m, (_, s)| m.max(s.diagnostics.isometry_residual));
    let hyp = ok.iter().fold(0.0_f64, |m, (_, s)| m.max(s.diagnostics.hyperboloid_residual));
    c.at_most("isometry_residual", iso, tol.isometry, "max over ε".into());
    c.at_most("hyperboloid_residual", hyp, tol.hyperboloid, "max over ε".into());

    let mink = ok.iter().fold(0.0_f64, |m, (_, s)| m.max(s.diagnostics.minkowski_identity));
    c.at_most("minkowski_identity_sweep", mink, tol.minkowski_identity, "residual / max F, max over ε".into());

    // refinement on the coarsest surface of the sweep
    let e0 = ok_eps[0];
    let mut levels = Vec::new();
    for n in [grid.n_theta() / 4, grid.n_theta() / 2, grid.n_theta()] {
        let g = QuadratureGrid::new(n.max(4), grid.n_phi())?;
        let s = coordinate_sphere(&cfg.family, e0, &g)?;
        let emb = embed_surface(&s, cfg.branch.into(), &g)?;
        let scale = sample_on(&field, &emb).into_iter().fold(0.0_f64, f64::max);
        levels.push(minkowski_identity_residual(&field, &s, &emb, &g)? / scale);
    }
    let floor = 1e-11;
    let decreasing = levels.windows(2).all(|w| w[1] < w[0] || w[1] <= floor);
    c.flag(
        "minkowski_identity_refinement",
        *levels.last().unwrap_or(&0.0),
        floor,
        decreasing,
        format!("relative residuals {:?} at ε = {e0}", levels.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()),
    );

    let divergence = ok
        .iter()
        .map(|(_, s)| {
            let f = sample_on(&field, &s.embedding);
            let lap = surface_laplacian(&s.surface, &f, &grid)?;
            let abs: Vec<f64> = lap.iter().map(|v| v.abs()).collect();
            let total = integrate_scalar(&s.surface, &lap, &grid)?;
            let scale = integrate_scalar(&s.surface, &abs, &grid)?;
            Ok(if scale > 0.0 { total.abs() / scale } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0_f64, f64::max);
    c.at_most("laplacian_divergence", divergence, 1e-10, "|∫ΔF| / ∫|ΔF|".into());

    if ok_eps.len() >= 2 {
        let growth = exhaustion_norm_growth(&field, &cfg.family, &ok_eps, &grid)?;
        c.at_most("norm_growth", (growth.p - 1.0).abs(), 0.05, format!("max F ~ ε^-{:.4}", growth.p));
    }

    if ok.len() >= 3 {
        let scaled: Vec<f64> = ok.iter().map(|(e, s)| e * e * s.diagnostics.area).collect();
        let limit = area_limit(&ok_eps, &scaled);
        let rel = (limit - 4.0 * PI).abs() / (4.0 * PI);
        let defect: Vec<f64> = scaled.iter().map(|a| a - 4.0 * PI).collect();
        let rate = log_slope(&ok_eps, &defect);
        let pass = rel <= 1e-4 && (1.5..=2.5).contains(&rate);
        c.flag(
            "area_growth",
            rel,
            1e-4,
            pass,
            format!("ε^2 area -> {limit:.8} at rate {rate:.3}"),
        );

        let fl: Vec<f64> = ok.iter().map(|(_, s)| s.diagnostics.funclim.abs()).collect();
        let first = fl[0];
        let limit = fit_limit(&fl, &ok_eps)?;
        let bound = (tol.funclim_ratio * first).max(tol.funclim_floor);
        let tiny = fl.iter().all(|v| *v <= tol.funclim_floor);
        let shrinking = fl.last().copied().unwrap_or(0.0) < first;
        let value = limit.v_inf.abs();
        c.flag(
            "funclim",
            value,
            bound,
            tiny || (shrinking && value <= bound),
            format!("|∫ΔF/(H+2)| from {:.3e} to {:.3e}, extrapolated {:.3e}", first, fl[fl.len() - 1], limit.v_inf),
        );

        // expansion of H, H0 and K in ε
        let aspect = mass_aspect(&cfg.family, &grid)?;
        let np = grid.n_phi();
        let half_tr: Vec<f64> = (0..grid.n_theta()).map(|i| aspect.trace[i * np] / 2.0).collect();
        let scale = half_tr.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0_f64;
        for i in 0..grid.n_theta() {
            let ys: Vec<f64> = ok.iter().map(|(_, s)| s.diagnostics.h_defect_rows[i]).collect();
            worst = worst.max((cubic_coefficient(&ok_eps, &ys) - half_tr[i]).abs());
        }
        let (value, bound) = if scale > 0.0 { (worst / scale, 0.02) } else { (worst, 1e-6) };
        c.at_most("mean_curvature_expansion", value, bound, "(2cosh ε - H)/ε^3 vs tr h/2".into());

        let defects: [(&str, fn(&Stage) -> f64, fn(f64) -> f64, f64); 2] = [
            ("h0_expansion", |s| s.diagnostics.h0_defect, |e| 2.0 * e.cosh(), 4.0),
            ("gauss_curvature_expansion", |s| s.diagnostics.k_defect, |e| e.sinh().powi(2), 4.5),
        ];
        for (name, pick, reference, order) in defects {
            // spectral differentiation noise is about ulp * n^2 of the reference
            let noise = f64::EPSILON * (grid.n_theta() as f64).powi(2);
            let resolved: Vec<(f64, f64)> = ok
                .iter()
                .map(|(e, s)| (*e, pick(s)))
                .filter(|(e, y)| *y > noise * reference(*e))
                .collect();
            if resolved.len() < 2 {
                let peak = ok.iter().fold(0.0_f64, |m, (_, s)| m.max(pick(s)));
                c.flag(name, peak, 0.0, true, "at rounding level for every ε".into());
            } else {
                let (es, ys): (Vec<f64>, Vec<f64>) = resolved.iter().copied().unzip();
                let p = log_slope(&es, &ys);
                c.flag(
                    name,
                    p,
                    order,
                    p >= order,
                    format!("decay order {p:.3} over {} resolved ε", es.len()),
                );
            }
        }
    }

    Ok(VerifyReport {
        family_name: cfg.family.name(),
        checks: c.0,
    })
}

/// Slope of `ln y` against `ln ε` over the smallest half of the samples.
pub fn log_slope(eps: &[f64], ys: &[f64]) -> f64 {
    let start = eps.len() / 2;
    let xs: Vec<f64> = eps[start..].iter().map(|e| e.ln()).collect();
    let ls: Vec<f64> = ys[start..].iter().map(|y| y.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ls.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}
