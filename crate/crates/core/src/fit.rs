//! Fits of `v(ε) = v∞ + C ε^p` to sweep data.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

pub const P_MIN: f64 = 0.5;
pub const P_MAX: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    LeastSquares,
    Richardson,
    /// Value at the smallest ε; used when no order can be resolved.
    Plateau,
}

/// JSON writes non-finite floats as `null`; read them back as NaN.
pub(crate) fn nan_if_null<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitFit {
    #[serde(deserialize_with = "nan_if_null")]
    pub v_inf: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub c: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub p: f64,
    /// Root-mean-square residual.
    #[serde(deserialize_with = "nan_if_null")]
    pub residual: f64,
    /// Standard error of `v_inf`.
    #[serde(deserialize_with = "nan_if_null")]
    pub se_v_inf: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub se_p: f64,
    pub p_trusted: bool,
    pub method: FitMethod,
}

fn validate(values: &[f64], eps: &[f64], min: usize) -> Result<()> {
    if values.len() != eps.len() {
        return Err(Error::InvalidArgument("values and ε differ in length".into()));
    }
    if values.len() < min {
        return Err(Error::InvalidArgument(format!("need at least {min} samples")));
    }
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite sample or non-positive ε".into()));
    }
    Ok(())
}

/// Linear least squares for `(v∞, C)` at fixed `p`; returns the sum of
/// squared residuals too.
fn linear_fit(values: &[f64], eps: &[f64], p: f64) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let xs: Vec<f64> = eps.iter().map(|e| e.powf(p)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let v = my - c * mx;
    let ssr = xs.iter().zip(values).map(|(x, y)| (y - v - c * x).powi(2)).sum();
    (v, c, ssr)
}

fn tail_is_monotone(values: &[f64], eps: &[f64], tol: f64) -> bool {
    let mut idx: Vec<usize> = (0..eps.len()).collect();
    idx.sort_by(|&a, &b| eps[b].total_cmp(&eps[a]));
    let diffs: Vec<f64> = idx.windows(2).map(|w| values[w[1]] - values[w[0]]).collect();
    let up = diffs.iter().any(|d| *d > tol);
    let down = diffs.iter().any(|d| *d < -tol);
    !(up && down)
}

/// Order `p ∈ [P_MIN, P_MAX]` minimising the residual of the linear fit:
/// grid search, then golden-section refinement around the best cell.
fn best_order(values: &[f64], eps: &[f64]) -> f64 {
    let ssr = |p: f64| linear_fit(values, eps, p).2;
    let steps = 551;
    let h = (P_MAX - P_MIN) / (steps - 1) as f64;
    let mut best = (P_MIN, f64::INFINITY);
    for k in 0..steps {
        let p = P_MIN + h * k as f64;
        let s = ssr(p);
        if s < best.1 {
            best = (p, s);
        }
    }
    // golden-section refinement inside the neighbouring cells
    let (mut a, mut b) = ((best.0 - h).max(P_MIN), (best.0 + h).min(P_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (ssr(c), ssr(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = ssr(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = ssr(d);
        }
    }
    if fc.min(fd) <= best.1 {
        if fc < fd {
            c
        } else {
            d
        }
    } else {
        best.0
    }
}

/// Delete-one jackknife standard error of the extrapolated value.
fn jackknife_se(values: &[f64], eps: &[f64]) -> f64 {
    let n = values.len();
    if n < 4 {
        return 0.0;
    }
    let loo: Vec<f64> = (0..n)
        .map(|k| {
            let v: Vec<f64> = values.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
            let e: Vec<f64> = eps.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
            linear_fit(&v, &e, best_order(&v, &e)).0
        })
        .collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    ((n - 1) as f64 / n as f64 * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
}

/// Nonlinear least squares for `v∞ + C ε^p` with `p ∈ [0.5, 6]`.
///
/// The standard error of `v∞` is the larger of the linearised covariance
/// estimate and the delete-one jackknife (four or more samples).
///
/// `p` is reported untrusted when the data carry no measurable `ε`
/// dependence, when the optimum sits on the boundary of the range, or when
/// the values are not monotone in `ε`.
pub fn fit_limit(values: &[f64], eps: &[f64]) -> Result<LimitFit> {
    validate(values, eps, 3)?;
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let spread = values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
        - values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let noise = 64.0 * f64::EPSILON * (1.0 + scale);

    let p = best_order(values, eps);
    let (v_inf, cc, s) = linear_fit(values, eps, p);
    let n = values.len();
    let residual = (s / n as f64).sqrt();

    // covariance from the Jacobian of (v∞, C, p)
    let dof = n.saturating_sub(3).max(1) as f64;
    let sigma2 = s / dof;
    let mut jtj = Matrix3::zeros();
    for e in eps {
        let ep = e.powf(p);
        let row = Vector3::new(1.0, ep, cc * ep * e.ln());
        jtj += row * row.transpose();
    }
    let (se_cov, se_p) = match jtj.try_inverse() {
        Some(inv) => ((sigma2 * inv[(0, 0)]).max(0.0).sqrt(), (sigma2 * inv[(2, 2)]).max(0.0).sqrt()),
        None => (residual, f64::INFINITY),
    };
    // the covariance error only sees scatter; the jackknife also sees a
    // model that does not fit the window
    let se_v_inf = se_cov.max(jackknife_se(values, eps));

    let flat = spread <= noise || cc.abs() * eps.iter().fold(0.0_f64, |m, e| m.max(e.powf(p))) <= noise;
    let on_boundary = p <= P_MIN + 1e-6 || p >= P_MAX - 1e-6;
    let monotone = tail_is_monotone(values, eps, noise);
    Ok(LimitFit {
        v_inf,
        c: cc,
        p,
        residual,
        se_v_inf,
        se_p: if flat { f64::INFINITY } else { se_p },
        p_trusted: !(flat || on_boundary || !monotone),
        method: FitMethod::LeastSquares,
    })
}

/// [`fit_limit`], falling back to the smallest-ε value when the order is
/// untrusted. The fallback's standard error is the largest deviation of
/// the window from that value.
pub fn fit_limit_or_plateau(values: &[f64], eps: &[f64]) -> Result<LimitFit> {
    let fit = fit_limit(values, eps)?;
    if fit.p_trusted {
        return Ok(fit);
    }
    let last = (0..eps.len()).min_by(|&a, &b| eps[a].total_cmp(&eps[b])).unwrap_or(0);
    let v = values[last];
    let spread = values.iter().fold(0.0_f64, |m, x| m.max((x - v).abs()));
    Ok(LimitFit {
        v_inf: v,
        c: 0.0,
        p: fit.p,
        residual: fit.residual,
        se_v_inf: spread,
        se_p: f64::INFINITY,
        p_trusted: false,
        method: FitMethod::Plateau,
    })
}

/// Richardson extrapolation with a known order `p`, applied to the two
/// smallest `ε`.
pub fn richardson(values: &[f64], eps: &[f64], p: f64) -> Result<LimitFit> {
    validate(values, eps, 2)?;
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("order {p} must be positive")));
    }
    let mut idx: Vec<usize> = (0..eps.len()).collect();
    idx.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]));
    let (i, j) = (idx[0], idx[1]);
    let (a, b) = (eps[i].powf(p), eps[j].powf(p));
    if a == b {
        return Err(Error::Degenerate("two smallest ε coincide".into()));
    }
    let c = (values[j] - values[i]) / (b - a);
    let v_inf = values[i] - c * a;
    let s: f64 = eps
        .iter()
        .zip(values)
        .map(|(e, v)| (v - v_inf - c * e.powf(p)).powi(2))
        .sum();
    let residual = (s / eps.len() as f64).sqrt();
    Ok(LimitFit {
        v_inf,
        c,
        p,
        residual,
        // difference to the next-coarser extrapolation when available
        se_v_inf: if eps.len() > 2 {
            let k = idx[2];
            let c2 = (values[k] - values[j]) / (eps[k].powf(p) - b);
            (values[j] - c2 * b - v_inf).abs()
        } else {
            0.0
        },
        se_p: 0.0,
        p_trusted: true,
        method: FitMethod::Richardson,
    })
}
