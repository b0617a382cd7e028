//! Adaptive Dormand-Prince 5(4) integrator. Steps are clipped so that every
//! requested output abscissa is hit exactly.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-11,
            max_steps: 200_000,
        }
    }
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns `y` at each of
/// `outputs`, which must be monotone in the direction of integration.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], outputs: &[f64], tol: Tolerance) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    let n = y0.len();
    let Some(&t_end) = outputs.last() else {
        return Ok(Vec::new());
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    if outputs.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) || (outputs[0] - t0) * dir < 0.0 {
        return Err(Error::Integrator("outputs not monotone".into()));
    }

    let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);
    let mut h = 1e-3 * span;
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    k[0] = f(t, &y);
    let mut out = Vec::with_capacity(outputs.len());
    let mut next = 0;
    while next < outputs.len() && outputs[next] == t {
        out.push(y.clone());
        next += 1;
    }
    let mut steps = 0;
    let mut ytmp = vec![0.0; n];
    while next < outputs.len() {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::Integrator(format!("exceeded {} steps at t = {t}", tol.max_steps)));
        }
        let target = outputs[next];
        let mut step = h.min((target - t).abs());
        let hits = step == (target - t).abs();
        if step <= 1e-15 * span {
            return Err(Error::Integrator(format!("step size underflow at t = {t}")));
        }
        step *= dir;

        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += step * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            k[s] = f(t + C[s] * step, &ytmp);
        }
        // stage 7 is evaluated at y_{n+1}
        let ynew = ytmp.clone();
        let mut err = 0.0;
        for i in 0..n {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * step;
            let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = if hits { target } else { t + step };
            y = ynew;
            k[0] = k[6].clone();
            while next < outputs.len() && outputs[next] == t {
                out.push(y.clone());
                next += 1;
            }
            // a step shortened to hit an output says nothing about the next size
            if !hits {
                h = step.abs() * factor;
            } else {
                h = h.max(step.abs() * factor);
            }
        } else {
            h = step.abs() * factor;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let outs: Vec<f64> = (1..=10).map(|k| k as f64 * 0.3).collect();
        let ys = dopri5(|_, y| vec![y[0]], 0.0, &[1.0], &outs, Tolerance::default()).unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0] / t.exp() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let outs = [0.5, 0.0, -1.0, -2.5];
        let ys = dopri5(|_, y| vec![y[1], -y[0]], 1.0, &[1f64.cos(), -1f64.sin()], &outs, Tolerance::default())
            .unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn rejects_non_monotone_outputs() {
        assert!(dopri5(|_, y| vec![y[0]], 0.0, &[1.0], &[1.0, 0.5], Tolerance::default()).is_err());
    }
}
