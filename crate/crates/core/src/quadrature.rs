//! Product quadrature on the unit sphere: Gauss-Legendre in `x = cos θ`,
//! uniform in `ϑ`. Also carries the barycentric machinery used for spectral
//! differentiation and interpolation in `x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre nodes (descending, so that `θ = acos x` ascends) and weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        // Tricomi initial guess, then Newton.
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut xi = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, xi);
            let dx = p / dp;
            xi -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, xi);
        x[i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    (x, w)
}

/// Barycentric interpolation and differentiation on a fixed node set.
#[derive(Debug, Clone)]
pub struct Barycentric {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    diff: Vec<f64>,
}

impl Barycentric {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let mut weights = vec![1.0; n];
        for j in 0..n {
            for k in 0..n {
                if k != j {
                    weights[j] /= nodes[j] - nodes[k];
                }
            }
        }
        // rescale to avoid overflow for large n; only ratios matter
        let scale = weights.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
        for w in &mut weights {
            *w /= scale;
        }
        let mut diff = vec![0.0; n * n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let d = (weights[j] / weights[i]) / (nodes[i] - nodes[j]);
                    diff[i * n + j] = d;
                    diag -= d;
                }
            }
            diff[i * n + i] = diag;
        }
        Self {
            nodes: nodes.to_vec(),
            weights,
            diff,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Derivative of the interpolant at the nodes.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(values.len(), n);
        (0..n)
            .map(|i| {
                self.diff[i * n..(i + 1) * n]
                    .iter()
                    .zip(values)
                    .map(|(d, v)| d * v)
                    .sum()
            })
            .collect()
    }

    /// Value of the interpolant at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(values) {
            let dx = x - xj;
            if dx == 0.0 {
                return fj;
            }
            let c = wj / dx;
            num += c * fj;
            den += c;
        }
        num / den
    }
}

/// Zeroes the tail of `c` past the last coefficient above
/// `CHOP_TOL * max|c|`.
fn chop(mut c: Vec<f64>) -> Vec<f64> {
    let top = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let keep = c.iter().rposition(|v| v.abs() > CHOP_TOL * top).map_or(0, |k| k + 1);
    for v in &mut c[keep..] {
        *v = 0.0;
    }
    c
}

/// Coefficients of the derivative of a Legendre series, from
/// `P'_{k+1} - P'_{k-1} = (2k + 1) P_k`.
fn legendre_derivative(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut d = vec![0.0; n + 2];
    for k in (1..n).rev() {
        d[k - 1] = (2 * k - 1) as f64 * (c[k] + d[k + 1] / (2 * k + 3) as f64);
    }
    d.truncate(n);
    d
}

/// Tensor grid on S^2 with `n_theta` Gauss-Legendre nodes in `cos θ` and
/// `n_phi` equispaced azimuths. Node `(i, j)` has flat index `i * n_phi + j`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    n_theta: usize,
    n_phi: usize,
    x: Vec<f64>,
    theta: Vec<f64>,
    sin_theta: Vec<f64>,
    wx: Vec<f64>,
    phi: Vec<f64>,
    bary: Barycentric,
    // P_k(x_i), row k
    legendre: Vec<f64>,
}

/// Legendre coefficients below this fraction of the largest one, past the
/// last coefficient above it, are treated as rounding noise.
pub const CHOP_TOL: f64 = 1e-13;

impl QuadratureGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 1 {
            return Err(Error::InvalidArgument(format!(
                "grid needs n_theta >= 2 and n_phi >= 1, got {n_theta} x {n_phi}"
            )));
        }
        let (x, wx) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|v| v.acos()).collect();
        let sin_theta = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();
        let phi = (0..n_phi)
            .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
            .collect();
        let bary = Barycentric::new(&x);
        let mut legendre = vec![0.0; n_theta * n_theta];
        for (i, &xi) in x.iter().enumerate() {
            let (mut p0, mut p1) = (1.0, xi);
            legendre[i] = 1.0;
            if n_theta > 1 {
                legendre[n_theta + i] = xi;
            }
            for k in 2..n_theta {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * xi * p1 - (kf - 1.0) * p0) / kf;
                legendre[k * n_theta + i] = p2;
                p0 = p1;
                p1 = p2;
            }
        }
        Ok(Self {
            n_theta,
            n_phi,
            x,
            theta,
            sin_theta,
            wx,
            phi,
            bary,
            legendre,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    /// `cos θ` at the θ-nodes, descending.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_theta
    }

    pub fn theta_weights(&self) -> &[f64] {
        &self.wx
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn phi_weight(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// Weight of node `(i, j)` against the round measure `dμ_{h0}`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let _ = j;
        self.wx[i] * self.phi_weight()
    }

    pub fn spectral(&self) -> &Barycentric {
        &self.bary
    }

    /// `d/dx` of a θ-profile sampled at the θ-nodes.
    pub fn dx(&self, values: &[f64]) -> Vec<f64> {
        self.bary.differentiate(values)
    }

    /// Legendre coefficients of the degree `n_theta - 1` interpolant.
    pub fn legendre_coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n_theta;
        assert_eq!(values.len(), n);
        (0..n)
            .map(|k| {
                let row = &self.legendre[k * n..(k + 1) * n];
                let s: f64 = row.iter().zip(&self.wx).zip(values).map(|((p, w), v)| p * w * v).sum();
                0.5 * (2 * k + 1) as f64 * s
            })
            .collect()
    }

    /// Sums a Legendre series at the θ-nodes.
    pub fn legendre_values(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.n_theta;
        let mut out = vec![0.0; n];
        for (k, c) in coeffs.iter().enumerate().take(n) {
            if *c == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(&self.legendre[k * n..(k + 1) * n]) {
                *o += c * p;
            }
        }
        out
    }

    /// Derivatives `(f', f'')` at the nodes, taken in Legendre space after
    /// dropping the noise tail of the coefficients (see [`CHOP_TOL`]).
    /// Unlike [`Self::dx`] this does not amplify rounding noise in nearly
    /// constant data.
    pub fn smooth_dx2(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = chop(self.legendre_coefficients(values));
        let d1 = legendre_derivative(&c);
        let d2 = legendre_derivative(&d1);
        (self.legendre_values(&d1), self.legendre_values(&d2))
    }

    /// First derivative as in [`Self::smooth_dx2`].
    pub fn smooth_dx(&self, values: &[f64]) -> Vec<f64> {
        let c = chop(self.legendre_coefficients(values));
        self.legendre_values(&legendre_derivative(&c))
    }

    /// `(θ, ϑ)` of every node in flat order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n_theta).flat_map(move |i| {
            (0..self.n_phi).map(move |j| (i, j, self.theta[i], self.phi[j]))
        })
    }

    /// Integral over the round sphere of a node field.
    pub fn integrate_round(&self, field: &[f64]) -> f64 {
        assert_eq!(field.len(), self.len());
        let mut s = 0.0;
        for i in 0..self.n_theta {
            let row: f64 = field[i * self.n_phi..(i + 1) * self.n_phi].iter().sum();
            s += self.wx[i] * row;
        }
        s * self.phi_weight()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sphere_area() {
        for (nt, np) in [(8, 4), (16, 1), (64, 4), (64, 128), (127, 3)] {
            let g = QuadratureGrid::new(nt, np).unwrap();
            let s = g.integrate_round(&vec![1.0; g.len()]);
            assert!((s - 4.0 * PI).abs() < 1e-13, "{nt}x{np}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let n = 12;
        let g = QuadratureGrid::new(n, 1).unwrap();
        for deg in 0..2 * n {
            let field: Vec<f64> = g.x().iter().map(|x| x.powi(deg as i32)).collect();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) } * 2.0 * PI;
            assert!((g.integrate_round(&field) - exact).abs() < 1e-13, "degree {deg}");
        }
    }

    #[test]
    fn legendre_round_trip_and_derivatives() {
        let g = QuadratureGrid::new(32, 1).unwrap();
        let f: Vec<f64> = g.x().iter().map(|x| (0.7 * x).exp()).collect();
        let back = g.legendre_values(&g.legendre_coefficients(&f));
        assert!(back.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-13));
        let (d1, d2) = g.smooth_dx2(&f);
        for i in 0..32 {
            assert!((d1[i] - 0.7 * f[i]).abs() < 1e-11);
            assert!((d2[i] - 0.49 * f[i]).abs() < 1e-9);
        }
        let plain = g.dx(&f);
        assert!(plain.iter().zip(&d1).all(|(a, b)| (a - b).abs() < 1e-11));
    }

    #[test]
    fn chopped_derivative_ignores_rounding_noise() {
        let g = QuadratureGrid::new(64, 1).unwrap();
        let big = 4.0e4_f64;
        // constant up to the last bit
        let f: Vec<f64> = g.x().iter().map(|x| big * (1.0 - x * x) / (1.0 - x * x)).collect();
        let (d1, d2) = g.smooth_dx2(&f);
        assert!(d1.iter().chain(&d2).all(|v| v.abs() < 1e-9), "{d1:?}");
    }

    #[test]
    fn odd_field_integrates_to_zero() {
        let g = QuadratureGrid::new(64, 4).unwrap();
        let f: Vec<f64> = g.nodes().map(|(_, _, t, _)| t.cos()).collect();
        assert!(g.integrate_round(&f).abs() < 1e-13);
    }

    #[test]
    fn spectral_derivative_and_interpolation() {
        let g = QuadratureGrid::new(32, 1).unwrap();
        let f: Vec<f64> = g.x().iter().map(|x| (2.0 * x).exp()).collect();
        let df = g.dx(&f);
        for (x, d) in g.x().iter().zip(&df) {
            assert!((d - 2.0 * (2.0 * x).exp()).abs() < 1e-11);
        }
        for x in [-1.0, -0.3, 0.0, 0.77, 1.0] {
            let v = g.spectral().interpolate(&f, x);
            assert!((v - (2.0 * x as f64).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(QuadratureGrid::new(1, 4).is_err());
        assert!(QuadratureGrid::new(4, 0).is_err());
    }
}
