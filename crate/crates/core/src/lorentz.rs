//! Minkowski space R^{3,1}, the hyperboloid model of H^3 and the future
//! light cone.
//!
//! Vectors are stored as `(x1, x2, x3, t)` and paired with the Lorentzian
//! metric `-dt^2 + dx^2`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating `LorentzMap`s.
pub const LORENTZ_MAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MinkowskiVector {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub t: f64,
}

impl MinkowskiVector {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(x1: f64, x2: f64, x3: f64, t: f64) -> Self {
        Self { x1, x2, x3, t }
    }

    pub fn from_spatial(x: [f64; 3], t: f64) -> Self {
        Self::new(x[0], x[1], x[2], t)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.t]
    }

    pub fn spatial(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn spatial_norm(self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    pub fn inner(self, other: Self) -> f64 {
        lorentz_inner(self, other)
    }

    pub fn norm_sq(self) -> f64 {
        lorentz_inner(self, self)
    }
}

impl fmt::Display for MinkowskiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.12e}, {:.12e}, {:.12e}; {:.12e})",
            self.x1, self.x2, self.x3, self.t
        )
    }
}

impl Add for MinkowskiVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3, self.t + o.t)
    }
}

impl AddAssign for MinkowskiVector {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for MinkowskiVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3, self.t - o.t)
    }
}

impl Neg for MinkowskiVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x1, -self.x2, -self.x3, -self.t)
    }
}

impl Mul<f64> for MinkowskiVector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x1 * s, self.x2 * s, self.x3 * s, self.t * s)
    }
}

impl Mul<MinkowskiVector> for f64 {
    type Output = MinkowskiVector;
    fn mul(self, v: MinkowskiVector) -> MinkowskiVector {
        v * self
    }
}

/// Lorentz pairing `a.x * b.x - a.t * b.t`.
pub fn lorentz_inner(a: MinkowskiVector, b: MinkowskiVector) -> f64 {
    a.x1 * b.x1 + a.x2 * b.x2 + a.x3 * b.x3 - a.t * b.t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    Zero,
    FutureTimelike,
    PastTimelike,
    FutureNull,
    PastNull,
    Spacelike,
}

impl CausalClass {
    /// True for the classes that pair non-positively with the whole future
    /// light cone.
    pub fn is_future_causal_or_zero(self) -> bool {
        matches!(
            self,
            CausalClass::Zero | CausalClass::FutureTimelike | CausalClass::FutureNull
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CausalClass::Zero => "zero",
            CausalClass::FutureTimelike => "future-timelike",
            CausalClass::PastTimelike => "past-timelike",
            CausalClass::FutureNull => "future-null",
            CausalClass::PastNull => "past-null",
            CausalClass::Spacelike => "spacelike",
        }
    }
}

impl fmt::Display for CausalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Default classification tolerance `1e-9 * (1 + |v|_inf)`.
pub fn default_causal_tolerance(v: MinkowskiVector) -> f64 {
    1e-9 * (1.0 + v.max_abs())
}

/// Classify `v` by the sign of its pairing with itself and of its time
/// component. Quantities within `tol` of zero are treated as zero.
pub fn causal_classify(v: MinkowskiVector, tol: f64) -> CausalClass {
    debug_assert!(tol > 0.0);
    if v.max_abs() <= tol {
        return CausalClass::Zero;
    }
    let q = v.norm_sq();
    if q.abs() <= tol {
        if v.t > 0.0 {
            CausalClass::FutureNull
        } else {
            CausalClass::PastNull
        }
    } else if q < 0.0 {
        if v.t > 0.0 {
            CausalClass::FutureTimelike
        } else {
            CausalClass::PastTimelike
        }
    } else {
        CausalClass::Spacelike
    }
}

/// `sup` of `<<v, eta>>` over the slice `C+ ∩ {t = 1}`, which is `|v_x| - v_t`.
///
/// `v` is future causal (or zero) iff this is `<= 0`.
pub fn sup_cone_pairing(v: MinkowskiVector) -> f64 {
    v.spatial_norm() - v.t
}

/// Unit direction `(sin θ cos ϑ, sin θ sin ϑ, cos θ)`.
pub fn unit_direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Point at geodesic distance `r` from the origin of H^3 in direction
/// `ω(θ, ϑ)`.
pub fn hyperboloid_point(r: f64, theta: f64, phi: f64) -> MinkowskiVector {
    let w = unit_direction(theta, phi);
    let s = r.sinh();
    MinkowskiVector::new(s * w[0], s * w[1], s * w[2], r.cosh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorParameter {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl SpinorParameter {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    pub fn from_reals(re1: f64, im1: f64, re2: f64, im2: f64) -> Self {
        Self::new(Complex64::new(re1, im1), Complex64::new(re2, im2))
    }

    pub fn norm_sq(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq() == 0.0
    }

    /// A preimage of a future null vector under [`hopf_eta`].
    pub fn from_null(eta: MinkowskiVector) -> Result<Self> {
        if eta.t <= 0.0 || eta.norm_sq().abs() > 1e-10 * (1.0 + eta.t * eta.t) {
            return Err(Error::InvalidArgument(format!(
                "{eta} is not future null"
            )));
        }
        // |z1|^2 = (t - x1)/2, |z2|^2 = (t + x1)/2, z1 conj(z2) = (-x2 + i x3)/2
        let a = ((eta.t - eta.x1) / 2.0).max(0.0);
        let b = ((eta.t + eta.x1) / 2.0).max(0.0);
        let p = Complex64::new(-eta.x2 / 2.0, eta.x3 / 2.0);
        if a >= b {
            let z1 = Complex64::new(a.sqrt(), 0.0);
            let z2 = (p / z1).conj();
            Ok(Self::new(z1, z2))
        } else {
            let z2 = Complex64::new(b.sqrt(), 0.0);
            let z1 = p / z2;
            Ok(Self::new(z1, z2))
        }
    }
}

/// The quadratic map C^2 -> C+ whose restriction to the unit sphere is the
/// Hopf fibration onto `C+ ∩ {t = 1}`.
pub fn hopf_eta(z: &SpinorParameter) -> MinkowskiVector {
    let a = z.z1.norm_sqr();
    let b = z.z2.norm_sqr();
    // z1 conj(z2) + conj(z1) z2 = 2 Re(z1 conj z2); -i (z1 conj z2 - c.c.) = 2 Im(z1 conj z2)
    let p = z.z1 * z.z2.conj();
    MinkowskiVector::new(-(a - b), -2.0 * p.re, 2.0 * p.im, a + b)
}

/// 4x4 matrix acting on `(x1, x2, x3, t)` and preserving the pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzMap {
    m: [[f64; 4]; 4],
}

const GRAM: [f64; 4] = [1.0, 1.0, 1.0, -1.0];

impl LorentzMap {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { m }
    }

    /// Validates `L^T G L = G`, `det L = +1` and `L_tt >= 1`.
    pub fn new(m: [[f64; 4]; 4]) -> Result<Self> {
        let map = Self { m };
        let dev = map.metric_defect();
        if dev > LORENTZ_MAP_TOL * (1.0 + map.max_abs().powi(2)) {
            return Err(Error::InvalidLorentzMap(dev));
        }
        if map.m[3][3] < 1.0 - LORENTZ_MAP_TOL || map.det() < 0.0 {
            return Err(Error::InvalidLorentzMap(dev));
        }
        Ok(map)
    }

    /// Boost of rapidity `chi` along spatial axis `axis` (0, 1 or 2).
    pub fn boost(axis: usize, chi: f64) -> Self {
        assert!(axis < 3);
        let mut m = Self::identity().m;
        m[axis][axis] = chi.cosh();
        m[axis][3] = chi.sinh();
        m[3][axis] = chi.sinh();
        m[3][3] = chi.cosh();
        Self { m }
    }

    /// Spatial rotation by `angle` about `axis`.
    pub fn rotation(axis: usize, angle: f64) -> Self {
        assert!(axis < 3);
        let (i, j) = match axis {
            0 => (1, 2),
            1 => (2, 0),
            _ => (0, 1),
        };
        let (s, c) = angle.sin_cos();
        let mut m = Self::identity().m;
        m[i][i] = c;
        m[i][j] = -s;
        m[j][i] = s;
        m[j][j] = c;
        Self { m }
    }

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..4).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m }
    }

    /// Inverse, `G L^T G`.
    pub fn inverse(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = GRAM[i] * self.m[j][i] * GRAM[j];
            }
        }
        Self { m }
    }

    fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0_f64, |a, b| a.max(b.abs()))
    }

    /// `max |(L^T G L - G)_{ij}|`.
    pub fn metric_defect(&self) -> f64 {
        let mut dev = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                let s: f64 = (0..4).map(|k| self.m[k][i] * GRAM[k] * self.m[k][j]).sum();
                let target = if i == j { GRAM[i] } else { 0.0 };
                dev = dev.max((s - target).abs());
            }
        }
        dev
    }

    fn det(&self) -> f64 {
        // Laplace expansion on 4x4; fine for validation.
        let m = &self.m;
        let minor = |r: usize, c: usize| -> f64 {
            let mut s = [[0.0; 3]; 3];
            let mut ri = 0;
            for (i, row) in m.iter().enumerate() {
                if i == r {
                    continue;
                }
                let mut ci = 0;
                for (j, v) in row.iter().enumerate() {
                    if j == c {
                        continue;
                    }
                    s[ri][ci] = *v;
                    ci += 1;
                }
                ri += 1;
            }
            s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1])
                - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0])
                + s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0])
        };
        (0..4)
            .map(|c| {
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][c] * minor(0, c)
            })
            .sum()
    }

    pub fn apply(&self, v: MinkowskiVector) -> MinkowskiVector {
        let a = v.to_array();
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|k| self.m[i][k] * a[k]).sum();
        }
        MinkowskiVector::from_array(out)
    }
}

/// Matrix action of a validated map. Re-validates, so maps assembled from raw
/// matrices elsewhere cannot slip through.
pub fn apply_lorentz(map: &LorentzMap, v: MinkowskiVector) -> Result<MinkowskiVector> {
    let dev = map.metric_defect();
    if dev > LORENTZ_MAP_TOL * (1.0 + map.max_abs().powi(2)) {
        return Err(Error::InvalidLorentzMap(dev));
    }
    Ok(map.apply(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = 1e-9;

    #[test]
    fn inner_examples() {
        let e = MinkowskiVector::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(lorentz_inner(e, e), -1.0);
        let n = MinkowskiVector::new(1.0, 0.0, 0.0, 1.0);
        assert_eq!(lorentz_inner(n, n), 0.0);
        let r: f64 = 0.7;
        let x = MinkowskiVector::new(0.0, 0.0, r.sinh(), r.cosh());
        assert!((lorentz_inner(x, x) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let c = |v| causal_classify(v, TAU);
        assert_eq!(c(MinkowskiVector::new(0.0, 0.0, 0.0, 2.0)), CausalClass::FutureTimelike);
        assert_eq!(c(MinkowskiVector::new(3.0, 0.0, 0.0, 3.0)), CausalClass::FutureNull);
        assert_eq!(c(MinkowskiVector::new(1.0, 0.0, 0.0, 0.0)), CausalClass::Spacelike);
        assert_eq!(c(MinkowskiVector::new(0.0, 0.0, 0.0, -1.0)), CausalClass::PastTimelike);
        assert_eq!(c(MinkowskiVector::new(0.0, -2.0, 0.0, -2.0)), CausalClass::PastNull);
        assert_eq!(c(MinkowskiVector::ZERO), CausalClass::Zero);
        assert_eq!(c(MinkowskiVector::new(1e-12, 0.0, 0.0, 0.0)), CausalClass::Zero);
    }

    #[test]
    fn hopf_examples() {
        let h = |a: f64, b: f64| hopf_eta(&SpinorParameter::from_reals(a, 0.0, b, 0.0));
        assert_eq!(h(1.0, 0.0), MinkowskiVector::new(-1.0, 0.0, 0.0, 1.0));
        assert_eq!(h(0.0, 1.0), MinkowskiVector::new(1.0, 0.0, 0.0, 1.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = h(s, s);
        assert!((v - MinkowskiVector::new(0.0, -1.0, 0.0, 1.0)).max_abs() < 1e-15);
    }

    #[test]
    fn hopf_preimage_roundtrip() {
        for eta in [
            MinkowskiVector::new(-1.0, 0.0, 0.0, 1.0),
            MinkowskiVector::new(1.0, 0.0, 0.0, 1.0),
            MinkowskiVector::new(0.0, 0.6, -0.8, 1.0),
            MinkowskiVector::new(0.36, 0.48, 0.8, 1.0) * 3.0,
        ] {
            let z = SpinorParameter::from_null(eta).unwrap();
            assert!((hopf_eta(&z) - eta).max_abs() < 1e-14, "{eta}");
        }
        assert!(SpinorParameter::from_null(MinkowskiVector::new(0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn hyperboloid_examples() {
        assert_eq!(hyperboloid_point(0.0, 1.1, 0.3), MinkowskiVector::new(0.0, 0.0, 0.0, 1.0));
        let r: f64 = 0.9;
        let p = hyperboloid_point(r, 0.0, 0.0);
        assert_eq!(p, MinkowskiVector::new(0.0, 0.0, r.sinh(), r.cosh()));
        let q = hyperboloid_point(1.3, 0.4, 2.1);
        assert!((q.norm_sq() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn lorentz_map_examples() {
        let v = MinkowskiVector::new(0.3, -0.2, 0.1, 2.0);
        assert_eq!(apply_lorentz(&LorentzMap::identity(), v).unwrap(), v);
        let chi: f64 = 0.45;
        let b = LorentzMap::boost(2, chi);
        let o = apply_lorentz(&b, MinkowskiVector::new(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!((o - MinkowskiVector::new(0.0, 0.0, chi.sinh(), chi.cosh())).max_abs() < 1e-15);
    }

    #[test]
    fn rejects_non_lorentz_matrix() {
        let mut m = LorentzMap::identity().matrix().to_owned();
        m[0][0] = 2.0;
        assert!(matches!(LorentzMap::new(m), Err(Error::InvalidLorentzMap(_))));
        // time reversal preserves G but is not orthochronous
        let mut m = LorentzMap::identity().matrix().to_owned();
        m[3][3] = -1.0;
        m[0][0] = -1.0;
        assert!(LorentzMap::new(m).is_err());
    }

    #[test]
    fn inverse_and_compose() {
        let l = LorentzMap::boost(0, 0.4)
            .compose(&LorentzMap::rotation(1, 0.7))
            .compose(&LorentzMap::boost(2, -1.1));
        assert!(l.metric_defect() < 1e-12);
        let id = l.compose(&l.inverse());
        for (i, row) in id.matrix().iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((e - t).abs() < 1e-12);
            }
        }
        assert!(LorentzMap::new(*l.matrix()).is_ok());
    }

    #[test]
    fn sup_pairing_matches_classification() {
        assert!(sup_cone_pairing(MinkowskiVector::new(0.0, 0.0, 0.0, 1.0)) < 0.0);
        assert_eq!(sup_cone_pairing(MinkowskiVector::new(1.0, 0.0, 0.0, 1.0)), 0.0);
        assert!(sup_cone_pairing(MinkowskiVector::new(2.0, 0.0, 0.0, 1.0)) > 0.0);
    }
}
