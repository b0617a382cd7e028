use serde::{Deserialize, Serialize};

use crate::lorentz::{default_causal_tolerance, CausalClass, MinkowskiVector};

/// `n` points of the Fibonacci lattice on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * k as f64;
            [r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

/// The null vectors `(ω, 1)` over a Fibonacci set of directions.
pub fn cone_samples(n: usize) -> Vec<MinkowskiVector> {
    fibonacci_sphere(n)
        .into_iter()
        .map(|w| MinkowskiVector::from_spatial(w, 1.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub max_pairing: f64,
    pub min_pairing: f64,
    pub tag: CausalClass,
}

/// Samples `<<v, η>>` over `η ∈ C+ ∩ {t = 1}` and derives the causal tag
/// from the signs: pairing `<= 0` everywhere means future causal, `>= 0`
/// past causal, mixed signs spacelike. Uses the default tolerance.
pub fn cone_pairing_report(v: MinkowskiVector, n_samples: usize) -> ConeReport {
    cone_pairing_report_with(v, n_samples, default_causal_tolerance(v))
}

/// [`cone_pairing_report`] with an explicit tolerance `tol`, matching
/// `causal_classify(v, tol)`.
///
/// Besides the Fibonacci set, the directions `±v_x/|v_x|` are sampled, where
/// the pairing attains its extrema `-|v_x| - v_t` and `|v_x| - v_t`. Their
/// product is `-<<v, v>>`; a vector is tagged null when it lies in the
/// tolerance band.
pub fn cone_pairing_report_with(v: MinkowskiVector, n_samples: usize, tol: f64) -> ConeReport {
    let mut samples = cone_samples(n_samples.max(1));
    let r = v.spatial_norm();
    if r > 0.0 {
        let d = [v.x1 / r, v.x2 / r, v.x3 / r];
        samples.push(MinkowskiVector::from_spatial(d, 1.0));
        samples.push(MinkowskiVector::from_spatial([-d[0], -d[1], -d[2]], 1.0));
    }
    let mut max_pairing = f64::NEG_INFINITY;
    let mut min_pairing = f64::INFINITY;
    for eta in samples {
        let p = v.inner(eta);
        max_pairing = max_pairing.max(p);
        min_pairing = min_pairing.min(p);
    }
    let tag = if v.max_abs() <= tol {
        CausalClass::Zero
    } else if (max_pairing * min_pairing).abs() <= tol {
        if max_pairing + min_pairing < 0.0 {
            CausalClass::FutureNull
        } else {
            CausalClass::PastNull
        }
    } else if max_pairing < 0.0 {
        CausalClass::FutureTimelike
    } else if min_pairing > 0.0 {
        CausalClass::PastTimelike
    } else {
        CausalClass::Spacelike
    };
    ConeReport {
        max_pairing,
        min_pairing,
        tag,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::causal_classify;
    use proptest::prelude::*;

    #[test]
    fn fibonacci_points_are_unit_and_balanced() {
        let pts = fibonacci_sphere(1024);
        let mut c = [0.0; 3];
        for p in &pts {
            assert!((p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0).abs() < 1e-14);
            for i in 0..3 {
                c[i] += p[i];
            }
        }
        assert!(c.iter().all(|v| v.abs() < 1e-2 * 1024.0));
        assert_eq!(fibonacci_sphere(1024), pts);
    }

    #[test]
    fn sampled_extrema_are_exact() {
        let v = MinkowskiVector::new(0.3, -1.2, 0.7, 0.4);
        let r = cone_pairing_report(v, 16);
        assert!((r.max_pairing - (v.spatial_norm() - v.t)).abs() < 1e-15);
        assert!((r.min_pairing + v.spatial_norm() + v.t).abs() < 1e-15);
    }

    #[test]
    fn report_examples() {
        let r = cone_pairing_report(MinkowskiVector::new(0.0, 0.0, 0.0, 1.0), 1024);
        assert_eq!(r.max_pairing, -1.0);
        assert_eq!(r.tag, CausalClass::FutureTimelike);
        let r = cone_pairing_report(MinkowskiVector::new(1.0, 0.0, 0.0, 1.0), 1024);
        assert_eq!(r.max_pairing, 0.0);
        assert_eq!(r.tag, CausalClass::FutureNull);
        let r = cone_pairing_report(MinkowskiVector::new(2.0, 0.0, 0.0, 1.0), 1024);
        assert!(r.max_pairing > 0.0);
        assert_eq!(r.tag, CausalClass::Spacelike);
        assert_eq!(cone_pairing_report(MinkowskiVector::ZERO, 16).tag, CausalClass::Zero);
        assert_eq!(
            cone_pairing_report(MinkowskiVector::new(0.0, 0.3, 0.0, -1.0), 64).tag,
            CausalClass::PastTimelike
        );
    }

    #[test]
    fn tiny_vectors_follow_the_quadratic_band() {
        let v = MinkowskiVector::new(0.0, 0.0, 2e-10, -1.1e-9);
        let c = causal_classify(v, default_causal_tolerance(v));
        assert_eq!(c, CausalClass::PastNull);
        assert_eq!(cone_pairing_report(v, 1024).tag, c);
        let wide = 1e-6;
        assert_eq!(cone_pairing_report_with(v, 1024, wide).tag, CausalClass::Zero);
    }

    proptest! {
        #[test]
        fn agrees_with_classification(
            x in prop::array::uniform3(-3.0..3.0f64), t in -3.0..3.0f64, scale in -12i32..2,
        ) {
            let v = MinkowskiVector::from_spatial(x, t) * 10f64.powi(scale);
            let c = causal_classify(v, default_causal_tolerance(v));
            prop_assert_eq!(cone_pairing_report(v, 64).tag, c);
        }
    }
}
