use std::sync::OnceLock;

use proptest::prelude::*;

use qlmass::ah_metric::AHFamily;
use qlmass::embed_h3::{boost_surface, embed_surface, Branch, EmbeddedSurface};
use qlmass::exhaustion::cone_pairing_report;
use qlmass::killing_spinor::KillingNormField;
use qlmass::lorentz::{
    causal_classify, default_causal_tolerance, hopf_eta, hyperboloid_point, LorentzMap, MinkowskiVector, SpinorParameter,
};
use qlmass::quadrature::QuadratureGrid;
use qlmass::quasilocal::by_mass;
use qlmass::sphere_geometry::{coordinate_sphere, SurfaceSample};

fn lorentz_map() -> impl Strategy<Value = LorentzMap> {
    (0..3usize, -3.0..3.0f64, 0..3usize, -1.5..1.5f64, 0..3usize, -3.0..3.0f64).prop_map(|(a, r1, b, chi, c, r2)| {
        LorentzMap::rotation(a, r1)
            .compose(&LorentzMap::boost(b, chi))
            .compose(&LorentzMap::rotation(c, r2))
    })
}

fn vector() -> impl Strategy<Value = MinkowskiVector> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c, t)| MinkowskiVector::new(a, b, c, t))
}

fn spinor() -> impl Strategy<Value = SpinorParameter> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-2)
        .prop_map(|(a, b, c, d)| SpinorParameter::from_reals(a, b, c, d))
}

fn ads_surface() -> &'static (QuadratureGrid, SurfaceSample, EmbeddedSurface) {
    static CELL: OnceLock<(QuadratureGrid, SurfaceSample, EmbeddedSurface)> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = QuadratureGrid::new(32, 4).unwrap();
        let s = coordinate_sphere(&AHFamily::AdsSchwarzschild { m: 1.0 }, 0.15, &grid).unwrap();
        let emb = embed_surface(&s, Branch::Plus, &grid).unwrap();
        (grid, s, emb)
    })
}

proptest! {
    #[test]
    fn pairing_is_preserved(map in lorentz_map(), a in vector(), b in vector()) {
        let lhs = map.apply(a).inner(map.apply(b));
        let scale = 1.0 + map.apply(a).max_abs() * map.apply(b).max_abs();
        prop_assert!((lhs - a.inner(b)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn restricted_maps_keep_the_causal_class(map in lorentz_map(), v in vector()) {
        // stay clear of the classification band so rounding cannot move the tag
        prop_assume!(v.norm_sq().abs() > 1e-3 && v.max_abs() > 1e-3);
        let w = map.apply(v);
        prop_assert_eq!(
            causal_classify(w, default_causal_tolerance(w)),
            causal_classify(v, default_causal_tolerance(v))
        );
    }

    #[test]
    fn hopf_vectors_are_future_null(z in spinor()) {
        let eta = hopf_eta(&z);
        prop_assert!(eta.t > 0.0);
        prop_assert!(eta.norm_sq().abs() <= 1e-14 * eta.t * eta.t);
        let back = hopf_eta(&SpinorParameter::from_null(eta).unwrap());
        prop_assert!((back - eta).max_abs() <= 1e-13 * eta.t);
    }

    #[test]
    fn norm_field_is_positive_on_the_hyperboloid(z in spinor(), r in 0.0..4.0f64, th in 0.0..std::f64::consts::PI, ph in 0.0..std::f64::consts::TAU) {
        let field = KillingNormField::new(z).unwrap();
        prop_assert!(field.eval(hyperboloid_point(r, th, ph)) > 0.0);
    }

    #[test]
    fn cone_tag_matches_classification(v in vector(), scale in -12i32..2) {
        let v = v * 10f64.powi(scale);
        prop_assert_eq!(cone_pairing_report(v, 256).tag, causal_classify(v, default_causal_tolerance(v)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn brown_york_vector_is_equivariant(map in lorentz_map()) {
        let (grid, s, emb) = ads_surface();
        let m = by_mass(s, emb, grid).unwrap();
        let moved = by_mass(s, &boost_surface(&map, emb).unwrap(), grid).unwrap();
        prop_assert!((moved - map.apply(m)).max_abs() <= 1e-10 * (1.0 + m.max_abs()));
    }
}
