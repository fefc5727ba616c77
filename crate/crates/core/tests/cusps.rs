use cuspkit::cusps::*;
use cuspkit::hmodel::{Tolerance, C64};
use cuspkit::horoballs::{max_diameters, maximal_scale, EnumOptions};
use cuspkit::Manifold;
use proptest::prelude::*;
use serde_json::Value;
use std::path::PathBuf;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn load(name: &str) -> Manifold {
    Manifold::load(&data(&format!("{name}.tri")), Tolerance::default()).unwrap()
}

fn reference(name: &str) -> Value {
    let r: Value = serde_json::from_str(&std::fs::read_to_string(data("reference.json")).unwrap()).unwrap();
    r["manifolds"][name].clone()
}

fn maximal_shape(m: &Manifold, k: usize) -> CuspShape {
    let max = max_diameters(m, &EnumOptions::default()).unwrap();
    m.cusp_shape(k).unwrap().at_scale(maximal_scale(&max, k).unwrap())
}

/// Shortest lambda + k mu by exhaustive search over a generous window.
fn brute_force_k(mu: C64, lambda: C64) -> i64 {
    let window = (lambda.norm() / mu.norm()).ceil() as i64 + 50;
    let mut best = (lambda.norm(), 0i64);
    for k in -window..=window {
        let len = (lambda + mu * k as f64).norm();
        let tie = (len - best.0).abs() <= 1e-12 * best.0;
        let preferred = k.abs() < best.1.abs() || (k.abs() == best.1.abs() && k > best.1);
        if (!tie && len < best.0) || (tie && preferred) {
            best = (len, k);
        }
    }
    best.1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn minimal_l_curve_matches_brute_force(
        r in 0.2f64..3.0, theta in 0.0f64..std::f64::consts::TAU, x in -8.0f64..8.0, y in 0.05f64..6.0, scale in 0.1f64..4.0
    ) {
        let mu = C64::from_polar(r, theta);
        let lambda = mu * C64::new(x, y);
        let shape = CuspShape::new(0, mu, lambda, scale).unwrap();
        prop_assert_eq!(minimal_l_curve(&shape).k, brute_force_k(mu, lambda));
    }

    #[test]
    fn width_times_length_is_area(r in 0.2f64..3.0, x in -3.0f64..3.0, y in 0.1f64..4.0, k in -5i64..5, scale in 0.1f64..4.0) {
        let mu = C64::new(r, 0.0);
        let shape = CuspShape::new(0, mu, mu * C64::new(x, y), scale).unwrap();
        let c = LCurve { k };
        let (p, q) = c.slope();
        let len = slope_length(&shape, p, q).unwrap();
        prop_assert!((width(&shape, c) * len - shape.area()).abs() <= 1e-12 * shape.area());
    }
}

#[test]
fn zero_slope_is_rejected() {
    let s = CuspShape::new(0, C64::new(1.0, 0.0), C64::new(0.0, 2.0), 1.0).unwrap();
    assert_eq!(slope_length(&s, 0, 0), Err(cuspkit::Error::ZeroSlope));
    assert!(CuspShape::new(0, C64::new(1.0, 0.0), C64::new(2.0, 0.0), 1.0).is_err());
}

#[test]
fn intersection_numbers() {
    assert_eq!(intersection_number((1, 0), (0, 1)), 1);
    assert_eq!(intersection_number((3, 1), (-3, 1)), 6);
    assert_eq!(intersection_number((2, 4), (1, 2)), 0);
}

#[test]
fn figure_eight_maximal_cusp() {
    let m = load("fig8");
    let s = maximal_shape(&m, 0);
    let r = &reference("fig8")["max_cusp"];
    let check = |got: f64, key: &str| {
        let want = r[key].as_f64().unwrap();
        assert!((got - want).abs() < 1e-6, "{key}: {got} vs {want}");
    };
    check(slope_length(&s, 1, 0).unwrap(), "meridian_length");
    check(slope_length(&s, 0, 1).unwrap(), "longitude_length");
    check(s.area(), "area");
    // the maximal figure-eight cusp has area 2 sqrt 3 and meridian 1
    assert!((s.area() - 2.0 * 3f64.sqrt()).abs() < 1e-6);
}

#[test]
fn pretzel_cusps_match_reference() {
    for name in ["p333", "p555", "p777"] {
        let m = load(name);
        let s = maximal_shape(&m, 0);
        let r = &reference(name)["max_cusp"];
        for (got, key) in [
            (slope_length(&s, 1, 0).unwrap(), "meridian_length"),
            (slope_length(&s, 0, 1).unwrap(), "longitude_length"),
            (s.area(), "area"),
            (width(&s, LCurve::longitude()), "width"),
        ] {
            let want = r[key].as_f64().unwrap();
            assert!((got - want).abs() < 1e-6, "{name} {key}: {got} vs {want}");
        }
        // the cusp shape, in the reference convention
        let tau = s.shape();
        let want = &reference(name)["cusps"][0]["shape"];
        let (re, im) = (want[0].as_f64().unwrap(), want[1].as_f64().unwrap());
        assert!((tau.re - re).abs() < 1e-6 && (tau.im.abs() - im).abs() < 1e-6, "{name}: {tau} vs {re}+{im}i");
    }
}

#[test]
fn whitehead_balanced_widths_are_equal() {
    let m = load("whitehead");
    let r = balance_cusps(&m, None, &EnumOptions::default()).unwrap();
    assert_eq!(r.cusps, vec![0, 1]);
    assert!((r.widths[0] - r.widths[1]).abs() < 1e-9);
    assert!(r.witness.is_some());
    // the two cusps are exchanged by a symmetry, so the scales agree too
    assert!((r.scales[0] - r.scales[1]).abs() < 1e-6);
}

#[test]
fn balanced_scales_are_tangent_and_embedded() {
    for name in ["whitehead", "fig7link"] {
        let m = load(name);
        let r = balance_cusps(&m, None, &EnumOptions::default()).unwrap();
        let mut scales = vec![0.0; m.num_cusps()];
        for (i, &k) in r.cusps.iter().enumerate() {
            scales[k] = r.scales[i];
        }
        let e = cuspkit::horoballs::embedded_at(&m, &scales, &EnumOptions::default()).unwrap();
        assert!(e.is_embedded(), "{name}: {e:?}");
        let w = r.witness.expect("tangency witness");
        assert!(w.distance.abs() < 1e-6, "{name}: {}", w.distance);
    }
}
