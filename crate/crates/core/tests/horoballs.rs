use cuspkit::cusps::balance_cusps;
use cuspkit::hmodel::{BoundaryPoint, Tolerance, C64};
use cuspkit::horoballs::*;
use cuspkit::Manifold;
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::PathBuf;

const BUNDLED: [&str; 8] = ["fig8", "fig8_alt", "p333", "p555", "p777", "whitehead", "fig7link", "twistfamily"];

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

fn balanced_scales(m: &Manifold) -> Vec<f64> {
    let r = balance_cusps(m, None, &EnumOptions::default()).unwrap();
    let mut scales = vec![0.0; m.num_cusps()];
    for (i, &k) in r.cusps.iter().enumerate() {
        scales[k] = r.scales[i];
    }
    scales
}

fn counts(d: &HoroballDiagram) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for b in &d.balls {
        *out.entry(format!("{:.4}", b.diameter)).or_insert(0) += 1;
    }
    out
}

#[test]
fn counts_match_reference_diagrams() {
    for name in ["fig8", "p333", "p555", "p777"] {
        let m = load(name);
        let d = enumerate(&m, 0, &balanced_scales(&m), 0.2, &EnumOptions::default()).unwrap();
        assert!(d.verified, "{name}");
        let want: BTreeMap<String, u64> = reference(name)["horoball_counts_0.2"]
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.as_u64().unwrap()))
            .collect();
        assert_eq!(counts(&d), want, "{name}");
    }
}

#[test]
fn enumeration_is_deterministic_and_depth_stable() {
    for name in BUNDLED {
        let m = load(name);
        let scales = balanced_scales(&m);
        let opts = EnumOptions::default();
        let deeper = EnumOptions { initial_depth: 8, prune_factor: 0.4, ..opts };
        for k in m.complete_cusps() {
            let a = enumerate(&m, k, &scales, 0.25, &opts).unwrap();
            let b = enumerate(&m, k, &scales, 0.25, &opts).unwrap();
            assert_eq!(a, b, "{name} cusp {k}: repeated enumeration differs");
            assert!(a.verified, "{name} cusp {k}");
            let c = enumerate(&m, k, &scales, 0.25, &deeper).unwrap();
            assert_eq!(a.balls.len(), c.balls.len(), "{name} cusp {k}: deeper search changed the diagram");
            for (x, y) in a.balls.iter().zip(&c.balls) {
                assert!((x.center - y.center).norm() < 1e-9 && (x.diameter - y.diameter).abs() < 1e-9, "{name} cusp {k}: {x:?} vs {y:?}");
            }
        }
    }
}

#[test]
fn balls_lie_in_one_fundamental_domain() {
    let m = load("p333");
    let d = enumerate(&m, 0, &balanced_scales(&m), 0.2, &EnumOptions::default()).unwrap();
    for b in &d.balls {
        let (x, y) = d.lattice.coords(b.center);
        assert!((-1e-6..1.0 + 1e-6).contains(&x) && (-1e-6..1.0 + 1e-6).contains(&y), "{b:?}");
        assert!(b.diameter <= 1.0 + 1e-9);
    }
    // reference diagrams have meridian translation equal to the maximal meridian length
    let want = reference("p333")["max_cusp"]["meridian_length"].as_f64().unwrap();
    assert!((d.lattice.mu.norm() - want).abs() < 1e-6);
}

#[test]
fn p333_longitude_symmetry_and_full_sized_balls() {
    let m = load("p333");
    let d = enumerate(&m, 0, &balanced_scales(&m), 0.5, &EnumOptions::default()).unwrap();
    assert!(d.full_sized(m.tol.tangency) >= 6);
    let s = detect_symmetry(&d, (0, 1), 6, &m.tol).unwrap();
    assert!(s.verified);
    assert!(!detect_symmetry(&d, (0, 1), 5, &m.tol).unwrap().verified);
}

#[test]
fn large_cutoff_gives_no_balls() {
    let m = load("fig8");
    let d = enumerate(&m, 0, &balanced_scales(&m), 1.5, &EnumOptions::default()).unwrap();
    assert!(d.balls.is_empty());
}

#[test]
fn maximal_cusp_is_embedded_and_larger_one_is_not() {
    let m = load("p333");
    let scales = balanced_scales(&m);
    assert!(embedded_at(&m, &scales, &EnumOptions::default()).unwrap().is_embedded());
    let grown: Vec<f64> = scales.iter().map(|s| s * 1.01).collect();
    match embedded_at(&m, &grown, &EnumOptions::default()).unwrap() {
        Embeddedness::Overlap { distance, .. } => assert!(distance < 0.0),
        e => panic!("expected overlap, got {e:?}"),
    }
}

#[test]
fn tangency_points_are_on_both_horospheres() {
    let m = load("fig8");
    let d = enumerate(&m, 0, &balanced_scales(&m), 0.9, &EnumOptions::default()).unwrap();
    let g = tangencies(&d, &m.tol).unwrap();
    assert_eq!(g.neighbors_of_infinity().len(), d.full_sized(m.tol.tangency));
    for e in g.edges.iter().filter(|e| e.a == 0) {
        // tangent to the ball at infinity (height 1) at the top of a full-sized ball
        assert!((e.point.h - 1.0).abs() < 1e-7);
    }
    let p = tangency_point(C64::new(0.0, 0.0), 1.0, C64::new(1.0, 0.0), 1.0);
    assert!((p.z - C64::new(0.5, 0.0)).norm() < 1e-12 && (p.h - 0.5).abs() < 1e-12);
}

#[test]
fn json_and_svg_outputs() {
    let m = load("fig8");
    let d = enumerate(&m, 0, &balanced_scales(&m), 0.3, &EnumOptions::default()).unwrap();
    let j = d.to_json();
    for key in ["manifold", "cusp", "scales", "cutoff", "balls", "lattice", "verified"] {
        assert!(j.get(key).is_some(), "missing {key}");
    }
    assert_eq!(j["balls"].as_array().unwrap().len(), d.balls.len());
    let svg = d.to_svg();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.matches("<circle").count() >= d.balls.len());
}

#[test]
fn maximal_diameters_are_tangencies() {
    for name in ["fig8", "whitehead"] {
        let m = load(name);
        let max = max_diameters(&m, &EnumOptions::default()).unwrap();
        assert!(max.verified());
        for k in m.complete_cusps() {
            let e = max.get(k, k).unwrap();
            // at the maximal scale the largest ball touches the ball at infinity
            let t = maximal_scale(&max, k).unwrap();
            assert!((t * t * e.diameter - 1.0).abs() < 1e-12);
            assert!(matches!(BoundaryPoint::Finite(e.center), BoundaryPoint::Finite(_)));
        }
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(500))]

    #[test]
    fn shortest_vector_matches_brute_force(a in 0.2f64..3.0, b in -4.0f64..4.0, c in 0.1f64..4.0, theta in 0.0f64..std::f64::consts::TAU) {
        let rot = C64::from_polar(1.0, theta);
        let lat = Lattice { mu: rot * a, lambda: rot * C64::new(b, c) };
        let mut best = f64::INFINITY;
        for m in -40i64..=40 {
            for n in -40i64..=40 {
                if (m, n) != (0, 0) {
                    best = best.min(lat.vector(m, n).norm());
                }
            }
        }
        proptest::prop_assert!((lat.shortest() - best).abs() < 1e-9, "{} vs {best}", lat.shortest());
    }
}
