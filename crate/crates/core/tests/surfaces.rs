use cuspkit::cusps::{slope_length, CuspShape};
use cuspkit::hmodel::{apply_plane, GeodesicPlane, MoebiusMap, Tolerance, C64};
use cuspkit::horoballs::{EnumOptions, Lattice};
use cuspkit::surfaces::*;
use cuspkit::triangulate::parse_triangulation;
use cuspkit::{Error, Manifold};
use proptest::prelude::*;
use serde_json::Value;
use std::path::PathBuf;
use std::sync::OnceLock;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn load(name: &str) -> Manifold {
    Manifold::load(&data(&format!("{name}.tri")), Tolerance::default()).unwrap()
}

fn candidate(name: &str) -> SurfaceCandidate {
    SurfaceCandidate::load(&data(&format!("{name}.json"))).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const CANDIDATES: [(&str, &str); 4] = [
    ("p333", "p333_seifert"),
    ("whitehead", "whitehead_checkerboard"),
    ("fig7link", "fig7link_checkerboard_a"),
    ("fig7link", "fig7link_checkerboard_b"),
];

/// Reports for the embedded candidates, computed once.
fn reports() -> &'static Vec<(String, WidthTheoremReport)> {
    static R: OnceLock<Vec<(String, WidthTheoremReport)>> = OnceLock::new();
    R.get_or_init(|| {
        CANDIDATES
            .iter()
            .map(|(m, s)| (s.to_string(), width_theorem_report(&load(m), &candidate(s), &ReportOptions::default()).unwrap()))
            .collect()
    })
}

#[test]
fn translation_orbit_is_a_row_of_verticals() {
    let g = PlaneGroup::new(&[MoebiusMap::translation(c(2.0, 0.0))], None);
    let seed = GeodesicPlane::vertical(c(0.0, 0.0), c(0.0, 1.0)).unwrap();
    let opts = OrbitOptions { max_depth: 6, ..OrbitOptions::default() };
    let ls = orbit_planes(&g, &seed, &opts, &Tolerance::default());
    for p in &ls.planes {
        let GeodesicPlane::Vertical { base, .. } = p.plane else { panic!("{p:?}") };
        assert!((base.re / 2.0 - (base.re / 2.0).round()).abs() < 1e-12, "{base}");
    }
    assert!(ls.planes.len() >= 5);
}

#[test]
fn candidates_are_embedded_with_claimed_slopes() {
    for (name, r) in reports() {
        assert_eq!(r.classification, Classification::Embedded, "{name}");
        assert!(r.passed(), "{name}: {:?}", r.clauses);
    }
    let m = load("p333");
    let slopes = boundary_slopes(&m, &candidate("p333_seifert"), &OrbitOptions::default()).unwrap();
    assert_eq!(slopes, vec![(0, Some((0, 1)))]);
    // l-curves on both Whitehead cusps
    let m = load("whitehead");
    for (k, s) in boundary_slopes(&m, &candidate("whitehead_checkerboard"), &OrbitOptions::default()).unwrap() {
        assert_eq!(s.expect("meets every cusp").1.abs(), 1, "cusp {k}");
    }
}

#[test]
fn seifert_orbit_has_verticals_a_width_apart() {
    let m = load("p333");
    let ver = verify_invariant(&m, &candidate("p333_seifert"), &OrbitOptions::default()).unwrap();
    let shape = m.cusp_shape(0).unwrap();
    let r = &reports().iter().find(|(n, _)| n == "p333_seifert").unwrap().1;
    let (t, w) = (r.widths.as_ref().unwrap().scales[0], r.width.unwrap());
    // distance between consecutive parallel verticals, in the scaled chart
    let verts: Vec<(C64, C64)> = ver
        .liftset
        .scaled(t)
        .verticals()
        .map(|p| match *p {
            GeodesicPlane::Vertical { base, dir } => (base, dir),
            _ => unreachable!(),
        })
        .collect();
    assert!(!verts.is_empty());
    let dir = verts[0].1 / verts[0].1.norm();
    let mut offsets: Vec<f64> = Vec::new();
    for (b, _) in &verts {
        for k in -3..=3 {
            offsets.push(((b + shape.t_mu * t * k as f64) * dir.conj()).im);
        }
    }
    offsets.sort_by(f64::total_cmp);
    offsets.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let gaps: Vec<f64> = offsets.windows(2).map(|p| p[1] - p[0]).collect();
    let gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((gap - w).abs() < 1e-6, "gap {gap} vs width {w}");
}

#[test]
fn immersed_candidate_is_immersed() {
    let m = load("fig7link");
    let v = verify_invariant(&m, &candidate("fig7link_immersed"), &OrbitOptions::default()).unwrap();
    assert!(matches!(v.classification, Classification::Immersed { .. }), "{:?}", v.classification);
    let r = width_theorem_report(&m, &candidate("fig7link_immersed"), &ReportOptions::default()).unwrap();
    assert!(r.clauses.iter().all(|c| c.verdict == Verdict::Skipped));
}

#[test]
fn generic_plane_in_figure_eight_group_is_not_invariant() {
    let m = load("fig8");
    for seed in [
        GeodesicPlane::hemisphere(c(0.1234, 0.3071), 0.4417).unwrap(),
        GeodesicPlane::vertical(c(0.05, 0.11), c(1.0, 0.3719)).unwrap(),
    ] {
        let cand = SurfaceCandidate {
            name: None,
            seed,
            chart: 0,
            orientable: None,
            freeness: Freeness::Unknown,
            claimed_slope: None,
        };
        let v = verify_invariant(&m, &cand, &OrbitOptions::default()).unwrap();
        let Classification::NotInvariant { witness } = v.classification else { panic!("{:?}", v.classification) };
        assert!(!witness.reason.is_empty());
    }
}

#[test]
fn missing_cusp_and_synthetic_slope() {
    let lat = Lattice { mu: c(1.0, 0.0), lambda: c(0.3, 1.7) };
    let shape = CuspShape::new(0, lat.mu, lat.lambda, 1.0).unwrap();
    let hemi = PlaneLiftSet::from_planes(vec![GeodesicPlane::hemisphere(c(0.2, 0.2), 0.3).unwrap()], Some(lat));
    assert_eq!(boundary_slope(&hemi, &shape), Err(Error::MissesCusp));
    let along_mu = PlaneLiftSet::from_planes(vec![GeodesicPlane::vertical(c(0.0, 0.5), lat.mu * 2.5).unwrap()], Some(lat));
    assert_eq!(boundary_slope(&along_mu, &shape), Ok((1, 0)));
}

#[test]
fn synthetic_fixture_has_exactly_one_trigon() {
    let f = SyntheticFixture::from_json(&std::fs::read_to_string(data("synthetic_trigon.json")).unwrap()).unwrap();
    let tol = Tolerance::default();
    let ngons = f.ngons(3, &tol);
    assert_eq!(ngons.iter().filter(|w| w.n == 3).count(), 1, "{ngons:?}");
    assert!(f.ngons(4, &tol).iter().all(|w| w.n != 2));
    // no tangencies, no n-gons
    let apart = SyntheticFixture {
        planes: vec![GeodesicPlane::hemisphere(c(0.5, 0.5), 0.2).unwrap()],
        ..f.clone()
    };
    assert!(apart.ngons(4, &tol).is_empty());
}

#[test]
fn bigons_never_appear_and_trigons_track_unit_width() {
    for (name, r) in reports() {
        assert_eq!(r.count(2), 0, "{name}");
        let w = r.width.unwrap();
        assert!(w >= 1.0 - 1e-6, "{name}: {w}");
        assert_eq!((w - 1.0).abs() < 1e-6, r.count(3) > 0, "{name}: w = {w}, {} 3-gons", r.count(3));
        let cand = candidate(name);
        if r.count(3) > 0 {
            assert_ne!(cand.orientable, Some(true), "{name}");
        }
        if matches!(cand.freeness, Freeness::Free | Freeness::Semifree) {
            assert!(w <= 2.0 - 1e-6, "{name}: {w}");
        }
    }
}

#[test]
fn witnesses_chain_through_tangencies() {
    for (name, r) in reports() {
        for w in &r.ngons {
            assert_eq!(w.planes.len(), w.n, "{name}");
            assert_eq!(w.balls.len(), w.n, "{name}");
            assert!(w.n >= 2);
            // a reducible chain would list a plane twice
            for i in 0..w.n {
                for j in i + 1..w.n {
                    assert_ne!(w.planes[i], w.planes[j], "{name}: repeated plane");
                }
            }
        }
    }
}

#[test]
fn pretzel_widths_increase_below_two() {
    let r: Value = serde_json::from_str(&std::fs::read_to_string(data("reference.json")).unwrap()).unwrap();
    let mut last = 0.0;
    for name in ["p333", "p555", "p777"] {
        let w = r["manifolds"][name]["max_cusp"]["width"].as_f64().unwrap();
        let m = load(name);
        let shape = {
            let max = cuspkit::horoballs::max_diameters(&m, &EnumOptions::default()).unwrap();
            m.cusp_shape(0).unwrap().at_scale(cuspkit::horoballs::maximal_scale(&max, 0).unwrap())
        };
        let got = shape.area() / slope_length(&shape, 0, 1).unwrap();
        assert!((got - w).abs() < 1e-6, "{name}");
        assert!(got > last && (1.0 - 1e-6..2.0 - 1e-6).contains(&got), "{name}: {got}");
        last = got;
    }
}

#[test]
fn twist_series_decays_with_area_identity() {
    let tri = parse_triangulation(&std::fs::read_to_string(data("twistfamily.tri")).unwrap()).unwrap();
    let ps: Vec<i64> = (5..=25).collect();
    let s = twist_series(&tri, &ps, &Tolerance::default(), &EnumOptions::default()).unwrap();
    assert!(s.skipped.is_empty(), "{:?}", s.skipped);
    assert_eq!(s.points.len(), ps.len());
    for pair in s.points.windows(2) {
        assert!(pair[1].width < pair[0].width);
        assert!(pair[1].eta_length > pair[0].eta_length);
    }
    for pt in &s.points {
        assert!((pt.width * pt.eta_length - pt.area).abs() < 1e-6, "p = {}", pt.p);
    }
    assert_eq!(s.below_one_from(), Some(5));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(data("reference.json")).unwrap()).unwrap();
    for want in r["manifolds"]["twistfamily"]["series"].as_array().unwrap() {
        let p = want["p"].as_i64().unwrap();
        if let Some(pt) = s.points.iter().find(|pt| pt.p == p) {
            for (got, key) in [(pt.width, "width"), (pt.eta_length, "eta_length"), (pt.area, "area"), (pt.volume, "volume")] {
                let w = want[key].as_f64().unwrap();
                assert!((got - w).abs() < 1e-6 * (1.0 + w.abs()), "p = {p} {key}: {got} vs {w}");
            }
        }
    }
    assert!(twist_series(&tri, &[], &Tolerance::default(), &EnumOptions::default()).is_err());
}

fn moebius() -> impl Strategy<Value = MoebiusMap> {
    let z = || (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| C64::new(a, b));
    (z(), z(), z(), z())
        .prop_filter("well conditioned", |(a, b, c, d)| {
            let det = a * d - b * c;
            det.norm() > 0.3 && (a.norm() + b.norm() + c.norm() + d.norm()) / det.norm().sqrt() < 8.0
        })
        .prop_map(|(a, b, c, d)| MoebiusMap::new(a, b, c, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn classification_is_conjugation_stable(g in moebius()) {
        for (mname, cname) in [("whitehead", "whitehead_checkerboard"), ("fig7link", "fig7link_immersed")] {
            let m = load(mname);
            let cand = candidate(cname);
            let before = verify_invariant(&m, &cand, &OrbitOptions::default()).unwrap().classification;
            let conj = Manifold::from_holonomy(mname, m.holonomy.conjugate(&g), m.tol).unwrap();
            // chart change: old chart to world, through g, into the new chart; it fixes infinity
            let d = (conj.chart(cand.chart).unwrap().to_chart * g * m.chart(cand.chart).unwrap().to_chart.inverse()).renormalized();
            prop_assert!(d.c.norm() < 1e-9 * d.norm());
            let d = MoebiusMap::new(d.a, d.b, C64::new(0.0, 0.0), d.d).unwrap();
            let seed = apply_plane(&d, &cand.seed);
            let moved = SurfaceCandidate { seed, ..cand.clone() };
            let after = verify_invariant(&conj, &moved, &OrbitOptions::default()).unwrap().classification;
            prop_assert_eq!(before.name(), after.name(), "{}", mname);
        }
    }
}
