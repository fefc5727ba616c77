use cuspkit::hmodel::C64;
use cuspkit::triangulate::words::{free_reduce, inverse_word, parse_word, word_to_string};
use cuspkit::triangulate::*;
use cuspkit::Error;
use serde_json::Value;
use std::f64::consts::PI;
use std::path::PathBuf;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

fn reference() -> Value {
    serde_json::from_str(&read("reference.json")).unwrap()
}

/// Lobachevsky function from its Fourier series, summed far enough for 1e-12.
fn lobachevsky_series(theta: f64) -> f64 {
    let mut s = 0.0;
    for n in 1..=2_000_000u64 {
        let n = n as f64;
        s += (2.0 * n * theta).sin() / (n * n);
    }
    0.5 * s
}

/// Bloch-Wigner dilogarithm via numerical integration of the Lobachevsky form.
fn ideal_tetrahedron_volume(z: C64) -> f64 {
    let one = C64::new(1.0, 0.0);
    let a = z.arg();
    let b = (one / (one - z)).arg();
    let c = PI - a - b;
    lobachevsky_series(a) + lobachevsky_series(b) + lobachevsky_series(c)
}

fn solve(name: &str) -> (IdealTriangulation, ShapeVector) {
    let tri = parse_triangulation(&read(name)).unwrap();
    let sh = solve_shapes(&tri).unwrap();
    (tri, sh)
}

/// Residuals of the `edge` lines of a file, evaluated without the library's equation system.
fn edge_residuals(text: &str, z: &[C64]) -> Vec<f64> {
    let one = C64::new(1.0, 0.0);
    text.lines()
        .filter(|l| l.starts_with("edge "))
        .map(|l| {
            let v: Vec<i64> = l.split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect();
            let n = z.len();
            let mut s = C64::new(0.0, v[2 * n] as f64 * PI - 2.0 * PI);
            for i in 0..n {
                s += z[i].ln() * v[2 * i] as f64 + (one - z[i]).ln() * v[2 * i + 1] as f64;
            }
            s.norm()
        })
        .collect()
}

#[test]
fn figure_eight_volume_matches_series_oracle() {
    let (_, sh) = solve("fig8.tri");
    let oracle = 6.0 * lobachevsky_series(PI / 3.0);
    assert!((volume(&sh) - oracle).abs() < 1e-9, "{} vs {oracle}", volume(&sh));
    assert!((oracle - 2.029883212819).abs() < 1e-9);
}

#[test]
fn alternative_figure_eight_triangulation_agrees() {
    let (_, a) = solve("fig8.tri");
    let (tri, b) = solve("fig8_alt.tri");
    assert_eq!(tri.n, 3);
    assert!((volume(&a) - volume(&b)).abs() < 1e-9);
}

#[test]
fn volumes_match_reference_and_series() {
    let r = reference();
    for name in ["fig8", "p333", "p555", "p777", "whitehead", "fig7link", "twistfamily"] {
        let (_, sh) = solve(&format!("{name}.tri"));
        let series: f64 = sh.z.iter().map(|&z| ideal_tetrahedron_volume(z)).sum();
        assert!((volume(&sh) - series).abs() < 1e-8, "{name}: {} vs series {series}", volume(&sh));
        if let Some(v) = r["manifolds"][name]["volume"].as_f64() {
            assert!((volume(&sh) - v).abs() < 1e-9, "{name}: {} vs reference {v}", volume(&sh));
        }
    }
}

#[test]
fn solutions_are_geometric_with_small_residual() {
    for name in ["fig8", "p333", "p555", "p777", "whitehead", "fig7link", "twistfamily"] {
        let text = read(&format!("{name}.tri"));
        let (_, sh) = solve(&format!("{name}.tri"));
        assert!(sh.geometric, "{name}");
        assert!(sh.z.iter().all(|z| z.im > 0.0), "{name}");
        let worst = edge_residuals(&text, &sh.z).into_iter().fold(0.0, f64::max);
        assert!(worst < 1e-10, "{name}: edge residual {worst}");
    }
}

#[test]
fn empty_file_is_a_parse_error() {
    assert!(matches!(parse_triangulation(&read("empty.tri")), Err(Error::Parse { .. })));
    assert!(matches!(parse_triangulation("tetrahedra 1\nedge 1 2\n"), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn dehn_filling_matches_reference_volume() {
    let r = reference();
    let tri = parse_triangulation(&read("twistfamily.tri")).unwrap();
    let k = tri.drilled_cusp().expect("drilled cusp");
    let series = r["manifolds"]["twistfamily"]["series"].as_array().unwrap();
    for p in [5i64, 10] {
        let want = series.iter().find(|s| s["p"] == p).unwrap()["volume"].as_f64().unwrap();
        let sh = solve_shapes(&tri.with_filling(k, 1, p).unwrap()).unwrap();
        assert!((volume(&sh) - want).abs() < 1e-8, "p = {p}: {} vs {want}", volume(&sh));
    }
}

#[test]
fn holonomy_relators_hold() {
    let (tri, sh) = solve("p333.tri");
    let rep = build_holonomy(&tri, &sh).unwrap();
    assert!(rep.relator_residual() < 1e-9);
    let bundled = parse_holonomy(&read("p333.hol")).unwrap();
    assert!(bundled.relator_residual() < 1e-9);
    assert_eq!(bundled.num_generators(), rep.num_generators());
    let again = parse_holonomy(&write_holonomy(&bundled)).unwrap();
    assert_eq!(again.num_generators(), bundled.num_generators());
    assert!(again.relator_residual() < 1e-9);
}

#[test]
fn peripheral_elements_commute() {
    for name in ["fig8", "whitehead", "p333"] {
        let (tri, sh) = solve(&format!("{name}.tri"));
        let rep = build_holonomy(&tri, &sh).unwrap();
        for c in &rep.cusps {
            let m = rep.evaluate(&c.meridian);
            let l = rep.evaluate(&c.longitude);
            assert!((m * l).approx_eq(&(l * m), 1e-9) || (m * l).approx_eq(&(l * m).neg(), 1e-9), "{name}");
            // parabolic: trace +-2
            assert!((m.trace().norm() - 2.0).abs() < 1e-8, "{name}: tr {}", m.trace());
        }
    }
}

#[test]
fn word_round_trip() {
    let w = parse_word("abACbBc").unwrap();
    assert_eq!(word_to_string(&w), "abACbBc");
    assert_eq!(free_reduce(&[w.clone(), inverse_word(&w)].concat()), Vec::<i32>::new());
}
