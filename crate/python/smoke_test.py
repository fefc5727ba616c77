"""Smoke test for the cuspkit Python bindings.

Build and install first, e.g. `maturin build --release -m crates/py/Cargo.toml`
followed by `pip install` of the wheel. Run with `python python/smoke_test.py`
or under pytest.
"""

import json
import math
import pathlib

import cuspkit

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def path(name):
    return str(DATA / name)


def test_volume_and_shapes():
    m = cuspkit.Manifold.load(path("fig8.tri"))
    assert abs(m.volume - 2.029883212819) < 1e-9
    assert m.num_cusps == 1
    assert all(abs(z - complex(0.5, math.sqrt(3) / 2)) < 1e-9 for z in m.shapes)


def test_longitude_is_six():
    for name in ("p333.tri", "p555.tri", "p333.hol"):
        m = cuspkit.Manifold.load(path(name))
        assert abs(m.slope_length(0, 1) - 6.0) < 1e-6, name


def test_cusp_shape():
    s = cuspkit.CuspShape(1 + 0j, 6j)
    assert abs(s.slope_length(1, 1) - math.sqrt(37)) < 1e-12
    assert abs(s.width() * s.slope_length(0, 1) - s.area) < 1e-12
    assert cuspkit.intersection_number((1, 0), (0, 1)) == 1


def test_horoballs():
    m = cuspkit.Manifold.load(path("p333.tri"))
    d = m.horoballs(cutoff=0.5)
    assert d.verified and d.full_sized() >= 6
    assert d.has_symmetry((0, 1), 6)
    assert not d.has_symmetry((0, 1), 5)
    assert json.loads(d.to_json())["cusp"] == 0
    assert d.to_svg().startswith("<svg")


def test_surfaces():
    m = cuspkit.Manifold.load(path("p333.tri"))
    c = cuspkit.SurfaceCandidate.load(path("p333_seifert.json"))
    assert m.classify(c) == "embedded"
    r = m.surface_report(c)
    assert r["slopes"] == [[0, [0, 1]]]
    assert all(cl["verdict"] != "fail" for cl in r["clauses"])
    ngons = cuspkit.fixture_ngons(path("synthetic_trigon.json"), 3)
    assert sum(1 for w in ngons if w["n"] == 3) == 1


def test_twist_series():
    s = cuspkit.twist_series(path("twistfamily.tri"), list(range(5, 11)))
    widths = [p["width"] for p in s["points"]]
    assert all(b < a for a, b in zip(widths, widths[1:]))
    assert widths[0] < 1.0
    assert all(abs(p["width"] * p["eta_length"] - p["area"]) < 1e-6 * p["area"] for p in s["points"])


def test_errors():
    try:
        cuspkit.Manifold.load(path("empty.tri"))
    except ValueError:
        pass
    else:
        raise AssertionError("empty file accepted")
    s = cuspkit.CuspShape(1 + 0j, 2j)
    try:
        s.slope_length(0, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("zero slope accepted")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"ok {t.__name__}")
    print(f"{len(tests)} passed")
