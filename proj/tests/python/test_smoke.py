import json
import math

import pytest

import newton_sic as ns


def test_baseline_ua_resistance():
    est = ns.resistance(ns.baseline_ua(), target_error=1e-3)
    assert est.converged
    assert est.method == "deterministic-quadrature"
    assert abs(est.value - 0.593012) <= est.error + 1e-6


def test_surface_values():
    s = ns.baseline_ua()
    assert s.area == pytest.approx(1.0)
    assert s.value(5.0, 5.0) is None
    x0, y0, x1, y1 = s.bbox()
    assert s.contains(0.5 * (x0 + x1), y0 + 1e-3)


def test_json_round_trip():
    s = ns.besicovitch(3)
    text = s.to_json()
    doc = json.loads(text)
    assert doc["schema"] == "newton-sic/surface"
    back = ns.Surface.from_json(text)
    assert back.region_count == s.region_count
    assert back.area == pytest.approx(s.area, rel=1e-12)


def test_sic_report():
    ok = ns.sic_report(ns.baseline_ub(), samples=500)
    assert ok["certified"] and ok["violations"] == 0
    bad = ns.sic_report(ns.cone_fixture(), samples=200)
    assert bad["violations"] > 0


def test_bound_decreases_towards_half():
    values = [ns.bound(n) for n in (10.0, 1e3, 1e6)]
    assert values[0] > values[1] > values[2] > 0.5
    assert math.isfinite(values[2])


def test_export_formats():
    s = ns.baseline_ua()
    assert ns.export(s, "svg").lstrip().startswith("<svg")
    assert "\nv " in ns.export(s, "obj", 0.1)
    assert ns.export(s, "csv", 0.1).splitlines()[0] == "x1,x2,u"


def test_errors_are_translated():
    with pytest.raises(ns.NewtonSicError):
        ns.export(ns.baseline_ua(), "png")
    with pytest.raises(ns.NewtonSicError):
        ns.Surface.from_json('{"schema": "nope"}')
