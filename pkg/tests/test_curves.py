import math

import numpy as np
import pytest

from warpgeo.curves import (
    ParamCurve,
    Polyline,
    coord_line,
    curve_from_json,
    curve_length,
    curve_to_json,
    fiber_circle,
    meridian,
    polyline_from_json,
    polyline_length,
    polyline_length_gl5,
    polyline_to_json,
    theta_arc,
)
from warpgeo.errors import ExtremeAtPole
from warpgeo.geometry import ConstantWarp, ExtremeWarp, Point, SequenceWarp
from warpgeo.quadrature import QuadratureConfig

BETA = 2.0


def fiber_curve(r):
    return ParamCurve((fiber_circle(r, 0.0),))


def test_fiber_length_equator():
    L, err = curve_length(SequenceWarp(a=1.0, beta=BETA), fiber_curve(math.pi / 2))
    assert L == pytest.approx(4 * math.pi, rel=1e-12)
    assert err <= 1e-9


@pytest.mark.parametrize("a", [1.0, 0.125, 2.0**-20])
def test_fiber_length_pole_closed_form(a):
    w = SequenceWarp(a=a, beta=BETA)
    L, _ = curve_length(w, fiber_curve(0.0))
    expected = 2 * math.pi * (math.log((1 + a) / a) + BETA)
    assert L == pytest.approx(expected, rel=1e-10)


def test_meridian_length_warp_independent():
    for w in (ConstantWarp(1.0), SequenceWarp(a=0.5, beta=BETA), ExtremeWarp(beta=BETA)):
        L, _ = curve_length(w, ParamCurve((meridian(0.0, 0.0),)))
        assert L == pytest.approx(math.pi, rel=1e-10)


def test_extreme_fiber_at_pole_raises():
    with pytest.raises(ExtremeAtPole):
        curve_length(ExtremeWarp(beta=BETA), fiber_curve(0.0))


def test_extreme_path_through_pole():
    """A two-leg over-the-pole path stays integrable for the extreme warp:
    both legs end on the pole fiber, where only the singular endpoints of the
    quadrature see the warp blow-up (the fiber velocity vanishes there)."""
    a = coord_line(Point(0.5, 0.0, 0.0), Point(0.0, math.pi, 0.0))
    b = coord_line(Point(0.0, math.pi, 0.0), Point(0.5, math.pi, 0.0))
    L, _ = curve_length(ExtremeWarp(beta=BETA), ParamCurve((a, b)))
    assert L >= 1.0 - 1e-9  # two radial legs of 0.5 each, plus any θ cost


def test_extreme_segment_crossing_pole_interior():
    seg = coord_line(Point(0.3, 0.0, 0.0), Point(-0.0, 0.0, 0.0))
    assert seg.pole_params == ()
    crossing = coord_line(Point(0.3, 0.0, 0.0), Point(0.0, 0.0, 0.0))
    curve = ParamCurve((crossing,))
    L, _ = curve_length(ExtremeWarp(beta=BETA), curve)
    assert L == pytest.approx(0.3, rel=1e-10)


def test_curve_junction_validation():
    with pytest.raises(ValueError):
        ParamCurve((meridian(0.0, 0.0), fiber_circle(0.5, 1.0)))


def test_theta_arc_length():
    w = SequenceWarp(a=1.0, beta=BETA)
    L, _ = curve_length(w, ParamCurve((theta_arc(math.pi / 2, 0.0, 0.0, math.pi / 2),)))
    assert L == pytest.approx(math.pi / 2, rel=1e-12)
    L, _ = curve_length(w, ParamCurve((theta_arc(math.pi / 6, 0.0, 0.0, 1.0),)))
    assert L == pytest.approx(math.sin(math.pi / 6) * 1.0, rel=1e-12)


def test_polyline_lengths_agree():
    pts = (
        Point(0.4, 0.1, 0.2),
        Point(0.9, 0.4, 0.9),
        Point(1.4, 0.2, 1.8),
        Point(2.0, 6.0, 2.5),
    )
    poly = Polyline(pts)
    w = SequenceWarp(a=0.25, beta=BETA)
    fast = polyline_length_gl5(w, poly)
    slow, err = polyline_length(w, poly)
    assert fast == pytest.approx(slow, rel=1e-8)


def test_polyline_short_arc_wrap():
    """Edges take the short way around in both angles."""
    poly = Polyline((Point(1.0, 0.1, 0.1), Point(1.0, 2 * math.pi - 0.1, 2 * math.pi - 0.1)))
    L, _ = polyline_length(ConstantWarp(1.0), poly)
    assert L <= math.sqrt((0.2 * math.sin(1.0)) ** 2 + 0.2**2) + 1e-9


def test_degenerate_polyline():
    poly = Polyline((Point(1.0, 0.0, 0.0),))
    assert poly.degenerate
    assert polyline_length_gl5(ConstantWarp(1.0), poly) == 0.0
    assert polyline_length(ConstantWarp(1.0), poly) == (0.0, 0.0)


def test_curve_json_roundtrip():
    curve = ParamCurve((meridian(0.3, 0.7, 0.2, 2.0),))
    payload = curve_to_json(curve)
    rebuilt = curve_from_json(payload)
    w = ConstantWarp(1.0)
    L0, _ = curve_length(w, curve)
    L1, _ = curve_length(w, rebuilt)
    assert L1 == pytest.approx(L0, rel=1e-6)


def test_polyline_json_roundtrip():
    poly = Polyline((Point(0.4, 0.1, 0.2), Point(0.9, 0.4, 0.9)))
    rebuilt = polyline_from_json(polyline_to_json(poly))
    assert rebuilt.vertices[0].as_tuple() == pytest.approx(poly.vertices[0].as_tuple())
    assert rebuilt.vertices[1].as_tuple() == pytest.approx(poly.vertices[1].as_tuple())


def test_quadrature_exactness_constant_integrands():
    """Constant-speed curves reproduce closed forms to 1e-10 relative."""
    w = SequenceWarp(a=1.0, beta=BETA)
    cases = [
        (fiber_curve(math.pi / 2), 2 * math.pi * BETA),
        (ParamCurve((theta_arc(math.pi / 2, 0.0, 0.0, 2.0),)), 2.0),
        (ParamCurve((meridian(0.1, 0.1, 0.2, 3.0),)), 2.8),
    ]
    for curve, expected in cases:
        L, _ = curve_length(w, curve)
        assert L == pytest.approx(expected, rel=1e-10)
