import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from warpgeo.errors import ExtremeAtPole
from warpgeo.geometry import (
    ConstantWarp,
    ExtremeWarp,
    Point,
    SequenceWarp,
    Tangent,
    metric_norm,
    pole_distance,
    product_distance,
    product_distance_arrays,
    s1_distance,
    s2_distance,
    singular_envelope_threshold,
    warp_eval,
    warp_schedule,
)

# first up-crossings of -2 ln(sin x)·x^(1/m) = 1, frozen from a brentq scan
CROSSING = {2: 1.3479153335e-02, 3: 2.0358159404e-04, 4: 2.1571066711e-06}


def test_sequence_warp_values():
    w = SequenceWarp(a=1.0, beta=2.0)
    assert warp_eval(w, math.pi / 2) == pytest.approx(2.0, abs=1e-15)
    assert warp_eval(w, 0.0) == pytest.approx(math.log(2.0) + 2.0, rel=1e-15)
    assert warp_eval(w, math.pi) == pytest.approx(math.log(2.0) + 2.0, rel=1e-12)


def test_extreme_warp_values_and_pole_error():
    w = ExtremeWarp(beta=2.0)
    assert warp_eval(w, math.pi / 2) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(ExtremeAtPole):
        warp_eval(w, 0.0)
    with pytest.raises(ExtremeAtPole):
        warp_eval(w, math.pi)


def test_extreme_warp_clamped():
    w = ExtremeWarp(beta=2.0, clamp=True)
    expected = -2.0 * math.log(math.sin(w.r_min)) + 2.0
    assert warp_eval(w, 0.0) == pytest.approx(expected, rel=1e-12)
    assert warp_eval(w, math.pi) == pytest.approx(expected, rel=1e-9)


def test_warp_validation():
    with pytest.raises(ValueError):
        SequenceWarp(a=0.0)
    with pytest.raises(ValueError):
        SequenceWarp(a=1.0, beta=1.5)
    with pytest.raises(ValueError):
        ConstantWarp(0.0)


def test_point_normalization():
    p = Point(4.0, -0.5, 7.0)
    assert p.r == math.pi
    assert 0.0 <= p.theta < 2 * math.pi
    assert 0.0 <= p.phi < 2 * math.pi
    assert p.is_singular
    assert not Point(0.5, 0, 0).is_singular


@given(
    st.floats(min_value=1e-6, max_value=1.0),
    st.floats(min_value=1e-6, max_value=1.0),
    st.floats(min_value=1e-6, max_value=math.pi - 1e-6),
)
def test_warp_monotone_in_a(a, shrink, r):
    """Smaller a gives a pointwise larger warp, capped by the extreme warp."""
    a_small = a * shrink * 0.999999
    beta = 2.0
    f_big_a = SequenceWarp(a=a, beta=beta).value(r)
    f_small_a = SequenceWarp(a=a_small, beta=beta).value(r)
    f_inf = ExtremeWarp(beta=beta).value(r)
    assert f_big_a <= f_small_a <= f_inf


def test_warp_monotone_dense_grid():
    rs = np.linspace(1e-9, math.pi - 1e-9, 1000)
    beta = 2.0
    fa = SequenceWarp(a=0.25, beta=beta).value(rs)
    fa2 = SequenceWarp(a=0.125, beta=beta).value(rs)
    finf = ExtremeWarp(beta=beta).value(rs)
    assert np.all(fa <= fa2)
    assert np.all(fa2 <= finf)


@given(
    st.floats(min_value=0.05, max_value=math.pi - 0.05),
    st.floats(min_value=-2, max_value=2),
    st.floats(min_value=-2, max_value=2),
    st.floats(min_value=-2, max_value=2),
)
def test_metric_norm_monotone(r, dr, dth, dph):
    p = Point(r, 0.3, 0.4)
    v = Tangent(dr, dth, dph)
    n1 = metric_norm(SequenceWarp(a=0.5), p, v)
    n2 = metric_norm(SequenceWarp(a=0.25), p, v)
    n3 = metric_norm(ExtremeWarp(), p, v)
    assert n1 <= n2 * (1 + 1e-14) and n2 <= n3 * (1 + 1e-14)
    assert n1 >= 0


def test_metric_norm_examples():
    p = Point(math.pi / 2, 0.0, 0.0)
    assert metric_norm(ConstantWarp(1.0), p, Tangent(1, 0, 0)) == pytest.approx(1.0)
    assert metric_norm(ConstantWarp(1.0), p, Tangent(0, 1, 1)) == pytest.approx(math.sqrt(2))
    assert metric_norm(SequenceWarp(a=1.0, beta=2.0), p, Tangent(0, 0, 1)) == pytest.approx(2.0)


def test_pole_divergence():
    """f_a(0) = ln((1+a)/a) + β exceeds any threshold once a is small enough."""
    beta = 2.0
    for M in (10.0, 20.0, 40.0):
        a = (1.0 / (math.exp(M - beta) - 1.0)) * 0.5
        assert SequenceWarp(a=a, beta=beta).value(0.0) > M


def test_s1_distance_examples():
    assert s1_distance(0.0, math.pi) == pytest.approx(math.pi)
    assert s1_distance(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
    assert s1_distance(1.0, 2.5) == pytest.approx(1.5)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_s1_distance_metric(a, b, c):
    dab = s1_distance(a, b)
    assert 0.0 <= dab <= math.pi + 1e-12
    assert dab == pytest.approx(s1_distance(b, a))
    assert s1_distance(a, c) <= dab + s1_distance(b, c) + 1e-9


def test_s2_distance_examples():
    assert s2_distance(0.0, 0.0, math.pi, 1.0) == pytest.approx(math.pi)
    assert s2_distance(math.pi / 2, 0.0, math.pi / 2, math.pi / 2) == pytest.approx(math.pi / 2)
    assert s2_distance(math.pi / 2, 0.0, math.pi / 2, math.pi) == pytest.approx(math.pi)


def test_product_distance_examples():
    assert product_distance(
        Point(math.pi / 2, 0, 0), Point(math.pi / 2, 0, math.pi)
    ) == pytest.approx(math.pi)
    assert product_distance(Point(0, 0, 0), Point(math.pi, 0, 0)) == pytest.approx(math.pi)
    assert product_distance(
        Point(math.pi / 2, 0, 0), Point(math.pi / 2, math.pi / 2, math.pi / 2)
    ) == pytest.approx(math.pi / math.sqrt(2))


@given(
    st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi),
    st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi),
)
def test_product_distance_lower_bounds(r1, t1, f1, r2, t2, f2):
    """The product distance dominates the radial gap and the fiber gap."""
    p, q = Point(r1, t1, f1), Point(r2, t2, f2)
    d = product_distance(p, q)
    assert d + 1e-12 >= abs(p.r - q.r)
    assert d + 1e-12 >= s1_distance(p.phi, q.phi)


def test_product_distance_lower_bounds_bulk():
    rng = np.random.default_rng(7)
    n = 10_000
    r1, r2 = rng.uniform(0, math.pi, (2, n))
    t1, t2, f1, f2 = rng.uniform(0, 2 * math.pi, (4, n))
    d = product_distance_arrays(r1, t1, f1, r2, t2, f2)
    assert np.all(d + 1e-12 >= np.abs(r1 - r2))
    assert np.all(d + 1e-12 >= s1_distance(f1, f2))


def test_pole_distance():
    assert pole_distance(Point(0, 1, 2)) == 0.0
    assert pole_distance(Point(math.pi / 2, 0, 0)) == pytest.approx(math.pi / 2)
    assert pole_distance(Point(math.pi / 4, 0, 0)) == pytest.approx(math.pi / 4)


@given(
    st.floats(min_value=0.2, max_value=math.pi - 0.2),
    st.floats(min_value=1e-3, max_value=1.0),
    st.integers(min_value=0, max_value=10_000),
)
def test_theta_inequality(rp, frac, salt):
    """Within a d_0-ball of radius δ < ρ(p)/2 the θ-coordinate moves by less
    than δ / sin(ρ(p)/2), the reflection-covariant constant (sin(r_p/2) for
    r_p ≤ π/2)."""
    p = Point(rp, 1.0, 2.0)
    rho = min(rp, math.pi - rp)
    delta = frac * (rho / 2) * 0.999
    rng = np.random.default_rng(salt)
    for _ in range(20):
        q = Point(
            rp + rng.uniform(-delta, delta),
            1.0 + rng.uniform(-delta, delta) / max(math.sin(rp), 1e-3),
            2.0 + rng.uniform(-delta, delta),
        )
        if product_distance(p, q) < delta:
            assert s1_distance(p.theta, q.theta) < delta / math.sin(rho / 2) + 1e-12


@pytest.mark.parametrize("m", [2, 3, 4])
def test_envelope_threshold_matches_oracle(m):
    """Independent bisection oracle for the first up-crossing of the envelope."""

    def a(x):
        return -2.0 * math.log(math.sin(x)) * x ** (1.0 / m)

    frozen = CROSSING[m]
    crossing = brentq(lambda x: a(x) - 1.0, frozen * 0.5, frozen * 1.5, xtol=1e-15)
    assert crossing == pytest.approx(frozen, rel=1e-8)
    c = singular_envelope_threshold(m)
    # the in-package bisection stops at 1e-10 absolute on x
    assert c == pytest.approx(0.99 * crossing, abs=1e-9)
    assert c < crossing


@pytest.mark.parametrize("m", [1, 2, 3, 5, 12])
def test_envelope_threshold_valid(m):
    c = singular_envelope_threshold(m)
    assert 0.0 < c < math.pi / 2
    xs = np.linspace(c / 5000, c * 0.9999, 5000)
    assert np.all(-2.0 * np.log(np.sin(xs)) * xs ** (1.0 / m) < 1.0)
    # membership of the midpoint
    assert -2.0 * math.log(math.sin(c / 2)) * (c / 2) ** (1.0 / m) < 1.0


def test_envelope_threshold_m1_no_crossing():
    # the m=1 envelope never reaches 1, so the threshold is 0.99·π/2
    assert singular_envelope_threshold(1) == pytest.approx(0.99 * math.pi / 2)


def test_warp_schedule():
    sched = warp_schedule(a0=1.0, jmax=20, beta=2.0)
    assert len(sched) == 21
    assert sched[0].a == 1.0
    assert sched[-1].a == pytest.approx(2.0**-20)
    assert all(w.beta == 2.0 for w in sched)
