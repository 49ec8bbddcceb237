import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from warpgeo.errors import ExponentCondition, ExtremeUnrectifiable
from warpgeo.geometry import ConstantWarp, ExtremeWarp, SequenceWarp, warp_eval
from warpgeo.measures import (
    fiber_length,
    h1_partition_sum,
    hausdorff_cover,
    hausdorff_dim_scan,
    limit_volume,
    smallest_valid_m,
    volume,
    volume_convergence,
    volume_upper_bound,
)

BETA = 2.0


def test_volume_calibration_constant():
    for c in (1.0, BETA):
        res = volume(ConstantWarp(c))
        assert abs(res.value - 8 * math.pi**2 * c) < 1e-8


@pytest.mark.parametrize("beta", [2.0, 3.0, 5.0])
def test_limit_volume_closed_form(beta):
    res = volume(ExtremeWarp(beta=beta))
    expected = (2 * math.pi) ** 2 * (2 * beta + 4 - 2 * math.log(4))
    assert limit_volume(beta) == pytest.approx(expected, rel=1e-15)
    assert abs(res.value - expected) < 1e-6
    assert res.abs_error_estimate < 1e-6


def test_limit_volume_beta2_value():
    assert limit_volume(2.0) == pytest.approx(206.3699254, abs=2e-6)


def test_volume_monotone_in_schedule():
    a_schedule = [2.0**-j for j in range(0, 21, 3)]
    rep = volume_convergence(a_schedule, BETA)
    assert rep.strictly_increasing
    assert rep.within_bound
    assert rep.values[-1] < rep.limit
    assert rep.final_rel_gap < 1e-3


def test_volume_sequence_bounded():
    assert volume_upper_bound(BETA) == pytest.approx(4 * math.pi**3 * BETA)
    for a in (1.0, 1e-3, 1e-6):
        v = volume(SequenceWarp(a=a, beta=BETA)).value
        assert v <= volume_upper_bound(BETA)
        assert v <= limit_volume(BETA)


def test_fiber_length_values():
    w = SequenceWarp(a=1.0, beta=BETA)
    assert fiber_length(w, 0.0) == pytest.approx(2 * math.pi * (math.log(2) + 2), rel=1e-12)
    w20 = SequenceWarp(a=2.0**-20, beta=BETA)
    assert fiber_length(w20, 0.0) == pytest.approx(
        2 * math.pi * (math.log(1 + 2.0**20) + 2), rel=1e-12
    )
    # ratio to the warp value is always 2π
    for a in (1.0, 0.01):
        w = SequenceWarp(a=a, beta=BETA)
        assert fiber_length(w, 0.0) / warp_eval(w, 0.0) == pytest.approx(2 * math.pi)


def test_fiber_length_errors():
    with pytest.raises(ExtremeUnrectifiable):
        fiber_length(ExtremeWarp(beta=BETA), 0.0)
    with pytest.raises(ValueError):
        fiber_length(SequenceWarp(a=1.0), 0.5)


def test_smallest_valid_m():
    assert smallest_valid_m(3.0) == 2
    assert smallest_valid_m(2.0) == 3
    assert smallest_valid_m(1.5) == 4
    assert smallest_valid_m(1.1) == 12
    with pytest.raises(ExponentCondition):
        smallest_valid_m(1.0)


def test_cover_scaling_p2_m3():
    scan = hausdorff_cover(2.0, 3, [2**k for k in range(6, 17, 2)], BETA)
    assert scan.exponent == pytest.approx(-1.0 / 3.0)
    assert scan.slope == pytest.approx(scan.exponent, abs=1e-9)
    ratios = [
        b.H_upper / a.H_upper
        for a, b in zip(scan.entries[:-1], scan.entries[1:])
    ]
    # doubling N twice per schedule step: factor 2^(-2/3)
    assert all(r == pytest.approx(2 ** (-2.0 / 3.0), rel=1e-12) for r in ratios)
    assert scan.vanishing


def test_cover_exponent_condition():
    with pytest.raises(ExponentCondition):
        hausdorff_cover(2.0, 2, [64, 128], BETA)  # 1 + 1/(2-1) = 2 not < 2
    with pytest.raises(ExponentCondition):
        hausdorff_cover(1.5, 3, [64], BETA)


@given(st.floats(min_value=1.05, max_value=3.0))
def test_cover_exponent_negative(p):
    m = smallest_valid_m(p)
    assert 1 + 1 / (m - 1) < p
    assert 1 - p + p / m < 0


def test_cover_radius_formula():
    scan = hausdorff_cover(2.0, 3, [1024], BETA)
    e = scan.entries[0]
    delta = 2 * math.pi / 1024
    assert e.r_N == pytest.approx((3 + BETA) * delta ** (2.0 / 3.0), rel=1e-12)
    assert e.H_upper == pytest.approx(2.0**2.0 * 1024 * e.r_N**2, rel=1e-12)


def test_cover_applicability_flags():
    # m=2 needs δ = 2π/N below ~0.01334: valid from N = 512 up
    scan = hausdorff_cover(3.0, 2, [64, 256, 512, 1024], BETA)
    flags = [e.applicable for e in scan.entries]
    assert flags == [False, False, True, True]


def test_partition_sums_certify():
    a_schedule = [2.0**-j for j in range(21)]
    rep = h1_partition_sum(a_schedule, N_partition=1024, beta=BETA)
    assert rep.all_certified
    assert rep.thresholds_unbounded
    for e in rep.entries:
        assert e.sum_lower > e.threshold
        assert e.sum_lower <= e.sum_upper + 1e-9
        assert e.sum_upper <= 2 * math.pi * e.fiber_value + 1e-9


def test_partition_sums_tighten_with_n():
    w_a = 2.0**-6
    gaps = []
    for N in (256, 1024, 4096, 16384):
        rep = h1_partition_sum([w_a], N_partition=N, beta=BETA)
        e = rep.entries[0]
        gaps.append(2 * math.pi * e.fiber_value - e.sum_lower)
    assert all(b < a for a, b in zip(gaps[:-1], gaps[1:]))


def test_dim_verdict():
    verdict = hausdorff_dim_scan(
        (1.1, 1.5, 2.0, 3.0), [2**k for k in range(6, 17, 2)], BETA
    )
    assert verdict.dimension == 1.0
    assert verdict.h1_infinite
    assert verdict.consistent
