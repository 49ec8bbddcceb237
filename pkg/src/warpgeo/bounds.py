"""Closed-form distance bounds built from explicit comparison curves.

Upper bounds come from measurable curves: the three-arc construction (radial
leg, θ-arc and fiber arc anchored at one endpoint's latitude) and the waypoint
construction (both points move radially to a common latitude r0 first).  Lower
bounds come from the isometric product and, for pairs on a single pole fiber,
from a stay-or-escape dichotomy.  Every certificate records the inputs that
reproduce its value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DeltaTooLarge, ExtremeAtPole, MonotonicityViolation
from .geometry import (
    ExtremeWarp,
    Point,
    TOL_SINGULAR,
    WarpFamily,
    s1_distance,
    singular_envelope_threshold,
    warp_eval,
)
from .curves import ParamCurve, Segment, coord_line, theta_arc
from .quadrature import QuadratureConfig

#: 256 log-spaced candidate latitudes in (1e-6, π/2], mirrored across π/2
_WAYPOINT_GRID = np.geomspace(1e-6, math.pi / 2, 256)
_WAYPOINT_GRID_FULL = np.unique(
    np.concatenate([_WAYPOINT_GRID, math.pi - _WAYPOINT_GRID])
)


@dataclass(frozen=True)
class BoundCertificate:
    """A reproducible distance bound: value, construction kind, and inputs."""

    value: float
    kind: str  # "three_arc" | "waypoint" | "product_lower" | "theta_modulus"
    inputs: dict = field(default_factory=dict)


def three_arc_bound(warp: WarpFamily, p: Point, q: Point) -> BoundCertificate:
    """Upper bound |r_p - r_q| + sin(r_q)·dθ + f(r_q)·dφ, anchored at q."""
    if isinstance(warp, ExtremeWarp) and not warp.clamp:
        if min(q.r, math.pi - q.r) <= TOL_SINGULAR:
            raise ExtremeAtPole("three-arc anchor latitude lies on a pole fiber")
    f_q = float(warp_eval(warp, q.r))
    dth = s1_distance(p.theta, q.theta)
    dph = s1_distance(p.phi, q.phi)
    value = abs(p.r - q.r) + math.sin(q.r) * dth + f_q * dph
    return BoundCertificate(
        value=value,
        kind="three_arc",
        inputs={"p": p.as_tuple(), "q": q.as_tuple(), "f_anchor": f_q},
    )


def three_arc_curve(warp: WarpFamily, p: Point, q: Point) -> ParamCurve:
    """The explicit three-leg curve whose length equals the three-arc bound."""
    mid1 = Point(q.r, p.theta, p.phi)
    mid2 = Point(q.r, q.theta, p.phi)
    legs: list[Segment] = [coord_line(p, mid1)]
    legs.append(theta_arc(q.r, p.phi, p.theta, q.theta))
    legs.append(coord_line(mid2, q))
    return ParamCurve(tuple(legs))


def waypoint_bound(warp: WarpFamily, p: Point, q: Point, r0: float) -> BoundCertificate:
    """Upper bound routing both points through the latitude r0 ∈ (0, π)."""
    if not 0.0 < r0 < math.pi:
        raise ValueError(f"waypoint latitude must lie in (0, π), got {r0}")
    f0 = float(warp_eval(warp, r0))
    dth = s1_distance(p.theta, q.theta)
    dph = s1_distance(p.phi, q.phi)
    value = abs(p.r - r0) + abs(q.r - r0) + math.sin(r0) * dth + f0 * dph
    return BoundCertificate(
        value=value,
        kind="waypoint",
        inputs={"p": p.as_tuple(), "q": q.as_tuple(), "r0": r0, "f_r0": f0},
    )


def waypoint_curve(warp: WarpFamily, p: Point, q: Point, r0: float) -> ParamCurve:
    """The explicit four-leg curve realizing the waypoint bound."""
    a = Point(r0, p.theta, p.phi)
    b = Point(r0, q.theta, p.phi)
    c = Point(r0, q.theta, q.phi)
    return ParamCurve(
        (
            coord_line(p, a),
            theta_arc(r0, p.phi, p.theta, q.theta),
            coord_line(b, c),
            coord_line(c, q),
        )
    )


def best_waypoint_bound(
    warp: WarpFamily,
    p: Point,
    q: Point,
    r0_min: Optional[float] = None,
    r0_max: Optional[float] = None,
) -> BoundCertificate:
    """Waypoint bound minimized over the standard latitude grid.

    Optional [r0_min, r0_max] clipping keeps the construction inside a tube
    complement for restricted distances.
    """
    grid = _WAYPOINT_GRID_FULL
    if r0_min is not None or r0_max is not None:
        lo = max(r0_min if r0_min is not None else 0.0, 1e-6)
        hi = min(r0_max if r0_max is not None else math.pi, math.pi - 1e-6)
        clipped = grid[(grid >= lo) & (grid <= hi)]
        grid = np.unique(np.concatenate([clipped, [lo, hi]]))
    f = np.asarray(warp_eval(warp, grid), dtype=float)
    dth = s1_distance(p.theta, q.theta)
    dph = s1_distance(p.phi, q.phi)
    values = np.abs(p.r - grid) + np.abs(q.r - grid) + np.sin(grid) * dth + f * dph
    k = int(np.argmin(values))
    return BoundCertificate(
        value=float(values[k]),
        kind="waypoint",
        inputs={"p": p.as_tuple(), "q": q.as_tuple(), "r0": float(grid[k]), "f_r0": float(f[k])},
    )


def singular_pair_bound(beta: float, phi1: float, phi2: float, m: int) -> float:
    """Closed-form limit-distance bound (3+β)·δ^(1-1/m) for two points of a
    pole fiber with fiber separation δ, valid for δ below the envelope
    threshold for m."""
    delta = float(s1_distance(phi1, phi2))
    if delta == 0.0:
        return 0.0
    delta_m = min(singular_envelope_threshold(m), math.pi / 2)
    if delta >= delta_m:
        raise DeltaTooLarge(
            f"fiber separation {delta:.3e} outside validity domain (< {delta_m:.3e})"
        )
    return (3.0 + beta) * delta ** (1.0 - 1.0 / m)


def two_leg_fiber_bound(warp: WarpFamily, delta: float, n_grid: int = 512) -> float:
    """Numerically minimized upper bound min_r (2r + f(r)·δ) for a pole-fiber
    pair with separation δ; the r → 0 limit recovers the fiber arc f(0)·δ
    when f(0) is finite."""
    if delta == 0.0:
        return 0.0
    grid = np.geomspace(1e-9, math.pi / 2, n_grid)
    if 0.0 < delta <= math.pi / 2:
        grid = np.append(grid, delta)  # the canonical detour latitude
    vals = 2.0 * grid + np.asarray(warp_eval(warp, grid), dtype=float) * delta
    best = float(np.min(vals))
    if not isinstance(warp, ExtremeWarp):
        best = min(best, float(warp_eval(warp, 0.0)) * delta)
    return best


def singular_fiber_lower(warp: WarpFamily, delta: float, n_grid: int = 2048) -> float:
    """Certified lower bound for the warped distance between two points of the
    same pole fiber with fiber separation δ.

    Any connecting curve either stays within radius R of the pole (costing at
    least f(R)·δ since f is nonincreasing on [0, π/2]) or reaches radius R
    (costing at least 2R radially).  Hence d ≥ max_R min(f(R)·δ, 2R); every
    grid candidate R is individually valid, so the maximum is certified.
    """
    if delta == 0.0:
        return 0.0
    grid = np.geomspace(1e-9, math.pi / 2, n_grid)
    f = np.asarray(warp_eval(warp, grid), dtype=float)
    return float(np.max(np.minimum(f * delta, 2.0 * grid)))


@dataclass(frozen=True)
class LengthMonotoneReport:
    """Curve lengths along a warp schedule with the limit-length gap."""

    lengths: tuple[float, ...]
    errors: tuple[float, ...]
    final_gap: float
    violations: int


def length_monotone_check(
    curve: ParamCurve,
    schedule: list[WarpFamily],
    config: QuadratureConfig = QuadratureConfig(),
) -> LengthMonotoneReport:
    """Measure a fixed curve along a warp schedule ending at the extreme warp
    and verify the lengths are nondecreasing up to quadrature tolerance."""
    from .curves import curve_length

    if not isinstance(schedule[-1], ExtremeWarp):
        raise ValueError("schedule must end at the extreme warp")
    lengths = []
    errors = []
    for w in schedule:
        v, e = curve_length(w, curve, config)
        lengths.append(v)
        errors.append(e)
    violations = 0
    for a, b in zip(lengths[:-1], lengths[1:]):
        if b < a - 2.0 * config.tol:
            violations += 1
    if violations:
        raise MonotonicityViolation(
            f"{violations} decreases beyond 2·tol along the schedule"
        )
    final_gap = abs(lengths[-1] - lengths[-2]) if len(lengths) >= 2 else 0.0
    return LengthMonotoneReport(
        lengths=tuple(lengths),
        errors=tuple(errors),
        final_gap=final_gap,
        violations=violations,
    )


def diameter_bound(beta: float) -> float:
    """Uniform diameter bound (3 + 2β)π valid for every warp in the family."""
    return (3.0 + 2.0 * beta) * math.pi
