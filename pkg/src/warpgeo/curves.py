"""Parametrized curves, polylines, and length quadrature.

A ``ParamCurve`` is a list of smooth segments, each a map [0,1] → (r, θ, φ)
with derivative.  Lengths are computed per segment with adaptive Gauss-Kronrod
quadrature of the metric speed; segments that touch a pole fiber under the
extreme warp are split at the singular parameter and integrated as improper
integrals (the log singularity is integrable).

``Polyline`` is the discrete form used by the grid solvers: consecutive
vertices are joined by coordinate-linear segments taking the short arc in
each angle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ExtremeAtPole
from .geometry import (
    ExtremeWarp,
    Point,
    TOL_SINGULAR,
    WarpFamily,
    metric_speed,
    wrap_delta,
)
from .quadrature import GL5_NODES, GL5_WEIGHTS, QuadratureConfig, adaptive_quad


@dataclass(frozen=True)
class Segment:
    """One smooth piece of a curve: position and velocity over t ∈ [0, 1].

    ``pole_params`` lists interior parameters where r(t) hits {0, π}; the
    length quadrature splits there for the extreme warp.
    """

    position: Callable[[np.ndarray], tuple]
    velocity: Callable[[np.ndarray], tuple]
    pole_params: tuple[float, ...] = ()

    def start(self) -> tuple[float, float, float]:
        r, th, ph = self.position(np.array(0.0))
        return float(r), float(th), float(ph)

    def end(self) -> tuple[float, float, float]:
        r, th, ph = self.position(np.array(1.0))
        return float(r), float(th), float(ph)


def coord_line(p: Point, q: Point) -> Segment:
    """Coordinate-linear segment from p to q taking short arcs in θ and φ."""
    r0, dr = p.r, q.r - p.r
    th0, dth = p.theta, float(wrap_delta(q.theta - p.theta))
    ph0, dph = p.phi, float(wrap_delta(q.phi - p.phi))

    hits = []
    for pole in (0.0, math.pi):
        if abs(dr) > 0.0:
            t = (pole - r0) / dr
            if 1e-12 < t < 1.0 - 1e-12:
                hits.append(t)

    def position(t):
        return r0 + t * dr, th0 + t * dth, ph0 + t * dph

    def velocity(t):
        shape = np.shape(t)
        return (
            np.full(shape, dr),
            np.full(shape, dth),
            np.full(shape, dph),
        )

    return Segment(position, velocity, tuple(sorted(hits)))


def fiber_circle(r: float, theta: float, phi0: float = 0.0, turns: float = 1.0) -> Segment:
    """Full circle fiber at fixed (r, θ): t ↦ (r, θ, φ0 + 2π·turns·t)."""
    dph = 2.0 * math.pi * turns

    def position(t):
        shape = np.shape(t)
        return np.full(shape, r), np.full(shape, theta), phi0 + dph * np.asarray(t, dtype=float)

    def velocity(t):
        shape = np.shape(t)
        return np.zeros(shape), np.zeros(shape), np.full(shape, dph)

    return Segment(position, velocity)


def meridian(theta: float, phi: float, r0: float = 0.0, r1: float = math.pi) -> Segment:
    """Radial segment at fixed (θ, φ) from r0 to r1."""
    return coord_line(Point(r0, theta, phi), Point(r1, theta, phi))


def theta_arc(r: float, phi: float, th0: float, th1: float) -> Segment:
    """Short constant-latitude arc at radius r from θ0 to θ1."""
    dth = float(wrap_delta(th1 - th0))

    def position(t):
        shape = np.shape(t)
        return np.full(shape, r), th0 + dth * np.asarray(t, dtype=float), np.full(shape, phi)

    def velocity(t):
        shape = np.shape(t)
        return np.zeros(shape), np.full(shape, dth), np.zeros(shape)

    return Segment(position, velocity)


_JUNCTION_TOL = 1e-9


@dataclass(frozen=True)
class ParamCurve:
    """Piecewise-smooth curve: consecutive segments must join continuously."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a curve needs at least one segment")
        for s0, s1 in zip(self.segments[:-1], self.segments[1:]):
            r0, th0, ph0 = s0.end()
            r1, th1, ph1 = s1.start()
            ok = (
                abs(r0 - r1) <= _JUNCTION_TOL
                and abs(wrap_delta(th0 - th1)) <= _JUNCTION_TOL
                and abs(wrap_delta(ph0 - ph1)) <= _JUNCTION_TOL
            )
            if not ok:
                raise ValueError(
                    f"segments do not join: {(r0, th0, ph0)} vs {(r1, th1, ph1)}"
                )

    def endpoints(self) -> tuple[Point, Point]:
        r0, th0, ph0 = self.segments[0].start()
        r1, th1, ph1 = self.segments[-1].end()
        return Point(r0, th0, ph0), Point(r1, th1, ph1)


@dataclass(frozen=True)
class Polyline:
    """Ordered vertices joined by coordinate-linear short-arc edges."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("empty polyline")

    @property
    def degenerate(self) -> bool:
        return len(self.vertices) == 1

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        r = np.array([v.r for v in self.vertices])
        th = np.array([v.theta for v in self.vertices])
        ph = np.array([v.phi for v in self.vertices])
        return r, th, ph

    def to_curve(self) -> ParamCurve:
        segs = tuple(
            coord_line(a, b) for a, b in zip(self.vertices[:-1], self.vertices[1:])
        )
        if not segs:
            raise ValueError("degenerate polyline has no curve form")
        return ParamCurve(segs)


def _segment_splits(seg: Segment, warp: WarpFamily) -> list[tuple[float, float, bool, bool]]:
    """Subintervals of [0,1] with singular-endpoint flags for this warp."""
    if not isinstance(warp, ExtremeWarp) or warp.clamp:
        return [(0.0, 1.0, False, False)]

    def at_pole(t: float) -> bool:
        r, _, _ = seg.position(np.array(t))
        return min(float(r), math.pi - float(r)) <= TOL_SINGULAR

    cuts = [0.0, *seg.pole_params, 1.0]
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        out.append((lo, hi, at_pole(lo), at_pole(hi)))
    return out


def _segment_length(
    seg: Segment, warp: WarpFamily, config: QuadratureConfig
) -> tuple[float, float]:
    def integrand(t):
        t = np.asarray(t, dtype=float)
        r, _, _ = seg.position(t)
        dr, dth, dph = seg.velocity(t)
        return metric_speed(warp, np.asarray(r, dtype=float), dr, dth, dph)

    total = 0.0
    total_err = 0.0
    for lo, hi, sing_lo, sing_hi in _segment_splits(seg, warp):
        # a segment lying inside a pole fiber has no finite length
        if isinstance(warp, ExtremeWarp) and not warp.clamp:
            mid_r, _, _ = seg.position(np.array(0.5 * (lo + hi)))
            if min(float(mid_r), math.pi - float(mid_r)) <= TOL_SINGULAR:
                raise ExtremeAtPole(
                    "curve segment lies inside a pole fiber of the extreme warp"
                )
        val, err = adaptive_quad(
            integrand, lo, hi, config, singular_left=sing_lo, singular_right=sing_hi
        )
        total += val
        total_err += err
    return total, total_err


def curve_length(
    warp: WarpFamily, curve: ParamCurve, config: QuadratureConfig = QuadratureConfig()
) -> tuple[float, float]:
    """Length of the curve under the warped metric: (value, error estimate)."""
    total = 0.0
    err = 0.0
    for seg in curve.segments:
        v, e = _segment_length(seg, warp, config)
        total += v
        err += e
    return total, err


def _edge_arrays(poly: Polyline):
    r, th, ph = poly.as_arrays()
    dr = np.diff(r)
    dth = wrap_delta(np.diff(th))
    dph = wrap_delta(np.diff(ph))
    return r[:-1], dr, dth, dph


def polyline_length_gl5(warp: WarpFamily, poly: Polyline) -> float:
    """Fast fixed-rule polyline length (5-point Gauss–Legendre per edge)."""
    if poly.degenerate:
        return 0.0
    r0, dr, dth, dph = _edge_arrays(poly)
    rt = r0[:, None] + np.outer(dr, GL5_NODES)
    speeds = metric_speed(warp, rt, dr[:, None], dth[:, None], dph[:, None])
    return float(np.sum(speeds @ GL5_WEIGHTS))


def polyline_length(
    warp: WarpFamily, poly: Polyline, config: QuadratureConfig = QuadratureConfig()
) -> tuple[float, float]:
    """Audited polyline length: adaptive quadrature edge by edge."""
    if poly.degenerate:
        return 0.0, 0.0
    return curve_length(warp, poly.to_curve(), config)


def curve_to_json(curve: ParamCurve, samples_per_segment: int = 33) -> str:
    """Serialize a curve as per-segment (t, r, θ, φ) sample arrays."""
    ts = np.linspace(0.0, 1.0, samples_per_segment)
    segs = []
    for seg in curve.segments:
        r, th, ph = seg.position(ts)
        r = np.broadcast_to(np.asarray(r, dtype=float), ts.shape)
        th = np.broadcast_to(np.asarray(th, dtype=float), ts.shape)
        ph = np.broadcast_to(np.asarray(ph, dtype=float), ts.shape)
        segs.append(
            {
                "samples": [
                    [float(t), float(a), float(b), float(c)]
                    for t, a, b, c in zip(ts, r, th, ph)
                ],
                "pole_params": list(seg.pole_params),
            }
        )
    return json.dumps({"schema": "warpgeo/curve/v1", "segments": segs}, sort_keys=True)


def curve_from_json(payload: str) -> ParamCurve:
    """Rebuild a curve from sampled JSON as a chain of linear segments."""
    data = json.loads(payload)
    segs: list[Segment] = []
    for seg in data["segments"]:
        pts = [Point(s[1], s[2], s[3]) for s in seg["samples"]]
        segs.extend(coord_line(a, b) for a, b in zip(pts[:-1], pts[1:]))
    return ParamCurve(tuple(segs))


def polyline_to_json(poly: Polyline) -> str:
    return json.dumps(
        {
            "schema": "warpgeo/polyline/v1",
            "vertices": [[v.r, v.theta, v.phi] for v in poly.vertices],
        },
        sort_keys=True,
    )


def polyline_from_json(payload: str) -> Polyline:
    data = json.loads(payload)
    return Polyline(tuple(Point(*v) for v in data["vertices"]))
