"""Closed-form geometry of the warped sphere-circle products.

The space is S²×S¹ in coordinates (r, θ, φ) with r ∈ [0, π] the polar angle
on the round sphere and θ, φ angles mod 2π.  A warp function f assigns the
circle fiber over (r, θ) the circumference 2π·f(r), giving the metric

    g = dr² + sin²(r) dθ² + f²(r) dφ².

Three warp families are supported:

* ``SequenceWarp(a, beta)``   f(r) = ln((1+a)/(sin²r + a)) + β, finite everywhere;
* ``ExtremeWarp(beta)``       f(r) = -2 ln(sin r) + β, diverging on the pole
  fibers r ∈ {0, π} (the singular set);
* ``ConstantWarp(c)``         f ≡ c; c = 1 is the isometric product.

For fixed r ∈ (0, π) the sequence warps increase monotonically to the extreme
warp as a ↓ 0, and so do the metrics and their distances.  Everything here is
immutable and pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import ExtremeAtPole, ExtremeUnrectifiable, NoThreshold

TWO_PI = 2.0 * math.pi

#: absolute tolerance on r for classifying a point as singular
TOL_SINGULAR = 1e-12

#: clamp radius for extreme-warp evaluation when clamping is enabled
EXTREME_CLAMP_RMIN = 1e-8


def wrap_angle(x):
    """Reduce an angle to its representative in [0, 2π)."""
    return np.mod(x, TWO_PI)


def wrap_delta(x):
    """Signed short-arc representative of an angle difference, in (-π, π]."""
    d = np.mod(x, TWO_PI)
    return np.where(d > math.pi, d - TWO_PI, d)


@dataclass(frozen=True)
class Point:
    """A point (r, θ, φ) on S²×S¹; r clamped to [0, π], angles reduced mod 2π."""

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "r", float(min(max(self.r, 0.0), math.pi)))
        object.__setattr__(self, "theta", float(wrap_angle(self.theta)))
        object.__setattr__(self, "phi", float(wrap_angle(self.phi)))

    @property
    def is_singular(self) -> bool:
        return min(self.r, math.pi - self.r) <= TOL_SINGULAR

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r, self.theta, self.phi)


@dataclass(frozen=True)
class Tangent:
    """Coordinate components of a tangent vector at a point."""

    dr: float
    dtheta: float
    dphi: float


@dataclass(frozen=True)
class SequenceWarp:
    """Warp f(r) = ln((1+a)/(sin²r + a)) + β with a > 0, β ≥ 2."""

    a: float
    beta: float = 2.0

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError(f"sequence warp needs a > 0, got {self.a}")
        if not self.beta >= 2.0:
            raise ValueError(f"warp needs beta >= 2, got {self.beta}")

    def value(self, r):
        # log1p(cos²r / (sin²r + a)) keeps the evaluation exactly monotone in a:
        # the numerator is a-independent and fp division/addition are monotone.
        s2 = np.square(np.sin(r))
        c2 = np.square(np.cos(r))
        return np.log1p(c2 / (s2 + self.a)) + self.beta

    def derivative(self, r):
        s = np.sin(r)
        return -2.0 * s * np.cos(r) / (np.square(s) + self.a)


@dataclass(frozen=True)
class ExtremeWarp:
    """Extreme warp f(r) = -2 ln(sin r) + β, finite only on (0, π).

    With ``clamp=True`` evaluation uses r clipped to [r_min, π - r_min], which
    keeps quadrature finite while the true integrals remain log-integrable.
    """

    beta: float = 2.0
    clamp: bool = False
    r_min: float = EXTREME_CLAMP_RMIN

    def __post_init__(self):
        if not self.beta >= 2.0:
            raise ValueError(f"warp needs beta >= 2, got {self.beta}")
        if not 0.0 < self.r_min < math.pi / 2:
            raise ValueError(f"clamp radius out of range: {self.r_min}")

    def _effective_r(self, r):
        r = np.asarray(r, dtype=float)
        if self.clamp:
            return np.clip(r, self.r_min, math.pi - self.r_min)
        if np.any(r <= 0.0) or np.any(r >= math.pi):
            raise ExtremeAtPole("extreme warp evaluated at a pole without clamping")
        return r

    def value(self, r):
        scalar = np.isscalar(r)
        rc = self._effective_r(r)
        out = -2.0 * np.log(np.sin(rc)) + self.beta
        return float(out) if scalar else out

    def derivative(self, r):
        scalar = np.isscalar(r)
        rc = self._effective_r(r)
        out = -2.0 * np.cos(rc) / np.sin(rc)
        return float(out) if scalar else out


@dataclass(frozen=True)
class ConstantWarp:
    """Constant warp f ≡ c > 0; c = 1 gives the isometric product metric."""

    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError(f"constant warp needs c > 0, got {self.c}")

    def value(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.c) if not np.isscalar(r) else self.c

    def derivative(self, r):
        return np.zeros_like(np.asarray(r, dtype=float)) if not np.isscalar(r) else 0.0


WarpFamily = Union[SequenceWarp, ExtremeWarp, ConstantWarp]


def warp_eval(warp: WarpFamily, r):
    """Evaluate the warp at radius r (scalar or array)."""
    return warp.value(r)


def warp_to_dict(warp: WarpFamily) -> dict:
    """JSON-ready description of a warp."""
    if isinstance(warp, SequenceWarp):
        return {"variant": "sequence", "a": warp.a, "beta": warp.beta}
    if isinstance(warp, ExtremeWarp):
        return {
            "variant": "extreme",
            "beta": warp.beta,
            "clamp": warp.clamp,
            "r_min": warp.r_min,
        }
    return {"variant": "constant", "c": warp.c}


def warp_from_dict(data: dict) -> WarpFamily:
    """Inverse of :func:`warp_to_dict`."""
    variant = data.get("variant")
    if variant == "sequence":
        return SequenceWarp(a=float(data["a"]), beta=float(data.get("beta", 2.0)))
    if variant == "extreme":
        return ExtremeWarp(
            beta=float(data.get("beta", 2.0)),
            clamp=bool(data.get("clamp", False)),
            r_min=float(data.get("r_min", EXTREME_CLAMP_RMIN)),
        )
    if variant == "constant":
        return ConstantWarp(c=float(data.get("c", 1.0)))
    raise ValueError(f"unknown warp variant: {variant!r}")


def warp_schedule(a0: float = 1.0, jmax: int = 20, beta: float = 2.0) -> list[SequenceWarp]:
    """Sequence warps for a_j = a0·2^-j, j = 0..jmax."""
    return [SequenceWarp(a=a0 * 2.0 ** (-j), beta=beta) for j in range(jmax + 1)]


def metric_speed(warp: WarpFamily, r, dr, dtheta, dphi):
    """sqrt(g(V,V)) at radius r for tangent components (dr, dθ, dφ); vectorized."""
    f = warp.value(r)
    return np.sqrt(
        np.square(dr) + np.square(np.sin(r) * dtheta) + np.square(f * dphi)
    )


def metric_norm(warp: WarpFamily, p: Point, v: Tangent) -> float:
    """Metric norm of the tangent vector v at p."""
    return float(metric_speed(warp, p.r, v.dr, v.dtheta, v.dphi))


def s1_distance(alpha, beta):
    """Arc distance on the unit circle; branch-free, range [0, π]."""
    d = np.abs(np.mod(np.asarray(alpha, dtype=float) - beta, TWO_PI))
    out = np.minimum(d, TWO_PI - d)
    return float(out) if out.ndim == 0 else out


def s2_distance(r1, theta1, r2, theta2):
    """Great-circle distance on the unit sphere between (r1, θ1) and (r2, θ2).

    Haversine form: well conditioned for nearby points, where the arccos form
    loses half the significant digits.
    """
    dr = np.asarray(r1, dtype=float) - r2
    dth = np.asarray(theta1, dtype=float) - theta2
    h = np.square(np.sin(dr / 2.0)) + np.sin(r1) * np.sin(r2) * np.square(
        np.sin(dth / 2.0)
    )
    out = 2.0 * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
    return float(out) if out.ndim == 0 else out


def product_distance(p: Point, q: Point) -> float:
    """Isometric-product distance: sqrt(d_S²(p,q)² + d_S¹(φ_p,φ_q)²).

    The product metric satisfies the Pythagorean identity, so this dominates
    both |r_p - r_q| and the fiber separation; it is a lower bound for every
    warped distance in the family (all warps have f ≥ 1).
    """
    return float(product_distance_arrays(p.r, p.theta, p.phi, q.r, q.theta, q.phi))


def product_distance_arrays(r1, th1, ph1, r2, th2, ph2):
    """Vectorized isometric-product distance."""
    ds2 = s2_distance(r1, th1, r2, th2)
    ds1 = s1_distance(ph1, ph2)
    return np.hypot(ds2, ds1)


def pole_distance(p: Point) -> float:
    """Distance to the singular set: min(r, π - r), identical for every warp
    in the family because the radial direction is unit in all of them."""
    return float(min(p.r, math.pi - p.r))


def pole_distance_r(r):
    """Vectorized pole distance from the radial coordinate."""
    r = np.asarray(r, dtype=float)
    return np.minimum(r, math.pi - r)


def _log_sin_envelope(x, m: int):
    """a(x) = -2 ln(sin x)·x^(1/m); the extreme warp satisfies
    f(x) < x^(-1/m) + β exactly where a(x) < 1."""
    x = np.asarray(x, dtype=float)
    return -2.0 * np.log(np.sin(x)) * np.power(x, 1.0 / m)


@lru_cache(maxsize=None)
def singular_envelope_threshold(m: int) -> float:
    """Largest certified x-threshold below which -2 ln(sin x) < x^(-1/m).

    Found by locating the first up-crossing of a(x) = -2 ln(sin x)·x^(1/m)
    through 1 (log-spaced scan plus bisection to 1e-10), shrunk by a 0.99
    safety factor, then validated on a 10^4-point grid of (0, threshold).
    For m = 1 the envelope never reaches 1 (max ≈ 0.754) and the threshold
    is 0.99·π/2.
    """
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    upper = math.pi / 2
    # a(x) -> 0 as x -> 0+; scan up-crossing on a log grid (the crossing is
    # around exp(-m/2)-ish and shrinks fast with m).
    xs = np.geomspace(1e-280, upper, 200_000)
    vals = _log_sin_envelope(xs, m)
    above = np.nonzero(vals >= 1.0)[0]
    if len(above) == 0:
        c = 0.99 * upper
    else:
        lo, hi = xs[above[0] - 1], xs[above[0]]
        # bisection in log-x down to 1e-10 absolute on x
        while hi - lo > 1e-10 and hi / lo > 1.0 + 1e-14:
            mid = math.sqrt(lo * hi)
            if _log_sin_envelope(mid, m) < 1.0:
                lo = mid
            else:
                hi = mid
        c = 0.99 * lo
    grid = np.linspace(c / 1e4, c, 10_000, endpoint=False) + c / 2e4
    if np.any(_log_sin_envelope(grid, m) >= 1.0):
        raise NoThreshold(f"envelope validation failed for m={m}")
    return float(c)


def fiber_circumference(warp: WarpFamily, r: float) -> float:
    """Length 2π·f(r) of the circle fiber over radius r.

    For the pole fibers of a sequence warp this is the closed form the
    curve quadrature must reproduce; the extreme warp's pole fibers are
    unrectifiable and raise.
    """
    if isinstance(warp, ExtremeWarp) and min(r, math.pi - r) <= TOL_SINGULAR:
        raise ExtremeUnrectifiable("extreme pole fibers have no finite length")
    return TWO_PI * float(warp.value(r))
