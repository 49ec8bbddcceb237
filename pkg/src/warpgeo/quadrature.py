"""Adaptive Gauss–Kronrod quadrature with support for endpoint log singularities.

Curve-length integrands in this package are smooth except where a curve meets
a pole fiber of the extreme warp, where they blow up like ln(1/t): integrable,
but hostile to fixed rules.  The adaptive driver bisects on the largest error
estimate; flagged singular endpoints are additionally pre-split geometrically
(ratio 1/2 toward the endpoint) until the local contribution falls below
tol/10.  Gauss–Kronrod nodes are interior, so the endpoint itself is never
evaluated.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureNoConvergence

# 15-point Kronrod nodes on [-1, 1] with Kronrod weights and the embedded
# 7-point Gauss weights (zeros at Kronrod-only nodes).
_XK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.array([
    0.0,
    0.129484966168869693270611432679082,
    0.0,
    0.279705391489276667901467771423780,
    0.0,
    0.381830050505118944950369775488975,
    0.0,
    0.417959183673469387755102040816327,
    0.0,
    0.381830050505118944950369775488975,
    0.0,
    0.279705391489276667901467771423780,
    0.0,
    0.129484966168869693270611432679082,
    0.0,
])

# 5-point Gauss-Legendre rule mapped to [0, 1]; the fast path for edge-scale
# segments with smooth integrands.
_X5 = (np.array([
    -0.906179845938663992797626878299393,
    -0.538469310105683091036314420700208,
    0.0,
    0.538469310105683091036314420700208,
    0.906179845938663992797626878299393,
]) + 1.0) / 2.0
_W5 = np.array([
    0.236926885056189087514264040719917,
    0.478628670499366468041291514835638,
    0.568888888888888888888888888888889,
    0.478628670499366468041291514835638,
    0.236926885056189087514264040719917,
]) / 2.0

GL5_NODES = _X5
GL5_WEIGHTS = _W5


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for adaptive curve quadrature."""

    tol: float = 1e-9
    max_depth: int = 40
    max_intervals: int = 8192


def _gk15_panel(f, a: float, b: float) -> tuple[float, float]:
    """One Gauss–Kronrod panel on [a, b]: (K15 value, error estimate)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _XK), dtype=float)
    k15 = half * float(np.dot(_WK, fx))
    g7 = half * float(np.dot(_WG, fx))
    e = abs(k15 - g7)
    err = min(e, (200.0 * e) ** 1.5) if e > 0.0 else 0.0
    return k15, err


def adaptive_quad(
    f,
    a: float,
    b: float,
    config: QuadratureConfig = QuadratureConfig(),
    singular_left: bool = False,
    singular_right: bool = False,
) -> tuple[float, float]:
    """Adaptive integral of a vectorized integrand over [a, b].

    Returns (value, error_estimate).  Raises QuadratureNoConvergence when the
    error estimate still exceeds config.tol after the subdivision budget.
    """
    if b <= a:
        return 0.0, 0.0
    length = b - a

    # geometric pre-split toward flagged singular endpoints
    cuts = [a, b]
    if singular_left:
        cuts += [a + length * 0.5 ** k for k in range(1, config.max_depth)]
    if singular_right:
        cuts += [b - length * 0.5 ** k for k in range(1, config.max_depth)]
    cuts = sorted(set(cuts))

    heap: list[tuple[float, int, float, float, float]] = []
    count = 0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, err = _gk15_panel(f, lo, hi)
        heapq.heappush(heap, (-err, count, lo, hi, val))
        count += 1

    while True:
        total = sum(item[4] for item in heap)
        total_err = sum(-item[0] for item in heap)
        if total_err <= config.tol:
            return total, total_err
        if len(heap) >= config.max_intervals:
            raise QuadratureNoConvergence(
                f"error {total_err:.3e} > tol {config.tol:.3e} "
                f"after {len(heap)} intervals"
            )
        _, _, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        for seg in ((lo, mid), (mid, hi)):
            val, err = _gk15_panel(f, *seg)
            heapq.heappush(heap, (-err, count, seg[0], seg[1], val))
            count += 1


def gl5_segment_lengths(speed_at, t_scale=None):
    """Fast 5-point Gauss–Legendre lengths for a batch of segments.

    ``speed_at(t)`` must accept the node array of shape (5,) and return speeds
    of shape (n_segments, 5); returns the length of each segment (shape (n,)).
    """
    speeds = speed_at(GL5_NODES)
    return speeds @ GL5_WEIGHTS
