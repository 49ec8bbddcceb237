"""Volumes and Hausdorff-measure estimates.

The volume of a warp's metric factors through the fiber structure:

    Vol = (2π)² ∫₀^π sin(r)·f(r) dr,

computed here with the substitution u = 1 - cos r on each symmetric half,
which turns the extreme integrand into -ln(u(2-u)) + β and confines the
singularity to an integrable endpoint log.

The singular set carries the covering estimates: for p > 1 and a compatible
m, N evenly spaced fiber points give covering radius (3+β)(2π/N)^(1-1/m) and
upper estimate 2^p·N·r_N^p, which vanishes like N^(1-p+p/m); one-dimensional
measure is certified infinite through partition sums bounded below by the
stay-or-escape fiber bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bounds import singular_fiber_lower, two_leg_fiber_bound
from .errors import ExponentCondition, ExtremeUnrectifiable
from .geometry import (
    ConstantWarp,
    ExtremeWarp,
    SequenceWarp,
    WarpFamily,
    fiber_circumference,
    singular_envelope_threshold,
    warp_eval,
)
from .quadrature import QuadratureConfig, adaptive_quad

FOUR_PI_SQ = (2.0 * math.pi) ** 2


@dataclass(frozen=True)
class VolumeResult:
    value: float
    abs_error_estimate: float
    warp: WarpFamily


def _half_integrand(warp: WarpFamily, u: np.ndarray) -> np.ndarray:
    """sin(r)·f(r) dr rewritten via u = 1 - cos r on r ∈ [0, π/2]: the
    Jacobian absorbs sin(r), leaving f as a function of sin²r = u(2-u)."""
    u = np.asarray(u, dtype=float)
    s2 = u * (2.0 - u)
    if isinstance(warp, ConstantWarp):
        return np.full_like(u, warp.c)
    if isinstance(warp, ExtremeWarp):
        return -np.log(s2) + warp.beta
    return np.log1p((1.0 - s2) / (s2 + warp.a)) + warp.beta


def volume(
    warp: WarpFamily, config: QuadratureConfig = QuadratureConfig(tol=1e-11)
) -> VolumeResult:
    """Total volume (2π)² ∫ sin(r) f(r) dr of the warped metric."""
    singular = isinstance(warp, ExtremeWarp)
    val, err = adaptive_quad(
        lambda u: _half_integrand(warp, u), 0.0, 1.0, config, singular_left=singular
    )
    scale = 2.0 * FOUR_PI_SQ  # two symmetric halves
    return VolumeResult(value=scale * val, abs_error_estimate=scale * err, warp=warp)


def limit_volume(beta: float) -> float:
    """Closed-form volume of the extreme warp: (2π)²(2β + 4 - 2 ln 4)."""
    return FOUR_PI_SQ * (2.0 * beta + 4.0 - 2.0 * math.log(4.0))


def volume_upper_bound(beta: float) -> float:
    """Uniform volume bound 4π³β valid along the whole sequence."""
    return 4.0 * math.pi**3 * beta


@dataclass(frozen=True)
class VolumeConvergenceReport:
    a_schedule: tuple[float, ...]
    values: tuple[float, ...]
    limit: float
    strictly_increasing: bool
    within_bound: bool
    final_rel_gap: float

    def rows(self):
        for a, v in zip(self.a_schedule, self.values):
            yield {"a": a, "volume": v, "limit": self.limit}


def volume_convergence(
    a_schedule: Sequence[float], beta: float = 2.0
) -> VolumeConvergenceReport:
    """Volumes along the schedule: strictly increasing, uniformly bounded,
    approaching the extreme volume."""
    values = [volume(SequenceWarp(a=a, beta=beta)).value for a in a_schedule]
    lim = volume(ExtremeWarp(beta=beta)).value
    bound = volume_upper_bound(beta)
    inc = all(b > a for a, b in zip(values[:-1], values[1:]))
    within = all(v <= bound + 1e-9 for v in values)
    gap = abs(values[-1] - lim) / lim
    return VolumeConvergenceReport(
        a_schedule=tuple(a_schedule),
        values=tuple(values),
        limit=lim,
        strictly_increasing=inc,
        within_bound=within,
        final_rel_gap=gap,
    )


def fiber_length(warp: WarpFamily, r_pole: float) -> float:
    """Length 2π·f of a pole fiber; the extreme warp's pole fibers are
    unrectifiable and raise."""
    if r_pole not in (0.0, math.pi):
        raise ValueError("fiber length is defined at the poles r ∈ {0, π}")
    if isinstance(warp, ExtremeWarp):
        raise ExtremeUnrectifiable("extreme pole fibers have no finite length")
    return fiber_circumference(warp, r_pole)


# -- covering estimates --------------------------------------------------------


def smallest_valid_m(p: float) -> int:
    """Least integer m ≥ 2 with 1 + 1/(m-1) < p."""
    if p <= 1.0:
        raise ExponentCondition(f"no valid m for p = {p} (need p > 1)")
    m = 2
    while 1.0 + 1.0 / (m - 1) >= p:
        m += 1
    return m


@dataclass(frozen=True)
class CoverEstimate:
    p: float
    m: int
    N: int
    r_N: float
    H_upper: float
    applicable: bool  # 2π/N below the validity threshold for this m


@dataclass(frozen=True)
class CoverScan:
    p: float
    m: int
    entries: tuple[CoverEstimate, ...]
    slope: float
    exponent: float

    @property
    def vanishing(self) -> bool:
        hs = [e.H_upper for e in self.entries]
        return all(b < a for a, b in zip(hs[:-1], hs[1:]))


def hausdorff_cover(
    p: float,
    m: int,
    N_schedule: Sequence[int],
    beta: float = 2.0,
) -> CoverScan:
    """Covering upper estimates for one pole fiber at dimension exponent p.

    N evenly spaced fiber points with separation δ = 2π/N are covered by balls
    of radius r_N = (3+β)·δ^(1-1/m); the estimate 2^p·N·r_N^p scales like
    N^(1-p+p/m).  Entries outside the closed-form bound's validity domain
    (δ ≥ threshold) are flagged, not dropped: the scaling is pure arithmetic.
    """
    if 1.0 + 1.0 / (m - 1) >= p:
        raise ExponentCondition(
            f"need 1 + 1/(m-1) < p, got m={m}, p={p}"
        )
    delta_m = min(singular_envelope_threshold(m), math.pi / 2)
    entries = []
    for N in N_schedule:
        delta = 2.0 * math.pi / N
        r_N = (3.0 + beta) * delta ** (1.0 - 1.0 / m)
        H = 2.0**p * N * r_N**p
        entries.append(
            CoverEstimate(
                p=p, m=m, N=int(N), r_N=r_N, H_upper=H, applicable=delta < delta_m
            )
        )
    if len(entries) >= 2:
        logs_n = np.log([e.N for e in entries])
        logs_h = np.log([e.H_upper for e in entries])
        slope = float(np.polyfit(logs_n, logs_h, 1)[0])
    else:
        slope = float("nan")
    return CoverScan(
        p=p,
        m=m,
        entries=tuple(entries),
        slope=slope,
        exponent=1.0 - p + p / m,
    )


# -- partition sums --------------------------------------------------------------


@dataclass(frozen=True)
class PartitionEntry:
    a: float
    fiber_value: float          # f_j(0)
    sum_lower: float            # certified lower bound for the partition sum
    sum_upper: float            # upper estimate, ≤ 2π f_j(0)
    threshold: float            # π f_j(0)
    certified: bool             # sum_lower > threshold


@dataclass(frozen=True)
class H1Report:
    N_partition: int
    entries: tuple[PartitionEntry, ...]
    all_certified: bool
    thresholds_unbounded: bool

    def rows(self):
        for e in self.entries:
            yield {
                "a": e.a,
                "sum_lower": e.sum_lower,
                "sum_upper": e.sum_upper,
                "threshold": e.threshold,
                "certified": e.certified,
            }


def h1_partition_sum(
    a_schedule: Sequence[float],
    N_partition: int = 1024,
    beta: float = 2.0,
) -> H1Report:
    """Partition sums over the r = 0 fiber certifying infinite length.

    A uniform partition into N arcs of fiber separation δ = 2π/N gives per-arc
    distance in [stay-or-escape lower, two-leg upper]; the certified lower sum
    must exceed π·f_j(0) for every schedule entry, and those thresholds grow
    without bound.  Limit-distance sums dominate every entry's sums since the
    distances are monotone in the schedule.
    """
    delta = 2.0 * math.pi / N_partition
    entries = []
    for a in a_schedule:
        warp = SequenceWarp(a=a, beta=beta)
        f0 = float(warp_eval(warp, 0.0))
        lower = N_partition * singular_fiber_lower(warp, delta)
        upper = N_partition * min(
            two_leg_fiber_bound(warp, delta), f0 * delta
        )
        thr = math.pi * f0
        entries.append(
            PartitionEntry(
                a=a,
                fiber_value=f0,
                sum_lower=lower,
                sum_upper=upper,
                threshold=thr,
                certified=lower > thr,
            )
        )
    thresholds = [e.threshold for e in entries]
    return H1Report(
        N_partition=N_partition,
        entries=tuple(entries),
        all_certified=all(e.certified for e in entries),
        thresholds_unbounded=all(b > a for a, b in zip(thresholds[:-1], thresholds[1:])),
    )


# -- dimension verdict -----------------------------------------------------------


@dataclass(frozen=True)
class DimensionVerdict:
    dimension: float
    h1_infinite: bool
    scans: tuple[CoverScan, ...]
    partition: H1Report

    @property
    def consistent(self) -> bool:
        upper_ok = all(
            s.vanishing and abs(s.slope - s.exponent) < 1e-6 and s.exponent < 0
            for s in self.scans
        )
        return upper_ok and self.partition.all_certified


def hausdorff_dim_scan(
    p_grid: Sequence[float],
    N_schedule: Sequence[int],
    beta: float = 2.0,
    a_schedule: Optional[Sequence[float]] = None,
    N_partition: int = 1024,
) -> DimensionVerdict:
    """Combine vanishing covering estimates (dimension ≤ 1) with divergent
    partition sums (dimension ≥ 1, infinite one-dimensional measure)."""
    scans = tuple(
        hausdorff_cover(p, smallest_valid_m(p), N_schedule, beta) for p in p_grid
    )
    if a_schedule is None:
        a_schedule = [2.0 ** (-j) for j in range(21)]
    partition = h1_partition_sum(a_schedule, N_partition, beta)
    return DimensionVerdict(
        dimension=1.0,
        h1_infinite=partition.all_certified,
        scans=scans,
        partition=partition,
    )
