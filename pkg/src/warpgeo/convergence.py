"""Convergence diagnostics for the warp schedule.

The distances of the warp family increase monotonically in j (the warps do,
pointwise), and converge to the limit distance; on a fixed grid topology the
solver's upper estimates inherit exact monotonicity, so the diagnostics here
compare like against like: upper estimate against upper estimate.  The gap
sequence is an empirical convergence measure (the theory provides no rate);
the certified statements are the monotone envelope, the diameter bound, and
the tube-restriction inequality with its 3π·sin(R) certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bounds import (
    BoundCertificate,
    best_waypoint_bound,
    diameter_bound,
    three_arc_bound,
)
from .errors import ExtremeAtPole
from .geometry import (
    ExtremeWarp,
    Point,
    SequenceWarp,
    WarpFamily,
    pole_distance,
    product_distance,
    singular_envelope_threshold,
    s1_distance,
    warp_eval,
)
from .grid import GridGraph, GridSpec
from .sampling import PairSample
from .solver import batch_lowers, batch_pair_uppers

_ENVELOPE_TOL = 1e-12


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-schedule-step aggregate of pair bracket estimates."""

    a_schedule: tuple[float, ...]
    lowers: np.ndarray          # (n_pairs,)
    uppers: np.ndarray          # (n_steps, n_pairs)
    envelope_violations: int
    cauchy_tail: float
    diameter_ok: bool

    @property
    def limit_estimates(self) -> np.ndarray:
        return self.uppers[-1]

    def rows(self):
        for j, a in enumerate(self.a_schedule):
            for k in range(self.uppers.shape[1]):
                yield {
                    "pair_id": k,
                    "j": j,
                    "a": a,
                    "lower": float(self.lowers[k]),
                    "upper": float(self.uppers[j, k]),
                }


def pointwise_convergence_scan(
    a_schedule: Sequence[float],
    sample: PairSample,
    graph: GridGraph,
    beta: float = 2.0,
    refine_iters: int = 0,
) -> ConvergenceReport:
    """Sweep the warp schedule on a fixed grid and check the monotone envelope.

    For every pair the upper estimates must be nondecreasing in j (exactly,
    up to fp rounding: edge weights are pointwise monotone and the analytic
    bounds are monotone in the warp).  The Cauchy tail is the largest change
    across the last schedule step.
    """
    pairs = sample.pairs
    lowers = batch_lowers(pairs)
    uppers = np.empty((len(a_schedule), len(pairs)))
    for j, a in enumerate(a_schedule):
        warp = SequenceWarp(a=a, beta=beta)
        uppers[j] = batch_pair_uppers(graph, warp, pairs, refine_iters).uppers

    steps = np.diff(uppers, axis=0)
    violations = int(np.count_nonzero(steps < -_ENVELOPE_TOL))
    cauchy = float(np.max(np.abs(steps[-1]))) if len(a_schedule) > 1 else 0.0
    diam = diameter_bound(beta)
    return ConvergenceReport(
        a_schedule=tuple(a_schedule),
        lowers=lowers,
        uppers=uppers,
        envelope_violations=violations,
        cauchy_tail=cauchy,
        diameter_ok=bool(np.all(uppers <= diam + 1e-9)),
    )


@dataclass(frozen=True)
class UniformGapReport:
    """Estimated sup-gap between the limit distance and each schedule step."""

    a_schedule: tuple[float, ...]
    gaps: tuple[float, ...]
    gh_bounds: tuple[float, ...]
    tol_uniform: float
    converged_at: Optional[int]

    @property
    def final_gap(self) -> float:
        return self.gaps[-1]

    @property
    def last_prelimit_gap(self) -> float:
        return self.gaps[-2] if len(self.gaps) >= 2 else self.gaps[-1]

    def rows(self):
        for j, (a, g, gh) in enumerate(zip(self.a_schedule, self.gaps, self.gh_bounds)):
            yield {"j": j, "a": a, "gap": g, "gh_upper_bound": gh}


def uniform_gap(
    report: ConvergenceReport,
    tol_uniform: float = 0.05,
) -> UniformGapReport:
    """Per-step sup over pairs of (limit upper − step upper), floored at 0.

    The last schedule entry serves as the limit reference, so the sequence
    decreases to exactly zero; convergence is declared at the first step whose
    gap is below tol_uniform.
    """
    ref = report.uppers[-1]
    gaps = tuple(
        float(np.max(np.maximum(ref - report.uppers[j], 0.0)))
        for j in range(report.uppers.shape[0])
    )
    converged = next((j for j, g in enumerate(gaps) if g < tol_uniform), None)
    return UniformGapReport(
        a_schedule=report.a_schedule,
        gaps=gaps,
        gh_bounds=tuple(gh_upper_bound(g) for g in gaps),
        tol_uniform=tol_uniform,
        converged_at=converged,
    )


def gh_upper_bound(gap: float) -> float:
    """Two metrics on one compact set with uniform gap g have
    Gromov-Hausdorff distance at most g/2."""
    if gap < 0:
        raise ValueError("gap must be nonnegative")
    return 0.5 * gap


@dataclass(frozen=True)
class CompletionEntry:
    R: float
    R_eff: float
    discrepancy: float
    bound: float
    allowance: float


@dataclass(frozen=True)
class CompletionReport:
    """Limit-vs-extreme-restricted discrepancies for a shrinking tube sweep."""

    entries: tuple[CompletionEntry, ...]
    decreasing: bool

    def rows(self):
        for e in self.entries:
            yield {
                "R": e.R,
                "R_eff": e.R_eff,
                "discrepancy": e.discrepancy,
                "bound": e.bound,
                "allowance": e.allowance,
            }


def completion_identity_check(
    R_schedule: Sequence[float],
    sample: PairSample,
    spec: GridSpec,
    beta: float = 2.0,
    a_ref: float = 2.0 ** -20,
    allowance: float = 0.0,
    full_graph: Optional[GridGraph] = None,
    restricted_graphs: Optional[dict] = None,
    refine_iters: int = 0,
) -> CompletionReport:
    """Compare the limit-distance proxy (smallest sequence warp, unrestricted)
    with the extreme metric restricted to tube complements.

    For pairs inside every tube the two must agree within 3π·sin(R) plus
    solver allowance, and the discrepancy must shrink as R does.
    """
    R_max = max(R_schedule)
    for p, q in sample.pairs:
        if pole_distance(p) < R_max or pole_distance(q) < R_max:
            raise ValueError("sample pair leaves the largest tube complement")

    if full_graph is None:
        full_graph = GridGraph(GridSpec(spec.n_r, spec.n_theta, spec.n_phi))
    ref_warp = SequenceWarp(a=a_ref, beta=beta)
    u_ref = batch_pair_uppers(full_graph, ref_warp, sample.pairs, refine_iters).uppers

    entries = []
    for R in sorted(R_schedule, reverse=True):
        if restricted_graphs and R in restricted_graphs:
            g = restricted_graphs[R]
        else:
            g = GridGraph(GridSpec(spec.n_r, spec.n_theta, spec.n_phi, R))
        ext = ExtremeWarp(beta=beta)
        u_res = batch_pair_uppers(g, ext, sample.pairs, refine_iters).uppers
        disc = float(np.max(np.abs(u_res - u_ref)))
        entries.append(
            CompletionEntry(
                R=R,
                R_eff=g.effective_tube_radius or R,
                discrepancy=disc,
                bound=3.0 * math.pi * math.sin(R),
                allowance=allowance,
            )
        )
    discs = [e.discrepancy for e in entries]
    decreasing = all(b <= a + 1e-9 for a, b in zip(discs[:-1], discs[1:]))
    return CompletionReport(entries=tuple(entries), decreasing=decreasing)


# -- homeomorphism moduli ------------------------------------------------------


@dataclass(frozen=True)
class ModulusCase:
    base: tuple[float, float, float]
    eps: float
    delta: float
    worst_upper: float
    ok: bool
    witness: Optional[tuple[float, float, float]]


@dataclass(frozen=True)
class ContinuityReport:
    cases: tuple[ModulusCase, ...]
    lipschitz_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.lipschitz_ok and all(c.ok for c in self.cases)

    def rows(self):
        for c in self.cases:
            yield {
                "base": list(c.base),
                "eps": c.eps,
                "delta": c.delta,
                "worst_upper": c.worst_upper,
                "verdict": "ok" if c.ok else "fail",
            }


def continuity_modulus(p: Point, eps: float, beta: float) -> float:
    """The explicit δ(ε) that forces limit-distance continuity at p.

    Away from the singular set: δ = min(ρ(p)/2, ε/(1 + σ_p + f_∞(r_p))) with
    σ_p = sin(r_p)/sin(r_p/2).  On it: δ = min(1/2, c₃, (ε/(7+β))^(3/2)) with
    c₃ the m=3 envelope threshold.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    ext = ExtremeWarp(beta=beta)
    if p.is_singular:
        c3 = singular_envelope_threshold(3)
        return min(0.5, c3, (eps / (7.0 + beta)) ** 1.5)
    rp = p.r
    d_bar = pole_distance(p)
    # σ_p = sin(r_p)/sin(ρ_p/2) in the reflection-covariant form (the θ-bound
    # constant is sin(ρ_p/2): for r_p ≤ π/2 this is the usual sin(r_p/2))
    sigma = math.sin(rp) / math.sin(d_bar / 2.0)
    return min(d_bar / 2.0, eps / (1.0 + sigma + float(warp_eval(ext, rp))))


def _limit_upper(p: Point, q: Point, beta: float) -> float:
    """Closed-form upper estimate for the limit distance (no grid)."""
    ext = ExtremeWarp(beta=beta)
    vals = []
    for a, b in ((p, q), (q, p)):
        try:
            vals.append(three_arc_bound(ext, a, b).value)
        except ExtremeAtPole:
            pass
    vals.append(best_waypoint_bound(ext, p, q).value)
    return min(vals)


def _probe_near(p: Point, delta: float, rng: np.random.Generator) -> Point:
    """Random point with d_0-distance to p below delta."""
    while True:
        dr = rng.uniform(-delta, delta)
        dth = rng.uniform(-delta, delta) / max(math.sin(p.r), 1e-3)
        dph = rng.uniform(-delta, delta)
        q = Point(p.r + dr, p.theta + dth, p.phi + dph)
        if 0.0 < product_distance(p, q) < delta:
            return q


def continuity_modulus_check(
    eps_list: Sequence[float],
    base_points: Sequence[Point],
    beta: float = 2.0,
    n_probe: int = 64,
    seed: int = 0,
) -> ContinuityReport:
    """Verify the explicit continuity moduli and the Lipschitz-1 inverse.

    For every base point p and ε: all sampled q with d_0(p, q) < δ(ε) must
    have limit-distance upper estimate ≤ ε.  For a singular base the waypoint
    at latitude δ is also tried (it is the construction behind the modulus).
    The inverse direction is d_0 ≤ limit distance, checked against the
    bracket lower bound on the same samples.
    """
    rng = np.random.default_rng(seed)
    ext = ExtremeWarp(beta=beta)
    cases = []
    lipschitz_ok = True
    for p in base_points:
        for eps in eps_list:
            delta = continuity_modulus(p, eps, beta)
            worst = 0.0
            witness = None
            ok = True
            for _ in range(n_probe):
                q = _probe_near(p, delta, rng)
                upper = _limit_upper(p, q, beta)
                if p.is_singular:
                    from .bounds import waypoint_bound

                    r0 = delta if p.r < math.pi / 2 else math.pi - delta
                    upper = min(upper, waypoint_bound(ext, p, q, r0).value)
                lower = product_distance(p, q)
                if lower > upper + 1e-9:
                    lipschitz_ok = False
                if upper > worst:
                    worst = upper
                    witness = q.as_tuple()
                if upper > eps + 1e-9:
                    ok = False
            cases.append(
                ModulusCase(
                    base=p.as_tuple(),
                    eps=eps,
                    delta=delta,
                    worst_upper=worst,
                    ok=ok,
                    witness=witness if not ok else None,
                )
            )
    return ContinuityReport(cases=tuple(cases), lipschitz_ok=lipschitz_ok)
