"""Reproducible point-pair samples, stratified by distance to the singular set."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Point, pole_distance
from .grid import GridGraph

#: pole-distance bands the stratified sampler covers
RHO_BANDS = ((0.0, 0.1), (0.1, 0.5), (0.5, math.pi / 2))


@dataclass(frozen=True)
class PairSample:
    """A seeded list of point pairs with the sampling mode recorded."""

    pairs: tuple[tuple[Point, Point], ...]
    mode: str
    seed: int

    def __len__(self) -> int:
        return len(self.pairs)

    def snapped(self, graph: GridGraph) -> "PairSample":
        """The same sample with every point moved to its nearest grid node."""
        snapped = tuple(
            (graph.snap(p)[2], graph.snap(q)[2]) for p, q in self.pairs
        )
        return PairSample(pairs=snapped, mode=f"{self.mode}+snapped", seed=self.seed)


def _point_in_band(rng: np.random.Generator, lo: float, hi: float) -> Point:
    """Random point with pole distance in [lo, hi); mirrored across the equator."""
    rho = rng.uniform(lo, hi)
    r = rho if rng.random() < 0.5 else math.pi - rho
    return Point(r, rng.uniform(0.0, 2 * math.pi), rng.uniform(0.0, 2 * math.pi))


def _uniform_point(rng: np.random.Generator) -> Point:
    return Point(
        rng.uniform(0.0, math.pi),
        rng.uniform(0.0, 2 * math.pi),
        rng.uniform(0.0, 2 * math.pi),
    )


def sample_pairs(
    n: int,
    seed: int,
    mode: str = "stratified",
    n_sources: Optional[int] = None,
    rho_min: float = 0.0,
) -> PairSample:
    """Draw n point pairs.

    Modes: ``uniform`` (both endpoints uniform in coordinates), ``stratified``
    (first endpoints split in thirds across the pole-distance bands),
    ``near_singular`` (two thirds of first endpoints within pole distance 0.1).
    With ``n_sources`` the first endpoints cycle through that many distinct
    points, so batched shortest-path runs can share sources.  ``rho_min``
    keeps every endpoint at pole distance ≥ rho_min (tube-interior samples).
    """
    rng = np.random.default_rng(seed)
    if mode not in ("uniform", "stratified", "near_singular"):
        raise ValueError(f"unknown sampling mode: {mode}")

    def draw_target() -> Point:
        while True:
            pt = _uniform_point(rng)
            if pole_distance(pt) >= rho_min:
                return pt

    def draw_source(k: int) -> Point:
        if mode == "uniform":
            return draw_target()
        if mode == "near_singular":
            bands = (RHO_BANDS[0], RHO_BANDS[0], RHO_BANDS[1])
        else:
            bands = RHO_BANDS
        lo, hi = bands[k % len(bands)]
        lo = max(lo, rho_min)
        hi = max(hi, lo + 1e-6)
        return _point_in_band(rng, lo, hi)

    m = n_sources if n_sources else n
    sources = [draw_source(k) for k in range(m)]
    pairs = tuple((sources[k % m], draw_target()) for k in range(n))
    return PairSample(pairs=pairs, mode=mode, seed=seed)
