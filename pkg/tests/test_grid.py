import math

import numpy as np
import pytest
from scipy.sparse.csgraph import connected_components

from warpgeo.errors import SingularNode
from warpgeo.geometry import ConstantWarp, ExtremeWarp, Point, SequenceWarp
from warpgeo.grid import GridGraph, GridSpec


def test_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(3, 16, 16)
    with pytest.raises(ValueError):
        GridSpec(16, 16, 16, tube_radius=2.0)


def test_node_roundtrip(small_graph):
    for flat in (0, 37, small_graph.n_nodes - 1):
        p = small_graph.node_point(flat)
        snapped, disp, node = small_graph.snap(p)
        assert snapped == flat
        assert disp == 0.0


def test_restricted_grid_excludes_tube(tube_graph):
    R = tube_graph.spec.tube_radius
    assert tube_graph.effective_tube_radius >= R
    rs = tube_graph.r_levels
    assert np.all(rs >= R - 1e-12)
    assert np.all(rs <= math.pi - R + 1e-12)


def test_restricted_grid_connected(tube_graph):
    tube_graph.set_warp(ConstantWarp(1.0))
    n, _ = connected_components(tube_graph.matrix, directed=False)
    assert n == 1


def test_full_grid_connected(small_graph):
    small_graph.set_warp(ConstantWarp(1.0))
    n, _ = connected_components(small_graph.matrix, directed=False)
    assert n == 1


def test_extreme_requires_restriction_or_clamp(small_graph, tube_graph):
    with pytest.raises(SingularNode):
        small_graph.edge_weights(ExtremeWarp(beta=2.0))
    # clamped extreme is allowed on the full grid
    w = small_graph.edge_weights(ExtremeWarp(beta=2.0, clamp=True))
    assert np.all(np.isfinite(w))
    # restricted grid needs no clamping
    w = tube_graph.edge_weights(ExtremeWarp(beta=2.0))
    assert np.all(np.isfinite(w))


def test_weights_symmetric(small_graph):
    small_graph.set_warp(SequenceWarp(a=0.5, beta=2.0))
    m = small_graph.matrix
    asym = (m - m.T)
    assert abs(asym).max() == 0.0


def test_weights_nonnegative_and_pole_ring_zero(small_graph):
    small_graph.set_warp(SequenceWarp(a=0.5, beta=2.0))
    w = small_graph.matrix.data
    assert np.all(w >= 0.0)
    # θ-steps on the pole ring cost nothing: the fiber of θ collapses there
    table = small_graph.weight_table(SequenceWarp(a=0.5, beta=2.0))
    assert table[0, 0] == 0.0
    assert table[-1, 0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "warp",
    [
        ConstantWarp(1.0),
        SequenceWarp(a=1.0, beta=2.0),
        SequenceWarp(a=2.0**-20, beta=2.0),
        ExtremeWarp(beta=2.0, clamp=True),
    ],
)
def test_weight_table_audit(small_graph, warp):
    """Fixed-panel table entries match adaptive quadrature to 1e-6 relative."""
    table = small_graph.weight_table(warp)
    audit = small_graph.weight_table_audit(warp)
    mask = audit > 0
    rel = np.abs(table[mask] - audit[mask]) / audit[mask]
    assert rel.max() < 1e-6


def test_edge_sample_matches_table(small_graph):
    """Random edges carry exactly their class's table weight."""
    warp = SequenceWarp(a=0.125, beta=2.0)
    w = small_graph.edge_weights(warp)
    table = small_graph.weight_table(warp)
    rng = np.random.default_rng(11)
    sample = rng.integers(0, small_graph.n_edges, 2000)
    lev = small_graph._edge_lev[sample]
    cls = small_graph._edge_cls[sample]
    assert np.array_equal(w[sample], table[lev, cls])


def test_edge_monotone_in_schedule(small_graph):
    prev = None
    for j in range(0, 21, 2):
        w = small_graph.edge_weights(SequenceWarp(a=2.0**-j, beta=2.0))
        if prev is not None:
            assert np.all(w >= prev)
        prev = w


def test_refined_spec_contains_levels(small_spec):
    fine = small_spec.refined()
    coarse_levels = np.arange(small_spec.n_r) * (math.pi / (small_spec.n_r - 1))
    fine_levels = np.arange(fine.n_r) * (math.pi / (fine.n_r - 1))
    for r in coarse_levels:
        assert np.min(np.abs(fine_levels - r)) < 1e-12


def test_snap_reports_displacement(small_graph):
    p = Point(0.51, 0.2, 0.3)
    flat, disp, node = small_graph.snap(p)
    assert disp > 0.0
    assert disp < math.sqrt(3) * max(
        small_graph.h_r, small_graph.d_theta, small_graph.d_phi
    )
