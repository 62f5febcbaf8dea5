import math

import numpy as np
import pytest

from forestbench.estimation import TerrainMap
from forestbench.autonomy import (
    CostParams,
    compute_cost,
    compute_gdf,
    score_traversability,
)

from gdf_oracle import dijkstra_oracle


def flat_map(n=60, value=0.0):
    tm = TerrainMap(resolution=0.1, window=n * 0.1)
    tm.elevation[:] = value
    tm.known[:] = True
    return tm


def test_flat_region_fully_traversable():
    layer = score_traversability(flat_map())
    assert np.allclose(layer.score[layer.known], 1.0)


def test_vertical_step_blocks_a_band():
    tm = flat_map()
    tm.elevation[30:, :] = 0.5
    layer = score_traversability(tm)
    assert np.allclose(layer.score[29:31, :], 0.0)
    assert np.allclose(layer.score[5, :], 1.0)


def test_raising_roughness_never_raises_score():
    tm = flat_map()
    base = score_traversability(tm).score.copy()
    for bump in (0.02, 0.05, 0.12, 0.3):
        tm2 = flat_map()
        tm2.elevation[20, 20] += bump
        s = score_traversability(tm2).score
        assert s[20, 20] <= base[20, 20] + 1e-12


def test_unknown_cells_have_no_score():
    tm = flat_map()
    tm.known[10:20, 10:20] = False
    layer = score_traversability(tm)
    assert np.allclose(layer.score[10:20, 10:20], 0.0)
    assert not layer.known[12, 12]


def test_cost_direct_substitution():
    layer = score_traversability(flat_map(n=10))
    # known cells, perfect score -> zero cost
    assert np.allclose(compute_cost(layer, CostParams(2.0, 1.0, 0.5)), 0.0)
    layer.score[:] = 0.25
    cost = compute_cost(layer, CostParams(w_trav=2.0, w_unkn=1.0, s_unkn=0.5))
    assert np.allclose(cost, 1.5)
    layer.known[:] = False
    cost = compute_cost(layer, CostParams(w_trav=99.0, w_unkn=1.0, s_unkn=0.5))
    assert np.allclose(cost, 0.5)


def test_cost_scales_linearly_with_weights():
    rng = np.random.default_rng(3)
    layer = score_traversability(flat_map(n=20))
    layer.score[:] = rng.uniform(0, 1, layer.score.shape)
    layer.known = rng.uniform(0, 1, layer.score.shape) > 0.3
    lam = 3.7
    c1 = compute_cost(layer, CostParams(1.2, 0.8, 0.3))
    c2 = compute_cost(layer, CostParams(1.2 * lam, 0.8 * lam, 0.3))
    assert np.allclose(c2, lam * c1, rtol=1e-12)


def test_gdf_zero_cost_unit_metric():
    cost = np.zeros((15, 15))
    field = compute_gdf(cost, resolution=0.5, goal_cell=(7, 7))
    assert field.distance[7, 7] == 0.0
    assert field.distance[8, 7] == pytest.approx(0.5)
    assert field.distance[8, 8] == pytest.approx(0.5 * math.sqrt(2.0))
    assert field.reachable.all()


def test_gdf_wall_disconnects():
    cost = np.zeros((20, 20))
    cost[10, :] = 5.0  # lethal row
    field = compute_gdf(cost, resolution=0.2, goal_cell=(2, 2), lethal=1.0)
    assert not field.reachable[15, 5]
    assert field.reachable[5, 5]
    assert not field.goal_blocked


def test_gdf_goal_on_lethal_cell():
    cost = np.zeros((10, 10))
    cost[4, 4] = 2.0
    field = compute_gdf(cost, resolution=0.2, goal_cell=(4, 4), lethal=1.0)
    assert field.goal_blocked
    assert not field.reachable.any()


def test_gdf_matches_bruteforce_oracle_exactly():
    rng = np.random.default_rng(11)
    for _ in range(20):
        cost = rng.uniform(0.0, 1.4, size=(20, 20))
        goal = tuple(rng.integers(0, 20, size=2))
        field = compute_gdf(cost, resolution=0.25, goal_cell=goal, lethal=1.0)
        oracle = dijkstra_oracle(cost, 0.25, goal, lethal=1.0)
        assert np.array_equal(field.distance, oracle)
