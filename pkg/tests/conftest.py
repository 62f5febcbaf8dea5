import numpy as np
import pytest

from forestbench.simworld import (
    GroundTruthTree,
    ObstacleSpec,
    Patch,
    Terrain,
    TerrainSpec,
    TreeSpec,
    World,
    WorldSpec,
)


def build_world(
    extent=(60.0, 40.0),
    amplitude=0.0,
    slope=0.0,
    trees=(),
    patches=(),
    seed=0,
    correlation_length=18.0,
):
    """Hand-assembled world for unit tests: explicit trees and patches."""
    spec = WorldSpec(
        extent=extent,
        terrain=TerrainSpec(
            amplitude=amplitude, correlation_length=correlation_length, mean_slope=slope
        ),
        trees=TreeSpec(count=0),
        seed=seed,
    )
    terrain = Terrain(spec.terrain, np.random.default_rng(seed))
    xs, ys, grid = terrain.sample_grid(extent, 0.5)
    tree_objs = []
    for i, t in enumerate(trees):
        x, y = t["x"], t["y"]
        tree_objs.append(
            GroundTruthTree(
                id=i,
                base=np.array([x, y, float(terrain.height(x, y))]),
                base_diameter=t.get("diameter", 0.3),
                taper_rate=t.get("taper", 0.01),
                height=t.get("height", 12.0),
                lean_direction=t.get("lean_direction", 0.0),
                lean_angle=t.get("lean_angle", 0.0),
            )
        )
    patch_objs = [Patch(center=p["center"], radius=p["radius"], kind=p["kind"]) for p in patches]
    return World(
        spec=spec,
        terrain=terrain,
        heightfield=grid,
        heightfield_xs=xs,
        heightfield_ys=ys,
        trees=tree_objs,
        patches=patch_objs,
    )


@pytest.fixture
def flat_world():
    return build_world()
