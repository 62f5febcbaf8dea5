"""Offline analysis: run the full inventory pipeline over one dense cloud."""

from __future__ import annotations

from pathlib import Path

from ..geometry import Pose4
from ..analysis import (
    AggregationParams,
    ClothParams,
    ForestInventory,
    SegmentationParams,
    export_marteloscope,
    fit_terrain_cloth,
    segment_trees,
)
from ..plyio import read_ply


def analyze_cloud(
    ply_path,
    output_dir,
    cloth: ClothParams = ClothParams(),
    segmentation: SegmentationParams = SegmentationParams(),
    aggregation: AggregationParams = AggregationParams(),
) -> ForestInventory:
    """Treat the whole cloud as a single payload; write the usual exports."""
    points = read_ply(ply_path)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    terrain, ground = fit_terrain_cloth(points, cloth)
    candidates = segment_trees(points, terrain, ground, segmentation)
    inventory = ForestInventory(aggregation)
    inventory.aggregate(
        candidates, terrain, anchor_node=0, anchor_pose=Pose4(), payload_id=0
    )
    inventory.reestimate()
    export_marteloscope(inventory, out)
    inventory.save_json(out / "inventory.json")
    return inventory
