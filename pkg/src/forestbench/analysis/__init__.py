from .cloth import ClothParams, DegenerateTerrain, TerrainModel, fit_terrain_cloth
from .cylinder import CylinderFit, CylinderFitError, fit_cylinder
from .circles import (
    CircleBand,
    ReconstructionError,
    fit_circle_kasa,
    fit_circles_along_stem,
    refine_circle,
)
from .frustums import Frustum, reconstruct_frustums, stack_volume
from .segmentation import SegmentationParams, TreeCandidate, segment_trees
from .inventory import (
    AggregationParams,
    BREAST_HEIGHT,
    ForestInventory,
    InstanceSegment,
    TreeInstance,
)
from .marteloscope import export_marteloscope

__all__ = [
    "AggregationParams",
    "BREAST_HEIGHT",
    "CircleBand",
    "ClothParams",
    "CylinderFit",
    "CylinderFitError",
    "DegenerateTerrain",
    "ForestInventory",
    "Frustum",
    "InstanceSegment",
    "ReconstructionError",
    "SegmentationParams",
    "TerrainModel",
    "TreeCandidate",
    "TreeInstance",
    "export_marteloscope",
    "fit_circle_kasa",
    "fit_circles_along_stem",
    "fit_cylinder",
    "fit_terrain_cloth",
    "reconstruct_frustums",
    "refine_circle",
    "segment_trees",
    "stack_volume",
]
