"""Tree candidate extraction from a terrain-normalized payload cloud.

Seeds come from connected components of a foliage-free height slice; every
non-ground point is then assigned to its nearest seed (a Voronoi partition)
and refined by keeping only points near the fitted cylinder surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .cloth import TerrainModel
from .cylinder import CylinderFit, CylinderFitError, fit_cylinder


@dataclass(frozen=True)
class SegmentationParams:
    slice_min: float = 1.0          # m above terrain, below typical foliage
    slice_max: float = 3.0
    link_distance: float = 0.3      # m, horizontal component linking
    min_seed_points: int = 8
    surface_band: float = 0.10      # m around the cylinder surface
    min_points: int = 50
    radius_min: float = 0.025
    radius_max: float = 1.0
    min_normalized_z: float = 0.2   # keep clear of ground returns


@dataclass
class TreeCandidate:
    points: np.ndarray              # payload frame (original z)
    cylinder: CylinderFit
    base: np.ndarray                # (3,) payload frame, axis at terrain height
    seed_xy: np.ndarray
    n_slice_points: int = 0


def _connected_components(xy: np.ndarray, link: float) -> list[np.ndarray]:
    tree = cKDTree(xy)
    pairs = tree.query_pairs(link, output_type="ndarray")
    parent = np.arange(len(xy))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(len(xy))])
    comps = []
    for root in np.unique(roots):
        comps.append(np.nonzero(roots == root)[0])
    return comps


def segment_trees(
    points: np.ndarray,
    terrain: TerrainModel,
    ground_mask: np.ndarray | None = None,
    params: SegmentationParams = SegmentationParams(),
) -> list[TreeCandidate]:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        return []
    ground = (
        np.zeros(len(pts), dtype=bool) if ground_mask is None else np.asarray(ground_mask)
    )
    z_norm = pts[:, 2] - terrain.height_at(pts[:, 0], pts[:, 1])

    in_slice = (~ground) & (z_norm >= params.slice_min) & (z_norm <= params.slice_max)
    slice_idx = np.nonzero(in_slice)[0]
    if len(slice_idx) == 0:
        return []

    comps = _connected_components(pts[slice_idx][:, :2], params.link_distance)
    seeds = []
    seed_members = []
    for comp in comps:
        if len(comp) >= params.min_seed_points:
            seeds.append(pts[slice_idx[comp], :2].mean(axis=0))
            seed_members.append(slice_idx[comp])
    if not seeds:
        return []
    seeds = np.asarray(seeds)

    assignable = (~ground) & (z_norm >= params.min_normalized_z)
    cand_idx = np.nonzero(assignable)[0]
    if len(cand_idx) == 0:
        return []
    _, owner = cKDTree(seeds).query(pts[cand_idx][:, :2])

    candidates: list[TreeCandidate] = []
    for s, seed in enumerate(seeds):
        member_idx = cand_idx[owner == s]
        if len(member_idx) < params.min_points:
            continue
        # model the stem from the clean slice band, then gather the full
        # height extent around that surface
        slice_norm = pts[seed_members[s]].copy()
        slice_norm[:, 2] = z_norm[seed_members[s]]
        cluster_norm = pts[member_idx].copy()
        cluster_norm[:, 2] = z_norm[member_idx]
        try:
            cyl = fit_cylinder(slice_norm if len(slice_norm) >= 10 else cluster_norm)
        except CylinderFitError:
            continue
        keep = np.abs(cyl.distance_to_axis(cluster_norm) - cyl.radius) <= params.surface_band
        if keep.sum() < params.min_points:
            continue
        if not (params.radius_min <= cyl.radius <= params.radius_max):
            continue
        kept_idx = member_idx[keep]
        base_xy = cyl.axis_xy_at(0.0)
        base_z = float(terrain.height_at(base_xy[0], base_xy[1]))
        candidates.append(
            TreeCandidate(
                points=pts[kept_idx],          # original (de-normalized) frame
                cylinder=cyl,
                base=np.array([base_xy[0], base_xy[1], base_z]),
                seed_xy=seed,
                n_slice_points=len(seed_members[s]),
            )
        )
    return candidates
