"""Ground-truth world generation: terrain, tree stems, and surface patches."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..plyio import write_ply
from .spec import WorldSpec
from .terrain import Terrain

HEIGHTFIELD_RESOLUTION = 0.5  # m
_KNOT_SPACING = 1.0           # m between stem knots
_MIN_TOP_DIAMETER = 0.02      # m
BUSH_DOME_HEIGHT = 0.5        # m, vertical semi-axis of the bush proxy


class PlacementExhausted(RuntimeError):
    """Raised when dart throwing cannot place the requested tree count."""

    def __init__(self, achieved: int, requested: int):
        super().__init__(
            f"placed only {achieved} of {requested} trees before the retry "
            "budget ran out; enlarge the extent or relax min spacing"
        )
        self.achieved = achieved
        self.requested = requested


@dataclass
class GroundTruthTree:
    """A stem modeled as one oblique cone: linear taper, linear lean offset.

    Cross-sections are horizontal circles; `height` is measured vertically
    above the base. The knot list is a sampled view of the same surface, so
    frustum-stack reconstructions can be compared against it exactly.
    """

    id: int
    base: np.ndarray                # (3,) world frame, on the terrain surface
    base_diameter: float
    taper_rate: float               # diameter loss per meter of height
    height: float
    lean_direction: float           # rad
    lean_angle: float               # rad

    def radius_at(self, h):
        """Stem radius at vertical height h above the base."""
        return 0.5 * (self.base_diameter - self.taper_rate * np.asarray(h, dtype=float))

    def center_at(self, h):
        """(…, 3) stem axis point at vertical height h above the base."""
        h = np.asarray(h, dtype=float)
        k = math.tan(self.lean_angle)
        dx = k * h * math.cos(self.lean_direction)
        dy = k * h * math.sin(self.lean_direction)
        return np.stack(
            [self.base[0] + dx, self.base[1] + dy, self.base[2] + h], axis=-1
        )

    @property
    def knots(self) -> list[tuple[float, float]]:
        """(height above base, diameter) pairs, first at height 0."""
        hs = list(np.arange(0.0, self.height, _KNOT_SPACING)) + [self.height]
        return [(float(h), float(2.0 * self.radius_at(h))) for h in hs]

    def diameter_at_breast_height(self, terrain_height_at_base: float | None = None) -> float:
        return float(2.0 * self.radius_at(1.3))

    def surface_distance(self, points: np.ndarray) -> np.ndarray:
        """Unsigned distance from points to the stem surface (test oracle).

        Scans candidate heights densely and refines; independent of the ray
        caster's closed-form intersection.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 3)

        def dist_at(p, hs):
            hs = np.atleast_1d(hs)
            centers = self.center_at(hs)
            rho = np.hypot(p[0] - centers[:, 0], p[1] - centers[:, 1])
            radial = rho - self.radius_at(hs)
            return np.sqrt(radial**2 + (p[2] - centers[:, 2]) ** 2)

        out = np.empty(len(pts))
        for i, p in enumerate(pts):
            h_guess = np.clip(p[2] - self.base[2], 0.0, self.height)
            lo = max(0.0, h_guess - 1.0)
            hi = min(self.height, h_guess + 1.0)
            hs = np.linspace(lo, hi, 401)
            d = dist_at(p, hs)
            k = int(np.argmin(d))
            a = hs[max(k - 1, 0)]
            b = hs[min(k + 1, len(hs) - 1)]
            for _ in range(80):  # ternary refine; d is locally convex
                m1 = a + (b - a) / 3.0
                m2 = b - (b - a) / 3.0
                if dist_at(p, m1)[0] <= dist_at(p, m2)[0]:
                    b = m2
                else:
                    a = m1
            out[i] = min(d[k], dist_at(p, 0.5 * (a + b))[0])
        return out

    def sample_surface(self, ring_spacing=0.25, points_per_ring=24) -> np.ndarray:
        hs = np.arange(0.0, self.height + 1e-9, ring_spacing)
        thetas = np.linspace(0.0, 2.0 * np.pi, points_per_ring, endpoint=False)
        centers = self.center_at(hs)            # (H, 3)
        radii = self.radius_at(hs)              # (H,)
        cos_t, sin_t = np.cos(thetas), np.sin(thetas)
        x = centers[:, None, 0] + radii[:, None] * cos_t
        y = centers[:, None, 1] + radii[:, None] * sin_t
        z = np.broadcast_to(centers[:, None, 2], x.shape)
        return np.stack([x, y, z], axis=-1).reshape(-1, 3)


@dataclass(frozen=True)
class Patch:
    center: tuple[float, float]
    radius: float
    kind: str  # "bush" | "damp"

    def contains(self, x: float, y: float) -> bool:
        return (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2 <= self.radius**2


@dataclass
class World:
    spec: WorldSpec
    terrain: Terrain
    heightfield: np.ndarray          # (nx, ny) sampled elevations
    heightfield_xs: np.ndarray
    heightfield_ys: np.ndarray
    trees: list[GroundTruthTree]
    patches: list[Patch] = field(default_factory=list)

    @property
    def extent(self) -> tuple[float, float]:
        return self.spec.extent

    def contains(self, x: float, y: float) -> bool:
        w, h = self.spec.extent
        return 0.0 <= x <= w and 0.0 <= y <= h

    def height(self, x, y):
        return self.terrain.height(x, y)

    def max_surface_height(self) -> float:
        return float(self.heightfield.max()) + 0.05 + BUSH_DOME_HEIGHT

    def patch_at(self, x: float, y: float, kind: str | None = None) -> Patch | None:
        for p in self.patches:
            if (kind is None or p.kind == kind) and p.contains(x, y):
                return p
        return None

    def ground_truth_cloud(
        self, terrain_resolution=0.2, ring_spacing=0.25, points_per_ring=24
    ) -> np.ndarray:
        """Dense noise-free sampling of every world surface."""
        xs, ys, grid = self.terrain.sample_grid(self.spec.extent, terrain_resolution)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        parts = [np.stack([gx.ravel(), gy.ravel(), grid.ravel()], axis=1)]
        for tree in self.trees:
            parts.append(tree.sample_surface(ring_spacing, points_per_ring))
        for patch in self.patches:
            if patch.kind == "bush":
                parts.append(self._sample_bush(patch))
        return np.concatenate(parts, axis=0)

    def _sample_bush(self, patch: Patch, n=160) -> np.ndarray:
        # deterministic Fibonacci-style cap sampling, no RNG needed
        idx = np.arange(n, dtype=float)
        u = idx / max(n - 1, 1)
        theta = idx * 2.399963229728653
        r = patch.radius * np.sqrt(u)
        zc = self.height(*patch.center)
        z = zc + BUSH_DOME_HEIGHT * np.sqrt(np.clip(1.0 - u, 0.0, 1.0))
        return np.stack(
            [patch.center[0] + r * np.cos(theta), patch.center[1] + r * np.sin(theta), z],
            axis=1,
        )

    def export_ply(self, path, **kwargs) -> None:
        write_ply(path, self.ground_truth_cloud(**kwargs))

    def tree_table(self) -> list[dict]:
        return [
            {
                "id": t.id,
                "x": float(t.base[0]),
                "y": float(t.base[1]),
                "z": float(t.base[2]),
                "base_diameter": t.base_diameter,
                "dbh": t.diameter_at_breast_height(),
                "height": t.height,
                "lean_direction": t.lean_direction,
                "lean_angle": t.lean_angle,
                "taper_rate": t.taper_rate,
            }
            for t in self.trees
        ]

    def export_tree_table(self, path) -> None:
        Path(path).write_text(json.dumps(self.tree_table(), indent=2))


def generate_world(spec: WorldSpec) -> World:
    """Build a deterministic world from the spec; same seed, same world."""
    spec.validate()
    seeds = np.random.SeedSequence(spec.seed).spawn(3)
    terrain_rng = np.random.default_rng(seeds[0])
    tree_rng = np.random.default_rng(seeds[1])
    patch_rng = np.random.default_rng(seeds[2])

    terrain = Terrain(spec.terrain, terrain_rng)
    xs, ys, grid = terrain.sample_grid(spec.extent, HEIGHTFIELD_RESOLUTION)

    x0, y0, x1, y1 = spec.region()
    positions: list[np.ndarray] = []
    budget = max(1, 10 * spec.trees.count)
    attempts = 0
    min_sq = spec.trees.min_spacing**2
    while len(positions) < spec.trees.count and attempts < budget:
        attempts += 1
        cand = np.array(
            [tree_rng.uniform(x0, x1), tree_rng.uniform(y0, y1)]
        )
        if positions:
            arr = np.asarray(positions)
            if np.min(np.sum((arr - cand) ** 2, axis=1)) < min_sq:
                continue
        positions.append(cand)
    if len(positions) < spec.trees.count:
        raise PlacementExhausted(len(positions), spec.trees.count)

    trees = []
    for i, pos in enumerate(positions):
        d0 = tree_rng.uniform(*spec.trees.base_diameter_range)
        height = tree_rng.uniform(*spec.trees.height_range)
        # keep the tip diameter positive so taper stays strictly decreasing
        taper = min(spec.trees.taper_rate, (d0 - _MIN_TOP_DIAMETER) / height)
        taper = max(taper, 1e-4)
        lean_angle = tree_rng.uniform(0.0, spec.trees.lean_max)
        lean_dir = tree_rng.uniform(-np.pi, np.pi)
        base = np.array([pos[0], pos[1], terrain.height(pos[0], pos[1])])
        trees.append(
            GroundTruthTree(
                id=i,
                base=base,
                base_diameter=float(d0),
                taper_rate=float(taper),
                height=float(height),
                lean_direction=float(lean_dir),
                lean_angle=float(lean_angle),
            )
        )

    patches: list[Patch] = []
    w, h = spec.extent
    for obs in spec.obstacles:
        for _ in range(obs.count):
            radius = patch_rng.uniform(*obs.radius_range)
            cx = patch_rng.uniform(radius, w - radius)
            cy = patch_rng.uniform(radius, h - radius)
            patches.append(Patch(center=(float(cx), float(cy)), radius=float(radius), kind=obs.kind))

    return World(
        spec=spec,
        terrain=terrain,
        heightfield=grid,
        heightfield_xs=xs,
        heightfield_ys=ys,
        trees=trees,
        patches=patches,
    )
