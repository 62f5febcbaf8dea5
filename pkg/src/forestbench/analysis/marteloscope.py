"""Marteloscope export: the 2D plot-level summary of the inventory."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .inventory import ForestInventory

CSV_FIELDS = ["id", "x", "y", "dbh", "height", "coverage_bins", "flags"]


def export_marteloscope(
    inventory: ForestInventory, directory, stem: str = "marteloscope"
) -> dict[str, Path]:
    """Write CSV, GeoJSON, and SVG renderings; returns the file paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = [inventory.trees[i].to_dict() for i in sorted(inventory.trees)]

    csv_path = directory / f"{stem}.csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_FIELDS)
        for r in rows:
            writer.writerow(
                [
                    r["id"],
                    f"{r['x']:.4f}",
                    f"{r['y']:.4f}",
                    "" if r["dbh"] is None else f"{r['dbh']:.4f}",
                    "" if r["height"] is None else f"{r['height']:.3f}",
                    len(r["coverage_bins"]),
                    ";".join(r["flags"]),
                ]
            )

    geojson_path = directory / f"{stem}.geojson"
    features = [
        {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [r["x"], r["y"]]},
            "properties": {
                "id": r["id"],
                "dbh": r["dbh"],
                "height": r["height"],
                "coverage_bins": len(r["coverage_bins"]),
                "flags": r["flags"],
            },
        }
        for r in rows
    ]
    geojson_path.write_text(
        json.dumps({"type": "FeatureCollection", "features": features}, indent=2)
    )

    svg_path = directory / f"{stem}.svg"
    svg_path.write_text(_render_svg(rows))
    return {"csv": csv_path, "geojson": geojson_path, "svg": svg_path}


def _render_svg(rows, scale: float = 8.0, dbh_exaggeration: float = 10.0) -> str:
    if rows:
        xs = [r["x"] for r in rows]
        ys = [r["y"] for r in rows]
        x0, x1 = min(xs) - 5, max(xs) + 5
        y0, y1 = min(ys) - 5, max(ys) + 5
    else:
        x0, x1, y0, y1 = 0.0, 10.0, 0.0, 10.0
    w = (x1 - x0) * scale
    h = (y1 - y0) * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.2f} {h:.2f}">',
        f'<rect width="{w:.2f}" height="{h:.2f}" fill="#f7f5ef"/>',
    ]
    for r in rows:
        px = (r["x"] - x0) * scale
        py = (y1 - r["y"]) * scale  # svg y grows downward
        dbh = r["dbh"] or 0.1
        radius = max(1.5, 0.5 * dbh * dbh_exaggeration * scale / 8.0 * 4.0)
        parts.append(
            f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{radius:.2f}" '
            f'fill="#4a7c59" fill-opacity="0.8" stroke="#2d4a35" stroke-width="0.5"/>'
        )
        label = f"{dbh:.2f}" if r["dbh"] is not None else "?"
        parts.append(
            f'<text x="{px + radius + 1:.2f}" y="{py + 2:.2f}" font-size="7" '
            f'fill="#333">{r["id"]}:{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
