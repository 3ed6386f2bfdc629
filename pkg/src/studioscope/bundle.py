"""Map-explorer bundle: one JSON file with everything a viewer needs.

The bundle embeds the trained grid, its U-matrix and component planes, the
normalization vectors, and one entry per track (metadata, raw features,
BMU coordinates).  The schema is versioned; viewers refuse versions they
do not understand.
"""

from __future__ import annotations

import json
from pathlib import Path

from .corpus import FEATURE_NAMES, NormalizedCorpus
from .som import Placement, SomGrid, component_planes, grid_to_json, u_matrix

SCHEMA_VERSION = 1


def build_map_bundle(grid: SomGrid, placements: list[Placement],
                     corpus: NormalizedCorpus,
                     stats_summary: dict | None = None) -> dict:
    """Assemble the versioned bundle dict (tracks sorted by track_id)."""
    by_id = {p.track_id: p for p in placements}
    tracks = []
    for record in sorted(corpus.records, key=lambda r: r.track_id):
        p = by_id[record.track_id]
        tracks.append({
            "track_id": record.track_id,
            "title": record.title,
            "artist": record.artist,
            "nation": record.nation,
            "year": record.year,
            "style": record.style,
            "unit_x": p.unit_x,
            "unit_y": p.unit_y,
            "features": {name: getattr(record.features, name)
                         for name in FEATURE_NAMES},
        })
    planes = component_planes(grid)
    bundle = {
        "schema_version": SCHEMA_VERSION,
        "feature_names": list(FEATURE_NAMES),
        "som": {
            "grid": grid_to_json(grid),
            "u_matrix": [[float(v) for v in row] for row in u_matrix(grid)],
            "component_planes": {
                name: [[float(v) for v in row] for row in plane]
                for name, plane in zip(FEATURE_NAMES, planes)
            },
        },
        "normalization": {
            "means": [float(m) for m in corpus.means],
            "stds": [float(s) for s in corpus.stds],
        },
        "tracks": tracks,
    }
    if stats_summary is not None:
        bundle["stats_summary"] = stats_summary
    return bundle


def save_map_bundle(bundle: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(bundle, indent=2, sort_keys=True) + "\n", encoding="utf-8")
