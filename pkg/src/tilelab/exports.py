"""File export: JSON, OFF/OBJ meshes, SVG and CSV, all with run headers.

Every file starts with (or embeds) the config hash and seed so that a rerun
with the same configuration is byte-identical and traceable.
"""

from __future__ import annotations

import json
import os
from decimal import Decimal
from typing import Dict, Iterable, List, Sequence

from .dyadic import Dyadic


def _fmt(d: Dyadic, digits: int) -> str:
    value = Decimal(d.num) / Decimal(1 << d.exp)
    return f"{value:.{digits}f}"


def comment_header(config_hash: str, seed, char: str = "#") -> List[str]:
    return [f"{char} config-hash: {config_hash}", f"{char} seed: {seed}"]


def _box_mesh(box, digits: int, offset: int):
    """Vertices and quad faces of one axis box (indices offset)."""
    (x0, x1), (y0, y1), (z0, z1) = box
    corners = [(x, y, z) for z in (z0, z1) for y in (y0, y1) for x in (x0, x1)]
    verts = [" ".join(_fmt(c, digits) for c in corner) for corner in corners]
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5),  # bottom, top
        (0, 2, 6, 4), (1, 5, 7, 3),  # x faces
        (0, 4, 5, 1), (2, 3, 7, 6),  # y faces
    ]
    faces = [tuple(offset + i for i in q) for q in quads]
    return verts, faces


def tiling_off(tiling, config_hash: str, seed, digits: int = 9) -> str:
    """ASCII OFF scene: one cuboid shell per box of every tile."""
    verts: List[str] = []
    faces: List[tuple] = []
    for key in sorted(tiling.tile_of, key=repr):
        for box in tiling.tile_of[key].boxes:
            v, f = _box_mesh(box, digits, len(verts))
            verts.extend(v)
            faces.extend(f)
    lines = ["OFF"]
    lines += comment_header(config_hash, seed)
    lines.append(f"{len(verts)} {len(faces)} 0")
    lines += verts
    lines += [f"4 {a} {b} {c} {d}" for a, b, c, d in faces]
    return "\n".join(lines) + "\n"


def tiling_obj(tiling, config_hash: str, seed, digits: int = 9) -> str:
    verts: List[str] = []
    faces: List[tuple] = []
    for key in sorted(tiling.tile_of, key=repr):
        for box in tiling.tile_of[key].boxes:
            v, f = _box_mesh(box, digits, len(verts))
            verts.extend(v)
            faces.extend(f)
    lines = comment_header(config_hash, seed)
    lines += [f"v {v}" for v in verts]
    # OBJ indices are 1-based
    lines += [f"f {a + 1} {b + 1} {c + 1} {d + 1}" for a, b, c, d in faces]
    return "\n".join(lines) + "\n"


def json_report(payload: Dict, config_hash: str, seed) -> str:
    body = {"config_hash": config_hash, "seed": seed}
    body.update(payload)
    return json.dumps(body, indent=2, sort_keys=True, default=repr) + "\n"


def csv_table(rows: Sequence[Sequence], header: Sequence[str],
              config_hash: str, seed) -> str:
    lines = comment_header(config_hash, seed)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(str(c) for c in row))
    return "\n".join(lines) + "\n"


def svg_with_header(svg: str, config_hash: str, seed) -> str:
    comment = f"<!-- config-hash: {config_hash} seed: {seed} -->"
    if svg.startswith("<svg"):
        return comment + "\n" + svg + "\n"
    return comment + "\n" + svg


def write_file(out_dir: str, name: str, content: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(content)
    return path
