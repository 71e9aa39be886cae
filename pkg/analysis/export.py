"""
analysis/export.py - Level Export (GRDECL / legacy VTK)

- export_grdecl_level: any stored level as a self-contained GRDECL file
- write_vtk: legacy ASCII UNSTRUCTURED_GRID of hexahedra for viewers

VTK points are emitted per cell (8 each), x/y interpolated along the
pillar at the corner depth, so faulted corners stay disconnected.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from core.grid import CornerPointModel, corner_array, dequantize
from core.grdecl import write_grdecl
from codec.pyramid import Pyramid, synthesize_to_level
from transforms.properties import haar_display_value

logger = logging.getLogger(__name__)

VTK_HEXAHEDRON = 12

# Hexahedron corner order: bottom face counter-clockwise, then top face
HEX_CORNERS = (
    (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
    (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1),
)


def export_grdecl_level(pyramid: Pyramid, level: int, path, config_echo: Optional[Dict] = None) -> int:
    model = synthesize_to_level(pyramid, level)
    return write_grdecl(model, path, level, config_echo)


# ==================== VTK ====================

def cell_points(model: CornerPointModel) -> np.ndarray:
    """(ni, nj, nk, 8, 3) real-valued corner coordinates in HEX_CORNERS order."""
    dims = model.dims
    scale = model.quantization.geometry_scale
    zc = dequantize(corner_array(model.zcorn(), dims), scale)
    pillars = dequantize(model.pillars.values, scale)
    ni, nj, nk = dims.cell_shape

    points = np.empty((ni, nj, nk, 8, 3), dtype=np.float64)
    for n, (a, b, c) in enumerate(HEX_CORNERS):
        z = zc[a::2, b::2, c::2]                                  # (ni, nj, nk)
        pillar = pillars[a:a + ni, b:b + nj][:, :, None, :]       # (ni, nj, 1, 6)
        top, bottom = pillar[..., :3], pillar[..., 3:]
        span = bottom[..., 2] - top[..., 2]
        t = np.divide(z - top[..., 2], span, out=np.zeros_like(z), where=span != 0)
        points[:, :, :, n, 0] = top[..., 0] + t * (bottom[..., 0] - top[..., 0])
        points[:, :, :, n, 1] = top[..., 1] + t * (bottom[..., 1] - top[..., 1])
        points[:, :, :, n, 2] = z
    return points


def display_values(model: CornerPointModel, depth: int) -> Dict[str, np.ndarray]:
    """Per-cell values shown in viewers: means for continuous fields, classes otherwise."""
    out = {}
    for prop in model.properties:
        if prop.is_categorical:
            out[prop.name] = prop.values
        else:
            history = None if prop.support is None else [prop.support]
            out[prop.name] = haar_display_value(prop.values, depth, prop.scale, history)
    return out


def _format(values, fmt: str) -> List[str]:
    return [fmt % v for v in values]


def vtk_text(model: CornerPointModel, level: int = 0, keep_inactive: bool = False,
             config_echo: Optional[Dict] = None) -> str:
    dims = model.dims
    # GRDECL order (i fastest) keeps cell ids aligned with the ACTNUM listing
    order = np.arange(dims.n_cells).reshape(dims.nk, dims.nj, dims.ni).transpose(2, 1, 0)
    mask = np.ones(dims.cell_shape, dtype=bool) if keep_inactive else model.actnum
    selected = np.sort(order[mask])
    ii = selected % dims.ni
    jj = (selected // dims.ni) % dims.nj
    kk = selected // (dims.ni * dims.nj)
    n = selected.size

    points = cell_points(model)[ii, jj, kk].reshape(-1, 3)
    title = f"hexashrink level {level}"
    if config_echo:
        title += f" config {json.dumps(config_echo, sort_keys=True, separators=(',', ':'), default=str)}"

    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {8 * n} double")
    lines.extend(f"{x:.6f} {y:.6f} {z:.6f}" for x, y, z in points)
    lines.append(f"CELLS {n} {9 * n}")
    lines.extend("8 " + " ".join(str(8 * c + p) for p in range(8)) for c in range(n))
    lines.append(f"CELL_TYPES {n}")
    lines.extend([str(VTK_HEXAHEDRON)] * n)

    lines.append(f"CELL_DATA {n}")
    if keep_inactive:
        lines.extend(["SCALARS ACTNUM int 1", "LOOKUP_TABLE default"])
        lines.extend(_format(model.actnum[ii, jj, kk].astype(int), "%d"))
    for name, values in display_values(model, -level).items():
        cells = values[ii, jj, kk]
        if model.property(name).is_categorical:
            lines.extend([f"SCALARS {name} int 1", "LOOKUP_TABLE default"])
            lines.extend(_format(cells, "%d"))
        else:
            lines.extend([f"SCALARS {name} double 1", "LOOKUP_TABLE default"])
            lines.extend(_format(cells, "%.9g"))
    return "\n".join(lines) + "\n"


def write_vtk(model: CornerPointModel, path, level: int = 0, keep_inactive: bool = False,
              config_echo: Optional[Dict] = None) -> int:
    data = vtk_text(model, level, keep_inactive, config_echo).encode("ascii")
    Path(path).write_bytes(data)
    logger.info(f"Wrote {path} ({len(data):,} bytes, level {level}, "
                f"{'all' if keep_inactive else 'active'} cells)")
    return len(data)


def export_vtk_level(pyramid: Pyramid, level: int, path, keep_inactive: bool = False,
                     config_echo: Optional[Dict] = None) -> int:
    return write_vtk(synthesize_to_level(pyramid, level), path, level, keep_inactive, config_echo)
