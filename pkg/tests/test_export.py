"""
tests/test_export.py - GRDECL and VTK Level Export

Usage:
    python -m tests.test_export
"""

import sys
import logging
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from analysis.export import (
    VTK_HEXAHEDRON,
    cell_points,
    display_values,
    export_grdecl_level,
    export_vtk_level,
    vtk_text,
    write_vtk,
)
from codec.pyramid import analyze_pyramid, synthesize_to_level
from core.grdecl import read_grdecl
from core.grid import models_equal
from tests.fixtures import faulted_model, small_model

logging.basicConfig(level=logging.INFO, format="%(message)s")
logger = logging.getLogger(__name__)


def _section(lines, keyword):
    return next(i for i, line in enumerate(lines) if line.startswith(keyword))


def test_single_cell_vtk():
    model = small_model(1, 1, 1, anticline_amplitude=0.0)
    lines = vtk_text(model).splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert lines[3] == "DATASET UNSTRUCTURED_GRID"
    assert lines[4] == "POINTS 8 double"
    cells = _section(lines, "CELLS")
    assert lines[cells] == "CELLS 1 9"
    assert lines[cells + 1] == "8 0 1 2 3 4 5 6 7"
    types = _section(lines, "CELL_TYPES")
    assert lines[types + 1] == str(VTK_HEXAHEDRON)
    assert "SCALARS PORO double 1" in lines
    assert "SCALARS ROCKTYPE int 1" in lines


def test_points_follow_pillars():
    model = small_model(1, 1, 1, anticline_amplitude=0.0)
    points = cell_points(model)[0, 0, 0]
    assert np.allclose(points[0], [0.0, 0.0, 1000.0])
    assert np.allclose(points[6], [50.0, 50.0, 1002.0])

    tilted = small_model(2, 1, 1, anticline_amplitude=0.0, pillar_tilt=0.1)
    upper, lower = cell_points(tilted)[0, 0, 0, 0], cell_points(tilted)[0, 0, 0, 4]
    assert lower[2] > upper[2] and lower[0] > upper[0]


def test_inactive_cells_are_dropped():
    model = faulted_model()
    active = int(model.actnum.sum())
    assert 0 < active < model.dims.n_cells
    lines = vtk_text(model).splitlines()
    assert lines[_section(lines, "CELLS")] == f"CELLS {active} {9 * active}"
    assert "SCALARS ACTNUM int 1" not in lines

    lines = vtk_text(model, keep_inactive=True).splitlines()
    n = model.dims.n_cells
    assert lines[_section(lines, "CELLS")] == f"CELLS {n} {9 * n}"
    start = lines.index("SCALARS ACTNUM int 1") + 2
    assert sum(int(v) for v in lines[start:start + n]) == active


def test_config_echo_in_title():
    model = small_model(2, 2, 2)
    title = vtk_text(model, -1, config_echo={"levels": 1, "note": "x" * 400}).splitlines()[1]
    assert title.startswith("hexashrink level -1 config {")
    assert len(title) == 255


def test_coarse_display_values_are_means():
    model = small_model(8, 8, 4)
    pyramid = analyze_pyramid(model, 2)
    fine = model.property("PORO")
    fine_values = fine.values / fine.scale
    for level in (-1, -2):
        shown = display_values(synthesize_to_level(pyramid, level), -level)["PORO"]
        assert shown.min() >= fine_values.min() - 1e-9
        assert shown.max() <= fine_values.max() + 1e-9
    coarsest = display_values(pyramid.coarsest, 2)["PORO"]
    assert np.isclose(coarsest.mean(), fine_values.mean())


def test_level_exports_to_files():
    model = faulted_model()
    pyramid = analyze_pyramid(model, 2)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        export_grdecl_level(pyramid, 0, tmp / "l0.grdecl")
        assert models_equal(read_grdecl(tmp / "l0.grdecl"), model)

        export_grdecl_level(pyramid, -1, tmp / "l1.grdecl", config_echo={"levels": 2})
        coarse = read_grdecl(tmp / "l1.grdecl")
        assert coarse.dims == pyramid.header.level_dims[1]
        assert np.array_equal(coarse.actnum, synthesize_to_level(pyramid, -1).actnum)

        size = export_vtk_level(pyramid, -2, tmp / "l2.vtk")
        assert size == (tmp / "l2.vtk").stat().st_size
        size = write_vtk(model, tmp / "l0.vtk", keep_inactive=True)
        assert (tmp / "l0.vtk").read_text().count("\n12\n") >= 1 and size > 0


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            print("\n" + "=" * 60)
            print(name)
            print("=" * 60)
            fn()
            print("  ✓ passed")
