"""
tests/test_fault_geometry.py - Fault Configurations and Geometry Levels

Usage:
    python -m tests.test_fault_geometry
"""

import sys
import itertools
import logging
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from core.grid import ActivityPlanes, GridDims, NodeZField, vertex_activity_from_actnum
from transforms.fault_geometry import (
    CROSS,
    FAULT_FREE,
    STRAIGHT_EW,
    STRAIGHT_NS,
    FaultConfig,
    analyze_geometry_level,
    coarse_activity,
    derive_config_map,
    group_index,
    group_members,
    k_map,
    predict_config,
    select_node,
    synthesize_geometry_level,
)
from tests.fixtures import faulted_model, small_model

logging.basicConfig(level=logging.INFO, format="%(message)s")
logger = logging.getLogger(__name__)


def _centre_config(quadrants) -> FaultConfig:
    """Config of the interior node of a 2x2x1 grid whose centre quadrants are given."""
    values = np.zeros((3, 3, 2, 4), dtype=np.int64)
    values[1, 1, :, :] = quadrants
    return derive_config_map(NodeZField(values)).config(1, 1)


def test_all_quadrant_partitions_give_valid_configs():
    states = set()
    for quadrants in itertools.product(range(4), repeat=4):
        config = _centre_config(quadrants)
        assert config.is_valid, (quadrants, config)
        states.add(config.axes())
    assert len(states) == 12


def test_straight_fault_config():
    # SW, NW on the low-i side; SE, NE thrown down by 5
    assert _centre_config([0, 0, 5, 5]) == STRAIGHT_NS
    assert _centre_config([3, 3, 3, 3]) == FAULT_FREE
    assert _centre_config([0, 1, 2, 3]) == CROSS
    # NW, NE at 5 against SW, SE at 7
    assert _centre_config([7, 5, 7, 5]) == STRAIGHT_EW


def test_epsilon_merges_small_offsets():
    values = np.zeros((3, 3, 2, 4), dtype=np.int64)
    values[1, 1, :, :] = [0, 0, 2, 2]
    field = NodeZField(values)
    assert derive_config_map(field, epsilon=0).config(1, 1) == STRAIGHT_NS
    assert derive_config_map(field, epsilon=2).config(1, 1) == FAULT_FREE


def test_or_prediction_and_selection():
    free = [FAULT_FREE] * 4
    assert predict_config(free) == FAULT_FREE
    assert select_node(free, FAULT_FREE) == 0

    group = [FAULT_FREE, CROSS, FAULT_FREE, FAULT_FREE]
    predicted = predict_config(group)
    assert predicted == FaultConfig(south=True, east=True)
    assert select_node(group, predicted) == 0

    group = [STRAIGHT_NS, FAULT_FREE, STRAIGHT_NS, FAULT_FREE]
    predicted = predict_config(group)
    assert predicted == STRAIGHT_NS
    assert select_node(group, predicted) == 0
    assert select_node(group, predicted, valid=[False, True, True, True]) == 2


def test_config_families():
    assert FAULT_FREE.family == "fault-free"
    assert STRAIGHT_NS.family == "straight"
    assert FaultConfig(north=True, east=True).family == "corner"
    assert FaultConfig(True, True, True, False).family == "T"
    assert CROSS.family == "cross"
    assert FaultConfig(north=True).family == "single"
    assert FAULT_FREE.distance(CROSS) == 4


def test_groups_cover_every_node_once():
    for cells in range(1, 21):
        index, valid = group_index(cells)
        members = index[valid]
        assert sorted(members.tolist()) == list(range(cells + 1)), cells
        assert index.shape[0] == -(-cells // 2) + 1


def test_k_map():
    assert k_map(4).tolist() == [0, 2, 4]
    assert k_map(3).tolist() == [0, 2, 3]
    assert k_map(1).tolist() == [0, 1]


def test_geometry_level_round_trip():
    for model in (small_model(), faulted_model(), faulted_model(7, 9, 5), small_model(1, 1, 1)):
        field, pillars, act, detail = analyze_geometry_level(model.nodez, model.pillars, model.activity)
        coarse = model.dims.coarsen()
        assert field.values.shape[:3] == coarse.node_shape
        assert act.cells.shape == coarse.cell_shape
        nodez, fine_pillars, fine_act = synthesize_geometry_level(field, pillars, detail)
        assert np.array_equal(nodez.values, model.nodez.values)
        assert np.array_equal(fine_pillars.values, model.pillars.values)
        assert np.array_equal(fine_act.cells, model.actnum)
        assert np.array_equal(fine_act.vertex, model.vertex_activity)


def test_flat_model_has_zero_geometry_details():
    model = small_model(8, 6, 4, anticline_amplitude=0.0)
    *_, detail = analyze_geometry_level(model.nodez, model.pillars, model.activity)
    assert detail.is_zero()


def test_activity_extremes():
    dims = GridDims(4, 4, 4)
    model = small_model(4, 4, 4)
    for state in (True, False):
        act = ActivityPlanes(np.full(dims.node_shape, state), np.full(dims.cell_shape, state))
        _, _, coarse, _ = analyze_geometry_level(model.nodez, model.pillars, act)
        assert np.all(coarse.cells == state)
        assert np.all(coarse.vertex == state)


def _cells_from_parents(vertex: np.ndarray, sel_i: np.ndarray, sel_j: np.ndarray) -> np.ndarray:
    """Coarse cell activity checked one cell and one parent at a time."""
    nk = vertex.shape[2] - 1
    kmap = k_map(nk)
    cells = np.zeros((sel_i.shape[0] - 1, sel_i.shape[1] - 1, len(kmap) - 1), dtype=bool)
    for ci, cj, ck in np.ndindex(cells.shape):
        active = True
        for a in (0, 1):
            for b in (0, 1):
                i, j = sel_i[ci + a, cj + b], sel_j[ci + a, cj + b]
                for c, step in ((0, 1), (1, -1)):
                    k = kmap[ck + c]
                    inner = min(max(k + step, 0), nk)
                    active = active and vertex[i, j, k] and vertex[i, j, inner]
        cells[ci, cj, ck] = active
    return cells


def _activity_cases():
    rng = np.random.default_rng(23)
    for n in range(8):
        ni, nj, nk = (int(v) for v in rng.integers(1, 12, size=3))
        fraction = float(rng.uniform(0.2, 0.9))
        model = faulted_model(max(ni, 2), max(nj, 3), nk, active_fraction=fraction, seed=100 + n)
        yield model
        speckled = rng.random(model.dims.cell_shape) < rng.uniform(0.3, 0.9)
        yield model.replace(actnum=speckled, vertex_activity=None)


def test_coarse_cells_need_all_sixteen_parents():
    for model in _activity_cases():
        _, _, coarse, detail = analyze_geometry_level(model.nodez, model.pillars, model.activity)
        mi, mj, _ = group_members(model.dims)
        pick = detail.selection[..., None]
        sel_i = np.take_along_axis(mi, pick, axis=-1)[..., 0]
        sel_j = np.take_along_axis(mj, pick, axis=-1)[..., 0]
        expected = _cells_from_parents(model.vertex_activity, sel_i, sel_j)
        assert np.array_equal(coarse.cells, expected), model.dims
        assert np.array_equal(coarse.vertex, model.vertex_activity[sel_i, sel_j][:, :, k_map(model.dims.nk)])


def test_coarse_activity_on_random_lattices():
    rng = np.random.default_rng(5)
    for _ in range(20):
        dims = GridDims(*(int(v) for v in rng.integers(1, 9, size=3)))
        vertex = rng.random(dims.node_shape) < rng.uniform(0.5, 1.0)
        mi, mj, valid = group_members(dims)
        pick = np.where(valid, rng.random(valid.shape), -1.0).argmax(axis=-1)[..., None]
        sel_i = np.take_along_axis(mi, pick, axis=-1)[..., 0]
        sel_j = np.take_along_axis(mj, pick, axis=-1)[..., 0]
        _, cells = coarse_activity(vertex, sel_i, sel_j)
        assert cells.shape == dims.coarsen().cell_shape
        assert np.array_equal(cells, _cells_from_parents(vertex, sel_i, sel_j))


def test_active_cells_never_grow_with_coarsening():
    for model in _activity_cases():
        field, pillars, act = model.nodez, model.pillars, model.activity
        dims = model.dims
        for _ in range(dims.max_levels()):
            field, pillars, coarse, _ = analyze_geometry_level(field, pillars, act)
            assert int(coarse.cells.sum()) <= int(act.cells.sum()), dims
            act = coarse
            dims = dims.coarsen()


def test_derived_vertex_activity():
    actnum = np.zeros((3, 3, 3), dtype=bool)
    actnum[1, 1, 1] = True
    vertex = vertex_activity_from_actnum(actnum)
    assert int(vertex.sum()) == 8
    assert vertex[1:3, 1:3, 1:3].all()


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            print("\n" + "=" * 60)
            print(name)
            print("=" * 60)
            fn()
            print("  ✓ passed")
