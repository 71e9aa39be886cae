"""
tests/test_pyramid.py - Multi-Level Analysis / Synthesis

Usage:
    python -m tests.test_pyramid
    python -m tests.test_pyramid --quick    (via tests.runner)
"""

import sys
import logging
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from codec.pyramid import analyze_pyramid, iter_levels, synthesize_to_level
from core.errors import LevelOutOfRange, MissingChunk
from core.grid import RealModel, coord_from_pillars, models_equal, quantize_model
from core.synthetic import generate_synthetic
from transforms.fault_geometry import NORTH, SOUTH, derive_config_map
from tests.fixtures import faulted_model, random_spec, small_model

logging.basicConfig(level=logging.INFO, format="%(message)s")
logger = logging.getLogger(__name__)

SLOW = {"test_randomized_round_trips", "test_level_extents_of_large_grid"}


def _same_level(a, b) -> bool:
    if a.dims != b.dims:
        return False
    if not (np.array_equal(a.nodez.values, b.nodez.values)
            and np.array_equal(a.pillars.values, b.pillars.values)
            and np.array_equal(a.actnum, b.actnum)):
        return False
    return all(np.array_equal(pa.values, pb.values) for pa, pb in zip(a.properties, b.properties))


def test_level_extents_of_large_grid():
    pyramid = analyze_pyramid(small_model(80, 45, 26), 4)
    assert [d.to_list() for d in pyramid.header.level_dims] == [
        [80, 45, 26], [40, 23, 13], [20, 12, 7], [10, 6, 4], [5, 3, 2],
    ]
    assert pyramid.coarsest.dims.to_list() == [5, 3, 2]


def test_level_range_checks():
    model = small_model(4, 4, 2)
    for levels in (-1, 0, model.dims.max_levels() + 1):
        try:
            analyze_pyramid(model, levels)
        except LevelOutOfRange:
            continue
        raise AssertionError(f"{levels} levels accepted")

    pyramid = analyze_pyramid(model, 2)
    for target in (1, -3):
        try:
            synthesize_to_level(pyramid, target)
        except LevelOutOfRange:
            continue
        raise AssertionError(f"target {target} accepted")


def test_full_round_trip():
    for model in (small_model(), faulted_model(), faulted_model(9, 7, 5), small_model(1, 1, 1)):
        for levels in range(1, model.dims.max_levels() + 1):
            pyramid = analyze_pyramid(model, levels)
            assert models_equal(synthesize_to_level(pyramid, 0), model), (model.dims, levels)


def test_intermediate_levels_match_direct_analysis():
    model = faulted_model(16, 12, 8)
    deep = analyze_pyramid(model, 3)
    for level in (1, 2):
        direct = analyze_pyramid(model, level).coarsest
        assert _same_level(synthesize_to_level(deep, -level), direct)


def test_iter_levels_walks_up_to_full_resolution():
    model = faulted_model()
    pyramid = analyze_pyramid(model, 3)
    assert pyramid.available_levels() == [-3, -2, -1, 0]
    visited = list(iter_levels(pyramid))
    assert [level for level, _ in visited] == [-3, -2, -1, 0]
    assert [m.dims for _, m in visited] == pyramid.header.level_dims[::-1]
    assert models_equal(visited[-1][1], model)


def test_fault_persists_at_every_level():
    model = small_model(32, 16, 8, faults=(("i", 16, 30.0),))
    pyramid = analyze_pyramid(model, 3)
    for level, coarse in iter_levels(pyramid):
        axes = derive_config_map(coarse.nodez).axes
        column = 16 >> -level
        assert np.all(axes[column, :, NORTH] & axes[column, :, SOUTH]), level


def test_large_epsilon_still_lossless():
    model = faulted_model()
    pyramid = analyze_pyramid(model, 2, epsilon=10 ** 9)
    assert models_equal(synthesize_to_level(pyramid, 0), model)


def test_categorical_universes_nest():
    model = small_model(16, 16, 8, rock_types=4, speckle=0.2)
    universe = model.property("ROCKTYPE").universe
    pyramid = analyze_pyramid(model, 4)
    per_level = pyramid.header.level_universes["ROCKTYPE"]
    assert len(per_level) == 5
    for level, coarse in iter_levels(pyramid):
        present = np.unique(coarse.property("ROCKTYPE").values).tolist()
        assert present == per_level[-level]
        assert set(present) <= set(universe)
        assert coarse.property("ROCKTYPE").universe == universe


def test_horizontal_fault_side_channel_survives():
    base = small_model(2, 2, 2)
    zcorn = base.zcorn().copy()
    zcorn[2 * 4 * 4] += 1000
    scale = base.quantization.geometry_scale
    real = RealModel(base.dims, coord_from_pillars(base.pillars.values) / scale, zcorn / scale)
    model = quantize_model(real, base.quantization, allow_horizontal_faults=True)

    pyramid = analyze_pyramid(model, 1)
    assert pyramid.header.has_top_z
    assert np.array_equal(synthesize_to_level(pyramid, 0).zcorn(), zcorn)

    pyramid.top_z = None
    assert pyramid.available_levels() == [-1]
    try:
        synthesize_to_level(pyramid, 0)
    except MissingChunk as e:
        assert e.chunk == "L0/top_z"
    else:
        raise AssertionError("missing side channel accepted")


def test_randomized_round_trips():
    rng = np.random.default_rng(2024)
    for n in range(200):
        spec = random_spec(rng)
        model = generate_synthetic(spec)
        levels = int(rng.integers(1, model.dims.max_levels() + 1))
        pyramid = analyze_pyramid(model, levels)
        assert models_equal(synthesize_to_level(pyramid, 0), model), (n, spec)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            print("\n" + "=" * 60)
            print(name)
            print("=" * 60)
            fn()
            print("  ✓ passed")
