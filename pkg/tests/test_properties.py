"""
tests/test_properties.py - Sum-Haar and Modelet Property Levels

Usage:
    python -m tests.test_properties
"""

import sys
import itertools
import logging
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from core.errors import CorruptDetail, OverflowRisk, Unreconstructible, ValueOutsideUniverse
from core.grid import CellPropertyField, GridDims, PropertyKind
from transforms.properties import (
    CategoricalDetailSet,
    Direction,
    analyze_field_level,
    anchor_mask,
    check_headroom,
    haar_analyze_block,
    haar_analyze_level,
    haar_display_value,
    haar_synthesize_block,
    haar_synthesize_level,
    modelet_analyze_block,
    modelet_analyze_level,
    modelet_mode,
    modelet_modes,
    modelet_synthesize_block,
    modelet_synthesize_level,
    support_counts,
    transform_field,
)
from transforms.properties import _flip, _unflip
from tests.fixtures import small_model

logging.basicConfig(level=logging.INFO, format="%(message)s")
logger = logging.getLogger(__name__)

SLOW = {"test_tiled_rock_proportions_survive_coarsening"}


# ==================== SUM-HAAR ====================

def test_haar_block_round_trip():
    block = [1, 2, 3, 4, 5, 6, 7, 8]
    detail_set = haar_analyze_block(block)
    assert detail_set.approx == 36
    assert detail_set.details == tuple(8 * v - 36 for v in block[1:])
    assert haar_synthesize_block(detail_set) == block

    for m in range(1, 9):
        values = list(range(-3, m - 3))
        assert haar_synthesize_block(haar_analyze_block(values)) == values


def test_haar_level_conserves_sums():
    rng = np.random.default_rng(3)
    for shape in [(4, 4, 4), (5, 3, 7), (1, 1, 1), (2, 9, 1)]:
        values = rng.integers(-10 ** 6, 10 ** 6, size=shape)
        sums, details = haar_analyze_level(values)
        assert sums.sum() == values.sum()
        assert not details[anchor_mask(shape)].any()
        assert np.array_equal(haar_synthesize_level(sums, details), values)


def test_haar_detects_tampered_detail():
    values = np.arange(64).reshape(4, 4, 4)
    sums, details = haar_analyze_level(values)
    details = details.copy()
    details[0, 0, 1] += 1
    try:
        haar_synthesize_level(sums, details)
    except CorruptDetail:
        return
    raise AssertionError("tampered detail accepted")


def test_display_value():
    assert haar_display_value(40000, 1, 1000) == 5.0
    support = np.array([8, 2, 1])
    shown = haar_display_value(np.array([8000, 2000, 1000]), 1, 1000, [support])
    assert np.allclose(shown, [1.0, 1.0, 1.0])


def test_support_counts():
    support = support_counts(GridDims(3, 3, 3), 1)
    assert support.shape == (2, 2, 2)
    assert support[0, 0, 0] == 8 and support[1, 1, 1] == 1
    assert support.sum() == 27


def test_headroom_check():
    prop = CellPropertyField("PORO", PropertyKind.CONTINUOUS, np.full((2, 2, 2), 1 << 50), scale=1000)
    try:
        check_headroom(prop, 5)
    except OverflowRisk:
        return
    raise AssertionError("overflowing field accepted")


# ==================== MODELET ====================

def test_modelet_mode_ties():
    assert modelet_mode([1, 1, 2, 2], [1, 2]) == 1
    assert modelet_mode([1, 1, 2, 2], [1, 2], shell=[2]) == 2
    assert modelet_mode([3, 3, 3, 0], [0, 3], shell=[0] * 20) == 3


def test_modelet_every_universe_round_trips():
    """Every non-empty universe over classes 0..7."""
    rng = np.random.default_rng(11)
    classes = range(8)
    for size in range(1, 9):
        for omega in itertools.combinations(classes, size):
            blocks = [list(pair) for pair in itertools.product(omega, repeat=2)]
            for _ in range(10):
                m = int(rng.integers(1, 9))
                blocks.append(rng.choice(omega, size=m).tolist())
            for block in blocks:
                detail_set = modelet_analyze_block(block, omega)
                assert detail_set.mode in omega
                for d in detail_set.details:
                    assert detail_set.mode + d in omega or detail_set.mode - d in omega
                assert modelet_synthesize_block(detail_set) == block, (omega, block)


def test_modelet_every_mode_value_pair():
    for size in range(1, 9):
        for omega in itertools.combinations(range(8), size):
            universe = np.array(omega, dtype=np.int64)
            modes, values = (a.ravel() for a in np.meshgrid(universe, universe, indexing="ij"))
            details = _flip(values - modes, modes, universe)
            assert np.array_equal(np.abs(details), np.abs(values - modes))
            assert np.array_equal(_unflip(details, modes, universe), values), omega
            assert np.all(np.isin(modes + details, universe) | np.isin(modes - details, universe))


def test_modelet_level_matches_blocks():
    rng = np.random.default_rng(4)
    values = rng.integers(0, 3, size=(5, 4, 3))
    modes = modelet_modes(values, [0, 1, 2])
    for bi, bj, bk in itertools.product(*(range(n) for n in modes.shape)):
        lo = (2 * bi, 2 * bj, 2 * bk)
        hi = tuple(min(a + 2, n) for a, n in zip(lo, values.shape))
        block = values[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
        box = tuple(slice(max(a - 1, 0), min(b + 1, n)) for a, b, n in zip(lo, hi, values.shape))
        inside = np.zeros(values.shape, dtype=bool)
        inside[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True
        shell = values[box][~inside[box]]
        assert modes[bi, bj, bk] == modelet_mode(block.ravel().tolist(), [0, 1, 2], shell.tolist())

    modes, details = modelet_analyze_level(values, [0, 1, 2])
    assert np.array_equal(modelet_synthesize_level(modes, details, [0, 1, 2]), values)


def test_modelet_rejects_bad_values():
    try:
        modelet_analyze_level(np.array([[[0, 5]]]), [0, 1], "ROCKTYPE")
    except ValueOutsideUniverse as e:
        assert "ROCKTYPE" in str(e)
    else:
        raise AssertionError("value outside universe accepted")

    try:
        modelet_synthesize_block(CategoricalDetailSet(9, (0, 0), (0, 1)))
    except Unreconstructible:
        pass
    else:
        raise AssertionError("mode outside universe accepted")


# ==================== FIELD PYRAMIDS ====================

def test_field_pyramid_round_trip():
    model = small_model(7, 5, 6)
    for prop in model.properties:
        pyramid = transform_field(prop, Direction.ANALYSIS, 3)
        assert pyramid.levels == 3
        assert pyramid.coarsest.values.shape == (1, 1, 1)
        restored = transform_field(pyramid, Direction.SYNTHESIS, 3)
        assert np.array_equal(restored.values, prop.values)
        if prop.is_categorical:
            for values in pyramid.level_values:
                assert set(values) <= set(prop.universe)


def test_coarse_support_tracks_fine_cells():
    prop = small_model(5, 3, 3).property("PORO")
    coarse, _ = analyze_field_level(prop)
    assert coarse.support.sum() == prop.values.size
    assert coarse.values.sum() == prop.values.sum()


def test_tiled_rock_proportions_survive_coarsening():
    model = small_model(64, 64, 32, rock_types=4, rock_proportions=(0.4, 0.3, 0.2, 0.1), rock_tile=8)
    rock = model.property("ROCKTYPE")
    fine = np.bincount(rock.values.ravel(), minlength=4) / rock.values.size
    current = rock
    for _ in range(3):
        current, _ = analyze_field_level(current)
        counts = np.bincount(current.values.ravel(), minlength=4) / current.values.size
        assert np.allclose(counts, fine), (counts, fine)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            print("\n" + "=" * 60)
            print(name)
            print("=" * 60)
            fn()
            print("  ✓ passed")
