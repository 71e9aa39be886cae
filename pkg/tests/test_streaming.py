"""
tests/test_streaming.py - Slab-Wise Analysis

Streaming output must be byte-identical to whole-grid analysis.

Usage:
    python -m tests.test_streaming
"""

import sys
import logging
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from codec.container import serialize
from codec.pyramid import analyze_pyramid, synthesize_to_level
from codec.streaming import analyze_streaming, halo_cells, iter_slabs, slab_bounds
from core.errors import SlabCoverageGap
from core.grid import models_equal
from tests.fixtures import faulted_model, small_model

logging.basicConfig(level=logging.INFO, format="%(message)s")
logger = logging.getLogger(__name__)

SLOW = {"test_large_cube_slab_counts"}


def _expect_gap(fn):
    try:
        fn()
    except SlabCoverageGap:
        return
    raise AssertionError("SlabCoverageGap not raised")


def test_slab_bounds_alignment():
    assert slab_bounds(64, 3, 2) == [0, 20, 40, 64]
    assert slab_bounds(30, 2, 2) == [0, 16, 30]
    assert slab_bounds(10, 1, 3) == [0, 10]
    assert halo_cells(2) == 16
    _expect_gap(lambda: slab_bounds(64, 17, 2))


def test_streaming_matches_whole_grid():
    model = faulted_model(64, 12, 6)
    reference = serialize(analyze_pyramid(model, 4))
    for n_slabs in (2, 3, 7):
        pyramid = analyze_streaming(iter_slabs(model, n_slabs, 4), 4)
        assert serialize(pyramid) == reference, n_slabs


def test_streaming_with_fewer_levels_than_stream_depth():
    model = faulted_model(20, 8, 4)
    for levels in (1, 3):
        reference = analyze_pyramid(model, levels)
        pyramid = analyze_streaming(iter_slabs(model, 3, levels, stream_levels=2), levels)
        assert serialize(pyramid) == serialize(reference)
        assert models_equal(synthesize_to_level(pyramid, 0), model)


def test_hook_sees_every_slab_window():
    model = faulted_model(64, 12, 6)
    seen = []
    analyze_streaming(iter_slabs(model, 3, 4), 4, hook=lambda index, cells: seen.append((index, cells)))
    assert [index for index, _ in seen] == [0, 1, 2]
    assert all(cells < model.dims.n_cells for _, cells in seen)


def test_coverage_checks():
    model = faulted_model(64, 12, 6)
    slabs = list(iter_slabs(model, 3, 4))
    _expect_gap(lambda: analyze_streaming(slabs[:2], 4))
    _expect_gap(lambda: analyze_streaming([slabs[1], slabs[0], slabs[2]], 4))
    _expect_gap(lambda: analyze_streaming([], 4))
    _expect_gap(lambda: list(iter_slabs(model, 40, 4)))


def test_large_cube_slab_counts():
    model = small_model(64, 64, 64, rock_types=4, speckle=0.1)
    reference = serialize(analyze_pyramid(model, 4))
    for n_slabs in (2, 3, 7):
        assert serialize(analyze_streaming(iter_slabs(model, n_slabs, 4), 4)) == reference, n_slabs


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            print("\n" + "=" * 60)
            print(name)
            print("=" * 60)
            fn()
            print("  ✓ passed")
