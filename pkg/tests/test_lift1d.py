"""
tests/test_lift1d.py - Integer Lifting Along Pillars

Usage:
    python -m tests.test_lift1d
    pytest tests/test_lift1d.py
"""

import sys
import logging
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from core.errors import CorruptPair
from transforms.lift1d import (
    LiftPair,
    analyze_1d,
    analyze_axis,
    analyze_lattice_axis,
    lattice_coarse_count,
    synthesize_1d,
    synthesize_axis,
    synthesize_lattice_axis,
)

logging.basicConfig(level=logging.INFO, format="%(message)s")
logger = logging.getLogger(__name__)

SLOW = {"test_border_equations_randomized"}


def test_odd_example():
    pair = analyze_1d([10, 12, 14, 20, 30])
    assert pair.approx.tolist() == [10, 13, 30]
    assert pair.details.tolist() == [0, -2]
    assert synthesize_1d(pair).tolist() == [10, 12, 14, 20, 30]


def test_even_example():
    pair = analyze_1d([0, 0, 8, 8])
    assert pair.approx.tolist() == [0, 8]
    assert pair.details.tolist() == [-4, 4]
    assert synthesize_1d(pair).tolist() == [0, 0, 8, 8]


def test_single_sample():
    pair = analyze_1d([42])
    assert pair.approx.tolist() == [42]
    assert pair.details.size == 0
    assert synthesize_1d(pair).tolist() == [42]


def test_constant_and_linear_signals_have_zero_details():
    for n in range(3, 20):
        assert not analyze_1d(np.full(n, 7)).details.any()
    for n in range(3, 20, 2):
        ramp = 5 * np.arange(n) + 100
        assert not analyze_1d(ramp).details.any(), n


def test_border_equations_randomized():
    rng = np.random.default_rng(1234)
    for length in range(1, 66):
        signals = rng.integers(-10 ** 6, 10 ** 6, size=(1600, length))
        approx, details = analyze_axis(signals, axis=1)
        assert np.array_equal(approx[:, 0], signals[:, 0])
        if length != 2:
            assert np.array_equal(approx[:, -1], signals[:, -1])
        assert np.array_equal(synthesize_axis(approx, details, 1, length), signals)


def test_lifting_along_any_axis():
    rng = np.random.default_rng(5)
    block = rng.integers(-500, 500, size=(5, 6, 7))
    for axis in range(3):
        approx, details = analyze_axis(block, axis)
        assert approx.shape[axis] == (block.shape[axis] + 1) // 2
        assert details.shape[axis] == block.shape[axis] // 2
        assert np.array_equal(synthesize_axis(approx, details, axis), block)


def test_corrupt_even_border_detail():
    pair = analyze_1d([3, 9, 1, 4])
    tampered = LiftPair(pair.approx, pair.details + np.array([0, 1]), pair.length)
    try:
        synthesize_1d(tampered)
    except CorruptPair:
        return
    raise AssertionError("tampered border detail was accepted")


def test_mismatched_pair_sizes():
    try:
        synthesize_axis(np.array([1, 2]), np.array([1, 2, 3]), 0, 5)
    except CorruptPair:
        return
    raise AssertionError("inconsistent pair accepted")


def test_lattice_halving_matches_cells():
    rng = np.random.default_rng(9)
    for cells in range(1, 40):
        nodes = cells + 1
        line = rng.integers(0, 1000, size=nodes)
        approx, details = analyze_lattice_axis(line, 0)
        assert approx.size == lattice_coarse_count(nodes) == -(-cells // 2) + 1
        assert approx[0] == line[0] and approx[-1] == line[-1]
        assert np.array_equal(synthesize_lattice_axis(approx, details, 0, nodes), line)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            print("\n" + "=" * 60)
            print(name)
            print("=" * 60)
            fn()
            print("  ✓ passed")
