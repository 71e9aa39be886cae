"""
transforms/properties.py - Reversible Cell-Property Downsampling

Two block schemes over the ceil-halved 2x2x2 block partition:
- Continuous (sum-Haar): approximation = block sum, details m*p - sum.
  The block's (0,0,0) cell is the anchor and carries no detail.
- Categorical (modelet): approximation = block mode, details are
  sign-controlled differences that always land back inside the universe.

Block helpers work on one block; the *_level functions apply the same
arithmetic to a whole grid at once.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import (
    CorruptDetail,
    OverflowRisk,
    Unreconstructible,
    ValueOutsideUniverse,
)
from core.grid import CellPropertyField, GridDims, WORKING_LIMIT

logger = logging.getLogger(__name__)

# Shell counts never reach this, so block counts dominate the mode key
_SHELL_BASE = 128


# ==================== BLOCK PARTITION ====================

def block_sum(values: np.ndarray) -> np.ndarray:
    """Sum over the ceil-halved 2x2x2 partition of a 3-D array."""
    out = np.asarray(values, dtype=np.int64)
    for axis in range(3):
        starts = np.arange(0, out.shape[axis], 2)
        out = np.add.reduceat(out, starts, axis=axis)
    return out


def block_sizes(shape: Tuple[int, int, int]) -> np.ndarray:
    """Cell count m of every block of a fine grid of `shape`."""
    return block_sum(np.ones(shape, dtype=np.int64))


def expand_blocks(coarse: np.ndarray, shape: Tuple[int, int, int]) -> np.ndarray:
    """Repeat every block value over its fine cells."""
    ii, jj, kk = (np.arange(n) // 2 for n in shape)
    return coarse[np.ix_(ii, jj, kk)]


def anchor_mask(shape: Tuple[int, int, int]) -> np.ndarray:
    ii, jj, kk = (np.arange(n) % 2 == 0 for n in shape)
    return ii[:, None, None] & jj[None, :, None] & kk[None, None, :]


def support_counts(dims: GridDims, level: int) -> np.ndarray:
    """Fine cells under each cell after `level` halvings."""
    support = np.ones(dims.cell_shape, dtype=np.int64)
    for _ in range(level):
        support = block_sum(support)
    return support


# ==================== SUM-HAAR ====================

@dataclass(frozen=True)
class ContinuousDetailSet:
    approx: int
    details: Tuple[int, ...]
    size: int


def haar_analyze_block(block: Sequence[int]) -> ContinuousDetailSet:
    values = [int(v) for v in block]
    m = len(values)
    if not 1 <= m <= 8:
        raise ValueError(f"block of {m} cells")
    total = sum(values)
    if abs(total) * m >= WORKING_LIMIT:
        raise OverflowRisk("block sum leaves the working range")
    return ContinuousDetailSet(total, tuple(m * v - total for v in values[1:]), m)


def haar_synthesize_block(detail_set: ContinuousDetailSet) -> List[int]:
    m = detail_set.size
    if len(detail_set.details) != m - 1:
        raise CorruptDetail(f"{len(detail_set.details)} details for a block of {m}")
    others = []
    for d in detail_set.details:
        if (d + detail_set.approx) % m:
            raise CorruptDetail(f"detail {d} + {detail_set.approx} not divisible by {m}")
        others.append((d + detail_set.approx) // m)
    return [detail_set.approx - sum(others)] + others


def haar_display_value(approx: int, level: int, scale: int, block_history: Sequence[int] = None) -> float:
    """
    Mean value of the fine cells under a summed approximation.

    Full blocks divide by 8 per level; border cells pass their per-level block
    sizes (or their total support count as a one-element history).
    """
    if level < 0:
        raise ValueError("level depth must be non-negative")
    divisor = 8 ** level if block_history is None else np.prod(np.asarray(block_history, dtype=np.int64), axis=0)
    return approx / (scale * divisor)


def haar_analyze_level(values: np.ndarray):
    """Fine cells -> (coarse sums, dense details with zero anchors)."""
    values = np.asarray(values, dtype=np.int64)
    sums = block_sum(values)
    m = expand_blocks(block_sizes(values.shape), values.shape)
    details = m * values - expand_blocks(sums, values.shape)
    details[anchor_mask(values.shape)] = 0
    return sums, details


def haar_synthesize_level(sums: np.ndarray, details: np.ndarray) -> np.ndarray:
    shape = details.shape
    expected = tuple(-(-n // 2) for n in shape)
    if sums.shape != expected:
        raise CorruptDetail(f"approximation extent {sums.shape} does not match details {shape}")
    anchors = anchor_mask(shape)
    m = expand_blocks(block_sizes(shape), shape)
    numerator = details + expand_blocks(sums, shape)
    if np.any((numerator % m)[~anchors]):
        raise CorruptDetail("continuous detail fails the divisibility check")
    values = numerator // m
    values[anchors] = 0
    values[anchors] = (sums - block_sum(values)).ravel()
    return values


# ==================== MODELET ====================

@dataclass(frozen=True)
class CategoricalDetailSet:
    mode: int
    details: Tuple[int, ...]
    universe: Tuple[int, ...]


def _check_universe(values, universe: Sequence[int], name: str = "") -> None:
    bad = ~np.isin(np.asarray(values), np.asarray(universe, dtype=np.int64))
    if np.any(bad):
        sample = np.asarray(values)[bad].ravel()[0]
        raise ValueOutsideUniverse(f"{name or 'category'} value {int(sample)} not in {list(universe)}")


def modelet_mode(block: Sequence[int], universe: Sequence[int], shell: Sequence[int] = ()) -> int:
    """Most frequent class; ties go to shell counts, then to the lowest class."""
    classes = sorted(int(c) for c in universe)
    block = list(block)
    shell = list(shell)
    key = [block.count(c) * _SHELL_BASE + shell.count(c) for c in classes]
    return classes[int(np.argmax(key))]


def _flip(raw: np.ndarray, mode: np.ndarray, universe: np.ndarray) -> np.ndarray:
    negate = (raw < 0) & ~np.isin(2 * mode - (raw + mode), universe)
    return np.where(negate, -raw, raw)


def _unflip(details: np.ndarray, mode: np.ndarray, universe: np.ndarray) -> np.ndarray:
    direct = mode + details
    mirrored = mode - details
    direct_ok = np.isin(direct, universe)
    if not np.all(direct_ok | np.isin(mirrored, universe)):
        raise Unreconstructible("categorical detail lands outside the universe both ways")
    return np.where(direct_ok, direct, mirrored)


def modelet_analyze_block(block: Sequence[int], universe: Sequence[int], shell: Sequence[int] = ()) -> CategoricalDetailSet:
    omega = np.asarray(sorted(int(c) for c in universe), dtype=np.int64)
    values = np.asarray(list(block), dtype=np.int64)
    _check_universe(values, omega)
    mode = modelet_mode(values.tolist(), omega.tolist(), shell)
    details = _flip(values - mode, np.full_like(values, mode), omega)
    return CategoricalDetailSet(mode, tuple(int(d) for d in details), tuple(omega.tolist()))


def modelet_synthesize_block(detail_set: CategoricalDetailSet) -> List[int]:
    omega = np.asarray(detail_set.universe, dtype=np.int64)
    if detail_set.mode not in detail_set.universe:
        raise Unreconstructible(f"mode {detail_set.mode} not in {list(detail_set.universe)}")
    details = np.asarray(detail_set.details, dtype=np.int64)
    return _unflip(details, np.full_like(details, detail_set.mode), omega).tolist()


def _box_sums(integral: np.ndarray, lo, hi) -> np.ndarray:
    """Box sums from a zero-padded 3-D integral image; lo/hi are per-axis index arrays."""
    (i0, j0, k0), (i1, j1, k1) = lo, hi
    s = lambda a, b, c: integral[np.ix_(a, b, c)]
    return (s(i1, j1, k1) - s(i0, j1, k1) - s(i1, j0, k1) - s(i1, j1, k0)
            + s(i0, j0, k1) + s(i0, j1, k0) + s(i1, j0, k0) - s(i0, j0, k0))


def modelet_modes(values: np.ndarray, universe: Sequence[int]) -> np.ndarray:
    """Block modes of a whole grid, tie-broken by the first-order fine shell."""
    shape = values.shape
    block_lo = [np.arange(0, n, 2) for n in shape]
    block_hi = [np.minimum(lo + 2, n) for lo, n in zip(block_lo, shape)]
    shell_lo = [np.maximum(lo - 1, 0) for lo in block_lo]
    shell_hi = [np.minimum(hi + 1, n) for hi, n in zip(block_hi, shape)]

    best_key = None
    modes = None
    for c in sorted(int(v) for v in universe):
        hits = (values == c).astype(np.int64)
        integral = np.zeros(tuple(n + 1 for n in shape), dtype=np.int64)
        integral[1:, 1:, 1:] = hits.cumsum(0).cumsum(1).cumsum(2)
        inside = _box_sums(integral, block_lo, block_hi)
        around = _box_sums(integral, shell_lo, shell_hi) - inside
        key = inside * _SHELL_BASE + around
        if best_key is None:
            best_key, modes = key, np.full(key.shape, c, dtype=np.int64)
        else:
            better = key > best_key
            best_key = np.where(better, key, best_key)
            modes = np.where(better, c, modes)
    return modes


def modelet_analyze_level(values: np.ndarray, universe: Sequence[int], name: str = ""):
    """Fine classes -> (coarse modes, one detail per fine cell)."""
    values = np.asarray(values, dtype=np.int64)
    omega = np.asarray(sorted(int(c) for c in universe), dtype=np.int64)
    _check_universe(values, omega, name)
    modes = modelet_modes(values, omega)
    expanded = expand_blocks(modes, values.shape)
    return modes, _flip(values - expanded, expanded, omega)


def modelet_synthesize_level(modes: np.ndarray, details: np.ndarray, universe: Sequence[int]) -> np.ndarray:
    shape = details.shape
    if modes.shape != tuple(-(-n // 2) for n in shape):
        raise CorruptDetail(f"mode extent {modes.shape} does not match details {shape}")
    omega = np.asarray(sorted(int(c) for c in universe), dtype=np.int64)
    if not np.all(np.isin(modes, omega)):
        raise Unreconstructible("block mode outside the universe")
    return _unflip(details, expand_blocks(modes, shape), omega)


# ==================== FIELD LEVELS ====================

class Direction(Enum):
    ANALYSIS = "analysis"
    SYNTHESIS = "synthesis"


@dataclass
class FieldPyramid:
    """Coarsest approximation of one field plus its details, finest first."""
    coarsest: CellPropertyField
    details: List[np.ndarray] = field(default_factory=list)
    level_values: List[Tuple[int, ...]] = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.details)


def check_headroom(prop: CellPropertyField, levels: int) -> None:
    """|approx| <= 8^L * max|p| must stay inside the working range."""
    if prop.is_categorical or not prop.values.size:
        return
    peak = int(np.abs(prop.values).max())
    if peak * (8 ** levels) >= WORKING_LIMIT:
        raise OverflowRisk(f"{prop.name}: max |value| {peak} overflows after {levels} summed levels")


def analyze_field_level(prop: CellPropertyField) -> Tuple[CellPropertyField, np.ndarray]:
    if prop.is_categorical:
        modes, details = modelet_analyze_level(prop.values, prop.universe, prop.name)
        return prop.with_values(modes), details
    sums, details = haar_analyze_level(prop.values)
    support = block_sum(prop.support if prop.support is not None else np.ones(prop.values.shape, np.int64))
    return prop.with_values(sums, support), details


def synthesize_field_level(coarse: CellPropertyField, details: np.ndarray,
                           support: Optional[np.ndarray] = None) -> CellPropertyField:
    """`support` is the fine level's support count (None at full resolution)."""
    if coarse.is_categorical:
        return coarse.with_values(modelet_synthesize_level(coarse.values, details, coarse.universe))
    return coarse.with_values(haar_synthesize_level(coarse.values, details), support)


def transform_field(source, direction: Direction, levels: int):
    """
    Analysis: CellPropertyField -> FieldPyramid over `levels` halvings.
    Synthesis: FieldPyramid -> CellPropertyField `levels` steps finer than its coarsest.
    """
    if direction == Direction.ANALYSIS:
        check_headroom(source, levels)
        current = source
        details, level_values = [], [tuple(np.unique(source.values).tolist())]
        for _ in range(levels):
            current, detail = analyze_field_level(current)
            details.append(detail)
            level_values.append(tuple(np.unique(current.values).tolist()))
        return FieldPyramid(current, details, level_values)

    if levels > source.levels:
        raise ValueError(f"pyramid holds {source.levels} levels, {levels} requested")
    current = source.coarsest
    for detail in reversed(source.details[source.levels - levels:]):
        current = synthesize_field_level(current, detail)
    return current
