"""
core/synthetic.py - Synthetic Corner-Point Meshes

Deterministic (seeded) reservoir-like models used as fixtures and benchmarks:
- Anticline-shaped horizons on vertical (optionally tilted) pillars
- Vertical faults with a prescribed throw
- ACTNUM carving to an exact active fraction (boundary-first)
- Layered rock types with exact proportions, plus optional speckle
- Porosity correlated with rock type and a smooth trend
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.errors import SpecInvalid
from core.grid import CornerPointModel, GridDims, PropertyKind, QuantizationParams, RealModel, quantize_model

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FaultSpec:
    """Cells at or beyond `index` along `axis` ("i" or "j") are shifted down by `throw`."""
    axis: str
    index: int
    throw: float


@dataclass(frozen=True)
class SyntheticSpec:
    ni: int
    nj: int
    nk: int
    seed: int = 0
    cell_size: Tuple[float, float] = (50.0, 50.0)
    layer_thickness: float = 2.0
    top_depth: float = 1000.0
    anticline_amplitude: float = 0.0
    pillar_tilt: float = 0.0
    faults: Tuple[FaultSpec, ...] = ()
    active_fraction: float = 1.0
    rock_types: int = 2
    rock_proportions: Optional[Tuple[float, ...]] = None
    rock_tile: int = 8
    speckle: float = 0.0
    integer_depths: bool = False
    rock_keyword: str = "ROCKTYPE"
    porosity_keyword: str = "PORO"

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticSpec":
        values = dict(data)
        values["faults"] = tuple(
            f if isinstance(f, FaultSpec) else FaultSpec(*f) for f in values.get("faults", ())
        )
        if values.get("rock_proportions") is not None:
            values["rock_proportions"] = tuple(values["rock_proportions"])
        return cls(**values)

    @property
    def dims(self) -> GridDims:
        return GridDims(self.ni, self.nj, self.nk)

    def validate(self):
        if min(self.ni, self.nj, self.nk) < 1:
            raise SpecInvalid("dimensions must be positive")
        if self.faults and min(self.ni, self.nj, self.nk) < 2:
            raise SpecInvalid("faulted meshes need at least 2 x 2 x 2 cells")
        for fault in self.faults:
            n = self.ni if fault.axis == "i" else self.nj if fault.axis == "j" else None
            if n is None:
                raise SpecInvalid(f"fault axis must be 'i' or 'j', got {fault.axis!r}")
            if not 1 <= fault.index <= n - 1:
                raise SpecInvalid(f"fault index {fault.index} outside 1..{n - 1}")
        if not 0.0 < self.active_fraction <= 1.0:
            raise SpecInvalid("active_fraction must be in (0, 1]")
        if self.rock_types < 1:
            raise SpecInvalid("rock_types must be at least 1")
        if self.rock_proportions is not None:
            if len(self.rock_proportions) != self.rock_types:
                raise SpecInvalid("one proportion per rock type is required")
            if abs(sum(self.rock_proportions) - 1.0) > 1e-6 or min(self.rock_proportions) < 0:
                raise SpecInvalid("rock proportions must be non-negative and sum to 1")
        if self.layer_thickness <= 0:
            raise SpecInvalid("layer_thickness must be positive")
        if not 0.0 <= self.speckle <= 1.0:
            raise SpecInvalid("speckle must be in [0, 1]")


# ==================== GEOMETRY ====================

def _horizons(spec: SyntheticSpec) -> np.ndarray:
    """Depth of every lattice node (ni+1, nj+1, nk+1) before faulting."""
    i = np.arange(spec.ni + 1)[:, None, None]
    j = np.arange(spec.nj + 1)[None, :, None]
    k = np.arange(spec.nk + 1)[None, None, :]
    shape = (spec.ni + 1, spec.nj + 1, spec.nk + 1)
    depth = np.broadcast_to(spec.top_depth + spec.layer_thickness * k, shape).astype(np.float64)
    if spec.anticline_amplitude:
        u = (i - spec.ni / 2) / max(spec.ni / 2, 1)
        v = (j - spec.nj / 2) / max(spec.nj / 2, 1)
        depth = depth - spec.anticline_amplitude * np.exp(-(u ** 2 + v ** 2) * 1.5)
    if spec.integer_depths:
        depth = np.round(depth) + i + 2 * j
    return depth


def _throws(spec: SyntheticSpec) -> np.ndarray:
    throw = np.zeros((spec.ni, spec.nj))
    for fault in spec.faults:
        if fault.axis == "i":
            throw[fault.index:, :] += fault.throw
        else:
            throw[:, fault.index:] += fault.throw
    return throw


def _zcorn(spec: SyntheticSpec) -> np.ndarray:
    depth = _horizons(spec)
    throw = _throws(spec)
    ni, nj, nk = spec.ni, spec.nj, spec.nk
    corners = np.empty((2 * ni, 2 * nj, 2 * nk))
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                corners[a::2, b::2, c::2] = depth[a:a + ni, b:b + nj, c:c + nk] + throw[:, :, None]
    return corners.transpose(2, 1, 0).ravel()


def _coord(spec: SyntheticSpec) -> np.ndarray:
    dx, dy = spec.cell_size
    x = np.arange(spec.ni + 1) * dx
    y = np.arange(spec.nj + 1) * dy
    xx, yy = np.meshgrid(x, y, indexing="ij")
    top = spec.top_depth - spec.anticline_amplitude - 10.0
    bottom = spec.top_depth + spec.layer_thickness * spec.nk + 10.0 + sum(abs(f.throw) for f in spec.faults)
    pillars = np.stack([
        xx, yy, np.full_like(xx, top),
        xx + spec.pillar_tilt * (bottom - top), yy, np.full_like(xx, bottom),
    ], axis=-1)
    if spec.integer_depths:
        pillars = np.round(pillars)
    return pillars.transpose(1, 0, 2).ravel()


# ==================== ACTIVITY / PROPERTIES ====================

def _actnum(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    """(ni, nj, nk) active mask keeping exactly round(fraction * N) cells, boundary carved first."""
    dims = spec.dims
    if spec.active_fraction >= 1.0:
        return np.ones(dims.cell_shape, dtype=bool)
    i = (np.arange(spec.ni) + 0.5) / spec.ni - 0.5
    j = (np.arange(spec.nj) + 0.5) / spec.nj - 0.5
    k = (np.arange(spec.nk) + 0.5) / spec.nk - 0.5
    score = (np.abs(i)[:, None, None] ** 2 + np.abs(j)[None, :, None] ** 2
             + 0.25 * np.abs(k)[None, None, :] ** 2)
    score = score + 0.05 * rng.random(dims.cell_shape)
    keep = int(round(spec.active_fraction * dims.n_cells))
    order = np.argsort(score.ravel(), kind="stable")
    active = np.zeros(dims.n_cells, dtype=bool)
    active[order[:keep]] = True
    return active.reshape(dims.cell_shape)


def _tile_counts(n_tiles: int, proportions: np.ndarray) -> np.ndarray:
    """Largest-remainder split of n_tiles by proportions."""
    raw = proportions * n_tiles
    counts = np.floor(raw).astype(int)
    remainder = n_tiles - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:remainder]] += 1
    return counts


def _rock_types(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    shape = spec.dims.cell_shape
    tile = [max(1, min(spec.rock_tile, n // 2)) for n in shape]
    tiles = [-(-n // t) for n, t in zip(shape, tile)]
    proportions = np.asarray(spec.rock_proportions or [1.0 / spec.rock_types] * spec.rock_types)
    counts = _tile_counts(int(np.prod(tiles)), proportions)
    labels = np.repeat(np.arange(spec.rock_types), counts)

    # Tiles ordered by k, then j, then i, so classes stack as layers
    tile_class = labels.reshape(tiles[2], tiles[1], tiles[0]).transpose(2, 1, 0)
    ii, jj, kk = (np.arange(n) // t for n, t in zip(shape, tile))
    rock = tile_class[np.ix_(ii, jj, kk)].astype(np.int64)

    if spec.speckle > 0 and spec.rock_types > 1:
        flip = rng.random(shape) < spec.speckle
        rock[flip] = rng.integers(0, spec.rock_types, size=int(flip.sum()))
    return rock


def _porosity(spec: SyntheticSpec, rock: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    i, j, k = np.meshgrid(*(np.linspace(0.0, 1.0, n) for n in rock.shape), indexing="ij")
    trend = 0.02 * np.sin(3.0 * i) * np.cos(2.0 * j) - 0.01 * k
    poro = 0.08 + 0.05 * rock + trend + 0.005 * rng.standard_normal(rock.shape)
    return np.clip(np.round(poro, 6), 0.01, 0.45)


# ==================== ENTRY POINT ====================

def generate_synthetic(spec: SyntheticSpec, quantization: QuantizationParams = None) -> CornerPointModel:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    actnum = _actnum(spec, rng)
    rock = _rock_types(spec, rng)
    poro = _porosity(spec, rock, rng)

    def grdecl_order(cells):
        return cells.transpose(2, 1, 0).ravel()

    real = RealModel(
        dims=spec.dims,
        coord=_coord(spec),
        zcorn=_zcorn(spec),
        actnum=grdecl_order(actnum.astype(np.int64)),
        properties={
            spec.porosity_keyword: (grdecl_order(poro), PropertyKind.CONTINUOUS),
            spec.rock_keyword: (grdecl_order(rock), PropertyKind.CATEGORICAL),
        },
    )
    model = quantize_model(real, quantization or QuantizationParams())
    logger.debug(f"Synthetic {spec.dims.to_list()} seed={spec.seed}: "
                 f"{len(spec.faults)} faults, {int(actnum.sum())} active cells")
    return model
