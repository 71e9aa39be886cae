"""
core/grid.py - Corner-Point Grid Model

Canonical in-memory model of a structured corner-point grid:
- GridDims / QuantizationParams
- PillarSet (COORD), NodeZField (node-centric depths), ACTNUM, cell properties
- ZCORN <-> node-field conversions
- Fixed-point quantization and model validation

Everything is an integer in the working domain. Arrays are read-only once
a record is built.

Node quadrants are ordered BBL, BBR, FBL, FBR. B/F runs along i (back = low i),
L/R along j (left = low j), so quadrant q = 2*di + dj where the adjacent cell
of node (i, j) is (i - 1 + di, j - 1 + dj). North is +j, east is +i.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from core.errors import (
    DimensionMismatch,
    HorizontalFaultViolation,
    OverflowRisk,
    SpecInvalid,
)

logger = logging.getLogger(__name__)

QUADRANTS = ("BBL", "BBR", "FBL", "FBR")
WORKING_LIMIT = 1 << config.WORKING_BITS


def _freeze(array, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True, order="C")
    out.setflags(write=False)
    return out


def _is_power_of_ten(value: int) -> bool:
    if value < 1:
        return False
    while value % 10 == 0:
        value //= 10
    return value == 1


# ==================== DIMENSIONS ====================

@dataclass(frozen=True)
class GridDims:
    """Cell counts per axis; the node lattice is one larger on every axis."""
    ni: int
    nj: int
    nk: int

    def __post_init__(self):
        for name in ("ni", "nj", "nk"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DimensionMismatch(f"{name} must be a positive integer, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def cell_shape(self) -> Tuple[int, int, int]:
        return (self.ni, self.nj, self.nk)

    @property
    def node_shape(self) -> Tuple[int, int, int]:
        return (self.ni + 1, self.nj + 1, self.nk + 1)

    @property
    def n_cells(self) -> int:
        return self.ni * self.nj * self.nk

    def coarsen(self) -> "GridDims":
        """Ceil-halve every axis (non-power-of-two grids keep their tail)."""
        return GridDims(-(-self.ni // 2), -(-self.nj // 2), -(-self.nk // 2))

    def max_levels(self) -> int:
        return int(np.floor(np.log2(max(self.cell_shape)))) + 1

    def level_dims(self, levels: int) -> List["GridDims"]:
        """Dims at levels 0, -1, ..., -levels."""
        dims = [self]
        for _ in range(levels):
            dims.append(dims[-1].coarsen())
        return dims

    def to_list(self) -> List[int]:
        return [self.ni, self.nj, self.nk]


@dataclass(frozen=True)
class QuantizationParams:
    geometry_scale: int = config.GEOMETRY_SCALE
    property_scale: int = config.PROPERTY_SCALE

    def __post_init__(self):
        for name in ("geometry_scale", "property_scale"):
            if not _is_power_of_ten(int(getattr(self, name))):
                raise SpecInvalid(f"{name} must be a positive power of ten")

    def to_dict(self) -> Dict[str, int]:
        return {"geometry_scale": self.geometry_scale, "property_scale": self.property_scale}


def scale_digits(scale: int) -> int:
    """Number of decimals a fixed-point scale represents (1000 -> 3)."""
    return len(str(int(scale))) - 1


# ==================== FIELDS ====================

class PropertyKind(Enum):
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"


@dataclass(frozen=True, eq=False)
class CellPropertyField:
    """
    Per-cell scalar property.

    Continuous values are fixed-point integers at `scale`. Categorical values
    are class indices from `universe`. `support` counts the fine cells under
    each cell (None means one everywhere, i.e. full resolution).
    """
    name: str
    kind: PropertyKind
    values: np.ndarray
    scale: int = 1
    universe: Tuple[int, ...] = ()
    support: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values, np.int64))
        if self.values.ndim != 3:
            raise DimensionMismatch(f"property {self.name} must be a 3-D cell array")
        if self.support is not None:
            object.__setattr__(self, "support", _freeze(self.support, np.int64))
        if self.kind == PropertyKind.CATEGORICAL:
            universe = tuple(sorted({int(v) for v in self.universe}))
            if any(v < 0 for v in universe):
                raise SpecInvalid(f"categorical universe of {self.name} has negative classes")
            object.__setattr__(self, "universe", universe)
            object.__setattr__(self, "scale", 1)

    @property
    def is_categorical(self) -> bool:
        return self.kind == PropertyKind.CATEGORICAL

    def with_values(self, values: np.ndarray, support: Optional[np.ndarray] = None) -> "CellPropertyField":
        return replace(self, values=values, support=support)

    def mean_values(self) -> np.ndarray:
        """Fixed-point means (sum / support, rounded half up) of a continuous field."""
        if self.is_categorical or self.support is None:
            return self.values
        twice = 2 * self.values + self.support
        return np.floor_divide(twice, 2 * self.support)


@dataclass(frozen=True, eq=False)
class PillarSet:
    """(ni+1, nj+1, 6) pillar endpoints: ceil x, y, z then floor x, y, z."""
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values, np.int64))
        if self.values.ndim != 3 or self.values.shape[2] != 6:
            raise DimensionMismatch("pillar array must have shape (ni+1, nj+1, 6)")

    def degenerate_count(self) -> int:
        ceil, floor = self.values[..., :3], self.values[..., 3:]
        return int(np.all(ceil == floor, axis=-1).sum())


@dataclass(frozen=True, eq=False)
class NodeZField:
    """(ni+1, nj+1, nk+1, 4) quadrant depths; see module docstring for order."""
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values, np.int64))
        if self.values.ndim != 4 or self.values.shape[3] != 4:
            raise DimensionMismatch("node field must have shape (ni+1, nj+1, nk+1, 4)")

    @property
    def dims(self) -> GridDims:
        ni, nj, nk = self.values.shape[:3]
        return GridDims(ni - 1, nj - 1, nk - 1)

    def present_mask(self) -> np.ndarray:
        """(ni+1, nj+1, 4) True where the quadrant's cell exists."""
        return present_quadrants(self.dims)

    def effective(self) -> np.ndarray:
        """Values with missing border quadrants replaced by their mirror."""
        return mirror_fill(self.values)


def present_quadrants(dims: GridDims) -> np.ndarray:
    ni, nj = dims.ni, dims.nj
    mask = np.ones((ni + 1, nj + 1, 2, 2), dtype=bool)
    mask[0, :, 0, :] = False
    mask[ni, :, 1, :] = False
    mask[:, 0, :, 0] = False
    mask[:, nj, :, 1] = False
    return mask.reshape(ni + 1, nj + 1, 4)


def mirror_fill(values: np.ndarray) -> np.ndarray:
    """Overwrite missing border quadrants with the quadrant across the border."""
    ni1, nj1 = values.shape[:2]
    out = np.array(values, copy=True)
    quad = out.reshape(ni1, nj1, -1, 2, 2)
    quad[0, :, :, 0, :] = quad[0, :, :, 1, :]
    quad[-1, :, :, 1, :] = quad[-1, :, :, 0, :]
    quad[:, 0, :, :, 0] = quad[:, 0, :, :, 1]
    quad[:, -1, :, :, 1] = quad[:, -1, :, :, 0]
    return out


@dataclass(frozen=True, eq=False)
class ActivityPlanes:
    vertex: np.ndarray
    cells: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertex", _freeze(self.vertex, bool))
        object.__setattr__(self, "cells", _freeze(self.cells, bool))


def vertex_activity_from_actnum(actnum: np.ndarray) -> np.ndarray:
    """A vertex is active iff at least one adjacent cell is active."""
    ni, nj, nk = actnum.shape
    padded = np.zeros((ni + 2, nj + 2, nk + 2), dtype=bool)
    padded[1:-1, 1:-1, 1:-1] = actnum
    vertex = np.zeros((ni + 1, nj + 1, nk + 1), dtype=bool)
    for di in (0, 1):
        for dj in (0, 1):
            for dk in (0, 1):
                vertex |= padded[di:di + ni + 1, dj:dj + nj + 1, dk:dk + nk + 1]
    return vertex


# ==================== MODEL ====================

@dataclass(frozen=True, eq=False)
class CornerPointModel:
    """
    Full mesh at one resolution level.

    `top_z` holds the top corners of every layer in cell-corner layout
    (2ni, 2nj, nk) when horizontal faults were accepted at ingest; it only
    exists at level 0. `extra_keywords` are unknown GRDECL blocks kept verbatim.
    """
    dims: GridDims
    quantization: QuantizationParams
    pillars: PillarSet
    nodez: NodeZField
    actnum: np.ndarray
    properties: Tuple[CellPropertyField, ...] = ()
    vertex_activity: Optional[np.ndarray] = None
    top_z: Optional[np.ndarray] = None
    extra_keywords: Tuple[Tuple[str, str], ...] = ()
    level: int = 0

    def __post_init__(self):
        dims = self.dims
        object.__setattr__(self, "actnum", _freeze(self.actnum, bool))
        if self.pillars.values.shape[:2] != dims.node_shape[:2]:
            raise DimensionMismatch(f"pillars {self.pillars.values.shape[:2]} do not match {dims}")
        if self.nodez.values.shape[:3] != dims.node_shape:
            raise DimensionMismatch(f"node field {self.nodez.values.shape[:3]} does not match {dims}")
        if self.actnum.shape != dims.cell_shape:
            raise DimensionMismatch(f"ACTNUM {self.actnum.shape} does not match {dims}")
        for prop in self.properties:
            if prop.values.shape != dims.cell_shape:
                raise DimensionMismatch(f"property {prop.name} {prop.values.shape} does not match {dims}")
        if self.vertex_activity is None:
            object.__setattr__(self, "vertex_activity", vertex_activity_from_actnum(self.actnum))
        object.__setattr__(self, "vertex_activity", _freeze(self.vertex_activity, bool))
        if self.vertex_activity.shape != dims.node_shape:
            raise DimensionMismatch("vertex activity does not match the node lattice")
        if self.top_z is not None:
            object.__setattr__(self, "top_z", _freeze(self.top_z, np.int64))
        object.__setattr__(self, "properties", tuple(self.properties))
        object.__setattr__(self, "extra_keywords", tuple(tuple(kw) for kw in self.extra_keywords))

    @property
    def activity(self) -> ActivityPlanes:
        return ActivityPlanes(self.vertex_activity, self.actnum)

    def property(self, name: str) -> CellPropertyField:
        for prop in self.properties:
            if prop.name == name:
                return prop
        raise KeyError(name)

    def zcorn(self) -> np.ndarray:
        return nodez_to_zcorn(self.nodez, self.dims, self.top_z)

    def replace(self, **changes) -> "CornerPointModel":
        return replace(self, **changes)


def models_equal(a: CornerPointModel, b: CornerPointModel) -> bool:
    """Bit-exact equality of the quantized content of two models."""
    if a.dims != b.dims or a.quantization != b.quantization:
        return False
    if not np.array_equal(a.zcorn(), b.zcorn()):
        return False
    if not np.array_equal(a.pillars.values, b.pillars.values):
        return False
    if not np.array_equal(a.actnum, b.actnum):
        return False
    if [p.name for p in a.properties] != [p.name for p in b.properties]:
        return False
    for pa, pb in zip(a.properties, b.properties):
        if pa.kind != pb.kind or not np.array_equal(pa.values, pb.values):
            return False
        if pa.is_categorical and pa.universe != pb.universe:
            return False
    return a.extra_keywords == b.extra_keywords


# ==================== ZCORN <-> NODES ====================

def corner_array(zcorn: np.ndarray, dims: GridDims) -> np.ndarray:
    """Flat GRDECL ZCORN -> Zc[2i+a, 2j+b, 2k+c] (c=0 top face)."""
    zcorn = np.asarray(zcorn, dtype=np.int64).ravel()
    expected = 8 * dims.n_cells
    if zcorn.size != expected:
        raise DimensionMismatch(f"ZCORN has {zcorn.size} entries, expected {expected}")
    return zcorn.reshape(2 * dims.nk, 2 * dims.nj, 2 * dims.ni).transpose(2, 1, 0)


def horizontal_fault_mask(zcorn: np.ndarray, dims: GridDims) -> np.ndarray:
    """(2ni, 2nj, nk-1) True where a layer top differs from the bottom above it."""
    corners = corner_array(zcorn, dims)
    return corners[:, :, 2:-1:2] != corners[:, :, 1:-2:2]


def top_corners(zcorn: np.ndarray, dims: GridDims) -> np.ndarray:
    """Top-face corners of every layer, (2ni, 2nj, nk)."""
    return corner_array(zcorn, dims)[:, :, 0::2].copy()


def zcorn_to_nodez(zcorn: np.ndarray, dims: GridDims, allow_horizontal_faults: bool = False) -> NodeZField:
    """
    Convert GRDECL ZCORN to the node-centric field.

    Node k holds the bottom corners of layer k-1 (node 0: top of layer 0).
    Top corners of deeper layers must repeat the bottom corners above them;
    with `allow_horizontal_faults` the caller keeps them aside via top_corners().
    """
    corners = corner_array(zcorn, dims)
    gaps = corners[:, :, 2:-1:2] != corners[:, :, 1:-2:2]
    if gaps.any() and not allow_horizontal_faults:
        x, y, k = (int(v) for v in np.argwhere(gaps)[0])
        raise HorizontalFaultViolation(
            f"layer {k + 1} top differs from layer {k} bottom at corner ({x}, {y}); "
            f"{int(gaps.sum())} corners affected"
        )
    ni, nj, nk = dims.cell_shape
    layers = np.concatenate([corners[:, :, :1], corners[:, :, 1::2]], axis=2)
    padded = np.pad(layers, ((1, 1), (1, 1), (0, 0)), mode="edge")
    values = (
        padded.reshape(ni + 1, 2, nj + 1, 2, nk + 1)
        .transpose(0, 2, 4, 1, 3)
        .reshape(ni + 1, nj + 1, nk + 1, 4)
    )
    return NodeZField(values)


def nodez_to_zcorn(field: NodeZField, dims: Optional[GridDims] = None,
                   top_z: Optional[np.ndarray] = None) -> np.ndarray:
    """Inverse of zcorn_to_nodez; top corners come from the layer above unless top_z is given."""
    dims = dims or field.dims
    if field.values.shape[:3] != dims.node_shape:
        raise DimensionMismatch(f"node field {field.values.shape[:3]} does not match {dims}")
    ni, nj, nk = dims.cell_shape
    padded = (
        field.values.reshape(ni + 1, nj + 1, nk + 1, 2, 2)
        .transpose(0, 3, 1, 4, 2)
        .reshape(2 * ni + 2, 2 * nj + 2, nk + 1)
    )
    layers = padded[1:-1, 1:-1, :]
    corners = np.empty((2 * ni, 2 * nj, 2 * nk), dtype=np.int64)
    corners[:, :, 1::2] = layers[:, :, 1:]
    if top_z is not None:
        if top_z.shape != (2 * ni, 2 * nj, nk):
            raise DimensionMismatch("top-Z side channel does not match the grid")
        corners[:, :, 0::2] = top_z
    else:
        corners[:, :, 0::2] = layers[:, :, :-1]
    return corners.transpose(2, 1, 0).ravel().copy()


# ==================== COORD / CELL ORDER ====================

def pillars_from_coord(coord: np.ndarray, dims: GridDims) -> np.ndarray:
    coord = np.asarray(coord).ravel()
    expected = 6 * (dims.ni + 1) * (dims.nj + 1)
    if coord.size != expected:
        raise DimensionMismatch(f"COORD has {coord.size} entries, expected {expected}")
    return coord.reshape(dims.nj + 1, dims.ni + 1, 6).transpose(1, 0, 2)


def coord_from_pillars(pillars: np.ndarray) -> np.ndarray:
    return np.asarray(pillars).transpose(1, 0, 2).ravel().copy()


def cells_from_grdecl(values: np.ndarray, dims: GridDims) -> np.ndarray:
    """Flat i-fastest array -> (ni, nj, nk)."""
    values = np.asarray(values).ravel()
    if values.size != dims.n_cells:
        raise DimensionMismatch(f"cell array has {values.size} entries, expected {dims.n_cells}")
    return values.reshape(dims.nk, dims.nj, dims.ni).transpose(2, 1, 0)


def cells_to_grdecl(values: np.ndarray) -> np.ndarray:
    return np.asarray(values).transpose(2, 1, 0).ravel().copy()


# ==================== QUANTIZATION ====================

def quantize_values(values, scale: int, what: str = "values") -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise SpecInvalid(f"{what} contain non-finite numbers")
    scaled = np.round(values * scale)
    if scaled.size and np.max(np.abs(scaled)) >= WORKING_LIMIT:
        raise OverflowRisk(f"{what} exceed the {config.WORKING_BITS}-bit working range at scale {scale}")
    return scaled.astype(np.int64)


def dequantize(values, scale: int) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) / scale


@dataclass
class RealModel:
    """Real-valued grid as read from a file, before quantization (GRDECL orders)."""
    dims: GridDims
    coord: np.ndarray
    zcorn: np.ndarray
    actnum: Optional[np.ndarray] = None
    properties: Dict[str, Tuple[np.ndarray, PropertyKind]] = field(default_factory=dict)
    extra_keywords: Tuple[Tuple[str, str], ...] = ()


def quantize_model(real: RealModel, params: QuantizationParams,
                   allow_horizontal_faults: bool = config.ALLOW_HORIZONTAL_FAULTS) -> CornerPointModel:
    dims = real.dims
    coord = quantize_values(real.coord, params.geometry_scale, "COORD")
    zcorn = quantize_values(real.zcorn, params.geometry_scale, "ZCORN")
    nodez = zcorn_to_nodez(zcorn, dims, allow_horizontal_faults)
    top_z = None
    if dims.nk > 1 and horizontal_fault_mask(zcorn, dims).any():
        logger.warning("Horizontal faults found: storing top-Z side channel untransformed")
        top_z = top_corners(zcorn, dims)

    if real.actnum is None:
        actnum = np.ones(dims.cell_shape, dtype=bool)
    else:
        actnum = cells_from_grdecl(np.asarray(real.actnum) != 0, dims)

    properties = []
    for name, (values, kind) in real.properties.items():
        cells = cells_from_grdecl(values, dims)
        if kind == PropertyKind.CATEGORICAL:
            ints = np.asarray(cells, dtype=np.float64)
            if not np.all(ints == np.round(ints)):
                raise SpecInvalid(f"categorical property {name} has non-integer values")
            ints = ints.astype(np.int64)
            properties.append(CellPropertyField(
                name, kind, ints, universe=tuple(np.unique(ints).tolist())
            ))
        else:
            properties.append(CellPropertyField(
                name, kind, quantize_values(cells, params.property_scale, name),
                scale=params.property_scale,
            ))

    return CornerPointModel(
        dims=dims,
        quantization=params,
        pillars=PillarSet(pillars_from_coord(coord, dims)),
        nodez=nodez,
        actnum=actnum,
        properties=tuple(properties),
        top_z=top_z,
        extra_keywords=real.extra_keywords,
    )


# ==================== VALIDATION ====================

@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    location: Tuple[int, ...] = ()


@dataclass
class DiagnosticsReport:
    findings: List[Finding] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.findings)

    def __len__(self) -> int:
        return len(self.findings)

    def codes(self) -> List[str]:
        return [f.code for f in self.findings]


def validate(model: CornerPointModel) -> DiagnosticsReport:
    """Report-only checks; never mutates and never raises on bad data."""
    report = DiagnosticsReport()
    dims = model.dims

    # Extents
    for name, shape, expected in (
        ("nodez", model.nodez.values.shape[:3], dims.node_shape),
        ("pillars", model.pillars.values.shape[:2], dims.node_shape[:2]),
        ("actnum", model.actnum.shape, dims.cell_shape),
    ):
        if tuple(shape) != tuple(expected):
            report.findings.append(Finding("ExtentMismatch", f"{name} has extent {shape}, expected {expected}"))

    # Monotonicity along k on existing quadrants
    values = model.nodez.values
    present = model.nodez.present_mask()
    decreasing = (np.diff(values, axis=2) < 0) & present[:, :, None, :]
    for i, j, k, q in np.argwhere(decreasing):
        report.findings.append(Finding(
            "MonotonicityViolation",
            f"depth decreases from node k={k} to k={k + 1} on quadrant {QUADRANTS[q]} of pillar ({i}, {j})",
            (int(i), int(j), int(k), int(q)),
        ))

    # Categorical universes
    for prop in model.properties:
        if prop.values.shape != dims.cell_shape:
            report.findings.append(Finding("ExtentMismatch", f"property {prop.name} has extent {prop.values.shape}"))
            continue
        if not prop.is_categorical:
            continue
        outside = ~np.isin(prop.values, np.asarray(prop.universe, dtype=np.int64))
        for i, j, k in np.argwhere(outside):
            report.findings.append(Finding(
                "CategoryOutOfUniverse",
                f"{prop.name}={int(prop.values[i, j, k])} at cell ({i}, {j}, {k}) not in {list(prop.universe)}",
                (int(i), int(j), int(k)),
            ))

    degenerate = model.pillars.degenerate_count()
    if degenerate:
        report.findings.append(Finding("DegeneratePillars", f"{degenerate} pillars have ceil == floor", (degenerate,)))

    return report
