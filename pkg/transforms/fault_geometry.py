"""
transforms/fault_geometry.py - Fault-Preserving Geometry Levels

One geometry level = one dyadic step on the node lattice:
1. Fault configurations derived per node (4-cycle comparison of quadrants,
   OR-combined over k)
2. Per 2x2 node group, an OR-predicted config picks the surviving node
   (Hamming distance, lowest member index on ties)
3. The surviving z-columns are lifted along k; the other members keep their
   difference to it
4. Pillar endpoints are lifted separably along i then j
5. Vertex/cell activity is propagated from the surviving parents

Group members are numbered s = di + 2*dj: (0,0), (1,0), (0,1), (1,1).
Axis booleans are ordered (north, south, east, west).
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

import config
from core.errors import CorruptDetail, OverflowRisk
from core.grid import GridDims, NodeZField, PillarSet, ActivityPlanes, WORKING_LIMIT
from transforms.lift1d import analyze_lattice_axis, synthesize_lattice_axis

logger = logging.getLogger(__name__)

NORTH, SOUTH, EAST, WEST = 0, 1, 2, 3

# Quadrant positions in the (BBL, BBR, FBL, FBR) order
SW, NW, SE, NE = 0, 1, 2, 3


# ==================== CONFIGURATIONS ====================

@dataclass(frozen=True)
class FaultConfig:
    north: bool = False
    south: bool = False
    east: bool = False
    west: bool = False

    @classmethod
    def from_axes(cls, axes) -> "FaultConfig":
        n, s, e, w = (bool(v) for v in axes)
        return cls(n, s, e, w)

    def axes(self) -> Tuple[bool, bool, bool, bool]:
        return (self.north, self.south, self.east, self.west)

    @property
    def active_count(self) -> int:
        return sum(self.axes())

    @property
    def is_valid(self) -> bool:
        """Part of the 12 states derivable from data (never exactly one axis)."""
        return self.active_count != 1

    @property
    def family(self) -> str:
        count = self.active_count
        if count == 0:
            return "fault-free"
        if count == 1:
            return "single"
        if count == 2:
            if (self.north and self.south) or (self.east and self.west):
                return "straight"
            return "corner"
        if count == 3:
            return "T"
        return "cross"

    def distance(self, other: "FaultConfig") -> int:
        return sum(a != b for a, b in zip(self.axes(), other.axes()))


FAULT_FREE = FaultConfig()
CROSS = FaultConfig(True, True, True, True)
STRAIGHT_NS = FaultConfig(north=True, south=True)
STRAIGHT_EW = FaultConfig(east=True, west=True)


@dataclass(frozen=True, eq=False)
class FaultConfigMap:
    """(ni+1, nj+1, 4) boolean axis map, one per level."""
    axes: np.ndarray

    def __post_init__(self):
        axes = np.array(self.axes, dtype=bool, copy=True)
        axes.setflags(write=False)
        object.__setattr__(self, "axes", axes)

    def config(self, i: int, j: int) -> FaultConfig:
        return FaultConfig.from_axes(self.axes[i, j])


def derive_config_map(field: NodeZField, epsilon: int = 0) -> FaultConfigMap:
    """
    Compare quadrant depths around each node at every k and OR over k.

    Missing border quadrants are mirrored from across the border, so they
    compare equal to their neighbour and never create a phantom fault.
    """
    z = field.effective()

    def differ(a, b):
        return (np.abs(z[..., a] - z[..., b]) > epsilon).any(axis=2)

    axes = np.stack([
        differ(NW, NE),
        differ(SW, SE),
        differ(NE, SE),
        differ(NW, SW),
    ], axis=-1)
    return FaultConfigMap(axes)


def _predict_axes(members: np.ndarray) -> np.ndarray:
    """members (..., 4 members, 4 axes) -> predicted (..., 4 axes)."""
    predicted = np.empty(members.shape[:-2] + (4,), dtype=bool)
    predicted[..., NORTH] = members[..., 2, NORTH] | members[..., 3, NORTH]
    predicted[..., SOUTH] = members[..., 0, SOUTH] | members[..., 1, SOUTH]
    predicted[..., EAST] = members[..., 1, EAST] | members[..., 3, EAST]
    predicted[..., WEST] = members[..., 0, WEST] | members[..., 2, WEST]
    return predicted


def _select(members: np.ndarray, predicted: np.ndarray, valid: np.ndarray) -> np.ndarray:
    distance = (members != predicted[..., None, :]).sum(axis=-1)
    distance = np.where(valid, distance, 5)
    return np.argmin(distance, axis=-1).astype(np.int64)


def predict_config(group: Sequence[FaultConfig]) -> FaultConfig:
    """OR-prediction of a 2x2 group given in member order s = di + 2*dj."""
    members = np.array([c.axes() for c in group], dtype=bool)
    return FaultConfig.from_axes(_predict_axes(members))


def select_node(group: Sequence[FaultConfig], predicted: FaultConfig, valid: Sequence[bool] = None) -> int:
    members = np.array([c.axes() for c in group], dtype=bool)
    mask = np.ones(len(group), dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    return int(_select(members, np.array(predicted.axes(), dtype=bool), mask))


# ==================== GROUPS ====================

def group_index(cells: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fine node pairs of each coarse node along one lattice axis.

    Coarse node I < ceil(cells/2) pairs {2I, 2I+1} (the second only while it
    stays below the last node); the last coarse node is the last fine node alone.
    Absent second members repeat the first. Returns (index (NC, 2), valid (NC, 2)).
    """
    half = -(-cells // 2)
    first = np.append(2 * np.arange(half), cells)
    second = first + 1
    valid_second = second <= cells - 1
    valid_second[-1] = False
    second = np.where(valid_second, second, first)
    index = np.stack([first, second], axis=1)
    valid = np.stack([np.ones_like(valid_second), valid_second], axis=1)
    return index, valid


def group_members(dims: GridDims):
    """Member fine-node coordinates and validity, each (NIc, NJc, 4)."""
    idx_i, ok_i = group_index(dims.ni)
    idx_j, ok_j = group_index(dims.nj)
    di = np.array([0, 1, 0, 1])
    dj = np.array([0, 0, 1, 1])
    mi = np.broadcast_to(idx_i[:, None, di], (idx_i.shape[0], idx_j.shape[0], 4))
    mj = np.broadcast_to(idx_j[None, :, dj], (idx_i.shape[0], idx_j.shape[0], 4))
    valid = ok_i[:, None, di] & ok_j[None, :, dj]
    return mi, mj, valid


def residual_mask(dims: GridDims, selection: np.ndarray) -> np.ndarray:
    """(NIc, NJc, 4) True on members that carry a residual column."""
    _, _, valid = group_members(dims)
    return valid & (np.arange(4) != selection[..., None])


def k_map(nk: int) -> np.ndarray:
    """Fine node k under each coarse node k."""
    coarse = (nk + 1) // 2 + 1
    return np.minimum(2 * np.arange(coarse), nk)


# ==================== LEVEL ====================

@dataclass(frozen=True, eq=False)
class GeometryDetailPlane:
    """
    Everything needed to rebuild one finer geometry level.

    residuals is dense (NIc, NJc, 4 members, nk+1, 4 quadrants) and zero on the
    selected member and on absent members.
    """
    fine_dims: GridDims
    selection: np.ndarray
    residuals: np.ndarray
    z_details: np.ndarray
    pillar_details_i: np.ndarray
    pillar_details_j: np.ndarray
    fine_vertex_activity: np.ndarray
    fine_actnum: np.ndarray

    def __post_init__(self):
        for name in ("selection", "residuals", "z_details", "pillar_details_i", "pillar_details_j"):
            arr = np.array(getattr(self, name), dtype=np.int64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("fine_vertex_activity", "fine_actnum"):
            arr = np.array(getattr(self, name), dtype=bool, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def is_zero(self) -> bool:
        return not (self.residuals.any() or self.z_details.any()
                    or self.pillar_details_i.any() or self.pillar_details_j.any())


def coarse_activity(fine_vertex: np.ndarray, sel_i: np.ndarray, sel_j: np.ndarray):
    """
    Coarse vertex activity = selected parent vertex at the mapped k.

    A coarse cell is active iff each of its 8 vertices has both parents active:
    the selected vertex and its pillar neighbour toward the cell interior.
    """
    nk = fine_vertex.shape[2] - 1
    kmap = k_map(nk)
    column = fine_vertex[sel_i, sel_j]                      # (NIc, NJc, nk+1)
    vertex = column[:, :, kmap]
    up = column[:, :, np.minimum(kmap + 1, nk)]
    down = column[:, :, np.maximum(kmap - 1, 0)]
    top_ok = vertex & up                                    # vertex used as a cell top
    bottom_ok = vertex & down                               # vertex used as a cell bottom
    cells = np.ones((vertex.shape[0] - 1, vertex.shape[1] - 1, vertex.shape[2] - 1), dtype=bool)
    for a in (0, 1):
        for b in (0, 1):
            ia = slice(a, a + cells.shape[0])
            jb = slice(b, b + cells.shape[1])
            cells &= top_ok[ia, jb, :-1] & bottom_ok[ia, jb, 1:]
    return vertex, cells


def analyze_geometry_level(field: NodeZField, pillars: PillarSet, act: ActivityPlanes,
                           epsilon: int = config.FAULT_EPSILON):
    """One fine level -> (coarse NodeZField, coarse PillarSet, coarse ActivityPlanes, detail plane)."""
    dims = field.dims
    values = field.values
    if values.size and int(np.abs(values).max()) >= WORKING_LIMIT // 2:
        raise OverflowRisk("node depths leave no headroom for residual columns")

    axes = derive_config_map(field, epsilon).axes
    mi, mj, valid = group_members(dims)
    member_axes = axes[mi, mj]
    predicted = _predict_axes(member_axes)
    selection = _select(member_axes, predicted, valid)

    sel_i = np.take_along_axis(mi, selection[..., None], axis=-1)[..., 0]
    sel_j = np.take_along_axis(mj, selection[..., None], axis=-1)[..., 0]

    selected = values[sel_i, sel_j]                         # (NIc, NJc, nk+1, 4)
    residuals = values[mi, mj] - selected[:, :, None]
    residuals[~valid] = 0

    coarse_z, z_details = analyze_lattice_axis(selected, axis=2)

    approx_i, pillar_details_i = analyze_lattice_axis(pillars.values, axis=0)
    coarse_pillars, pillar_details_j = analyze_lattice_axis(approx_i, axis=1)

    vertex, cells = coarse_activity(act.vertex, sel_i, sel_j)

    detail = GeometryDetailPlane(
        fine_dims=dims,
        selection=selection,
        residuals=residuals,
        z_details=z_details,
        pillar_details_i=pillar_details_i,
        pillar_details_j=pillar_details_j,
        fine_vertex_activity=act.vertex,
        fine_actnum=act.cells,
    )
    logger.debug(f"Geometry level {dims.to_list()} -> {list(cells.shape)}: "
                 f"{int((selection != 0).sum())} non-default selections")
    return NodeZField(coarse_z), PillarSet(coarse_pillars), ActivityPlanes(vertex, cells), detail


def synthesize_geometry_level(coarse_field: NodeZField, coarse_pillars: PillarSet, detail: GeometryDetailPlane):
    """Exact inverse of analyze_geometry_level."""
    dims = detail.fine_dims
    coarse_dims = dims.coarsen()
    nic, njc, nkc = coarse_dims.node_shape
    if coarse_field.values.shape[:3] != (nic, njc, nkc):
        raise CorruptDetail(f"coarse node field {coarse_field.values.shape[:3]} does not match {coarse_dims}")
    if detail.selection.shape != (nic, njc) or detail.residuals.shape != (nic, njc, 4, dims.nk + 1, 4):
        raise CorruptDetail("geometry detail plane does not match its level extents")

    mi, mj, valid = group_members(dims)
    selection = detail.selection
    if np.any((selection < 0) | (selection > 3)):
        raise CorruptDetail("selection index outside 0..3")
    if not np.all(np.take_along_axis(valid, selection[..., None], axis=-1)):
        raise CorruptDetail("selection points at an absent group member")

    selected = synthesize_lattice_axis(coarse_field.values, detail.z_details, 2, dims.nk + 1)
    approx_i = synthesize_lattice_axis(coarse_pillars.values, detail.pillar_details_j, 1, dims.nj + 1)
    pillars = synthesize_lattice_axis(approx_i, detail.pillar_details_i, 0, dims.ni + 1)

    fine = np.empty((dims.ni + 1, dims.nj + 1, dims.nk + 1, 4), dtype=np.int64)
    members = selected[:, :, None] + detail.residuals
    fine[mi[valid], mj[valid]] = members[valid]

    act = ActivityPlanes(detail.fine_vertex_activity, detail.fine_actnum)
    return NodeZField(fine), PillarSet(pillars), act
