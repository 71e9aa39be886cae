"""
codec/streaming.py - Slab-Wise Analysis

Large grids are analyzed one i-slab at a time:
1. The grid is cut into i-ranges aligned to 2^s cells (s = streamed levels)
2. Each slab is analyzed s levels deep inside a window that adds a halo of
   2^(s+2) cells on both sides, then cropped back to the cells it owns
3. The cropped pieces are concatenated; the remaining (small) coarse levels
   run on the assembled model

Output is bit-identical to analyze_pyramid on the whole model.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Set, Tuple

import numpy as np

import config
from core.errors import SlabCoverageGap, SpecInvalid
from core.grid import CornerPointModel, GridDims, NodeZField, PillarSet
from codec.pyramid import (
    LevelDecomposition,
    Pyramid,
    analyze_level,
    build_header,
    check_levels,
    level_values,
)
from transforms.fault_geometry import GeometryDetailPlane
from transforms.properties import check_headroom, support_counts

logger = logging.getLogger(__name__)

SlabHook = Callable[[int, int], None]


@dataclass(frozen=True, eq=False)
class Slab:
    """
    One i-range of a grid plus its halo.

    `owned` is the cell range this slab contributes, `window` the cell range
    held in `model`. `top_z` is the owned part of the horizontal-fault side
    channel, when the grid has one.
    """
    index: int
    count: int
    owned: Tuple[int, int]
    window: Tuple[int, int]
    model: CornerPointModel
    base_dims: GridDims
    stream_levels: int
    top_z: Optional[np.ndarray] = None

    @property
    def is_last(self) -> bool:
        return self.index == self.count - 1

    @property
    def cells(self) -> int:
        return self.model.dims.n_cells


def halo_cells(stream_levels: int) -> int:
    return 2 ** (stream_levels + 2)


def crop_model(model: CornerPointModel, start: int, stop: int) -> CornerPointModel:
    """Cells [start, stop) along i, with their node lattice and the global vertex activity."""
    nodes = slice(start, stop + 1)
    cells = slice(start, stop)
    props = tuple(
        prop.with_values(prop.values[cells], None if prop.support is None else prop.support[cells])
        for prop in model.properties
    )
    return CornerPointModel(
        dims=GridDims(stop - start, model.dims.nj, model.dims.nk),
        quantization=model.quantization,
        pillars=PillarSet(model.pillars.values[nodes]),
        nodez=NodeZField(model.nodez.values[nodes]),
        actnum=model.actnum[cells],
        properties=props,
        vertex_activity=model.vertex_activity[nodes],
        extra_keywords=model.extra_keywords,
        level=model.level,
    )


def slab_bounds(ni: int, n_slabs: int, stream_levels: int) -> List[int]:
    """Slab start cells plus the final end; interior bounds are multiples of 2^stream_levels."""
    unit = 2 ** stream_levels
    units = -(-ni // unit)
    if n_slabs < 1:
        raise SpecInvalid("at least one slab is required")
    if n_slabs > units:
        raise SlabCoverageGap(
            f"{n_slabs} slabs on {ni} cells: slabs must hold at least {unit} cells "
            f"({stream_levels} streamed levels)"
        )
    return [(b * units // n_slabs) * unit for b in range(n_slabs)] + [ni]


def iter_slabs(model: CornerPointModel, n_slabs: int, levels: int,
               stream_levels: int = config.STREAM_LEVELS) -> Iterator[Slab]:
    """Cut an in-memory model into `n_slabs` i-slabs with halos."""
    s = min(levels, stream_levels)
    ni = model.dims.ni
    bounds = slab_bounds(ni, n_slabs, s)
    halo = halo_cells(s)
    for index in range(n_slabs):
        i0, i1 = bounds[index], bounds[index + 1]
        w0, w1 = max(0, i0 - halo), min(ni, i1 + halo)
        top_z = None if model.top_z is None else model.top_z[2 * i0:2 * i1]
        yield Slab(index, n_slabs, (i0, i1), (w0, w1), crop_model(model, w0, w1), model.dims, s, top_z)


# ==================== COVERAGE ====================

def _check_slab(slab: Slab, expected_index: int, expected_start: int, stream_levels: int) -> None:
    ni = slab.base_dims.ni
    i0, i1 = slab.owned
    unit = 2 ** stream_levels
    halo = halo_cells(stream_levels)
    if slab.index != expected_index:
        raise SlabCoverageGap(f"slab {slab.index} arrived in position {expected_index}")
    if i0 != expected_start:
        raise SlabCoverageGap(f"slab {slab.index} starts at cell {i0}, expected {expected_start}")
    if i1 <= i0:
        raise SlabCoverageGap(f"slab {slab.index} owns no cells")
    if i0 % unit or (i1 % unit and i1 != ni):
        raise SlabCoverageGap(f"slab {slab.index} [{i0}, {i1}) is not aligned to {unit} cells")
    if slab.is_last != (i1 == ni):
        raise SlabCoverageGap(f"slab {slab.index} of {slab.count} ends at cell {i1} of {ni}")
    if slab.window != (max(0, i0 - halo), min(ni, i1 + halo)):
        raise SlabCoverageGap(f"slab {slab.index} window {slab.window} lacks the {halo}-cell halo")
    if slab.model.dims != GridDims(slab.window[1] - slab.window[0], slab.base_dims.nj, slab.base_dims.nk):
        raise SlabCoverageGap(f"slab {slab.index} model does not match its window")


# ==================== CROPPING ====================

def _span(lo: int, hi: int, offset: int, last: bool) -> slice:
    return slice(lo - offset, None if last else hi - offset)


@dataclass
class _SlabPieces:
    """Owned parts of one slab: per-level decompositions and the level-s model."""
    decompositions: List[Dict]
    coarse: Dict
    universes: List[Dict[str, Set[int]]]


def _owned_values(model: CornerPointModel, cells: slice) -> Dict[str, Set[int]]:
    return {
        prop.name: set(np.unique(prop.values[cells]).tolist())
        for prop in model.properties if prop.is_categorical
    }


def _analyze_slab(slab: Slab, epsilon: int) -> _SlabPieces:
    s = slab.stream_levels
    i0, i1 = slab.owned
    w0 = slab.window[0]
    last = slab.is_last
    level_dims = slab.base_dims.level_dims(s)

    current = slab.model
    fine_cells = _span(i0, i1, w0, last)
    universes = [_owned_values(current, fine_cells)]
    decompositions = []
    for level in range(1, s + 1):
        shift = level - 1
        a = i0 >> shift
        b = level_dims[shift].ni if last else i1 >> shift
        fine_offset = w0 >> shift
        fc = _span(a, b, fine_offset, last)                 # fine cells and fine nodes
        cn = _span(a // 2, b // 2, fine_offset // 2, last)

        current, decomposition = analyze_level(current, level, epsilon)
        geometry = decomposition.geometry
        decompositions.append({
            "selection": geometry.selection[cn],
            "residuals": geometry.residuals[cn],
            "z_details": geometry.z_details[cn],
            "pillar_details_i": geometry.pillar_details_i[cn],
            "pillar_details_j": geometry.pillar_details_j[cn],
            "fine_vertex_activity": geometry.fine_vertex_activity[fc],
            "fine_actnum": geometry.fine_actnum[fc],
            "properties": {name: details[fc] for name, details in decomposition.properties.items()},
        })
        universes.append(_owned_values(current, cn))

    cc = _span(i0 >> s, i1 >> s, w0 >> s, last)
    coarse = {
        "nodez": current.nodez.values[cc],
        "pillars": current.pillars.values[cc],
        "vertex": current.vertex_activity[cc],
        "actnum": current.actnum[cc],
        "properties": {prop.name: prop.values[cc] for prop in current.properties},
        "template": current,
    }
    return _SlabPieces(decompositions, coarse, universes)


# ==================== ASSEMBLY ====================

def _join(pieces: List[Dict], key: str) -> np.ndarray:
    return np.concatenate([p[key] for p in pieces], axis=0)


def _assemble_decomposition(pieces: List[Dict], level: int, fine_dims: GridDims) -> LevelDecomposition:
    geometry = GeometryDetailPlane(
        fine_dims=fine_dims,
        selection=_join(pieces, "selection"),
        residuals=_join(pieces, "residuals"),
        z_details=_join(pieces, "z_details"),
        pillar_details_i=_join(pieces, "pillar_details_i"),
        pillar_details_j=_join(pieces, "pillar_details_j"),
        fine_vertex_activity=_join(pieces, "fine_vertex_activity"),
        fine_actnum=_join(pieces, "fine_actnum"),
    )
    properties = {
        name: np.concatenate([p["properties"][name] for p in pieces], axis=0)
        for name in pieces[0]["properties"]
    }
    return LevelDecomposition(level, geometry, properties)


def _assemble_coarse(pieces: List[Dict], base_dims: GridDims, level: int) -> CornerPointModel:
    template: CornerPointModel = pieces[0]["template"]
    dims = base_dims.level_dims(level)[level]
    props = []
    for prop in template.properties:
        values = np.concatenate([p["properties"][prop.name] for p in pieces], axis=0)
        support = None if prop.is_categorical or level == 0 else support_counts(base_dims, level)
        props.append(prop.with_values(values, support))
    return CornerPointModel(
        dims=dims,
        quantization=template.quantization,
        pillars=PillarSet(_join(pieces, "pillars")),
        nodez=NodeZField(_join(pieces, "nodez")),
        actnum=_join(pieces, "actnum"),
        properties=tuple(props),
        vertex_activity=_join(pieces, "vertex"),
        extra_keywords=template.extra_keywords,
        level=-level,
    )


def analyze_streaming(slabs: Iterable[Slab], levels: int, epsilon: int = config.FAULT_EPSILON,
                      command_config: Optional[Dict] = None, hook: Optional[SlabHook] = None) -> Pyramid:
    """
    Slab iterator -> Pyramid, identical to analyze_pyramid on the assembled model.

    Only one slab window is resident at a time; `hook(slab_index, cells)` is
    called with the window size of every slab as it is processed.
    """
    pieces: List[_SlabPieces] = []
    top_z: List[Optional[np.ndarray]] = []
    base_dims = None
    stream_levels = None
    expected_start = 0

    for position, slab in enumerate(slabs):
        if base_dims is None:
            base_dims, stream_levels = slab.base_dims, slab.stream_levels
            check_levels(base_dims, levels)
            if stream_levels != min(levels, stream_levels):
                raise SlabCoverageGap(f"slabs were cut for {stream_levels} levels, only {levels} requested")
            logger.info(f"Streaming analysis of {base_dims.to_list()}: {slab.count} slabs, "
                        f"{stream_levels} levels per slab, {levels} total")
        elif slab.base_dims != base_dims or slab.stream_levels != stream_levels:
            raise SlabCoverageGap(f"slab {slab.index} belongs to a different cut")

        _check_slab(slab, position, expected_start, stream_levels)
        for prop in slab.model.properties:
            check_headroom(prop, levels)
        if hook is not None:
            hook(slab.index, slab.cells)

        pieces.append(_analyze_slab(slab, epsilon))
        top_z.append(slab.top_z)
        expected_start = slab.owned[1]
        logger.debug(f"  Slab {slab.index}: cells [{slab.owned[0]}, {slab.owned[1]}), "
                     f"window {slab.window}, {slab.cells:,} cells resident")

    if base_dims is None:
        raise SlabCoverageGap("no slabs")
    if expected_start != base_dims.ni:
        raise SlabCoverageGap(f"slabs cover cells [0, {expected_start}) of {base_dims.ni}")

    level_dims = base_dims.level_dims(levels)
    decompositions = [
        _assemble_decomposition([p.decompositions[level - 1] for p in pieces], level, level_dims[level - 1])
        for level in range(1, stream_levels + 1)
    ]
    universes = [
        {name: sorted(set().union(*(p.universes[level][name] for p in pieces))) for name in pieces[0].universes[level]}
        for level in range(stream_levels + 1)
    ]

    current = _assemble_coarse([p.coarse for p in pieces], base_dims, stream_levels)
    for level in range(stream_levels + 1, levels + 1):
        current, decomposition = analyze_level(current, level, epsilon)
        decompositions.append(decomposition)
        universes.append(level_values(current))
        logger.info(f"  Level -{level}: {current.dims.to_list()} cells, {int(current.actnum.sum())} active")

    full_top_z = None
    if all(t is not None for t in top_z):
        full_top_z = np.concatenate(top_z, axis=0)

    header = build_header(current, levels, epsilon, universes, command_config,
                          base_dims=base_dims, has_top_z=full_top_z is not None)
    return Pyramid(header, current, decompositions, top_z=full_top_z)
