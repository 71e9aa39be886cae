"""
codec/pyramid.py - Multi-Level Analysis / Synthesis

Runs geometry and property transforms level by level:
  level 0 (input) -> level -1 -> ... -> level -L (coarsest)

A Pyramid keeps the coarsest model plus one LevelDecomposition per level.
decompositions[l - 1] holds what rebuilds level -(l - 1) from level -l, so
reconstructing level t only needs the coarsest model and levels L..|t|+1.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from core.errors import LevelOutOfRange, MissingChunk
from core.grid import (
    CellPropertyField,
    CornerPointModel,
    GridDims,
    PropertyKind,
    QuantizationParams,
)
from transforms.fault_geometry import (
    GeometryDetailPlane,
    analyze_geometry_level,
    synthesize_geometry_level,
)
from transforms.properties import (
    analyze_field_level,
    check_headroom,
    support_counts,
    synthesize_field_level,
)

logger = logging.getLogger(__name__)


def max_levels(dims: GridDims) -> int:
    return dims.max_levels()


# ==================== RECORDS ====================

@dataclass(frozen=True)
class FieldInfo:
    name: str
    kind: PropertyKind
    scale: int
    universe: Tuple[int, ...] = ()

    @classmethod
    def from_field(cls, prop: CellPropertyField) -> "FieldInfo":
        return cls(prop.name, prop.kind, prop.scale, tuple(prop.universe))

    def to_dict(self) -> Dict:
        return {"name": self.name, "kind": self.kind.value, "scale": self.scale, "universe": list(self.universe)}

    @classmethod
    def from_dict(cls, data: Dict) -> "FieldInfo":
        return cls(data["name"], PropertyKind(data["kind"]), int(data["scale"]), tuple(data.get("universe", ())))


@dataclass
class PyramidHeader:
    dims: GridDims
    levels: int
    quantization: QuantizationParams
    fields: Tuple[FieldInfo, ...] = ()
    epsilon: int = 0
    extra_keywords: Tuple[Tuple[str, str], ...] = ()
    level_dims: List[GridDims] = field(default_factory=list)
    level_universes: Dict[str, List[List[int]]] = field(default_factory=dict)
    has_top_z: bool = False
    command_config: Dict = field(default_factory=dict)
    codecs: Dict[str, str] = field(default_factory=dict)
    checksum: str = "crc32c"
    unknown: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        data = dict(self.unknown)
        data.update({
            "dims": self.dims.to_list(),
            "levels": self.levels,
            "quantization": self.quantization.to_dict(),
            "fields": [f.to_dict() for f in self.fields],
            "epsilon": self.epsilon,
            "extra_keywords": [list(kw) for kw in self.extra_keywords],
            "level_dims": [d.to_list() for d in self.level_dims],
            "level_universes": {k: [list(v) for v in vs] for k, vs in self.level_universes.items()},
            "has_top_z": self.has_top_z,
            "config": self.command_config,
            "codecs": self.codecs,
            "checksum": self.checksum,
        })
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "PyramidHeader":
        known = {
            "dims", "levels", "quantization", "fields", "epsilon", "extra_keywords", "level_dims",
            "level_universes", "has_top_z", "config", "codecs", "checksum",
        }
        return cls(
            dims=GridDims(*data["dims"]),
            levels=int(data["levels"]),
            quantization=QuantizationParams(**data["quantization"]),
            fields=tuple(FieldInfo.from_dict(f) for f in data.get("fields", [])),
            epsilon=int(data.get("epsilon", 0)),
            extra_keywords=tuple(tuple(kw) for kw in data.get("extra_keywords", [])),
            level_dims=[GridDims(*d) for d in data.get("level_dims", [])],
            level_universes={k: [list(v) for v in vs] for k, vs in data.get("level_universes", {}).items()},
            has_top_z=bool(data.get("has_top_z", False)),
            command_config=data.get("config", {}) or {},
            codecs=dict(data.get("codecs", {})),
            checksum=data.get("checksum", "crc32c"),
            unknown={k: v for k, v in data.items() if k not in known},
        )


@dataclass(frozen=True, eq=False)
class LevelDecomposition:
    """Details of one level; `missing` names absent chunks of a truncated stream."""
    level: int
    geometry: Optional[GeometryDetailPlane]
    properties: Dict[str, np.ndarray] = field(default_factory=dict)
    missing: Tuple[str, ...] = ()

    @property
    def complete(self) -> bool:
        return not self.missing


@dataclass
class Pyramid:
    header: PyramidHeader
    coarsest: Optional[CornerPointModel]
    decompositions: List[LevelDecomposition] = field(default_factory=list)
    top_z: Optional[np.ndarray] = None
    missing: Tuple[str, ...] = ()
    unknown_chunks: List = field(default_factory=list)

    @property
    def levels(self) -> int:
        return self.header.levels

    def available_levels(self) -> List[int]:
        """Levels (non-positive) reconstructible from the chunks present."""
        if self.coarsest is None:
            return []
        out = [-self.levels]
        for level in range(self.levels, 0, -1):
            if not self.decompositions[level - 1].complete:
                break
            out.append(-(level - 1))
        if out[-1] == 0 and self.header.has_top_z and self.top_z is None:
            out.pop()
        return out


# ==================== ANALYSIS ====================

def analyze_level(model: CornerPointModel, level: int, epsilon: int) -> Tuple[CornerPointModel, LevelDecomposition]:
    """Level -(level-1) -> level -level."""
    nodez, pillars, act, geometry = analyze_geometry_level(model.nodez, model.pillars, model.activity, epsilon)
    props, details = [], {}
    for prop in model.properties:
        coarse, detail = analyze_field_level(prop)
        props.append(coarse)
        details[prop.name] = detail
    coarse_model = CornerPointModel(
        dims=model.dims.coarsen(),
        quantization=model.quantization,
        pillars=pillars,
        nodez=nodez,
        actnum=act.cells,
        properties=tuple(props),
        vertex_activity=act.vertex,
        extra_keywords=model.extra_keywords,
        level=-level,
    )
    return coarse_model, LevelDecomposition(level, geometry, details)


def level_values(model: CornerPointModel) -> Dict[str, List[int]]:
    return {
        prop.name: np.unique(prop.values).tolist()
        for prop in model.properties if prop.is_categorical
    }


def build_header(model: CornerPointModel, levels: int, epsilon: int,
                 universes: List[Dict[str, List[int]]], command_config: Optional[Dict] = None,
                 base_dims: Optional[GridDims] = None, has_top_z: Optional[bool] = None) -> PyramidHeader:
    """Header of a pyramid over `base_dims` (the model's own dims by default)."""
    dims = base_dims or model.dims
    names = [p.name for p in model.properties if p.is_categorical]
    return PyramidHeader(
        dims=dims,
        levels=levels,
        quantization=model.quantization,
        fields=tuple(FieldInfo.from_field(p) for p in model.properties),
        epsilon=int(epsilon),
        extra_keywords=model.extra_keywords,
        level_dims=dims.level_dims(levels),
        level_universes={name: [u[name] for u in universes] for name in names},
        has_top_z=model.top_z is not None if has_top_z is None else has_top_z,
        command_config=dict(command_config or {}),
    )


def check_levels(dims: GridDims, levels: int) -> None:
    limit = max_levels(dims)
    if not 1 <= levels <= limit:
        raise LevelOutOfRange(f"{levels} levels requested, {dims.to_list()} allows 1..{limit}")


def analyze_pyramid(model: CornerPointModel, levels: int, epsilon: int = config.FAULT_EPSILON,
                    command_config: Optional[Dict] = None) -> Pyramid:
    check_levels(model.dims, levels)
    for prop in model.properties:
        check_headroom(prop, levels)

    logger.info(f"Analyzing {model.dims.to_list()} over {levels} levels")
    current = model
    universes = [level_values(model)]
    decompositions = []
    for level in range(1, levels + 1):
        current, decomposition = analyze_level(current, level, epsilon)
        decompositions.append(decomposition)
        universes.append(level_values(current))
        logger.info(f"  Level -{level}: {current.dims.to_list()} cells, "
                    f"{int(current.actnum.sum())} active")

    header = build_header(model, levels, epsilon, universes, command_config)
    return Pyramid(header, current, decompositions, top_z=model.top_z)


# ==================== SYNTHESIS ====================

def synthesize_level(coarse: CornerPointModel, decomposition: LevelDecomposition, base_dims: GridDims) -> CornerPointModel:
    """Level -level -> level -(level-1)."""
    fine_level = decomposition.level - 1
    nodez, pillars, act = synthesize_geometry_level(coarse.nodez, coarse.pillars, decomposition.geometry)
    support = support_counts(base_dims, fine_level) if fine_level > 0 else None
    props = tuple(
        synthesize_field_level(prop, decomposition.properties[prop.name], support)
        for prop in coarse.properties
    )
    return CornerPointModel(
        dims=decomposition.geometry.fine_dims,
        quantization=coarse.quantization,
        pillars=pillars,
        nodez=nodez,
        actnum=act.cells,
        properties=props,
        vertex_activity=act.vertex,
        extra_keywords=coarse.extra_keywords,
        level=-fine_level,
    )


def synthesize_to_level(pyramid: Pyramid, target: int) -> CornerPointModel:
    """Rebuild level `target` in [-L, 0]; only chunks of levels deeper than |target| are read."""
    levels = pyramid.levels
    if not -levels <= target <= 0:
        raise LevelOutOfRange(f"level {target} outside [-{levels}, 0]")
    if pyramid.coarsest is None:
        raise MissingChunk(pyramid.missing[0] if pyramid.missing else "approx")

    current = pyramid.coarsest
    for level in range(levels, -target, -1):
        decomposition = pyramid.decompositions[level - 1]
        if not decomposition.complete:
            raise MissingChunk(decomposition.missing[0])
        current = synthesize_level(current, decomposition, pyramid.header.dims)
        logger.debug(f"Synthesized level {-(level - 1)}: {current.dims.to_list()}")

    if target == 0 and pyramid.header.has_top_z:
        if pyramid.top_z is None:
            raise MissingChunk("L0/top_z")
        current = current.replace(top_z=pyramid.top_z)
    return current


def iter_levels(pyramid: Pyramid):
    """Yield (level, model) from the coarsest level up to the finest one the chunks allow."""
    available = pyramid.available_levels()
    if not available:
        return
    current = pyramid.coarsest
    yield -pyramid.levels, current
    for level in range(pyramid.levels, 0, -1):
        if -(level - 1) not in available:
            return
        current = synthesize_level(current, pyramid.decompositions[level - 1], pyramid.header.dims)
        if level == 1 and pyramid.header.has_top_z:
            current = current.replace(top_z=pyramid.top_z)
        yield -(level - 1), current
