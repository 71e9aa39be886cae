"""
codec/container.py - .hxs Container Format

Layout (little-endian):
    magic "HXSH" | u16 major | u16 minor
    u32 header length | canonical JSON header
    u32 chunk count | chunk directory
    chunk payloads

Directory entry:
    u16 name length | name (utf-8) | u16 level | u8 kind | u8 codec | u8 dtype
    u64 elements | u64 raw length | u64 offset | u64 compressed length | u32 crc32c

Chunk order: coarsest approximations, then details from the coarsest level
to the finest, so any prefix of the stream rebuilds the levels it covers.
Every chunk is compressed on its own (level-selective fetch).
"""

import json
import logging
import struct
import crc32c
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from core.errors import (
    BadMagic,
    ChecksumMismatch,
    CorruptDetail,
    LengthMismatch,
    MissingChunk,
    VersionUnsupported,
)
from core.grid import CellPropertyField, CornerPointModel, GridDims, NodeZField, PillarSet, PropertyKind
from codec.codecs import codec_by_id, decompress_payload, get_codec
from codec.pyramid import LevelDecomposition, Pyramid, PyramidHeader
from transforms.fault_geometry import GeometryDetailPlane, residual_mask
from transforms.properties import anchor_mask, support_counts

logger = logging.getLogger(__name__)

MAGIC = b"HXSH"
VERSION = (1, 0)

_PREAMBLE = struct.Struct("<4sHH")
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")
_ENTRY = struct.Struct("<HBBBQQQQI")


class PayloadKind(IntEnum):
    APPROX = 0
    DETAIL = 1
    ACTIVITY = 2
    SELECTION = 3

    @property
    def label(self) -> str:
        return self.name.lower()


KNOWN_KINDS = {int(kind) for kind in PayloadKind}

# Element encodings: minimal-width signed integers, or packed bits
DTYPES = {0: "<i1", 1: "<i2", 2: "<i4", 3: "<i8"}
DTYPE_BITS = 4


@dataclass
class Chunk:
    name: str
    level: int
    kind: int
    dtype: int
    count: int
    raw: bytes = b""
    raw_length: int = 0
    codec: int = 0
    payload: bytes = b""
    payload_length: int = 0
    crc: int = 0
    offset: int = 0

    @property
    def kind_label(self) -> str:
        return PayloadKind(self.kind).label if self.kind in KNOWN_KINDS else f"unknown-{self.kind}"


# ==================== ELEMENT ENCODING ====================

def encode_array(array: np.ndarray) -> Tuple[int, bytes, int]:
    """array -> (dtype code, raw bytes, element count)."""
    array = np.asarray(array)
    if array.dtype == bool:
        return DTYPE_BITS, np.packbits(array.ravel()).tobytes(), int(array.size)
    flat = array.astype(np.int64).ravel()
    lo, hi = (int(flat.min()), int(flat.max())) if flat.size else (0, 0)
    for code, dtype in DTYPES.items():
        info = np.iinfo(dtype)
        if info.min <= lo and hi <= info.max:
            return code, flat.astype(dtype).tobytes(), int(flat.size)
    raise ValueError("values exceed 64 bits")


def decode_array(dtype: int, raw: bytes, count: int, name: str = "") -> np.ndarray:
    if dtype == DTYPE_BITS:
        if len(raw) != (count + 7) // 8:
            raise LengthMismatch(f"chunk {name}: {len(raw)} bytes for {count} bits")
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=count).astype(bool)
    if dtype not in DTYPES:
        raise CorruptDetail(f"chunk {name}: unknown element encoding {dtype}")
    width = np.dtype(DTYPES[dtype]).itemsize
    if len(raw) != count * width:
        raise LengthMismatch(f"chunk {name}: {len(raw)} bytes for {count} x {width}-byte values")
    return np.frombuffer(raw, dtype=DTYPES[dtype]).astype(np.int64)


# ==================== PYRAMID -> CHUNKS ====================

def _chunk(name: str, level: int, kind: PayloadKind, array: np.ndarray) -> Chunk:
    dtype, raw, count = encode_array(array)
    return Chunk(name, level, int(kind), dtype, count, raw=raw, raw_length=len(raw))


def approx_names(header: PyramidHeader) -> List[str]:
    return ["approx/nodez", "approx/pillars", "approx/vertex", "approx/actnum"] + [
        f"approx/{info.name}" for info in header.fields
    ]


def detail_names(header: PyramidHeader, level: int) -> List[str]:
    prefix = f"L{level}"
    return [f"{prefix}/{part}" for part in
            ("selection", "residuals", "z", "pillars_i", "pillars_j", "vertex", "actnum")] + [
        f"{prefix}/{info.name}" for info in header.fields
    ]


def pyramid_chunks(pyramid: Pyramid) -> List[Chunk]:
    """Uncompressed chunks in stream order."""
    levels = pyramid.levels
    coarse = pyramid.coarsest
    if coarse is None:
        raise MissingChunk(pyramid.missing[0] if pyramid.missing else "approx/nodez")

    chunks = [
        _chunk("approx/nodez", levels, PayloadKind.APPROX, coarse.nodez.values),
        _chunk("approx/pillars", levels, PayloadKind.APPROX, coarse.pillars.values),
        _chunk("approx/vertex", levels, PayloadKind.ACTIVITY, coarse.vertex_activity),
        _chunk("approx/actnum", levels, PayloadKind.ACTIVITY, coarse.actnum),
    ]
    for info in pyramid.header.fields:
        chunks.append(_chunk(f"approx/{info.name}", levels, PayloadKind.APPROX, coarse.property(info.name).values))

    for level in range(levels, 0, -1):
        decomposition = pyramid.decompositions[level - 1]
        if not decomposition.complete:
            raise MissingChunk(decomposition.missing[0])
        geometry = decomposition.geometry
        names = iter(detail_names(pyramid.header, level))
        mask = residual_mask(geometry.fine_dims, geometry.selection)
        chunks.extend([
            _chunk(next(names), level, PayloadKind.SELECTION, geometry.selection),
            _chunk(next(names), level, PayloadKind.DETAIL, geometry.residuals[mask]),
            _chunk(next(names), level, PayloadKind.DETAIL, geometry.z_details),
            _chunk(next(names), level, PayloadKind.DETAIL, geometry.pillar_details_i),
            _chunk(next(names), level, PayloadKind.DETAIL, geometry.pillar_details_j),
            _chunk(next(names), level, PayloadKind.ACTIVITY, geometry.fine_vertex_activity),
            _chunk(next(names), level, PayloadKind.ACTIVITY, geometry.fine_actnum),
        ])
        for info in pyramid.header.fields:
            details = decomposition.properties[info.name]
            if info.kind == PropertyKind.CONTINUOUS:
                details = details[~anchor_mask(details.shape)]
            chunks.append(_chunk(next(names), level, PayloadKind.DETAIL, details))

    if pyramid.header.has_top_z:
        if pyramid.top_z is None:
            raise MissingChunk("L0/top_z")
        chunks.append(_chunk("L0/top_z", 0, PayloadKind.DETAIL, pyramid.top_z))
    return chunks


# ==================== SERIALIZE ====================

def resolve_codecs(codecs: Optional[Dict[str, str]], pyramid: Pyramid) -> Dict[str, str]:
    resolved = dict(config.DEFAULT_CODECS)
    resolved.update(pyramid.header.codecs or {})
    resolved.update(codecs or {})
    for name in resolved.values():
        get_codec(name)
    return {kind.label: resolved[kind.label] for kind in PayloadKind}


def chunk_checksum(payload: bytes) -> int:
    """CRC-32C (Castagnoli) of a compressed payload."""
    return crc32c.crc32c(payload) & 0xFFFFFFFF


def _compress(chunk: Chunk) -> Chunk:
    chunk.payload = codec_by_id(chunk.codec).compress(chunk.raw)
    chunk.payload_length = len(chunk.payload)
    chunk.crc = chunk_checksum(chunk.payload)
    return chunk


def canonical_json(data: Dict) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str).encode("utf-8")


def serialize(pyramid: Pyramid, codecs: Optional[Dict[str, str]] = None, threads: int = None) -> bytes:
    """Pyramid -> .hxs bytes. `codecs` maps payload kind (approx|detail|activity|selection) to codec id."""
    used = resolve_codecs(codecs, pyramid)
    chunks = pyramid_chunks(pyramid)
    for chunk in chunks:
        chunk.codec = get_codec(used[PayloadKind(chunk.kind).label]).codec_id

    with ThreadPoolExecutor(max_workers=threads or config.THREADS) as pool:
        chunks = list(pool.map(_compress, chunks))
    chunks.extend(pyramid.unknown_chunks)

    header = pyramid.header.to_dict()
    header["codecs"] = used
    header_bytes = canonical_json(header)

    directory_size = _U32.size + sum(_U16.size + len(c.name.encode("utf-8")) + _ENTRY.size for c in chunks)
    offset = _PREAMBLE.size + _U32.size + len(header_bytes) + directory_size

    parts = [_PREAMBLE.pack(MAGIC, *VERSION), _U32.pack(len(header_bytes)), header_bytes, _U32.pack(len(chunks))]
    for chunk in chunks:
        name = chunk.name.encode("utf-8")
        parts.append(_U16.pack(len(name)) + name)
        parts.append(_ENTRY.pack(chunk.level, chunk.kind, chunk.codec, chunk.dtype, chunk.count,
                                 chunk.raw_length, offset, len(chunk.payload), chunk.crc))
        offset += len(chunk.payload)
    parts.extend(chunk.payload for chunk in chunks)

    data = b"".join(parts)
    logger.debug(f"Serialized {len(chunks)} chunks, {len(data):,} bytes ({used})")
    return data


# ==================== DESERIALIZE ====================

def read_directory(data: bytes) -> Tuple[Dict, List[Chunk], Tuple[int, int]]:
    """Parse preamble, header and directory; payloads are not read."""
    if len(data) < _PREAMBLE.size:
        raise BadMagic("stream too short for an .hxs preamble")
    magic, major, minor = _PREAMBLE.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if major != VERSION[0]:
        raise VersionUnsupported(f"container version {major}.{minor}, supported {VERSION[0]}.x")

    pos = _PREAMBLE.size
    if len(data) < pos + _U32.size:
        raise MissingChunk("header")
    (header_len,) = _U32.unpack_from(data, pos)
    pos += _U32.size
    if len(data) < pos + header_len:
        raise MissingChunk("header")
    try:
        header = json.loads(data[pos:pos + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ChecksumMismatch("header")
    pos += header_len

    if len(data) < pos + _U32.size:
        raise MissingChunk("directory")
    (count,) = _U32.unpack_from(data, pos)
    pos += _U32.size
    chunks = []
    for _ in range(count):
        if len(data) < pos + _U16.size:
            raise MissingChunk("directory")
        (name_len,) = _U16.unpack_from(data, pos)
        pos += _U16.size
        if len(data) < pos + name_len + _ENTRY.size:
            raise MissingChunk("directory")
        name = data[pos:pos + name_len].decode("utf-8")
        pos += name_len
        level, kind, codec, dtype, elements, raw_length, offset, payload_length, crc = _ENTRY.unpack_from(data, pos)
        pos += _ENTRY.size
        chunks.append(Chunk(name, level, kind, dtype, elements, raw_length=raw_length, codec=codec,
                            payload_length=payload_length, crc=crc, offset=offset))
    return header, chunks, (major, minor)


def _load(chunk: Chunk) -> Tuple[str, np.ndarray]:
    if chunk_checksum(chunk.payload) != chunk.crc:
        raise ChecksumMismatch(chunk.name)
    raw = decompress_payload(chunk.payload, codec_by_id(chunk.codec).name, chunk.name)
    if len(raw) != chunk.raw_length:
        raise LengthMismatch(f"chunk {chunk.name}: {len(raw)} bytes, directory says {chunk.raw_length}")
    return chunk.name, decode_array(chunk.dtype, raw, chunk.count, chunk.name)


def _shaped(arrays: Dict[str, np.ndarray], name: str, shape) -> np.ndarray:
    values = arrays[name]
    if values.size != int(np.prod(shape)):
        raise CorruptDetail(f"chunk {name}: {values.size} elements, expected shape {tuple(shape)}")
    return values.reshape(shape)


def _coarsest(header: PyramidHeader, arrays: Dict[str, np.ndarray]) -> CornerPointModel:
    levels = header.levels
    dims = header.level_dims[levels]
    properties = []
    for info in header.fields:
        values = _shaped(arrays, f"approx/{info.name}", dims.cell_shape)
        support = None
        if info.kind == PropertyKind.CONTINUOUS and levels > 0:
            support = support_counts(header.dims, levels)
        properties.append(CellPropertyField(info.name, info.kind, values, info.scale, info.universe, support))
    return CornerPointModel(
        dims=dims,
        quantization=header.quantization,
        pillars=PillarSet(_shaped(arrays, "approx/pillars", (dims.ni + 1, dims.nj + 1, 6))),
        nodez=NodeZField(_shaped(arrays, "approx/nodez", dims.node_shape + (4,))),
        actnum=_shaped(arrays, "approx/actnum", dims.cell_shape),
        properties=tuple(properties),
        vertex_activity=_shaped(arrays, "approx/vertex", dims.node_shape),
        extra_keywords=header.extra_keywords,
        level=-levels,
    )


def _decomposition(header: PyramidHeader, arrays: Dict[str, np.ndarray], level: int) -> LevelDecomposition:
    fine: GridDims = header.level_dims[level - 1]
    coarse: GridDims = header.level_dims[level]
    nic, njc = coarse.ni + 1, coarse.nj + 1
    prefix = f"L{level}"

    selection = _shaped(arrays, f"{prefix}/selection", (nic, njc))
    if np.any((selection < 0) | (selection > 3)):
        raise CorruptDetail(f"chunk {prefix}/selection: index outside 0..3")
    mask = residual_mask(fine, selection)
    residuals = np.zeros((nic, njc, 4, fine.nk + 1, 4), dtype=np.int64)
    residuals[mask] = _shaped(arrays, f"{prefix}/residuals", (int(mask.sum()), fine.nk + 1, 4))

    geometry = GeometryDetailPlane(
        fine_dims=fine,
        selection=selection,
        residuals=residuals,
        z_details=_shaped(arrays, f"{prefix}/z", (nic, njc, fine.nk // 2, 4)),
        pillar_details_i=_shaped(arrays, f"{prefix}/pillars_i", (fine.ni // 2, fine.nj + 1, 6)),
        pillar_details_j=_shaped(arrays, f"{prefix}/pillars_j", (nic, fine.nj // 2, 6)),
        fine_vertex_activity=_shaped(arrays, f"{prefix}/vertex", fine.node_shape),
        fine_actnum=_shaped(arrays, f"{prefix}/actnum", fine.cell_shape),
    )

    properties = {}
    for info in header.fields:
        name = f"{prefix}/{info.name}"
        if info.kind == PropertyKind.CATEGORICAL:
            properties[info.name] = _shaped(arrays, name, fine.cell_shape)
        else:
            anchors = anchor_mask(fine.cell_shape)
            dense = np.zeros(fine.cell_shape, dtype=np.int64)
            dense[~anchors] = _shaped(arrays, name, (int((~anchors).sum()),))
            properties[info.name] = dense
    return LevelDecomposition(level, geometry, properties)


def deserialize(data: bytes, threads: int = None) -> Pyramid:
    """
    .hxs bytes -> Pyramid.

    Chunks cut off by truncation are recorded as missing; they only raise
    MissingChunk when a reconstruction needs them. Unknown chunk kinds from
    newer writers are kept and written back unchanged.
    """
    header_dict, entries, (major, minor) = read_directory(data)
    header = PyramidHeader.from_dict(header_dict)
    if not header.level_dims:
        header.level_dims = header.dims.level_dims(header.levels)
    if minor > VERSION[1]:
        logger.info(f"Reading container version {major}.{minor} with a {VERSION[0]}.{VERSION[1]} reader")

    loadable, unknown, truncated = [], [], []
    for chunk in entries:
        if chunk.offset + chunk.payload_length > len(data):
            truncated.append(chunk.name)
            continue
        chunk.payload = data[chunk.offset:chunk.offset + chunk.payload_length]
        if chunk.kind in KNOWN_KINDS:
            loadable.append(chunk)
        else:
            unknown.append(chunk)
    if truncated:
        logger.warning(f"Truncated container: {len(truncated)} chunks absent, first {truncated[0]}")

    with ThreadPoolExecutor(max_workers=threads or config.THREADS) as pool:
        arrays = dict(pool.map(_load, loadable))

    def absent(names):
        return tuple(name for name in names if name not in arrays)

    missing = []
    coarse_absent = absent(approx_names(header))
    coarsest = None
    if coarse_absent:
        missing.extend(coarse_absent)
    else:
        coarsest = _coarsest(header, arrays)

    decompositions = []
    for level in range(1, header.levels + 1):
        level_absent = absent(detail_names(header, level))
        if level_absent:
            decompositions.append(LevelDecomposition(level, None, {}, level_absent))
        else:
            decompositions.append(_decomposition(header, arrays, level))

    top_z = None
    if header.has_top_z:
        if "L0/top_z" in arrays:
            dims = header.dims
            top_z = _shaped(arrays, "L0/top_z", (2 * dims.ni, 2 * dims.nj, dims.nk))
        else:
            missing.append("L0/top_z")

    for chunk in unknown:
        chunk.raw = b""
    return Pyramid(header, coarsest, decompositions, top_z=top_z, missing=tuple(missing), unknown_chunks=unknown)


def write_container(pyramid: Pyramid, path, codecs: Optional[Dict[str, str]] = None) -> int:
    data = serialize(pyramid, codecs)
    with open(path, "wb") as f:
        f.write(data)
    return len(data)


def read_container(path) -> Pyramid:
    with open(path, "rb") as f:
        return deserialize(f.read())
