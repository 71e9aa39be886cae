"""
core/grdecl.py - GRDECL Reader/Writer

Handles the corner-point subset of the Eclipse GRDECL text format:
- SPECGRID / DIMENS, COORD, ZCORN, ACTNUM
- PORO, NTG, PERM*, SATNUM, ROCKTYPE, FIPNUM
- `--` comments, `N*V` repeats, `/` terminators

Unknown keywords are kept verbatim and written back unchanged.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

import config
from core.errors import GrdeclSyntaxError, LengthMismatch, MissingDims
from core.grid import (
    CornerPointModel,
    GridDims,
    PropertyKind,
    QuantizationParams,
    RealModel,
    cells_to_grdecl,
    coord_from_pillars,
    quantize_model,
    scale_digits,
)

logger = logging.getLogger(__name__)


# ==================== TOKENS ====================

class TokenKind(Enum):
    KEYWORD = "keyword"
    NUMBER = "number"
    REPEAT = "repeat"
    SLASH = "slash"
    COMMENT = "comment"
    WORD = "word"


@dataclass(frozen=True)
class GrdeclToken:
    kind: TokenKind
    text: str
    line: int
    column: int
    start: int
    end: int
    count: int = 1

    @property
    def value(self) -> str:
        """Number text (the V of a repeat)."""
        if self.kind == TokenKind.REPEAT:
            return self.text.split("*", 1)[1]
        return self.text


_TOKEN_RE = re.compile(r"""
    (?P<comment>--[^\n]*)
  | (?P<slash>/)
  | (?P<repeat>\d+\*[^\s/]+)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eEdD][+-]?\d+)?)(?![^\s/])
  | (?P<keyword>[A-Za-z][A-Za-z0-9_+-]*)
  | (?P<word>'[^'\n]*')
  | (?P<space>\s+)
""", re.VERBOSE)

_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eEdD][+-]?\d+)?$")


def tokenize(text: str, source: str = "") -> Iterator[GrdeclToken]:
    pos = 0
    line = 1
    line_start = 0
    size = len(text)
    while pos < size:
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise GrdeclSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        kind_name = match.lastgroup
        end = match.end()
        if kind_name == "space":
            newlines = text.count("\n", pos, end)
            if newlines:
                line += newlines
                line_start = text.rfind("\n", pos, end) + 1
            pos = end
            continue
        token_text = match.group()
        column = pos - line_start + 1
        count = 1
        if kind_name == "repeat":
            count_text, value = token_text.split("*", 1)
            count = int(count_text)
            if count < 1 or not _NUMBER_RE.match(value):
                raise GrdeclSyntaxError(f"bad repeat {token_text!r}", line, column, source)
        yield GrdeclToken(TokenKind(kind_name), token_text, line, column, pos, end, count)
        pos = end


# ==================== DOCUMENT ====================

@dataclass
class GrdeclDocument:
    """Parsed sections in file order; arrays hold the number texts' values."""
    dims: Optional[GridDims] = None
    arrays: Dict[str, np.ndarray] = field(default_factory=dict)
    integer_arrays: Dict[str, bool] = field(default_factory=dict)
    raw_blocks: List[Tuple[str, str]] = field(default_factory=list)
    order: List[str] = field(default_factory=list)
    source: str = ""

    @property
    def properties(self) -> List[str]:
        return [name for name in self.order if is_property_keyword(name)]


def is_property_keyword(name: str) -> bool:
    return name in config.PROPERTY_KEYWORDS or name.startswith(config.PROPERTY_PREFIXES)


def _expected_length(name: str, dims: GridDims) -> int:
    if name == "COORD":
        return 6 * (dims.ni + 1) * (dims.nj + 1)
    if name == "ZCORN":
        return 8 * dims.n_cells
    return dims.n_cells


def _number(text: str) -> float:
    return float(text.replace("d", "e").replace("D", "e"))


def _is_integer_literal(text: str) -> bool:
    return not any(ch in text for ch in ".eEdD")


def parse_document(text: str, source: str = "") -> GrdeclDocument:
    doc = GrdeclDocument(source=source)
    tokens = [t for t in tokenize(text, source) if t.kind != TokenKind.COMMENT]
    pos = 0
    while pos < len(tokens):
        head = tokens[pos]
        if head.kind != TokenKind.KEYWORD:
            raise GrdeclSyntaxError(f"expected a keyword, found {head.text!r}", head.line, head.column, source)
        name = head.text.upper()
        pos += 1

        known = name in ("SPECGRID", "DIMENS", "COORD", "ZCORN", "ACTNUM") or is_property_keyword(name)
        if not known:
            nxt = tokens[pos] if pos < len(tokens) else None
            if nxt is None or (nxt.kind == TokenKind.KEYWORD and nxt.line > head.line):
                doc.raw_blocks.append((name, text[head.start:head.end]))
                doc.order.append(name)
                continue

        body = []
        while pos < len(tokens) and tokens[pos].kind != TokenKind.SLASH:
            body.append(tokens[pos])
            pos += 1
        if pos >= len(tokens):
            raise GrdeclSyntaxError(f"{name} is not terminated by '/'", head.line, head.column, source)
        slash = tokens[pos]
        pos += 1
        doc.order.append(name)

        if not known:
            doc.raw_blocks.append((name, text[head.start:slash.end]))
            continue

        if name in ("SPECGRID", "DIMENS"):
            if len(body) < 3 or any(t.kind != TokenKind.NUMBER or not _is_integer_literal(t.text) for t in body[:3]):
                raise GrdeclSyntaxError(f"{name} needs three integer dimensions", head.line, head.column, source)
            doc.dims = GridDims(*(int(t.text) for t in body[:3]))
            logger.debug(f"{source or 'GRDECL'}: {name} {doc.dims.to_list()}")
            continue

        if doc.dims is None:
            raise MissingDims(f"{name} at line {head.line} appears before SPECGRID/DIMENS")

        words = []
        for token in body:
            if token.kind == TokenKind.NUMBER:
                words.append(token.text)
            elif token.kind == TokenKind.REPEAT:
                words.extend([token.value] * token.count)
            else:
                raise GrdeclSyntaxError(f"non-numeric value {token.text!r} in {name}", token.line, token.column, source)

        expected = _expected_length(name, doc.dims)
        if len(words) != expected:
            raise LengthMismatch(f"{name} at line {head.line} has {len(words)} values, expected {expected}")
        doc.integer_arrays[name] = all(_is_integer_literal(w) for w in set(words))
        doc.arrays[name] = np.array([_number(w) for w in words], dtype=np.float64)

    if doc.dims is None:
        raise MissingDims("no SPECGRID or DIMENS keyword found")
    for required in ("COORD", "ZCORN"):
        if required not in doc.arrays:
            raise LengthMismatch(f"{required} section is missing")
    return doc


def resolve_kind(name: str, doc: GrdeclDocument, kinds: Optional[Dict[str, PropertyKind]] = None) -> PropertyKind:
    """Supplied map first, then the categorical keyword list, then integer literals."""
    if kinds and name in kinds:
        return PropertyKind(kinds[name])
    if name in config.CATEGORICAL_KEYWORDS:
        return PropertyKind.CATEGORICAL
    if doc.integer_arrays.get(name, False):
        return PropertyKind.CATEGORICAL
    return PropertyKind.CONTINUOUS


_SCALES_RE = re.compile(r"^--.*geometry scale (\d+), property scale (\d+)", re.MULTILINE)


def scales_from_header(text: str) -> Optional[QuantizationParams]:
    """Scales recorded by `write` in its header comment, if any."""
    match = _SCALES_RE.search(text)
    if match is None:
        return None
    return QuantizationParams(int(match.group(1)), int(match.group(2)))


def _read_text(stream: Union[bytes, str, Path]) -> Tuple[str, str]:
    if isinstance(stream, Path):
        return stream.read_text(), str(stream)
    if isinstance(stream, bytes):
        return stream.decode("utf-8"), ""
    return stream, ""


def parse(stream: Union[bytes, str, Path],
          quantization: QuantizationParams = None,
          kinds: Optional[Dict[str, PropertyKind]] = None,
          allow_horizontal_faults: bool = config.ALLOW_HORIZONTAL_FAULTS) -> CornerPointModel:
    """
    GRDECL text (bytes, str or path) -> quantized CornerPointModel.

    Scales come from `quantization`, else from a header written by `write`,
    else from the config defaults.
    """
    text, source = _read_text(stream)
    quantization = quantization or scales_from_header(text) or QuantizationParams()
    doc = parse_document(text, source)
    real = RealModel(
        dims=doc.dims,
        coord=doc.arrays["COORD"],
        zcorn=doc.arrays["ZCORN"],
        actnum=doc.arrays.get("ACTNUM"),
        properties={name: (doc.arrays[name], resolve_kind(name, doc, kinds)) for name in doc.properties},
        extra_keywords=tuple(doc.raw_blocks),
    )
    model = quantize_model(real, quantization, allow_horizontal_faults)
    logger.info(f"Parsed {source or 'GRDECL'}: {doc.dims.to_list()} cells, "
                f"{len(model.properties)} properties, {len(doc.raw_blocks)} preserved blocks")
    return model


def read_grdecl(path, quantization: QuantizationParams = None, kinds=None,
                allow_horizontal_faults: bool = config.ALLOW_HORIZONTAL_FAULTS) -> CornerPointModel:
    return parse(Path(path), quantization, kinds, allow_horizontal_faults)


# ==================== WRITER ====================

def format_fixed(values: np.ndarray, scale: int) -> List[str]:
    """Fixed-point integers -> exact decimal strings with the scale's digit count."""
    values = np.asarray(values, dtype=np.int64)
    digits = scale_digits(scale)
    if digits == 0:
        return [str(int(v)) for v in values]
    whole, frac = np.divmod(np.abs(values), scale)
    return [
        f"{'-' if v < 0 else ''}{w}.{f:0{digits}d}"
        for v, w, f in zip(values.tolist(), whole.tolist(), frac.tolist())
    ]


def _run_length(words: List[str]) -> List[str]:
    out = []
    i = 0
    n = len(words)
    while i < n:
        j = i + 1
        while j < n and words[j] == words[i]:
            j += 1
        run = j - i
        if run >= config.RLE_MIN_RUN:
            out.append(f"{run}*{words[i]}")
        else:
            out.extend(words[i:j])
        i = j
    return out


def _section(name: str, words: List[str]) -> str:
    items = _run_length(words)
    per_line = config.VALUES_PER_LINE
    lines = [" " + " ".join(items[i:i + per_line]) for i in range(0, len(items), per_line)]
    return "\n".join([name] + lines + ["/", ""])


def write(model: CornerPointModel, level: int = 0, config_echo: Optional[dict] = None) -> bytes:
    """
    Self-contained GRDECL of one level.

    Coarse levels carry rounded means of continuous properties so the file
    reads like a normal model; level 0 is bit-exact with the quantized input.
    """
    dims = model.dims
    q = model.quantization
    header = [
        f"-- hexashrink export, level {level}",
        f"-- cells {dims.ni} x {dims.nj} x {dims.nk}, "
        f"geometry scale {q.geometry_scale}, property scale {q.property_scale}",
    ]
    if config_echo:
        header.append(f"-- config: {json.dumps(config_echo, sort_keys=True, default=str)}")

    parts = ["\n".join(header), "", "SPECGRID", f" {dims.ni} {dims.nj} {dims.nk} 1 F", "/", ""]
    parts.append(_section("COORD", format_fixed(coord_from_pillars(model.pillars.values), q.geometry_scale)))
    parts.append(_section("ZCORN", format_fixed(model.zcorn(), q.geometry_scale)))
    parts.append(_section("ACTNUM", [str(int(v)) for v in cells_to_grdecl(model.actnum)]))
    for prop in model.properties:
        if prop.is_categorical:
            words = [str(int(v)) for v in cells_to_grdecl(prop.values)]
        else:
            words = format_fixed(cells_to_grdecl(prop.mean_values()), prop.scale)
        parts.append(_section(prop.name, words))
    for _, raw in model.extra_keywords:
        parts.append(raw + "\n")
    return "\n".join(parts).encode("utf-8")


def write_grdecl(model: CornerPointModel, path, level: int = 0, config_echo: Optional[dict] = None) -> int:
    data = write(model, level, config_echo)
    Path(path).write_bytes(data)
    logger.info(f"Wrote {path} ({len(data):,} bytes, level {level})")
    return len(data)
