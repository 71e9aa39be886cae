"""
tests/test_grdecl.py - GRDECL Reader/Writer

Usage:
    python -m tests.test_grdecl
"""

import sys
import logging
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from core.errors import GrdeclSyntaxError, LengthMismatch, MissingDims
from core.grdecl import format_fixed, parse, read_grdecl, scales_from_header, tokenize, TokenKind, write, write_grdecl
from core.grid import GridDims, PropertyKind, QuantizationParams, models_equal
from core.synthetic import SyntheticSpec, generate_synthetic
from tests.fixtures import faulted_model, small_model

logging.basicConfig(level=logging.INFO, format="%(message)s")
logger = logging.getLogger(__name__)

ONE_CELL = """-- single cell
SPECGRID
 1 1 1 1 F
/
COORD
 0 0 1000  0 0 1010
 100 0 1000  100 0 1010
 0 100 1000  0 100 1010
 100 100 1000  100 100 1010
/
ZCORN
 4*1000 4*1010
/
ACTNUM
 1
/
PORO
 0.25
/
MAPUNITS
 'METRES' /
NOECHO
"""


def _expect(error, text):
    try:
        parse(text)
    except error as e:
        return e
    raise AssertionError(f"{error.__name__} not raised")


def test_tokenizer():
    tokens = [t for t in tokenize("ZCORN -- depth\n 3*1.5 2 /") if t.kind != TokenKind.COMMENT]
    assert [t.kind for t in tokens] == [TokenKind.KEYWORD, TokenKind.REPEAT, TokenKind.NUMBER, TokenKind.SLASH]
    assert tokens[1].count == 3 and tokens[1].value == "1.5"
    assert tokens[2].line == 2


def test_parse_single_cell():
    model = parse(ONE_CELL)
    assert model.dims == GridDims(1, 1, 1)
    assert model.zcorn().tolist() == [1000000] * 4 + [1010000] * 4
    assert model.pillars.values[1, 0, 0] == 100000
    assert model.actnum.all()
    poro = model.property("PORO")
    assert poro.kind == PropertyKind.CONTINUOUS
    assert poro.values[0, 0, 0] == 250000
    assert model.extra_keywords == (("MAPUNITS", "MAPUNITS\n 'METRES' /"), ("NOECHO", "NOECHO"))


def test_write_then_parse_is_identical():
    for model in (parse(ONE_CELL), small_model(), faulted_model()):
        text = write(model, config_echo={"levels": 2})
        assert b"-- config:" in text
        assert models_equal(parse(text), model)


def test_file_round_trip():
    model = faulted_model(6, 4, 3)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.grdecl"
        size = write_grdecl(model, path)
        assert size == path.stat().st_size
        assert models_equal(read_grdecl(path), model)


def test_written_scales_are_read_back():
    coarse = QuantizationParams(geometry_scale=100, property_scale=10000)
    spec = SyntheticSpec.from_dict({"ni": 5, "nj": 4, "nk": 3, "seed": 9, "anticline_amplitude": 6.0})
    model = generate_synthetic(spec, coarse)
    text = write(model)
    assert scales_from_header(text.decode("utf-8")) == coarse

    restored = parse(text)
    assert restored.quantization == coarse
    assert models_equal(restored, model)

    assert parse(text, QuantizationParams()).quantization == QuantizationParams()
    assert scales_from_header(ONE_CELL) is None


def test_kind_inference_and_override():
    text = ONE_CELL.replace("PORO\n 0.25\n/", "PERMX\n 5\n/\nSATNUM\n 2\n/")
    model = parse(text)
    assert model.property("PERMX").is_categorical
    assert model.property("SATNUM").universe == (2,)
    model = parse(text, kinds={"PERMX": PropertyKind.CONTINUOUS})
    assert not model.property("PERMX").is_categorical


def test_format_fixed():
    assert format_fixed(np.array([1500, -250, 0]), 1000) == ["1.500", "-0.250", "0.000"]
    assert format_fixed(np.array([7]), 1) == ["7"]


def test_missing_dims():
    _expect(MissingDims, "COORD\n 0 /\n")
    _expect(MissingDims, "MAPUNITS\n 'METRES' /\n")


def test_length_mismatch():
    e = _expect(LengthMismatch, ONE_CELL.replace("4*1000 4*1010", "4*1000 3*1010"))
    assert "ZCORN" in str(e)


def test_syntax_errors_carry_location():
    e = _expect(GrdeclSyntaxError, "SPECGRID\n 1 1 1 1 F\n/\nCOORD\n 0 0 # 1\n")
    assert (e.line, e.column) == (5, 6)
    _expect(GrdeclSyntaxError, "SPECGRID\n 1 1 1\n")
    _expect(GrdeclSyntaxError, ONE_CELL.replace(" 0.25\n", " high\n"))


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            print("\n" + "=" * 60)
            print(name)
            print("=" * 60)
            fn()
            print("  ✓ passed")
