"""
codec - Pyramid Orchestration and the .hxs Container

1. pyramid - multi-level analysis / synthesis of whole models
2. streaming - slab-wise analysis with halos (same output as pyramid)
3. container - chunked, checksummed, progressive byte format
4. codecs - pluggable lossless byte compressors
5. entropy - per-chunk entropy and compression report
"""

from codec.codecs import BaseCodec, available_codecs, compress_payload, decompress_payload, get_codec
from codec.pyramid import Pyramid, PyramidHeader, analyze_pyramid, synthesize_to_level
from codec.container import deserialize, read_container, serialize, write_container
from codec.streaming import Slab, analyze_streaming, iter_slabs
from codec.entropy import entropy_report

__all__ = [
    "BaseCodec",
    "available_codecs",
    "compress_payload",
    "decompress_payload",
    "get_codec",
    "Pyramid",
    "PyramidHeader",
    "analyze_pyramid",
    "synthesize_to_level",
    "deserialize",
    "read_container",
    "serialize",
    "write_container",
    "Slab",
    "analyze_streaming",
    "iter_slabs",
    "entropy_report",
]
