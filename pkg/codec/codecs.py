"""
codec/codecs.py - Lossless Byte Codecs

Codec ids name algorithm families, not tools:
- store      - no compression (always available)
- deflate    - LZ77 + Huffman (zlib stream)
- bwt-block  - Burrows-Wheeler block sorting (bzip2 stream)
- lz-markov  - LZ + Markov-chain range coder (LZMA "alone" stream)

All codecs follow the same interface:
- compress(data) / decompress(data)
- available(): False when the Python build lacks the backend
"""

import logging
import zlib
from abc import ABC, abstractmethod
from typing import Dict, List

import config
from core.errors import CodecUnavailable, ChecksumMismatch

logger = logging.getLogger(__name__)

try:
    import bz2
except ImportError:         # pragma: no cover - depends on the interpreter build
    bz2 = None

try:
    import lzma
except ImportError:         # pragma: no cover
    lzma = None


class BaseCodec(ABC):
    """Base class for all byte codecs."""

    name: str = ""
    codec_id: int = -1

    def __init__(self, level: int = None):
        self.level = level if level is not None else config.CODEC_LEVELS.get(self.name, 0)

    def available(self) -> bool:
        return True

    @abstractmethod
    def compress(self, data: bytes) -> bytes:
        pass

    @abstractmethod
    def decompress(self, data: bytes) -> bytes:
        pass

    def __repr__(self):
        return f"{self.__class__.__name__}(name={self.name!r}, level={self.level})"


class StoreCodec(BaseCodec):
    name = "store"
    codec_id = 0

    def compress(self, data: bytes) -> bytes:
        return bytes(data)

    def decompress(self, data: bytes) -> bytes:
        return bytes(data)


class DeflateCodec(BaseCodec):
    name = "deflate"
    codec_id = 1

    def compress(self, data: bytes) -> bytes:
        return zlib.compress(data, self.level)

    def decompress(self, data: bytes) -> bytes:
        return zlib.decompress(data)


class BwtBlockCodec(BaseCodec):
    name = "bwt-block"
    codec_id = 2

    def available(self) -> bool:
        return bz2 is not None

    def compress(self, data: bytes) -> bytes:
        return bz2.compress(data, self.level)

    def decompress(self, data: bytes) -> bytes:
        return bz2.decompress(data)


class LzMarkovCodec(BaseCodec):
    name = "lz-markov"
    codec_id = 3

    def available(self) -> bool:
        return lzma is not None

    def compress(self, data: bytes) -> bytes:
        return lzma.compress(data, format=lzma.FORMAT_ALONE, preset=self.level)

    def decompress(self, data: bytes) -> bytes:
        return lzma.decompress(data, format=lzma.FORMAT_ALONE)


CODECS: Dict[str, BaseCodec] = {
    codec.name: codec for codec in (StoreCodec(), DeflateCodec(), BwtBlockCodec(), LzMarkovCodec())
}
CODECS_BY_ID: Dict[int, BaseCodec] = {codec.codec_id: codec for codec in CODECS.values()}


def available_codecs() -> List[str]:
    return [name for name, codec in CODECS.items() if codec.available()]


def get_codec(name: str) -> BaseCodec:
    codec = CODECS.get(name)
    if codec is None:
        raise CodecUnavailable(f"unknown codec {name!r} (known: {', '.join(CODECS)})")
    if not codec.available():
        raise CodecUnavailable(f"codec {name!r} is not available in this Python build")
    return codec


def codec_by_id(codec_id: int) -> BaseCodec:
    codec = CODECS_BY_ID.get(codec_id)
    if codec is None:
        raise CodecUnavailable(f"unknown codec id {codec_id}")
    return get_codec(codec.name)


def compress_payload(data: bytes, codec: str) -> bytes:
    return get_codec(codec).compress(data)


def decompress_payload(data: bytes, codec: str, chunk: str = "") -> bytes:
    """Inverse of compress_payload; a damaged stream is reported as a checksum failure of `chunk`."""
    try:
        return get_codec(codec).decompress(data)
    except CodecUnavailable:
        raise
    except Exception as e:
        logger.debug(f"{codec} failed on {chunk or 'payload'}: {e}")
        raise ChecksumMismatch(chunk or "payload")
