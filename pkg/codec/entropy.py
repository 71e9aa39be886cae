"""
codec/entropy.py - Per-Chunk Entropy Report

For every chunk of a pyramid:
- empirical byte entropy (bits per byte) of its serialized payload
- empirical symbol entropy (bits per element) of its integer values
- share of zero elements
- compressed size and ratio for each requested codec

The last row holds totals; ratios there use `original_size` when given
(e.g. the GRDECL file size), otherwise the summed raw chunk sizes.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np
import pandas as pd

import config
from codec.codecs import available_codecs, get_codec
from codec.container import decode_array, pyramid_chunks
from codec.pyramid import Pyramid

logger = logging.getLogger(__name__)

TOTAL_ROW = "TOTAL"


def shannon_entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0]
    if counts.size <= 1:
        return 0.0
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def byte_entropy(data: bytes) -> float:
    if not data:
        return 0.0
    return shannon_entropy(np.bincount(np.frombuffer(data, dtype=np.uint8), minlength=256))


def symbol_entropy(values: np.ndarray) -> float:
    if not values.size:
        return 0.0
    _, counts = np.unique(values, return_counts=True)
    return shannon_entropy(counts)


def entropy_report(pyramid: Pyramid, codecs: Optional[List[str]] = None,
                   original_size: Optional[int] = None, threads: int = None) -> pd.DataFrame:
    codecs = available_codecs() if codecs is None else list(codecs)
    backends = [get_codec(name) for name in codecs]
    chunks = pyramid_chunks(pyramid)

    rows = []
    for chunk in chunks:
        values = decode_array(chunk.dtype, chunk.raw, chunk.count, chunk.name)
        rows.append({
            "chunk": chunk.name,
            "level": -chunk.level,
            "kind": chunk.kind_label,
            "elements": chunk.count,
            "raw_bytes": len(chunk.raw),
            "byte_entropy": byte_entropy(chunk.raw),
            "symbol_entropy": symbol_entropy(values),
            "zero_ratio": float((values == 0).mean()) if values.size else 1.0,
        })

    with ThreadPoolExecutor(max_workers=threads or config.THREADS) as pool:
        for codec in backends:
            sizes = list(pool.map(lambda c: len(codec.compress(c.raw)), chunks))
            for row, size in zip(rows, sizes):
                row[f"{codec.name}_bytes"] = size
                row[f"{codec.name}_ratio"] = row["raw_bytes"] / size if size else float("inf")

    df = pd.DataFrame(rows)
    if df.empty:
        return df

    total = {
        "chunk": TOTAL_ROW,
        "level": np.nan,
        "kind": "",
        "elements": int(df["elements"].sum()),
        "raw_bytes": int(df["raw_bytes"].sum()),
        "byte_entropy": np.nan,
        "symbol_entropy": np.nan,
        "zero_ratio": float((df["zero_ratio"] * df["elements"]).sum() / max(int(df["elements"].sum()), 1)),
    }
    reference = original_size if original_size is not None else total["raw_bytes"]
    for codec in backends:
        size = int(df[f"{codec.name}_bytes"].sum())
        total[f"{codec.name}_bytes"] = size
        total[f"{codec.name}_ratio"] = reference / size if size else float("inf")

    df = pd.concat([df, pd.DataFrame([total])], ignore_index=True)
    logger.debug(f"Entropy report: {len(chunks)} chunks, {total['raw_bytes']:,} raw bytes")
    return df
