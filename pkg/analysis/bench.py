"""
analysis/bench.py - Compression Benchmark

Reproduces two tables over the generator fixtures in config.BENCH_FIXTURES:
1. Ratios: rows mesh x {none, 1, 2, ..., max}, one column per codec,
   ratio = GRDECL size / compressed size ("none" compresses the GRDECL text)
2. Timings: analysis alone, synthesis alone, analysis + encoding,
   decoding + synthesis (best of `repeats` runs, seconds)

Measures only; nothing here asserts.
"""

import logging
import time
from typing import Callable, Dict, List, Optional

import pandas as pd

import config
from core.grdecl import write as write_grdecl_bytes
from core.grid import CornerPointModel
from core.synthetic import SyntheticSpec, generate_synthetic
from codec.codecs import available_codecs, get_codec
from codec.container import deserialize, serialize
from codec.pyramid import analyze_pyramid, synthesize_to_level

logger = logging.getLogger(__name__)


def best_time(fn: Callable[[], object], repeats: int) -> float:
    best = float("inf")
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


class CompressionBenchmark:
    """Ratio and timing tables over named synthetic fixtures."""

    def __init__(self, fixtures: Optional[Dict[str, Dict]] = None, codecs: Optional[List[str]] = None,
                 max_levels: Optional[int] = None, repeats: int = 3):
        self.fixtures = fixtures if fixtures is not None else config.BENCH_FIXTURES
        self.codecs = list(codecs or available_codecs())
        self.max_levels = max_levels
        self.repeats = repeats
        self._models: Dict[str, CornerPointModel] = {}

    def model(self, name: str) -> CornerPointModel:
        if name not in self._models:
            self._models[name] = generate_synthetic(SyntheticSpec.from_dict(self.fixtures[name]))
        return self._models[name]

    def levels_for(self, model: CornerPointModel) -> int:
        limit = model.dims.max_levels()
        return limit if self.max_levels is None else min(limit, self.max_levels)

    # ==================== RATIOS ====================

    def ratio_rows(self, name: str) -> List[Dict]:
        model = self.model(name)
        original = write_grdecl_bytes(model)
        size = len(original)
        rows = [{"mesh": name, "levels": "none", "grdecl_bytes": size,
                 **{codec: size / len(get_codec(codec).compress(original)) for codec in self.codecs}}]

        for levels in range(1, self.levels_for(model) + 1):
            pyramid = analyze_pyramid(model, levels)
            row = {"mesh": name, "levels": str(levels), "grdecl_bytes": size}
            for codec in self.codecs:
                data = serialize(pyramid, {kind: codec for kind in config.DEFAULT_CODECS})
                row[codec] = size / len(data)
            rows.append(row)
            logger.info(f"  {name} L={levels}: " + ", ".join(f"{c} {row[c]:.2f}" for c in self.codecs))
        return rows

    def ratio_table(self) -> pd.DataFrame:
        logger.info("=" * 60)
        logger.info("COMPRESSION RATIOS")
        logger.info("=" * 60)
        rows = []
        for name in self.fixtures:
            rows.extend(self.ratio_rows(name))
        return pd.DataFrame(rows, columns=["mesh", "levels", "grdecl_bytes"] + self.codecs)

    # ==================== TIMINGS ====================

    def timing_row(self, name: str, codec: Optional[str] = None) -> Dict:
        model = self.model(name)
        levels = self.levels_for(model)
        codecs = {kind: codec or config.DEFAULT_CODEC for kind in config.DEFAULT_CODECS}
        pyramid = analyze_pyramid(model, levels)
        data = serialize(pyramid, codecs)

        return {
            "mesh": name,
            "levels": levels,
            "analysis": best_time(lambda: analyze_pyramid(model, levels), self.repeats),
            "synthesis": best_time(lambda: synthesize_to_level(pyramid, 0), self.repeats),
            "analysis_encoding": best_time(lambda: serialize(analyze_pyramid(model, levels), codecs), self.repeats),
            "decoding_synthesis": best_time(lambda: synthesize_to_level(deserialize(data), 0), self.repeats),
        }

    def timing_table(self, codec: Optional[str] = None) -> pd.DataFrame:
        logger.info("=" * 60)
        logger.info("TIMINGS")
        logger.info("=" * 60)
        rows = []
        for name in self.fixtures:
            row = self.timing_row(name, codec)
            logger.info(f"  {name}: analysis {row['analysis']:.3f}s, synthesis {row['synthesis']:.3f}s")
            rows.append(row)
        return pd.DataFrame(rows)
