"""
analysis/stats.py - Per-Level Statistics

- Categorical fields: class histograms (cell counts and proportions) per level
- Continuous fields: min / mean / max of the displayed cell means per level
- Geometry: cell and active counts per level
"""

import logging
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from codec.pyramid import Pyramid, iter_levels
from analysis.export import display_values

logger = logging.getLogger(__name__)


def level_histograms(pyramid: Pyramid) -> pd.DataFrame:
    rows = []
    for level, model in iter_levels(pyramid):
        for prop in model.properties:
            if not prop.is_categorical:
                continue
            classes, counts = np.unique(prop.values, return_counts=True)
            total = int(counts.sum())
            seen = dict(zip(classes.tolist(), counts.tolist()))
            for cls in prop.universe:
                count = seen.get(cls, 0)
                rows.append({
                    "level": level,
                    "field": prop.name,
                    "class": cls,
                    "cells": count,
                    "proportion": count / total if total else 0.0,
                })
    return pd.DataFrame(rows, columns=["level", "field", "class", "cells", "proportion"])


def level_summary(pyramid: Pyramid) -> pd.DataFrame:
    """One row per level and continuous field (geometry-only rows when there are none)."""
    rows = []
    for level, model in iter_levels(pyramid):
        base = {
            "level": level,
            "ni": model.dims.ni,
            "nj": model.dims.nj,
            "nk": model.dims.nk,
            "cells": model.dims.n_cells,
            "active": int(model.actnum.sum()),
        }
        shown = display_values(model, -level)
        continuous = [p for p in model.properties if not p.is_categorical]
        if not continuous:
            rows.append(base)
        for prop in continuous:
            values = np.asarray(shown[prop.name], dtype=np.float64)
            rows.append({
                **base,
                "field": prop.name,
                "min": float(values.min()),
                "mean": float(values.mean()),
                "max": float(values.max()),
            })
    return pd.DataFrame(rows)


def proportion_table(histograms: pd.DataFrame) -> pd.DataFrame:
    """Histograms pivoted to (field, class) rows x level columns."""
    if histograms.empty:
        return histograms
    return histograms.pivot_table(index=["field", "class"], columns="level", values="proportion").sort_index()


def pyramid_stats(pyramid: Pyramid) -> Tuple[pd.DataFrame, pd.DataFrame]:
    histograms = level_histograms(pyramid)
    summary = level_summary(pyramid)
    logger.debug(f"Stats over {summary['level'].nunique() if not summary.empty else 0} levels")
    return histograms, summary


def render(tables: Dict[str, pd.DataFrame], fmt: str = "text") -> str:
    """Tables as text blocks or concatenated CSV sections."""
    parts = []
    for title, df in tables.items():
        if fmt == "csv":
            parts.append(f"# {title}\n{df.to_csv(index=not isinstance(df.index, pd.RangeIndex))}")
        else:
            parts.append("=" * 60 + f"\n{title.upper()}\n" + "=" * 60 + "\n"
                         + (df.to_string() if not df.empty else "(empty)"))
    return "\n".join(parts)
