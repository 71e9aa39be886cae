"""
tests/fixtures.py - Seeded Models Shared by the Test Modules
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from core.grid import CornerPointModel
from core.synthetic import FaultSpec, SyntheticSpec, generate_synthetic


def small_model(ni: int = 6, nj: int = 5, nk: int = 4, **overrides) -> CornerPointModel:
    spec = {"ni": ni, "nj": nj, "nk": nk, "seed": 7, "anticline_amplitude": 8.0, "rock_types": 3, "rock_tile": 2}
    spec.update(overrides)
    return generate_synthetic(SyntheticSpec.from_dict(spec))


def faulted_model(ni: int = 12, nj: int = 10, nk: int = 6, **overrides) -> CornerPointModel:
    spec = {
        "faults": (("i", ni // 2, 25.0), ("j", nj // 3, 12.5)),
        "active_fraction": 0.7,
        "pillar_tilt": 0.05,
    }
    spec.update(overrides)
    return small_model(ni, nj, nk, **spec)


def random_spec(rng: np.random.Generator, max_dim: int = 33) -> SyntheticSpec:
    """Random generator spec: dims 1..max_dim, 0-3 faults, ACTNUM density 0.2-1.0."""
    ni, nj, nk = (int(v) for v in rng.integers(1, max_dim + 1, size=3))
    faults = []
    if min(ni, nj, nk) >= 2:
        for _ in range(int(rng.integers(0, 4))):
            axis = "i" if rng.random() < 0.5 else "j"
            n = ni if axis == "i" else nj
            faults.append(FaultSpec(axis, int(rng.integers(1, n)), float(rng.integers(1, 40))))
    return SyntheticSpec(
        ni=ni, nj=nj, nk=nk,
        seed=int(rng.integers(0, 2 ** 31)),
        anticline_amplitude=float(rng.uniform(0.0, 30.0)),
        pillar_tilt=float(rng.uniform(0.0, 0.1)),
        faults=tuple(faults),
        active_fraction=float(rng.uniform(0.2, 1.0)),
        rock_types=int(rng.integers(1, 5)),
        rock_tile=int(rng.integers(1, 5)),
        speckle=float(rng.uniform(0.0, 0.3)),
    )
