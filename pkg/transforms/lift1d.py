"""
transforms/lift1d.py - Rounded Integer 5/3 Lifting

Integer-to-integer predict/update lifting with exact border handling:
- Floor border: virtual detail d[-1] = -d[0], so a[0] = z[0]
- Odd length: virtual ceil detail -d[last] (never stored), so a[last] = z[last]
- Even length: the stored last detail is modified so that a[last] = z[last]

All divisions are arithmetic floor (numpy //), never truncation.
"""

import logging
from dataclasses import dataclass

import numpy as np

from core.errors import CorruptPair

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LiftPair:
    approx: np.ndarray
    details: np.ndarray
    length: int

    @property
    def is_odd(self) -> bool:
        return self.length % 2 == 1


def _details_for_update(d: np.ndarray, odd: bool) -> np.ndarray:
    """Detail sequence extended with the virtual border details along axis 0."""
    head = -d[:1]
    if odd:
        return np.concatenate([head, d, -d[-1:]], axis=0)
    return np.concatenate([head, d], axis=0)


def analyze_axis(array: np.ndarray, axis: int = 0):
    """
    Lift every line parallel to `axis`.

    Returns (approx, details) with ceil(n/2) and floor(n/2) samples along axis.
    """
    z = np.moveaxis(np.asarray(array, dtype=np.int64), axis, 0)
    n = z.shape[0]
    if n < 1:
        raise ValueError("cannot lift an empty axis")
    if n == 1:
        return np.moveaxis(z.copy(), 0, axis), np.moveaxis(z[:0].copy(), 0, axis)

    even, odd = z[0::2], z[1::2]
    if n % 2 == 1:
        d = odd - (even[:-1] + even[1:]) // 2
        dext = _details_for_update(d, odd=True)
    else:
        standard = odd[:-1] - (even[:-1] + even[1:]) // 2
        d_prev = standard[-1:] if standard.shape[0] else np.zeros_like(odd[:1])
        d_mod = -d_prev + 4 * z[-1:] - 4 * z[-2:-1]
        d = np.concatenate([standard, d_mod], axis=0)
        dext = _details_for_update(d, odd=False)
    a = even + (dext[:-1] + dext[1:]) // 4
    return np.moveaxis(a, 0, axis), np.moveaxis(d, 0, axis)


def synthesize_axis(approx: np.ndarray, details: np.ndarray, axis: int = 0, length: int = None) -> np.ndarray:
    """Exact inverse of analyze_axis."""
    a = np.moveaxis(np.asarray(approx, dtype=np.int64), axis, 0)
    d = np.moveaxis(np.asarray(details, dtype=np.int64), axis, 0)
    n = a.shape[0] + d.shape[0] if length is None else int(length)
    if n < 1 or a.shape[0] != (n + 1) // 2 or d.shape[0] != n // 2 or a.shape[1:] != d.shape[1:]:
        raise CorruptPair(f"lifting pair of sizes {a.shape[0]}/{d.shape[0]} cannot form a signal of length {n}")
    if n == 1:
        return np.moveaxis(a.copy(), 0, axis)

    z = np.empty((n,) + a.shape[1:], dtype=np.int64)
    odd_n = n % 2 == 1
    dext = _details_for_update(d, odd=odd_n)
    even = a - (dext[:-1] + dext[1:]) // 4
    z[0::2] = even
    if odd_n:
        z[1::2] = d + (even[:-1] + even[1:]) // 2
    else:
        z[1:-1:2] = d[:-1] + (even[:-1] + even[1:]) // 2
        d_prev = d[-2] if d.shape[0] > 1 else np.zeros_like(d[-1])
        numerator = d[-1] + d_prev + 4 * even[-1]
        if np.any(numerator % 4):
            raise CorruptPair("modified border detail is not consistent with its approximation")
        z[-1] = numerator // 4
    return np.moveaxis(z, 0, axis)


def analyze_1d(z) -> LiftPair:
    values = np.asarray(z, dtype=np.int64).ravel()
    approx, details = analyze_axis(values, 0)
    return LiftPair(approx, details, values.size)


def synthesize_1d(pair: LiftPair) -> np.ndarray:
    return synthesize_axis(pair.approx, pair.details, 0, pair.length)


# ==================== NODE LATTICE ====================
# A lattice of n nodes spans n - 1 cells; its coarse lattice must span the
# ceil-halved cells. Odd n lifts every node. Even n lifts the first n - 1 and
# carries the last node through as an extra approximation. Detail m always
# sits on node 2m + 1 and coarse node I on node min(2I, n - 1).

def analyze_lattice_axis(array: np.ndarray, axis: int = 0):
    z = np.moveaxis(np.asarray(array, dtype=np.int64), axis, 0)
    n = z.shape[0]
    if n % 2 == 1:
        approx, details = analyze_axis(z, 0)
    else:
        approx, details = analyze_axis(z[:-1], 0)
        approx = np.concatenate([approx, z[-1:]], axis=0)
    return np.moveaxis(approx, 0, axis), np.moveaxis(details, 0, axis)


def synthesize_lattice_axis(approx: np.ndarray, details: np.ndarray, axis: int, length: int) -> np.ndarray:
    a = np.moveaxis(np.asarray(approx, dtype=np.int64), axis, 0)
    d = np.moveaxis(np.asarray(details, dtype=np.int64), axis, 0)
    if length % 2 == 1:
        z = synthesize_axis(a, d, 0, length)
    else:
        if a.shape[0] < 2:
            raise CorruptPair(f"lattice of {length} nodes needs at least two approximations")
        head = synthesize_axis(a[:-1], d, 0, length - 1)
        z = np.concatenate([head, a[-1:]], axis=0)
    return np.moveaxis(z, 0, axis)


def lattice_coarse_count(n: int) -> int:
    """Coarse node count for a lattice of n nodes."""
    return n // 2 + 1
