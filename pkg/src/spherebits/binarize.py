"""Randomized bit maps: the 1-D offset binarizer and the checkerboard parity.

The 1-D map sends x to floor(x - v) mod 2 for a uniform offset v in [0, 1);
its XOR expectation over v recovers |x - y| exactly for x, y in [-1/2, 1/2).
The n-dimensional map XORs the floor parities of all coordinates, coloring
unit hypercubes like a checkerboard, and is composed with a random rotation
in :func:`f_bit`.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import AngleTuple, SpherePoint, apply_rotation, plan_from_angles


def gamma(x):
    """floor(x) mod 2, canonicalized to {0, 1} (so gamma(-0.2) == 1).

    Accepts a scalar or an array; arrays are mapped elementwise.
    """
    if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
        return math.floor(x) % 2
    return np.floor(np.asarray(x, dtype=float)).astype(np.int64) % 2


def binarize_1d(x: float, v: float) -> int:
    """Bit gamma(x - v) for x in [-1/2, 1/2) and offset v in [0, 1)."""
    if not -0.5 <= x < 0.5:
        raise ValueError(f"input must lie in [-1/2, 1/2), got {x}")
    if not 0.0 <= v < 1.0:
        raise ValueError(f"offset must lie in [0, 1), got {v}")
    return gamma(x - v)


def _one_region(t: float) -> tuple[float, float]:
    # {v in [0,1) : gamma(t - v) == 1} is a single interval: t - v must fall
    # in [-1, 0), i.e. v in (t, t + 1] clipped to [0, 1)
    if t >= 0.0:
        return (t, 1.0)
    return (0.0, t + 1.0)


def exact_xor_expectation_1d(x: float, y: float) -> float:
    """Lebesgue measure of the offsets v where the bits of x and y differ.

    Computed geometrically from the two one-regions and checked against the
    closed form |x - y| before returning.
    """
    for name, t in (("x", x), ("y", y)):
        if not -0.5 <= t < 0.5:
            raise ValueError(f"{name} must lie in [-1/2, 1/2), got {t}")
    lo_x, hi_x = _one_region(x)
    lo_y, hi_y = _one_region(y)
    overlap = max(0.0, min(hi_x, hi_y) - max(lo_x, lo_y))
    measure = (hi_x - lo_x) + (hi_y - lo_y) - 2.0 * overlap
    if abs(measure - abs(x - y)) > 1e-12:
        raise AssertionError(
            f"flip-region measure {measure!r} does not equal |x - y| = {abs(x - y)!r}"
        )
    return measure


def checkerboard_parity(v) -> int:
    """XOR over coordinates of gamma(coordinate)."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("coordinates must be finite")
    return int(np.sum(gamma(v)) % 2)


def parity_rows(w: np.ndarray) -> np.ndarray:
    """Checkerboard parity of each row of an (m, n) array."""
    return (np.floor(w).astype(np.int64) % 2).sum(axis=1) % 2


def f_bit(x: SpherePoint, theta: AngleTuple) -> int:
    """Checkerboard parity of the rotated sphere point: the randomized bit."""
    if theta.dimension != x.dimension:
        raise ValueError(
            f"dimension mismatch: point is {x.dimension}-dimensional, "
            f"angles imply {theta.dimension}"
        )
    return checkerboard_parity(apply_rotation(plan_from_angles(theta), x.vector))
