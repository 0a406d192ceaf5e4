"""Vectors on spheres and the plane-rotation apparatus.

Everything operates on plain 1-D numpy arrays.  A rotation is either a
:class:`RotationPlan` (an ordered product of Givens-style plane rotations,
applied in O(n) per vector without materializing a matrix) or a
:class:`HaarRotation` (a dense special-orthogonal matrix drawn from the
rotation-invariant measure, used as a control randomizer).

All sampling helpers take an explicit ``numpy.random.Generator`` so that
every result is a deterministic function of the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# |norm - radius| tolerance for points that claim to sit on a sphere
SPHERE_NORM_RTOL = 1e-9


def as_vector(coords) -> np.ndarray:
    """Validate and return a finite 1-D float array of length >= 1."""
    v = np.asarray(coords, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"vector must be 1-D with at least one coordinate, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector coordinates must be finite")
    return v


def quad_norm(v) -> float:
    """Quadratic norm sqrt(sum of squared coordinates)."""
    return float(np.linalg.norm(as_vector(v)))


def basis_vector(n: int, m: int) -> np.ndarray:
    """e_m in R^n (1-based index m)."""
    if not 1 <= m <= n:
        raise ValueError(f"basis index must lie in 1..{n}, got {m}")
    e = np.zeros(n)
    e[m - 1] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A vector constrained to the origin-centered sphere of radius ``radius``.

    The radius is the public condition of the binarization scheme; it must
    lie in (0, 1) so that every coordinate of any rotated image stays inside
    (-1, 1).
    """

    vector: np.ndarray
    radius: float

    def __post_init__(self):
        v = as_vector(self.vector)
        object.__setattr__(self, "vector", v)
        if not 0.0 < self.radius < 1.0:
            raise ValueError(f"radius must lie in (0, 1), got {self.radius}")
        norm = float(np.linalg.norm(v))
        if abs(norm - self.radius) > SPHERE_NORM_RTOL * max(1.0, self.radius):
            raise ValueError(
                f"point norm {norm!r} is off the sphere of radius {self.radius!r}"
            )

    @property
    def dimension(self) -> int:
        return self.vector.size


@dataclass(frozen=True, eq=False)
class AngleTuple:
    """Theta = (theta_1, ..., theta_{n-1}), each angle in [0, 2*pi)."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.angles, dtype=float))
        if a.ndim != 1:
            raise ValueError("angles must be a flat sequence")
        if a.size and (not np.all(np.isfinite(a)) or a.min() < 0.0 or a.max() >= TWO_PI):
            raise ValueError("each angle must lie in [0, 2*pi)")
        object.__setattr__(self, "angles", a)

    @property
    def dimension(self) -> int:
        return self.angles.size + 1


@dataclass(frozen=True, eq=False)
class RotationPlan:
    """Ordered product of plane rotations U_1(theta_1) ... U_{n-1}(theta_{n-1}).

    ``rotations`` lists the factors of the product in ascending plane order;
    plane p rotates coordinates (p, p+1) (1-based).  Like any matrix product,
    the rightmost factor acts on a vector first, so application iterates the
    list in reverse.  The orientation of each 2x2 block is

        (a, b) -> (cos t * a + sin t * b, -sin t * a + cos t * b)

    which is the unique choice reproducing the spherical-coordinate image of
    e_n (see ``tests`` for the componentwise check).
    """

    dimension: int
    rotations: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        planes = [p for p, _ in self.rotations]
        if planes != list(range(1, self.dimension)):
            raise ValueError(
                f"plane indices must be exactly 1..{self.dimension - 1} in ascending order"
            )

    def apply(self, v) -> np.ndarray:
        return apply_rotation(self, v)


def plan_from_angles(theta: AngleTuple) -> RotationPlan:
    """Build the rotation product for one angle tuple."""
    angles = theta.angles
    return RotationPlan(
        dimension=angles.size + 1,
        rotations=tuple((p, float(angles[p - 1])) for p in range(1, angles.size + 1)),
    )


def apply_rotation(plan: RotationPlan, v) -> np.ndarray:
    """Apply the plan's rotation product to one vector (O(n))."""
    vec = as_vector(v)
    if vec.size != plan.dimension:
        raise ValueError(
            f"dimension mismatch: plan is {plan.dimension}-dimensional, vector has {vec.size}"
        )
    out = vec.copy()
    for p, t in reversed(plan.rotations):
        c, s = math.cos(t), math.sin(t)
        a, b = out[p - 1], out[p]
        out[p - 1] = c * a + s * b
        out[p] = -s * a + c * b
    return out


def rotate_rows(angles: np.ndarray, v) -> np.ndarray:
    """Apply one rotation product per row of ``angles`` (shape (m, n-1)).

    ``v`` is either a single n-vector, broadcast to every row, or an (m, n)
    array rotated row-by-row.  Returns an (m, n) array.  Row i equals
    ``apply_rotation(plan_from_angles(AngleTuple(angles[i])), v[i])``.
    """
    angles = np.asarray(angles, dtype=float)
    if angles.ndim != 2:
        raise ValueError("angles must be a 2-D array (rows of angle tuples)")
    m, nm1 = angles.shape
    n = nm1 + 1
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        if v.size != n:
            raise ValueError(f"vector has {v.size} coordinates, angles imply {n}")
        out = np.broadcast_to(v, (m, n)).copy()
    else:
        if v.shape != (m, n):
            raise ValueError(f"expected point array of shape {(m, n)}, got {v.shape}")
        out = v.copy()
    for p in range(n - 1, 0, -1):
        t = angles[:, p - 1]
        c, s = np.cos(t), np.sin(t)
        a = out[:, p - 1].copy()
        b = out[:, p]
        out[:, p - 1] = c * a + s * b
        out[:, p] = -s * a + c * b
    return out


@dataclass(frozen=True, eq=False)
class HaarRotation:
    """A rotation-invariant random orthogonal map with determinant +1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, v) -> np.ndarray:
        vec = as_vector(v)
        if vec.size != self.dimension:
            raise ValueError(
                f"dimension mismatch: map is {self.dimension}-dimensional, vector has {vec.size}"
            )
        return self.matrix @ vec


def haar_rotation_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Sample ``count`` Haar rotations as a (count, n, n) array.

    QR of an iid standard-normal square array, with the R diagonal sign fixed
    so the factorization is unique (giving Haar measure on the orthogonal
    group), then one column negated on draws with determinant -1 to land in
    the special orthogonal group.
    """
    a = rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(a)
    diag = np.einsum("mii->mi", r)
    q = q * np.where(diag >= 0.0, 1.0, -1.0)[:, None, :]
    det = np.linalg.det(q)
    q[det < 0.0, :, -1] *= -1.0
    return q


def sample_angles(n: int, rng: np.random.Generator) -> AngleTuple:
    """Draw Theta uniformly on [0, 2*pi)^(n-1)."""
    if n < 2:
        raise ValueError(f"need dimension >= 2 to sample angles, got {n}")
    return AngleTuple(rng.uniform(0.0, TWO_PI, size=n - 1))


def sample_haar_rotation(n: int, rng: np.random.Generator) -> HaarRotation:
    """Draw one rotation from the rotation-invariant measure on SO(n)."""
    if n < 2:
        raise ValueError(f"need dimension >= 2 to sample rotations, got {n}")
    return HaarRotation(haar_rotation_batch(n, 1, rng)[0])


def sphere_point_batch(n: int, epsilon: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points on the radius-epsilon sphere, as a (count, n) array."""
    g = rng.standard_normal((count, n))
    norms = np.linalg.norm(g, axis=1)
    # a zero normal vector has probability zero; regenerate defensively
    for _ in range(100):
        bad = norms < 1e-12
        if not bad.any():
            break
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1)
    else:
        raise RuntimeError("degenerate normal draws while sampling the sphere")
    return epsilon * g / norms[:, None]


def sample_sphere_point(n: int, epsilon: float, rng: np.random.Generator) -> SpherePoint:
    """Draw one point uniformly on the radius-epsilon sphere in R^n."""
    if n < 2:
        raise ValueError(f"need dimension >= 2, got {n}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return SpherePoint(sphere_point_batch(n, epsilon, 1, rng)[0], epsilon)


def point_at_distance(x: SpherePoint, d: float, rng: np.random.Generator) -> SpherePoint:
    """A point on x's sphere at distance d from x, in a uniform direction.

    A tangent direction at x is drawn uniformly and x is rotated toward it
    by 2*arcsin(d / (2*radius)).  Requires 0 <= d <= 2*radius.
    """
    epsilon = x.radius
    if not 0.0 <= d <= 2.0 * epsilon:
        raise ValueError(f"distance must lie in [0, 2*radius] = [0, {2 * epsilon}], got {d}")
    xv = x.vector
    if d == 0.0:
        return SpherePoint(xv.copy(), epsilon)
    n = x.dimension
    for _ in range(100):
        t = rng.standard_normal(n)
        t -= (t @ xv) * xv / (epsilon * epsilon)
        tn = np.linalg.norm(t)
        if tn > 1e-9:
            break
    else:
        raise RuntimeError("could not draw a tangent direction")
    t /= tn
    beta = 2.0 * math.asin(min(1.0, d / (2.0 * epsilon)))
    y = math.cos(beta) * xv + epsilon * math.sin(beta) * t
    return SpherePoint(y, epsilon)


def pair_at_distance(
    n: int, epsilon: float, d: float, rng: np.random.Generator
) -> tuple[SpherePoint, SpherePoint]:
    """A uniform sphere point X and a second point Y with ||X - Y|| = d.

    Requires 0 <= d <= 2*epsilon; the direction of Y around X is uniform.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 <= d <= 2.0 * epsilon:
        raise ValueError(f"distance must lie in [0, 2*epsilon] = [0, {2 * epsilon}], got {d}")
    x = SpherePoint(sphere_point_batch(n, epsilon, 1, rng)[0], epsilon)
    return x, point_at_distance(x, d, rng)
