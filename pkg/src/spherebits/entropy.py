"""Binary entropy machinery over empirical joint counts.

Entropies are plug-in (maximum-likelihood) estimates in bits; zero cells
contribute zero.  The ordering check compares the crossover-probability
ordering of the legitimate and eavesdropper channels against the
conditional-entropy ordering, which is the entropy-based advantage measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TIE_TOL = 1e-9


def binary_entropy(p: float) -> float:
    """h(p) = -p*log2(p) - (1-p)*log2(1-p), with 0*log2(0) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def _check_counts(counts, shape) -> np.ndarray:
    c = np.asarray(counts)
    if c.shape != shape:
        raise ValueError(f"counts must have shape {shape}, got {c.shape}")
    if not np.issubdtype(c.dtype, np.integer):
        if not np.all(np.equal(np.mod(c, 1), 0)):
            raise ValueError("counts must be integers")
        c = c.astype(np.int64)
    if (c < 0).any():
        raise ValueError("counts must be nonnegative")
    if c.sum() < 1:
        raise ValueError("total count must be >= 1")
    return c.astype(np.int64)


@dataclass(frozen=True, eq=False)
class BinaryJoint2:
    """Empirical 2x2 joint counts, indexed by (first bit, second bit)."""

    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts", _check_counts(self.counts, (2, 2)))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, eq=False)
class BinaryJoint3:
    """Empirical 2x2x2 joint counts, indexed by (X*, Y*, Z*)."""

    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts", _check_counts(self.counts, (2, 2, 2)))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def marginal_xy(self) -> BinaryJoint2:
        return BinaryJoint2(self.counts.sum(axis=2))

    def marginal_xz(self) -> BinaryJoint2:
        return BinaryJoint2(self.counts.sum(axis=1))


def crossover(joint: BinaryJoint2) -> float:
    """P(first != second): the off-diagonal mass."""
    c = joint.counts
    return float(c[0, 1] + c[1, 0]) / joint.total


def _plugin_entropy(probs: np.ndarray) -> float:
    p = probs[probs > 0.0]
    return float(-(p * np.log2(p)).sum())


def conditional_entropy(joint: BinaryJoint2) -> float:
    """H(first | second) = H(first, second) - H(second), plug-in, in bits."""
    p = joint.counts / joint.total
    return max(0.0, _plugin_entropy(p.ravel()) - _plugin_entropy(p.sum(axis=0)))


@dataclass(frozen=True)
class SecrecyAdvantageReport:
    """Crossovers, conditional entropies, and the entropy advantage."""

    p_xy: float
    p_xz: float
    h_x_given_y: float
    h_x_given_z: float
    ck_advantage: float
    wyner_applicable: bool
    ordering_verdict: str  # "agree" | "disagree" | "indeterminate"


def ck_advantage(joint: BinaryJoint3) -> float:
    """H(X*|Z*) - H(X*|Y*) in bits for the given empirical joint.

    This is the advantage at the observed distribution (no maximization over
    input laws); it may be negative.
    """
    return conditional_entropy(joint.marginal_xz()) - conditional_entropy(joint.marginal_xy())


def _sign_with_tol(x: float, tol: float = TIE_TOL) -> int:
    if abs(x) <= tol:
        return 0
    return 1 if x > 0.0 else -1


def wyner_check(joint: BinaryJoint3) -> SecrecyAdvantageReport:
    """Compare the crossover ordering with the conditional-entropy ordering.

    The implication is only guaranteed when P(X* != Y*) < 1/2; outside that
    gate the verdict is "indeterminate".  Ties within 1e-9 on both sides
    count as agreement.
    """
    m_xy = joint.marginal_xy()
    m_xz = joint.marginal_xz()
    p_xy = crossover(m_xy)
    p_xz = crossover(m_xz)
    h_y = conditional_entropy(m_xy)
    h_z = conditional_entropy(m_xz)
    advantage = h_z - h_y
    applicable = p_xy < 0.5
    if not applicable:
        verdict = "indeterminate"
    else:
        verdict = "agree" if _sign_with_tol(p_xz - p_xy) == _sign_with_tol(advantage) else "disagree"
    return SecrecyAdvantageReport(
        p_xy=p_xy,
        p_xz=p_xz,
        h_x_given_y=h_y,
        h_x_given_z=h_z,
        ck_advantage=advantage,
        wyner_applicable=applicable,
        ordering_verdict=verdict,
    )
