"""End-to-end wiretap simulation on the sphere.

Three parties receive sphere-valued variables: X uniform, and Y, Z obtained
by Gaussian perturbation of X re-projected to the sphere (the projection
enforces the public norm condition required by the binarization scheme).
Each trial binarizes the triple under a batch of fresh randomizers and pools
the resulting (X*, Y*, Z*) joint, from which squared-distance and
conditional-entropy orderings are compared.

The opponent-side machinery models the observation J = X + sigma_e * noise
(the pre-projection stage of the same channel): the optimal estimator
E[X|J] is approximated by self-normalized importance sampling against the
uniform sphere prior, and arbitrary estimation strategies can be raced
against it on their mean quadratic error.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .binarize import parity_rows
from .entropy import BinaryJoint3, SecrecyAdvantageReport, wyner_check
from .estimation import ANGLE_PRODUCT, DEFAULT_Z_THRESHOLD, _check_mode
from .geometry import TWO_PI, SpherePoint, haar_rotation_batch, rotate_rows, sphere_point_batch

TRIAL_CHUNK = 512


class EffectiveSampleSizeError(RuntimeError):
    """Importance-sampling weights too degenerate for a trustworthy mean."""


@dataclass(frozen=True)
class ChannelConfig:
    """Parameters of one simulated wiretap experiment."""

    dimension: int
    epsilon: float
    sigma_b: float
    sigma_e: float
    trials: int
    thetas_per_trial: int = 100
    mode: str = ANGLE_PRODUCT
    seed: int = 0

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dimension}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.sigma_b < 0.0 or self.sigma_e < 0.0:
            raise ValueError("noise scales must be nonnegative")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.thetas_per_trial < 1:
            raise ValueError("thetas_per_trial must be >= 1")
        _check_mode(self.mode)


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    """Distances, pooled joint, entropy advantage, and the chain verdict."""

    mean_sq_dist_xy: float
    mean_sq_dist_xz: float
    sq_dist_diff: float
    sq_dist_diff_se: float
    ck_advantage_se: float
    joint: BinaryJoint3
    advantage: SecrecyAdvantageReport
    chain_verdict: str  # "agree" | "disagree" | "indeterminate"


def _project_to_sphere(points: np.ndarray, epsilon: float, rng, base: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(points, axis=1)
    for _ in range(100):
        bad = norms < 1e-12
        if not bad.any():
            break
        # essentially impossible; re-perturb the degenerate rows
        points[bad] = base[bad] + rng.standard_normal((int(bad.sum()), points.shape[1])) * 1e-6
        norms = np.linalg.norm(points, axis=1)
    else:
        raise RuntimeError("could not project degenerate channel outputs")
    return epsilon * points / norms[:, None]


def _triple_batch(cfg: ChannelConfig, count: int, rng: np.random.Generator):
    """(X, Y, Z) batches of shape (count, n), each row on the sphere."""
    x = sphere_point_batch(cfg.dimension, cfg.epsilon, count, rng)
    gb = rng.standard_normal((count, cfg.dimension))
    ge = rng.standard_normal((count, cfg.dimension))
    y = x.copy() if cfg.sigma_b == 0.0 else _project_to_sphere(x + cfg.sigma_b * gb, cfg.epsilon, rng, x)
    z = x.copy() if cfg.sigma_e == 0.0 else _project_to_sphere(x + cfg.sigma_e * ge, cfg.epsilon, rng, x)
    return x, y, z


def generate_triple(
    cfg: ChannelConfig, rng: np.random.Generator
) -> tuple[SpherePoint, SpherePoint, SpherePoint]:
    """Draw one (X, Y, Z) triple from the configured channel."""
    x, y, z = _triple_batch(cfg, 1, rng)
    eps = cfg.epsilon
    return SpherePoint(x[0], eps), SpherePoint(y[0], eps), SpherePoint(z[0], eps)


def _bits_for(points: np.ndarray, angles: np.ndarray | None, q: np.ndarray | None) -> np.ndarray:
    if angles is not None:
        return parity_rows(rotate_rows(angles, points))
    return parity_rows(np.einsum("mij,mj->mi", q, points))


def _scenario_chunk(cfg: ChannelConfig, count: int, child: np.random.Generator):
    n, m = cfg.dimension, cfg.thetas_per_trial
    x, y, z = _triple_batch(cfg, count, child)
    d2_xy = np.sum((x - y) ** 2, axis=1)
    d2_xz = np.sum((x - z) ** 2, axis=1)
    rows = count * m
    if cfg.mode == ANGLE_PRODUCT:
        angles = child.uniform(0.0, TWO_PI, size=(rows, n - 1))
        q = None
    else:
        angles = None
        q = haar_rotation_batch(n, rows, child)
    rep = np.repeat(np.arange(count), m)
    bx = _bits_for(x[rep], angles, q)
    by = _bits_for(y[rep], angles, q)
    bz = _bits_for(z[rep], angles, q)
    cell = 4 * bx + 2 * by + bz
    counts = np.bincount(rep * 8 + cell, minlength=count * 8).reshape(count, 8)
    return d2_xy, d2_xz, counts


def _advantage_gradient(joint_probs: np.ndarray) -> np.ndarray:
    """d[H(X|Z) - H(X|Y)]/d p_c at the plug-in point, flattened over 8 cells.

    Marginal log terms; the additive constants cancel because probability
    perturbations sum to zero.  Cells under a zero marginal carry weight 0.
    """
    p = joint_probs.reshape(2, 2, 2)

    def safe_log2(a):
        out = np.zeros_like(a)
        pos = a > 0.0
        out[pos] = np.log2(a[pos])
        return out

    p_xz = p.sum(axis=1)
    p_z = p.sum(axis=(0, 1))
    p_xy = p.sum(axis=2)
    p_y = p.sum(axis=(0, 2))
    g = np.zeros((2, 2, 2))
    g += -safe_log2(p_xz)[:, None, :] + safe_log2(p_z)[None, None, :]
    g -= -safe_log2(p_xy)[:, :, None] + safe_log2(p_y)[None, :, None]
    return g.ravel()


def run_scenario(cfg: ChannelConfig, workers: int = 1) -> ScenarioReport:
    """Run the full experiment described by ``cfg``.

    Trials are processed in fixed-size chunks on spawned substreams and
    recombined in chunk order, so the report depends only on the config
    (including its seed), not on the worker count.
    """
    rng = np.random.default_rng(cfg.seed)
    sizes = [TRIAL_CHUNK] * (cfg.trials // TRIAL_CHUNK)
    if cfg.trials % TRIAL_CHUNK:
        sizes.append(cfg.trials % TRIAL_CHUNK)
    children = rng.spawn(len(sizes))
    jobs = list(zip(children, sizes))
    if workers <= 1:
        parts = [_scenario_chunk(cfg, m, child) for child, m in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda jm: _scenario_chunk(cfg, jm[1], jm[0]), jobs))
    d2_xy = np.concatenate([p[0] for p in parts])
    d2_xz = np.concatenate([p[1] for p in parts])
    cell_counts = np.concatenate([p[2] for p in parts], axis=0)

    t = cfg.trials
    msd_xy = float(d2_xy.mean())
    msd_xz = float(d2_xz.mean())
    deltas = d2_xz - d2_xy
    dd = float(deltas.mean())
    se_dd = float(deltas.std(ddof=1) / math.sqrt(t)) if t > 1 else 0.0

    joint = BinaryJoint3(cell_counts.sum(axis=0).reshape(2, 2, 2))
    advantage = wyner_check(joint)

    # cluster (per-trial) delta-method standard error of the entropy advantage
    q_t = cell_counts / cfg.thetas_per_trial
    grad = _advantage_gradient(q_t.mean(axis=0))
    scores = q_t @ grad
    se_dh = float(scores.std(ddof=1) / math.sqrt(t)) if t > 1 else 0.0

    for label, msd in (("X-Y", msd_xy), ("X-Z", msd_xz)):
        if math.sqrt(msd) > cfg.epsilon:
            warnings.warn(
                f"mean {label} distance {math.sqrt(msd):.4g} exceeds epsilon={cfg.epsilon}; "
                "outside the locally increasing regime",
                stacklevel=2,
            )

    dh = advantage.ck_advantage
    d_tie = abs(dd) <= DEFAULT_Z_THRESHOLD * se_dd
    h_tie = abs(dh) <= DEFAULT_Z_THRESHOLD * se_dh
    if d_tie and h_tie:
        chain = "agree"
    elif d_tie != h_tie:
        chain = "indeterminate"
    else:
        chain = "agree" if (dd > 0.0) == (dh > 0.0) else "disagree"

    return ScenarioReport(
        mean_sq_dist_xy=msd_xy,
        mean_sq_dist_xz=msd_xz,
        sq_dist_diff=dd,
        sq_dist_diff_se=se_dd,
        ck_advantage_se=se_dh,
        joint=joint,
        advantage=advantage,
        chain_verdict=chain,
    )


def posterior_weights(
    observation,
    cfg: ChannelConfig,
    posterior_samples: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Prior sphere draws and their unnormalized log likelihoods given J.

    The observation model is J = X + sigma_e * standard normal, so the log
    weight of a prior point P is -||J - P||^2 / (2 sigma_e^2).  Points are
    drawn sequentially from ``rng``: the first k rows are identical for any
    larger sample count on the same stream state.
    """
    j = np.asarray(observation, dtype=float)
    if j.shape != (cfg.dimension,):
        raise ValueError(f"observation must have shape ({cfg.dimension},), got {j.shape}")
    if cfg.sigma_e <= 0.0:
        raise ValueError("conditional-mean estimation needs sigma_e > 0")
    if posterior_samples < 1:
        raise ValueError("posterior_samples must be >= 1")
    pts = sphere_point_batch(cfg.dimension, cfg.epsilon, posterior_samples, rng)
    logw = -np.sum((j - pts) ** 2, axis=1) / (2.0 * cfg.sigma_e**2)
    return pts, logw


def conditional_mean_estimator(
    observation,
    cfg: ChannelConfig,
    posterior_samples: int,
    rng: np.random.Generator,
    ess_min: float | None = None,
) -> np.ndarray:
    """Self-normalized importance-sampling approximation of E[X | J].

    Raises :class:`EffectiveSampleSizeError` when the weight mass collapses
    onto fewer than ``ess_min`` effective points (default: samples / 100).
    """
    pts, logw = posterior_weights(observation, cfg, posterior_samples, rng)
    w = np.exp(logw - logw.max())
    total = w.sum()
    ess = total * total / np.sum(w * w)
    threshold = posterior_samples / 100.0 if ess_min is None else ess_min
    if ess < threshold:
        raise EffectiveSampleSizeError(
            f"effective sample size {ess:.2f} below threshold {threshold:.2f}; "
            f"increase posterior_samples (got {posterior_samples})"
        )
    return (pts * w[:, None]).sum(axis=0) / total


@dataclass(frozen=True)
class OpponentStrategy:
    """A named estimation strategy mapping an observation to a guess of X.

    ``estimator`` is called as ``estimator(observation, rng)`` and must
    return an n-vector; deterministic strategies ignore the generator.
    """

    name: str
    estimator: Callable[[np.ndarray, np.random.Generator], np.ndarray]


def builtin_strategies(
    cfg: ChannelConfig,
    posterior_samples: int,
    ess_min: float | None = None,
) -> list[OpponentStrategy]:
    """The three reference strategies every comparison must include."""
    eps = cfg.epsilon

    def project(j, _rng):
        norm = np.linalg.norm(j)
        return j * (eps / norm) if norm > 0.0 else np.zeros_like(j)

    return [
        OpponentStrategy("raw-observation", lambda j, _rng: np.asarray(j, dtype=float)),
        OpponentStrategy("projected-observation", project),
        OpponentStrategy(
            "conditional-mean",
            lambda j, rng: conditional_mean_estimator(
                j, cfg, posterior_samples, rng, ess_min=ess_min
            ),
        ),
    ]


@dataclass(frozen=True)
class StrategyResult:
    name: str
    mean_sq_error: float
    std_error: float
    excess_vs_conditional_mean: float
    excess_se: float
    excess_z: float


@dataclass(frozen=True)
class InequalityReport:
    """Mean quadratic errors of opponent strategies vs the posterior mean.

    ``conditional_mean_attains_min`` records whether no strategy beat the
    conditional-mean estimator by more than the z-threshold in paired
    combined-standard-error units.
    """

    trials: int
    results: tuple[StrategyResult, ...]
    conditional_mean_attains_min: bool
    z_threshold: float


def inequality_I_check(
    cfg: ChannelConfig,
    strategies: tuple[OpponentStrategy, ...] | list[OpponentStrategy] = (),
    trials: int = 2000,
    posterior_samples: int = 8192,
    rng: np.random.Generator | None = None,
    ess_min: float | None = None,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
) -> InequalityReport:
    """Race estimation strategies on E||X - Z(J)||^2 over shared trials.

    All strategies see the same (X, J) draws; comparisons against the
    conditional-mean estimator use the paired per-trial error differences.
    Extra strategies are appended after the built-ins.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    all_strategies = builtin_strategies(cfg, posterior_samples, ess_min=ess_min) + list(strategies)
    names = [s.name for s in all_strategies]
    if len(set(names)) != len(names):
        raise ValueError(f"strategy names must be unique, got {names}")
    cm_index = names.index("conditional-mean")

    data_rng = rng.spawn(1)[0]
    x = sphere_point_batch(cfg.dimension, cfg.epsilon, trials, data_rng)
    obs = x + cfg.sigma_e * data_rng.standard_normal((trials, cfg.dimension))
    strategy_rngs = rng.spawn(len(all_strategies))

    errors = np.empty((len(all_strategies), trials))
    for s_idx, strat in enumerate(all_strategies):
        # one substream per (strategy, trial): no strategy's consumption can
        # perturb another's draws
        trial_rngs = strategy_rngs[s_idx].spawn(trials)
        for t_idx in range(trials):
            guess = np.asarray(
                strat.estimator(obs[t_idx], trial_rngs[t_idx]), dtype=float
            )
            if guess.shape != (cfg.dimension,):
                raise ValueError(
                    f"strategy {strat.name!r} returned shape {guess.shape}, "
                    f"expected ({cfg.dimension},)"
                )
            errors[s_idx, t_idx] = np.sum((x[t_idx] - guess) ** 2)

    results = []
    ok = True
    for s_idx, strat in enumerate(all_strategies):
        err = errors[s_idx]
        mean = float(err.mean())
        se = float(err.std(ddof=1) / math.sqrt(trials))
        diff = err - errors[cm_index]
        excess = float(diff.mean())
        excess_se = float(diff.std(ddof=1) / math.sqrt(trials))
        if s_idx == cm_index:
            z = 0.0
        elif excess_se == 0.0:
            z = 0.0 if excess == 0.0 else math.copysign(math.inf, excess)
        else:
            z = excess / excess_se
        if z < -z_threshold:
            ok = False
        results.append(
            StrategyResult(
                name=strat.name,
                mean_sq_error=mean,
                std_error=se,
                excess_vs_conditional_mean=excess,
                excess_se=excess_se,
                excess_z=z,
            )
        )
    return InequalityReport(
        trials=trials,
        results=tuple(results),
        conditional_mean_attains_min=ok,
        z_threshold=z_threshold,
    )
