"""Zero-count correlation measurements with multiplexed click detectors.

The displaced state is split over ``N`` channels with intensity ratios
``splits`` and every channel is watched by a click detector of efficiency
``eta``.  ``p(alpha, eta) = sum_n (1 - eta)^n d_n(alpha)`` is the zero-count
probability; the joint zero-count over all channels equals ``p(alpha, eta)``
because a lossless splitter conserves photon number.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CutoffError
from .phasespace import Estimate, _displaced, zero_count_points
from .states import DEFAULT_TAIL_TOL, FockState

MAX_TAIL_BUCKET = 1e-6
BATCH_SHOTS = 1 << 16


@dataclass(frozen=True)
class MultiplexConfig:
    """Detector efficiency and channel intensity ratios."""

    eta: float
    splits: tuple[float, ...]

    def __post_init__(self):
        splits = tuple(float(u) for u in self.splits)
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if len(splits) < 2:
            raise ValueError("need at least two channels")
        if any(not 0.0 < u < 1.0 for u in splits):
            raise ValueError(f"splitting ratios must lie in (0, 1), got {splits}")
        if abs(math.fsum(splits) - 1.0) > 1e-12:
            raise ValueError(f"splitting ratios must sum to 1, got {math.fsum(splits)}")
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "splits", splits)

    @classmethod
    def balanced(cls, eta: float, channels: int = 2) -> "MultiplexConfig":
        return cls(eta, (1.0 / channels,) * channels)

    @property
    def channels(self) -> int:
        return len(self.splits)


@dataclass(frozen=True)
class ClickEstimate:
    alpha: complex
    config: MultiplexConfig
    shots: int
    seed: int
    p_joint: float
    p_single: tuple[float, ...]
    covariance: float
    std_err_joint: float
    std_err: tuple[float, ...]
    std_err_cov: float

    def to_dict(self) -> dict:
        return {
            "alpha": [self.alpha.real, self.alpha.imag],
            "eta": self.config.eta,
            "splits": list(self.config.splits),
            "shots": self.shots,
            "seed": self.seed,
            "p_joint": self.p_joint,
            "p_single": list(self.p_single),
            "covariance": self.covariance,
            "std_err_joint": self.std_err_joint,
            "std_err": list(self.std_err),
            "std_err_cov": self.std_err_cov,
        }


def _zero_counts(state: FockState, alpha: complex, etas, tol: float):
    v, e = zero_count_points(state, np.array([complex(alpha)]), etas, tol=tol)
    return v[:, 0], e[:, 0]


def zero_count(state: FockState, alpha: complex, eta: float,
               tol: float = DEFAULT_TAIL_TOL) -> Estimate:
    """Probability that a detector of efficiency ``eta`` sees no photon of ``D(-alpha) rho D(-alpha)^dag``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    v, e = _zero_counts(state, alpha, [eta], tol)
    return Estimate(float(v[0]), float(e[0]))


def multi_zero_count_witness(state: FockState, alpha: complex, cfg: MultiplexConfig,
                             tol: float = DEFAULT_TAIL_TOL) -> Estimate:
    """``p_{1..N}(alpha, eta) - prod_i p_i(alpha, eta u_i)``, non-negative for classical light."""
    etas = [cfg.eta] + [cfg.eta * u for u in cfg.splits]
    v, e = _zero_counts(state, alpha, etas, tol)
    prod = float(np.prod(v[1:]))
    upper = float(np.prod(np.abs(v[1:]) + e[1:]))
    return Estimate(float(v[0]) - prod, float(e[0]) + upper - abs(prod))


def covariance_exact(state: FockState, alpha: complex, eta: float, t2: float,
                     tol: float = DEFAULT_TAIL_TOL) -> Estimate:
    """Zero-count covariance ``p_12 - p_1 p_2`` behind a beam splitter with transmissivity ``t2``."""
    return multi_zero_count_witness(state, alpha, MultiplexConfig(eta, (1.0 - t2, t2)), tol)


def _rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, batch])))


def _run_batch(cdf, tail_index, cfg, seed, batch, size, record):
    rng = _rng(seed, batch)
    n = np.searchsorted(cdf, rng.random(size), side="right")
    tail = n >= tail_index
    n = np.where(tail, 0, n)
    remaining = rng.binomial(n, cfg.eta)
    zero = np.empty((cfg.channels, size), dtype=bool)
    rest = 1.0
    for i, u in enumerate(cfg.splits[:-1]):
        c = rng.binomial(remaining, min(u / rest, 1.0))
        zero[i] = c == 0
        remaining = remaining - c
        rest -= u
    zero[-1] = remaining == 0
    # truncation tail: assume every channel clicks
    zero[:, tail] = False
    z = zero.astype(np.int64)
    pair = z @ z.T
    joint = int(np.all(zero, axis=0).sum())
    log = None
    if record:
        bits = (~zero).astype(np.int64)
        mask = (bits << np.arange(cfg.channels)[:, None]).sum(axis=0)
        log = (np.where(tail, -1, n), mask)
    return joint, pair, log


def simulate_clicks(state: FockState, alpha: complex, cfg: MultiplexConfig, shots: int,
                    seed: int, *, threads: int | None = None, record: bool = False):
    """Monte Carlo estimate of the zero-count statistics.

    Per shot a photon number is drawn from the displaced distribution (plus a
    bucket for the truncated tail, which clicks in every channel), each photon
    survives detection with probability ``eta`` and is routed to a channel by
    the splitting ratios.  Shots are generated in fixed batches of
    ``BATCH_SHOTS``; batch ``b`` draws from a Philox stream keyed by
    ``(seed, b)``, so results do not depend on ``threads``.

    Returns the :class:`ClickEstimate`, or ``(estimate, (n_sampled, clicks_bitmask))``
    when ``record`` is set (``n_sampled = -1`` marks the tail bucket).
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    alpha = complex(alpha)
    disp = _displaced(state, np.array([alpha]), MAX_TAIL_BUCKET)
    d = np.clip(disp.d[0], 0.0, None)
    tail = max(0.0, 1.0 - d.sum())
    if tail > MAX_TAIL_BUCKET:
        raise CutoffError(f"truncated tail {tail:.2e} exceeds {MAX_TAIL_BUCKET:.0e}")
    cdf = np.cumsum(np.append(d, tail))
    cdf /= cdf[-1]
    cdf = cdf[:-1]

    sizes = [min(BATCH_SHOTS, shots - b * BATCH_SHOTS)
             for b in range(-(-shots // BATCH_SHOTS))]
    args = [(cdf, d.size, cfg, seed, b, sz, record) for b, sz in enumerate(sizes)]
    if threads and threads > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda a: _run_batch(*a), args))
    else:
        parts = [_run_batch(*a) for a in args]

    joint = sum(p[0] for p in parts)
    pair = sum(p[1] for p in parts)
    est = _estimate(alpha, cfg, shots, seed, joint, pair)
    if record:
        n = np.concatenate([p[2][0] for p in parts])
        mask = np.concatenate([p[2][1] for p in parts])
        return est, (n, mask)
    return est


def _estimate(alpha, cfg, shots, seed, joint, pair) -> ClickEstimate:
    p_joint = joint / shots
    p_pair = pair / shots
    p = np.diag(p_pair).copy()
    prod = float(np.prod(p))
    # delta method on psi = Z_all - sum_i w_i Z_i, w_i = prod_{j != i} p_j
    w = np.array([np.prod(np.delete(p, i)) for i in range(p.size)])
    second = p_joint - 2.0 * p_joint * w.sum() + w @ p_pair @ w
    mean = p_joint - w @ p
    var_cov = max(second - mean**2, 0.0)
    return ClickEstimate(
        alpha=alpha,
        config=cfg,
        shots=shots,
        seed=seed,
        p_joint=p_joint,
        p_single=tuple(float(x) for x in p),
        covariance=p_joint - prod,
        std_err_joint=math.sqrt(p_joint * (1 - p_joint) / shots),
        std_err=tuple(float(math.sqrt(x * (1 - x) / shots)) for x in p),
        std_err_cov=math.sqrt(var_cov / shots),
    )
