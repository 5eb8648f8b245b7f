"""s-parametrized phase-space distributions.

For a state ``rho`` the distribution at ordering ``s < 1`` is

    P(alpha; s) = (eta / pi) * sum_n (1 - eta)^n d_n(alpha),   eta = 2 / (1 - s),

where ``d_n(alpha) = <n| D(alpha)^dag rho D(alpha) |n>`` is the photon-number
distribution of the state displaced by ``-alpha``.  The sum
``p(alpha, eta) = sum_n (1 - eta)^n d_n`` is the zero-count probability of a
detector with efficiency ``eta`` and is shared with :mod:`psw.clicksim`.

Convention: ``alpha = x + i p`` with the vacuum Wigner function
``(2 / pi) exp(-2 |alpha|^2)``; distributions integrate to one over ``dx dp``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import CutoffError, PreconditionError
from .states import DEFAULT_TAIL_TOL, FockState, GaussianSpec

S_MAX = 0.7
S_ILL_CONDITIONED = 0.5
N_OUT_LIMIT = 4000
EIG_DROP = 1e-14
_EPS = np.finfo(float).eps


class IllConditionedWarning(RuntimeWarning):
    """The alternating series for s > 0 loses accuracy quickly."""


@dataclass(frozen=True)
class SParam:
    """Ordering parameter ``s < 1`` (1: P, 0: Wigner, -1: Husimi)."""

    s: float

    def __post_init__(self):
        s = float(self.s)
        if not s < 1.0 or not math.isfinite(s):
            raise ValueError(f"ordering parameter must satisfy s < 1, got {s}")
        object.__setattr__(self, "s", s)

    @property
    def eta(self) -> float:
        return 2.0 / (1.0 - self.s)

    def split(self, k: float) -> "SParam":
        """Ordering ``s_k = 1 - (1 - s) / k`` of one factor in the split kernel."""
        if not 0.0 < k < 1.0:
            raise ValueError(f"split fraction must lie in (0, 1), got {k}")
        return SParam(1.0 - (1.0 - self.s) / k)

    @classmethod
    def from_eta(cls, eta: float) -> "SParam":
        return cls(1.0 - 2.0 / eta)


SLike = Union[SParam, float]
State = Union[FockState, GaussianSpec]


def as_sparam(s: SLike) -> SParam:
    return s if isinstance(s, SParam) else SParam(s)


class Estimate(NamedTuple):
    value: float
    err_bound: float


@dataclass(frozen=True)
class PhaseGrid:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int
    n_im: int

    def __post_init__(self):
        bounds = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(b) for b in bounds):
            raise ValueError("grid bounds must be finite")
        if self.n_re < 1 or self.n_im < 1:
            raise ValueError("grid needs at least one point per axis")
        if self.re_max < self.re_min or self.im_max < self.im_min:
            raise ValueError("grid bounds are reversed")

    @classmethod
    def square(cls, half_width: float, n: int, center: complex = 0.0) -> "PhaseGrid":
        c = complex(center)
        return cls(c.real - half_width, c.real + half_width,
                   c.imag - half_width, c.imag + half_width, n, n)

    @classmethod
    def point(cls, alpha: complex) -> "PhaseGrid":
        a = complex(alpha)
        return cls(a.real, a.real, a.imag, a.imag, 1, 1)

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_re)

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_im)

    @property
    def cell_area(self) -> float:
        d_re = (self.re_max - self.re_min) / (self.n_re - 1) if self.n_re > 1 else 1.0
        d_im = (self.im_max - self.im_min) / (self.n_im - 1) if self.n_im > 1 else 1.0
        return d_re * d_im

    @property
    def size(self) -> int:
        return self.n_re * self.n_im

    def points(self) -> np.ndarray:
        """Complex amplitudes of shape ``(n_im, n_re)``; row-major order runs along Re."""
        re, im = np.meshgrid(self.re_axis, self.im_axis)
        return re + 1j * im

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("re_min", "re_max", "im_min", "im_max", "n_re", "n_im")}


@dataclass(frozen=True, eq=False)
class DistributionField:
    """Distribution sampled on a grid; ``values[i_im, i_re]``."""

    grid: PhaseGrid
    s: SParam
    values: np.ndarray
    err_bound: float

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell_area)

    def argmin(self) -> complex:
        return complex(self.grid.points().flat[int(np.argmin(self.values))])

    def rows(self) -> Iterable[tuple[float, float, float]]:
        pts = self.grid.points()
        for a, v in zip(pts.ravel(), self.values.ravel()):
            yield a.real, a.imag, float(v)

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "s": self.s.s,
                "values": self.values.tolist(), "err_bound": self.err_bound}


# -- displaced Fock matrix elements -------------------------------------------------

def _laguerre_log_table(x: np.ndarray, j_max: int, k_max: int):
    """``log|L_j^{(k)}(x)|`` and sign for ``j <= j_max``, ``k <= k_max``.

    Three-term recurrence in the degree ``j``, vectorized over ``x`` and the
    order ``k``, with a running log-scale so large degrees never overflow.
    Returns two arrays of shape ``(len(x), j_max + 1, k_max + 1)``.
    """
    x = x[:, None]
    k = np.arange(k_max + 1, dtype=float)[None, :]
    shape = (x.shape[0], j_max + 1, k_max + 1)
    log_abs = np.empty(shape)
    sign = np.empty(shape)
    prev = np.zeros((x.shape[0], k_max + 1))
    cur = np.ones_like(prev)
    log_scale = np.zeros_like(prev)
    with np.errstate(divide="ignore"):
        for j in range(j_max + 1):
            log_abs[:, j] = np.log(np.abs(cur)) + log_scale
            sign[:, j] = np.sign(cur)
            if j == j_max:
                break
            nxt = ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
            prev, cur = cur, nxt
            big = np.maximum(np.abs(prev), np.abs(cur))
            rescale = big > 1e150
            if np.any(rescale):
                f = np.where(rescale, big, 1.0)
                prev = prev / f
                cur = cur / f
                log_scale = log_scale + np.log(f)
    return log_abs, sign


def displacement_matrix(alpha, rows: int, cols: int) -> np.ndarray:
    """Matrix elements ``<m| D(alpha) |n>`` for ``m < rows``, ``n < cols``.

    ``alpha`` may be a scalar or an array; array input yields a leading batch
    axis.  Elements are exact (no truncation of the displacement operator)::

        m >= n:  sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2} L_n^(m-n)(|alpha|^2)
        m <  n:  sqrt(m!/n!) (-alpha*)^(n-m) e^{-|alpha|^2/2} L_m^(n-m)(|alpha|^2)
    """
    alpha = np.asarray(alpha, dtype=complex)
    scalar = alpha.ndim == 0
    alpha = alpha.reshape(-1)
    r = np.abs(alpha)
    x = r**2
    j_max = min(rows, cols) - 1
    k_max = max(rows, cols) - 1
    log_l, sign_l = _laguerre_log_table(x, j_max, k_max)

    j = np.arange(j_max + 1)[:, None]
    k = np.arange(k_max + 1)[None, :]
    log_pref = 0.5 * (gammaln(j + 1) - gammaln(j + k + 1))
    log_mag = (log_pref[None] + xlogy(k[None], r[:, None, None])
               - 0.5 * x[:, None, None] + log_l)
    # fold the phase into the small (j, k) table, then gather once
    unit = np.exp(1j * np.angle(alpha))[:, None, None]
    upper = sign_l * np.exp(log_mag) * unit ** k[None]   # m >= n
    lower = np.conj(upper) * (-1.0) ** k[None]           # m < n
    table = np.concatenate([upper, lower], axis=1).reshape(alpha.size, -1)

    m = np.arange(rows)[:, None]
    n = np.arange(cols)[None, :]
    flat = (np.minimum(m, n) + (m < n) * (j_max + 1)) * (k_max + 1) + np.abs(m - n)
    out = table[:, flat]
    return out[0] if scalar else out


# -- displaced photon-number distribution -------------------------------------------

TRIM_MASS = 1e-26


@lru_cache(maxsize=32)
def _factor(state: FockState):
    """Factorization of ``rho`` used by the displaced-distribution kernel.

    Fock levels whose total diagonal mass is below ``TRIM_MASS`` are cut off
    first; the trace-norm change (at most ``2 sqrt(mass) + mass``) is returned
    with the mass of discarded eigenvalues as ``dropped``.
    """
    p = state.diag
    tail = np.cumsum(np.abs(p[::-1]))[::-1]  # tail[m] = mass on levels >= m
    dim = int(np.searchsorted(-tail, -TRIM_MASS, side="right"))
    dim = max(dim, 1)
    trimmed = float(tail[dim]) if dim < state.dim else 0.0
    dropped = 2.0 * math.sqrt(trimmed) + trimmed
    rho = state.elements[:dim, :dim]
    off = rho - np.diag(rho.diagonal())
    if not np.any(off):
        return "diag", rho.diagonal().real.copy(), None, dropped
    lam, vec = np.linalg.eigh(rho)
    keep = np.abs(lam) > EIG_DROP * np.abs(lam).max()
    dropped += float(np.abs(lam[~keep]).sum())
    return "eig", lam[keep], vec[:, keep], dropped


@lru_cache(maxsize=32)
def _mean_n(state: FockState) -> float:
    p = state.diag
    return float(np.dot(np.arange(p.size), p))


def _support(state: FockState) -> int:
    kind, lam, vec, _ = _factor(state)
    return lam.size if kind == "diag" else vec.shape[0]


def default_n_out(state: FockState, alpha_abs: float, growth: float = 1.0) -> int:
    """First guess for the output Fock range of ``D(-alpha) rho D(-alpha)^dag``.

    Based on the mean photon number; :func:`_displaced` doubles it when the
    guess leaves too much probability behind.  ``growth > 1`` widens the range
    for series whose weights grow geometrically.
    """
    mean_n = _mean_n(state)
    mu = growth * (alpha_abs + math.sqrt(mean_n + 1.0)) ** 2
    return max(math.ceil(mu + 10.0 * math.sqrt(mu) + 30.0), min(_support(state), 64))


class _Displaced(NamedTuple):
    d: np.ndarray          # (batch, n_out) displaced photon-number distribution
    scale: np.ndarray      # (batch, n_out) magnitude before cancellation, for rounding
    shortfall: np.ndarray  # (batch,) probability beyond n_out - 1
    dropped: float         # trace-norm of the discarded part of rho


def _displaced_once(state: FockState, alphas: np.ndarray, n_out: int) -> _Displaced:
    kind, lam, vec, dropped = _factor(state)
    dim = lam.size if kind == "diag" else vec.shape[0]
    dmat = displacement_matrix(alphas, dim, n_out)
    if kind == "diag":
        d = np.einsum("m,bmn->bn", lam, np.abs(dmat) ** 2)
        scale = np.einsum("m,bmn->bn", np.abs(lam), np.abs(dmat) ** 2)
    else:
        amp = np.einsum("mj,bmn->bjn", vec.conj(), dmat)
        d = np.einsum("j,bjn->bn", lam, np.abs(amp) ** 2)
        amp_abs = np.einsum("mj,bmn->bjn", np.abs(vec), np.abs(dmat))
        scale = dim * np.einsum("j,bjn->bn", np.abs(lam), amp_abs**2)
    return _Displaced(d, scale, 1.0 - d.sum(axis=-1), dropped)


def _displaced(state: FockState, alphas: np.ndarray, tol: float, growth: float = 1.0,
               n_out: int | None = None) -> _Displaced:
    """Displaced distributions for a batch, widening the output range as needed."""
    fixed = n_out is not None
    if n_out is None:
        n_out = default_n_out(state, float(np.abs(alphas).max()), growth)
    while True:
        if n_out > N_OUT_LIMIT:
            raise CutoffError(f"|alpha| up to {np.abs(alphas).max():.3g} needs more than "
                              f"{N_OUT_LIMIT} Fock levels")
        out = _displaced_once(state, alphas, n_out)
        bad = out.shortfall > tol
        if not np.any(bad):
            return out
        if fixed:
            i = int(np.argmax(bad))
            raise CutoffError(f"displaced distribution at alpha={alphas[i]} misses "
                              f"{out.shortfall[i]:.2e} beyond n={n_out - 1}")
        n_out = 2 * n_out


def displaced_diag(state: FockState, alpha: complex, tol: float = DEFAULT_TAIL_TOL,
                   n_out: int | None = None) -> np.ndarray:
    """Photon-number distribution ``d_n = <n|D(alpha)^dag rho D(alpha)|n>``.

    The output range extends past the state's cutoff until the missing
    probability ``1 - sum(d)`` is below ``tol``.  :class:`CutoffError` is raised
    when that needs more than ``N_OUT_LIMIT`` levels, or when an explicit
    ``n_out`` is too small.
    """
    return _displaced(state, np.array([complex(alpha)]), tol, n_out=n_out).d[0]


# -- series evaluation --------------------------------------------------------------

def _check_eta(eta: float) -> None:
    if not (eta > 0 and math.isfinite(eta)):
        raise PreconditionError(f"efficiency eta must be positive, got {eta}")
    s = 1.0 - 2.0 / eta
    if s > S_MAX:
        raise PreconditionError(
            f"s = {s:.3g} exceeds s_max = {S_MAX}: the Fock series is too ill-conditioned")


def _weighted(x: np.ndarray, base: float) -> np.ndarray:
    n = np.arange(x.shape[-1])
    if abs(base) <= 1.0:
        return x * np.power(base, n)
    # weights overflow long before the displaced distribution underflows
    with np.errstate(divide="ignore"):
        log_terms = np.log(np.abs(x)) + n * math.log(abs(base))
    return np.sign(x) * np.where(n % 2 == 1, np.sign(base), 1.0) * np.exp(log_terms)


def _series(disp: _Displaced, eta: float):
    """``sum_n (1-eta)^n d_n`` over the batch, with an error bound per point."""
    base = 1.0 - eta
    n_out = disp.d.shape[-1]
    value = _weighted(disp.d, base).sum(axis=-1)
    rounding = 16 * _EPS * n_out * np.abs(_weighted(disp.scale, base)).sum(axis=-1)
    if abs(base) <= 1.0:
        tail = abs(base) ** n_out * np.clip(disp.shortfall, 0.0, None)
        return value, tail + disp.dropped + rounding
    # growing weights: no rigorous bound, estimate from the last computed terms
    terms = np.abs(_weighted(disp.d, base))
    tail = 10 * terms[..., -3:].max(axis=-1)
    mean_weight = terms.sum(axis=-1) / np.maximum(disp.d.sum(axis=-1), 0.5)
    return value, tail + disp.dropped * mean_weight + rounding


def _chunks(n: int, size: int):
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def zero_count_points(state: FockState, alphas, etas: Sequence[float], *,
                      tol: float = DEFAULT_TAIL_TOL, threads: int | None = None,
                      chunk: int = 128):
    """Normal-ordered ``<:exp(-eta n(alpha)):>`` for many points and efficiencies.

    Returns ``(values, errs)`` with shape ``(len(etas),) + alphas.shape``.  The
    displaced distributions are computed once per point and reused for every
    ``eta``.  Chunks are independent, so ``threads`` never changes the result.
    """
    alphas = np.asarray(alphas, dtype=complex)
    flat = alphas.reshape(-1)
    etas = [float(e) for e in etas]
    for e in etas:
        _check_eta(e)
    growth = max(1.0, max(abs(1.0 - e) for e in etas))
    if max(1.0 - 2.0 / e for e in etas) > S_ILL_CONDITIONED:
        warnings.warn("evaluating at s > 0.5; expect large error bounds", IllConditionedWarning,
                      stacklevel=2)

    def work(span):
        disp = _displaced(state, flat[span[0]:span[1]], tol, growth)
        out = [_series(disp, e) for e in etas]
        return np.array([o[0] for o in out]), np.array([o[1] for o in out])

    # sorting by |alpha| keeps the output range of each chunk tight
    order = np.argsort(np.abs(flat), kind="stable")
    flat = flat[order]
    spans = _chunks(flat.size, chunk)
    if threads and threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, spans))
    else:
        parts = [work(sp) for sp in spans]
    values = np.empty((len(etas), flat.size))
    errs = np.empty_like(values)
    values[:, order] = np.concatenate([p[0] for p in parts], axis=1)
    errs[:, order] = np.concatenate([p[1] for p in parts], axis=1)
    shape = (len(etas),) + alphas.shape
    return values.reshape(shape), errs.reshape(shape)


def _gaussian_points(spec: GaussianSpec, alphas: np.ndarray, s: SParam) -> np.ndarray:
    sigma = spec.cov - (s.s / 4.0) * np.eye(2)
    if np.linalg.eigvalsh(sigma)[0] <= 0:
        raise PreconditionError(
            f"ordering s = {s.s:.3g} is too sharp for this Gaussian state (cov - s/4 not positive)")
    inv = np.linalg.inv(sigma)
    dx = alphas.real - spec.mean.real
    dp = alphas.imag - spec.mean.imag
    quad = inv[0, 0] * dx**2 + 2 * inv[0, 1] * dx * dp + inv[1, 1] * dp**2
    return np.exp(-0.5 * quad) / (2 * np.pi * math.sqrt(np.linalg.det(sigma)))


def evaluate_points(state: State, alphas, s_values: Sequence[SLike], *,
                    tol: float = DEFAULT_TAIL_TOL, threads: int | None = None):
    """``P(alpha; s)`` for every ``s`` in ``s_values`` and every point.

    Returns ``(values, errs)`` shaped ``(len(s_values),) + alphas.shape``.
    """
    alphas = np.asarray(alphas, dtype=complex)
    params = [as_sparam(s) for s in s_values]
    if isinstance(state, GaussianSpec):
        vals = np.array([_gaussian_points(state, alphas, p) for p in params])
        return vals, 16 * _EPS * np.abs(vals)
    p, err = zero_count_points(state, alphas, [q.eta for q in params], tol=tol, threads=threads)
    scale = np.array([q.eta / np.pi for q in params]).reshape((-1,) + (1,) * alphas.ndim)
    return scale * p, scale * err


def eval_s(state: FockState, alpha: complex, s: SLike, tol: float = DEFAULT_TAIL_TOL) -> Estimate:
    """``P(alpha; s)`` of a Fock-basis state with its series error bound."""
    v, e = evaluate_points(state, np.array([complex(alpha)]), [s], tol=tol)
    return Estimate(float(v[0, 0]), float(e[0, 0]))


def eval_s_gaussian(spec: GaussianSpec, alpha: complex, s: SLike) -> float:
    """Closed-form ``P(alpha; s)`` of a Gaussian state."""
    return float(_gaussian_points(spec, np.asarray(complex(alpha)), as_sparam(s)))


def wigner(state: State, alpha: complex) -> float:
    if isinstance(state, GaussianSpec):
        return eval_s_gaussian(state, alpha, 0.0)
    return eval_s(state, alpha, 0.0).value


def husimi(state: State, alpha: complex) -> float:
    if isinstance(state, GaussianSpec):
        return eval_s_gaussian(state, alpha, -1.0)
    return eval_s(state, alpha, -1.0).value


def scan_many(state: State, grid: PhaseGrid, s_values: Sequence[SLike], *,
              tol: float = DEFAULT_TAIL_TOL, threads: int | None = None) -> list[DistributionField]:
    """Fields for several orderings, sharing the displaced distributions."""
    params = [as_sparam(s) for s in s_values]
    pts = grid.points()
    try:
        vals, errs = evaluate_points(state, pts, params, tol=tol, threads=threads)
    except (CutoffError, PreconditionError) as exc:
        raise type(exc)(f"{exc} (grid re [{grid.re_min}, {grid.re_max}], "
                        f"im [{grid.im_min}, {grid.im_max}])") from exc
    return [DistributionField(grid, p, v, float(e.max())) for p, v, e in zip(params, vals, errs)]


def scan(state: State, grid: PhaseGrid, s: SLike, *, tol: float = DEFAULT_TAIL_TOL,
         threads: int | None = None) -> DistributionField:
    return scan_many(state, grid, [s], tol=tol, threads=threads)[0]
