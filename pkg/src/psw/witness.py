"""Classicality inequalities between phase-space distributions of different order.

For any state with a non-negative P function and every ``k`` in ``(0, 1)``::

    P(alpha; s) - pi / ((1 - k) k eta_s) * P(alpha; s_k) P(alpha; s_{1-k}) >= 0,

with ``eta_s = 2 / (1 - s)`` and ``s_k = 1 - (1 - s) / k``.  The N-factor
version replaces the product by ``(pi / eta_s)^(N-1) prod_i P(alpha; s_{k_i}) / k_i``
with ``sum_i k_i = 1``.  ``s = 0, k = 1/2`` gives ``W - 2 pi Q^2 >= 0``.
A value below ``-err_bound`` certifies nonclassicality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .phasespace import PhaseGrid, SLike, SParam, State, as_sparam, evaluate_points
from .states import DEFAULT_TAIL_TOL


@dataclass(frozen=True)
class WitnessSpec:
    """Ordering ``s`` and kernel split fractions ``k_vec`` (summing to one)."""

    s: SParam
    k_vec: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "s", as_sparam(self.s))
        k_vec = tuple(float(k) for k in self.k_vec)
        if len(k_vec) < 2:
            raise ValueError("need at least two split fractions")
        if any(not 0.0 < k < 1.0 for k in k_vec):
            raise ValueError(f"split fractions must lie in (0, 1), got {k_vec}")
        if abs(math.fsum(k_vec) - 1.0) > 1e-12:
            raise ValueError(f"split fractions must sum to 1, got {math.fsum(k_vec)}")
        object.__setattr__(self, "k_vec", k_vec)

    @classmethod
    def two(cls, s: SLike, k: float) -> "WitnessSpec":
        if not 0.0 < k < 1.0:
            raise ValueError(f"split fraction must lie in (0, 1), got {k}")
        return cls(as_sparam(s), (k, 1.0 - k))

    @classmethod
    def multi(cls, s: SLike, k_vec: Sequence[float]) -> "WitnessSpec":
        return cls(as_sparam(s), tuple(k_vec))

    @property
    def k(self) -> float:
        """First split fraction (the ``k`` of the two-factor form)."""
        return self.k_vec[0]

    @property
    def orders(self) -> list[SParam]:
        return [self.s] + [self.s.split(k) for k in self.k_vec]

    def to_dict(self) -> dict:
        if len(self.k_vec) == 2:
            return {"s": self.s.s, "k": self.k}
        return {"s": self.s.s, "k_vec": list(self.k_vec)}


@dataclass(frozen=True)
class WitnessResult:
    value: float
    err_bound: float
    alpha: complex
    spec: WitnessSpec

    @property
    def violated(self) -> bool:
        return self.value < -self.err_bound

    def to_dict(self) -> dict:
        out = {"alpha_re": self.alpha.real, "alpha_im": self.alpha.imag}
        out.update(self.spec.to_dict())
        out.update(value=self.value, err_bound=self.err_bound, violated=self.violated)
        return out


@dataclass(frozen=True, eq=False)
class WitnessField:
    """Left-hand side sampled on a grid; arrays indexed ``[i_im, i_re]``."""

    grid: PhaseGrid
    spec: WitnessSpec
    values: np.ndarray
    errs: np.ndarray = field(repr=False)

    @property
    def err_bound(self) -> float:
        return float(self.errs.max())

    def argmin(self) -> complex:
        return complex(self.grid.points().flat[int(np.argmin(self.values))])

    def min_result(self) -> WitnessResult:
        i = int(np.argmin(self.values))
        alpha = complex(self.grid.points().flat[i])
        return WitnessResult(float(self.values.flat[i]), float(self.errs.flat[i]), alpha, self.spec)

    def rows(self) -> Iterable[tuple[float, float, float]]:
        pts = self.grid.points()
        for a, v in zip(pts.ravel(), self.values.ravel()):
            yield a.real, a.imag, float(v)


def _combine(spec: WitnessSpec, vals: Sequence[np.ndarray], errs: Sequence[np.ndarray]):
    """Left-hand side and first-order error from ``P(s)`` and the ``P(s_{k_i})``."""
    eta = spec.s.eta
    k_vec = spec.k_vec
    if len(k_vec) == 2:
        k = k_vec[0]
        coef = math.pi / ((1.0 - k) * k * eta)
    else:
        coef = (math.pi / eta) ** (len(k_vec) - 1) / math.prod(k_vec)
    factors = vals[1:]
    product = np.prod(factors, axis=0)
    value = vals[0] - coef * product
    # |d prod| <= prod(|f| + e) - prod(|f|)
    upper = np.prod([np.abs(f) + e for f, e in zip(factors, errs[1:])], axis=0)
    err = errs[0] + coef * (upper - np.abs(product))
    return value, err


def witness_values(state: State, alphas, spec: WitnessSpec, *, tol: float = DEFAULT_TAIL_TOL,
                   threads: int | None = None):
    """Vectorized left-hand side; returns ``(values, errs)`` shaped like ``alphas``."""
    vals, errs = evaluate_points(state, alphas, spec.orders, tol=tol, threads=threads)
    return _combine(spec, list(vals), list(errs))


def _result(state, alpha, spec, tol) -> WitnessResult:
    alpha = complex(alpha)
    v, e = witness_values(state, np.array([alpha]), spec, tol=tol)
    return WitnessResult(float(v[0]), float(e[0]), alpha, spec)


def witness_two(state: State, alpha: complex, spec: WitnessSpec,
                tol: float = DEFAULT_TAIL_TOL) -> WitnessResult:
    """Two-factor inequality at a single point."""
    if len(spec.k_vec) != 2:
        raise ValueError("witness_two needs a two-factor spec")
    return _result(state, alpha, spec, tol)


def witness_wq(state: State, alpha: complex, tol: float = DEFAULT_TAIL_TOL) -> WitnessResult:
    """``W(alpha) - 2 pi Q(alpha)^2``."""
    return witness_two(state, alpha, WQ_SPEC, tol)


def witness_multi(state: State, alpha: complex, spec: WitnessSpec,
                  tol: float = DEFAULT_TAIL_TOL) -> WitnessResult:
    """N-factor inequality at a single point."""
    return _result(state, alpha, spec, tol)


WQ_SPEC = WitnessSpec.two(0.0, 0.5)


def witness_field(state: State, grid: PhaseGrid, spec: WitnessSpec = WQ_SPEC, *,
                  tol: float = DEFAULT_TAIL_TOL, threads: int | None = None) -> WitnessField:
    values, errs = witness_values(state, grid.points(), spec, tol=tol, threads=threads)
    return WitnessField(grid, spec, values, errs)


def find_violation(state: State, grid: PhaseGrid, s_list: Sequence[SLike],
                   k_list: Sequence[float], *, refine: bool = True,
                   tol: float = DEFAULT_TAIL_TOL, threads: int | None = None) -> WitnessResult:
    """Smallest two-factor left-hand side over ``grid x s_list x k_list``.

    Ties go to the first entry in (s index, k index, row-major grid) order.
    With ``refine`` the best point is re-examined on a half-step 5x5 patch
    around it.  Whether the result is a violation is read off ``.violated``.
    """
    if not s_list or not k_list:
        raise ValueError("s_list and k_list must be nonempty")
    specs = [WitnessSpec.two(s, k) for s in s_list for k in k_list]
    pts = grid.points()
    # evaluate every distinct ordering once and share it between specs
    orders = sorted({o.s for sp in specs for o in sp.orders})
    vals, errs = evaluate_points(state, pts, orders, tol=tol, threads=threads)
    lookup = {s: i for i, s in enumerate(orders)}

    best = None
    for sp in specs:
        idx = [lookup[o.s] for o in sp.orders]
        v, e = _combine(sp, [vals[i] for i in idx], [errs[i] for i in idx])
        i = int(np.argmin(v))
        if best is None or v.flat[i] < best.value:
            best = WitnessResult(float(v.flat[i]), float(e.flat[i]), complex(pts.flat[i]), sp)

    if refine and grid.size > 1:
        h_re = (grid.re_max - grid.re_min) / max(grid.n_re - 1, 1)
        h_im = (grid.im_max - grid.im_min) / max(grid.n_im - 1, 1)
        a = best.alpha
        patch = PhaseGrid(a.real - h_re, a.real + h_re, a.imag - h_im, a.imag + h_im,
                          5 if h_re > 0 else 1, 5 if h_im > 0 else 1)
        local = witness_field(state, patch, best.spec, tol=tol).min_result()
        if local.value < best.value:
            best = local
    return best
