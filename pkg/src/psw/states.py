"""Single-mode bosonic states in a truncated Fock basis.

Every constructor returns a :class:`FockState`: a Hermitian, unit-trace density
matrix together with the probability mass that was discarded by the
truncation.  Coefficients are accumulated in log space via ``gammaln`` so that
cutoffs of a few hundred photons do not overflow.

Gaussian states additionally have a closed-form description,
:class:`GaussianSpec`, used as a fast path for phase-space evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, pdtrc, xlogy

from .errors import CutoffError

DEFAULT_TAIL_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-12

# Smallest (even) cutoff keeping the squeezed-vacuum tail below 1e-10.
SQUEEZED_CUTOFF_GUIDE = {0.3: 16, 0.5: 26, 1.0: 76, 1.5: 210, 2.0: 570, 2.5: 1552}


def _hermitize(rho: np.ndarray) -> np.ndarray:
    # (x + conj(y)) / 2 is bitwise symmetric under transposition + conjugation
    return 0.5 * (rho + rho.conj().T)


@dataclass(frozen=True, eq=False)
class FockState:
    """Truncated Fock-basis density matrix.

    Attributes:
        elements: complex ``(cutoff + 1, cutoff + 1)`` matrix, read-only.
        tail_mass: probability discarded beyond the cutoff before the matrix
            was renormalized to unit trace.
    """

    elements: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
            raise ValueError(f"density matrix must be square, got shape {rho.shape}")
        rho = _hermitize(rho)
        trace = np.trace(rho).real
        if trace <= 0:
            raise ValueError("density matrix has non-positive trace")
        if abs(trace - 1.0) > TRACE_TOL:
            rho = rho / trace
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @property
    def cutoff(self) -> int:
        return self.elements.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def diag(self) -> np.ndarray:
        return self.elements.diagonal().real.copy()

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.elements)[0])

    def check(self, psd_tol: float = PSD_TOL) -> None:
        """Raise ``AssertionError`` if any state invariant is violated."""
        rho = self.elements
        assert np.array_equal(rho, rho.conj().T), "not Hermitian"
        assert abs(np.trace(rho).real - 1.0) <= TRACE_TOL, "trace is not 1"
        assert self.min_eigenvalue() >= -psd_tol, "not positive semidefinite"

    def padded(self, cutoff: int) -> "FockState":
        """Embed the state into a larger Fock space."""
        if cutoff < self.cutoff:
            raise ValueError("padded() cannot shrink a state")
        rho = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        rho[: self.dim, : self.dim] = self.elements
        return FockState(rho, self.tail_mass)

    def to_dict(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "re": self.elements.real.tolist(),
            "im": self.elements.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FockState":
        rho = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        if rho.shape != (data["cutoff"] + 1,) * 2:
            raise ValueError("cutoff does not match matrix shape")
        return cls(rho, data.get("tail_mass", 0.0))


@dataclass(frozen=True)
class PhotonStats:
    mean_n: float
    var_n: float
    mandel_q: float  # nan when mean_n == 0

    @property
    def mandel_defined(self) -> bool:
        return not np.isnan(self.mandel_q)


def _check_tail(tail: float, tol: float, what: str, cutoff: int) -> float:
    tail = max(float(tail), 0.0)
    if tail > tol:
        raise CutoffError(
            f"{what}: discarded mass {tail:.3e} beyond cutoff {cutoff} exceeds tolerance {tol:.1e}"
        )
    return tail


def _pure(amplitudes: np.ndarray, tail: float) -> FockState:
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    return FockState(np.outer(amplitudes, amplitudes.conj()), tail)


def _diagonal(probs: np.ndarray, tail: float) -> FockState:
    return FockState(np.diag(probs / probs.sum()).astype(complex), tail)


def _coherent_amplitudes(beta: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    x = abs(beta) ** 2
    log_mag = -0.5 * x + xlogy(n, abs(beta)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(beta))


def fock(n: int, cutoff: int | None = None) -> FockState:
    """Number state ``|n><n|``."""
    cutoff = n if cutoff is None else cutoff
    if not 0 <= n <= cutoff:
        raise ValueError("need 0 <= n <= cutoff")
    probs = np.zeros(cutoff + 1)
    probs[n] = 1.0
    return _diagonal(probs, 0.0)


def vacuum(cutoff: int = 0) -> FockState:
    return fock(0, cutoff)


def make_coherent(beta: complex, cutoff: int, tol: float = DEFAULT_TAIL_TOL) -> FockState:
    """Coherent state ``|beta>``."""
    tail = _check_tail(pdtrc(cutoff, abs(beta) ** 2), tol, "coherent", cutoff)
    return _pure(_coherent_amplitudes(complex(beta), cutoff), tail)


def make_squeezed_vacuum(r: float, phi: float = 0.0, cutoff: int = 40,
                         tol: float = DEFAULT_TAIL_TOL) -> FockState:
    """Squeezed vacuum ``S(xi)|0>`` with ``xi = r exp(i phi)``.

    Only even Fock components are populated, with amplitudes
    ``(cosh r)^{-1/2} (-exp(i phi) tanh r)^n sqrt((2n)!) / (2^n n!)`` on ``|2n>``.
    See ``SQUEEZED_CUTOFF_GUIDE`` for cutoffs that meet the default tolerance.
    """
    if r < 0:
        raise ValueError("squeezing r must be non-negative")
    if r >= 3:
        raise ValueError("squeezing r must be below 3")
    k = np.arange(cutoff // 2 + 1)
    log_mag = (-0.5 * np.log(np.cosh(r)) + xlogy(k, np.tanh(r))
               + 0.5 * gammaln(2 * k + 1) - k * np.log(2.0) - gammaln(k + 1))
    coeff = np.exp(log_mag) * (-np.exp(1j * phi)) ** k
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0::2] = coeff
    tail = _check_tail(1.0 - np.sum(np.abs(coeff) ** 2), tol, "squeezed vacuum", cutoff)
    return _pure(amps, tail)


def make_lossy_single_photon(q: float) -> FockState:
    """``q |1><1| + (1 - q) |0><0|``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    return _diagonal(np.array([1.0 - q, q]), 0.0)


def thermal_probs(nbar: float, cutoff: int) -> np.ndarray:
    k = np.arange(cutoff + 1)
    return np.exp(xlogy(k, nbar) - (k + 1) * np.log1p(nbar))


def make_thermal(nbar: float, cutoff: int, tol: float = DEFAULT_TAIL_TOL) -> FockState:
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    x = nbar / (nbar + 1.0)
    tail = _check_tail(x ** (cutoff + 1), tol, "thermal", cutoff)
    return _diagonal(thermal_probs(nbar, cutoff), tail)


def make_spats(nbar: float, cutoff: int, tol: float = DEFAULT_TAIL_TOL) -> FockState:
    """Single-photon-added thermal state, normalized ``a^dag rho_th a``.

    Built from the closed form ``rho_nn = n p_{n-1} / (nbar + 1)``; the
    thermal state is diagonal, so no matrix products are needed.
    """
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if cutoff < 1:
        raise CutoffError("SPATS needs cutoff >= 1")
    x = nbar / (nbar + 1.0)
    tail = _check_tail(x ** cutoff * ((cutoff + 1) - cutoff * x), tol, "SPATS", cutoff)
    n = np.arange(cutoff + 1)
    probs = np.zeros(cutoff + 1)
    probs[1:] = n[1:] * thermal_probs(nbar, cutoff - 1) / (nbar + 1.0)
    return _diagonal(probs, tail)


def make_even_cat(omega: complex, cutoff: int, tol: float = DEFAULT_TAIL_TOL) -> FockState:
    """Even coherent state, normalized ``|omega> + |-omega>``."""
    x = abs(omega) ** 2
    amps = _coherent_amplitudes(complex(omega), cutoff)
    amps[1::2] = 0.0
    kept = np.sum(np.abs(amps) ** 2)
    # untruncated norm of (|w> + |-w>) / 2
    full = 0.5 * (1.0 + np.exp(-2.0 * x))
    tail = _check_tail(1.0 - kept / full, tol, "even cat", cutoff)
    return _pure(amps, tail)


def apply_loss(state: FockState, epsilon: float) -> FockState:
    """Pure-loss channel with intensity transmission ``epsilon``.

    ``rho'_{mn} = sum_j sqrt(C(m+j, j) C(n+j, j)) eps^{(m+n)/2} (1-eps)^j rho_{m+j, n+j}``
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    rho = state.elements
    dim = state.dim
    out = np.zeros_like(rho)
    for j in range(dim):
        k = np.arange(j, dim)
        # Kraus amplitude <k-j| A_j |k>
        log_b = (0.5 * (gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1))
                 + 0.5 * xlogy(k - j, epsilon) + 0.5 * xlogy(j, 1.0 - epsilon))
        b = np.exp(log_b)
        out[: dim - j, : dim - j] += b[:, None] * rho[j:, j:] * b[None, :]
    return FockState(out, state.tail_mass)


def mixture(states: Sequence[FockState], weights: Sequence[float]) -> FockState:
    """Convex combination of states, padded to the largest cutoff."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or len(weights) != len(states):
        raise ValueError("weights must be non-negative, one per state")
    cutoff = max(s.cutoff for s in states)
    rho = sum(w * s.padded(cutoff).elements for s, w in zip(states, weights))
    tail = sum(w * s.tail_mass for s, w in zip(states, weights)) / weights.sum()
    return FockState(rho, tail)


def photon_stats(state: FockState) -> PhotonStats:
    p = state.diag
    n = np.arange(state.dim)
    mean = float(p @ n)
    var = max(float(p @ n**2) - mean**2, 0.0)
    q = var / mean - 1.0 if mean > 0 else float("nan")
    return PhotonStats(mean, var, q)


def auto_cutoff(factory: Callable[..., FockState], *args, start: int = 8,
                max_cutoff: int = 4096, **kwargs) -> FockState:
    """Call ``factory(*args, cutoff=c, **kwargs)`` doubling ``c`` until it succeeds."""
    cutoff = start
    while True:
        try:
            return factory(*args, cutoff=cutoff, **kwargs)
        except CutoffError:
            if cutoff >= max_cutoff:
                raise
            cutoff = min(2 * cutoff, max_cutoff)


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """Single-mode Gaussian state as mean amplitude and Wigner covariance.

    ``cov`` is the covariance of ``(Re alpha, Im alpha)`` under the Wigner
    function, with the vacuum at ``I / 4``.
    """

    mean: complex
    cov: np.ndarray

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (2, 2) or not np.allclose(cov, cov.T, atol=1e-14):
            raise ValueError("cov must be a symmetric 2x2 matrix")
        cov = 0.5 * (cov + cov.T)
        if np.linalg.det(cov) < 1.0 / 16 - 1e-12 or np.linalg.eigvalsh(cov)[0] <= 0:
            raise ValueError("cov violates the uncertainty bound det(cov) >= 1/16")
        cov.setflags(write=False)
        object.__setattr__(self, "mean", complex(self.mean))
        object.__setattr__(self, "cov", cov)


def gaussian_vacuum() -> GaussianSpec:
    return GaussianSpec(0.0, np.eye(2) / 4)


def gaussian_coherent(beta: complex) -> GaussianSpec:
    return GaussianSpec(beta, np.eye(2) / 4)


def gaussian_thermal(nbar: float) -> GaussianSpec:
    return GaussianSpec(0.0, (2 * nbar + 1) / 4 * np.eye(2))


def gaussian_squeezed(r: float, phi: float = 0.0, mean: complex = 0.0) -> GaussianSpec:
    """Gaussian counterpart of :func:`make_squeezed_vacuum` (optionally displaced)."""
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    rot = np.array([[c, -s], [s, c]])
    cov = rot @ np.diag([np.exp(-2 * r), np.exp(2 * r)]) @ rot.T / 4
    return GaussianSpec(mean, cov)


def gaussian_loss(spec: GaussianSpec, epsilon: float) -> GaussianSpec:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    cov = epsilon * spec.cov + (1 - epsilon) / 4 * np.eye(2)
    return GaussianSpec(np.sqrt(epsilon) * spec.mean, cov)
