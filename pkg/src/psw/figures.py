"""Data behind the standard demonstration figures.

* ``fig1``: Wigner, Husimi and ``W - 2 pi Q^2`` fields of squeezed vacuum, r = 0.3.
* ``fig2``: ``W(0)`` and ``W(0) - 2 pi Q(0)^2`` of the lossy single photon versus q.
* ``fig3``: lossy SPATS, witness violation over thermal photon number and transmission.
* ``fig5``: two-factor field (s = -3, k = 1/2) of the even cat with omega = 0.7,
  together with the zero-count covariance it is sampled from.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from . import states
from .phasespace import PhaseGrid, evaluate_points, scan_many
from .witness import WQ_SPEC, WitnessSpec, witness_field

SQUEEZE_R = 0.3
CAT_OMEGA = 0.7
CAT_SPEC = WitnessSpec.two(-3.0, 0.5)
FIG3_NBAR = np.round(np.arange(0, 41) * 0.05, 10)
FIG3_EPS = np.round(np.arange(0, 51) * 0.02, 10)
FIG3_ALPHA = np.linspace(0.0, 3.0, 31)


def fig1(threads=None, cutoff: int = 60, n: int = 121, half_width: float = 3.0) -> dict:
    state = states.make_squeezed_vacuum(SQUEEZE_R, 0.0, cutoff)
    grid = PhaseGrid.square(half_width, n)
    w, q = scan_many(state, grid, [0.0, -1.0], threads=threads)
    lhs = witness_field(state, grid, WQ_SPEC, threads=threads)
    return {"wigner": w, "husimi": q, "witness": lhs}


def fig2(step: float = 0.01) -> dict:
    q = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
    rho = [states.make_lossy_single_photon(x) for x in q]
    wig = np.empty(q.size)
    lhs = np.empty(q.size)
    for i, r in enumerate(rho):
        (w, h), _ = evaluate_points(r, np.zeros(1), [0.0, -1.0])
        wig[i] = w[0]
        lhs[i] = w[0] - 2 * np.pi * h[0] ** 2
    return {"q": q, "wigner0": wig, "witness0": lhs}


def wigner_origin_crossing() -> float:
    """Loss parameter at which the single-photon Wigner function at the origin vanishes."""
    def w0(q):
        (w,), _ = evaluate_points(states.make_lossy_single_photon(q), np.zeros(1), [0.0])
        return w[0]
    return brentq(w0, 0.0, 1.0, xtol=1e-14)


def spats_mandel_crossing() -> float:
    """Thermal photon number at which the SPATS Mandel parameter changes sign."""
    def qm(nbar):
        return states.photon_stats(states.auto_cutoff(states.make_spats, nbar)).mandel_q
    return brentq(qm, 0.2, 2.0, xtol=1e-12)


def spats_wigner_crossing(nbar: float) -> float:
    """Transmission at which W(0) of the lossy SPATS changes sign."""
    base = states.auto_cutoff(states.make_spats, nbar)

    def w0(eps):
        (w,), _ = evaluate_points(states.apply_loss(base, eps), np.zeros(1), [0.0])
        return w[0]
    return brentq(w0, 0.05, 0.95, xtol=1e-12)


def spats_point(nbar: float, epsilon: float, alphas=FIG3_ALPHA, base=None) -> dict:
    """Witness minimum over real ``alpha`` for one lossy SPATS.

    The state is phase invariant, so the non-negative half axis covers
    ``|alpha| <= max(alphas)`` on the whole real line.
    """
    if base is None:
        base = states.auto_cutoff(states.make_spats, nbar)
    rho = states.apply_loss(base, epsilon)
    (w, q), (ew, eq) = evaluate_points(rho, np.asarray(alphas, dtype=complex), [0.0, -1.0])
    lhs = w - 2 * np.pi * q**2
    err = ew + 2 * np.pi * (2 * np.abs(q) * eq + eq**2)
    i = int(np.argmin(lhs))
    return {"witness_min": float(lhs[i]), "err": float(err[i]), "alpha_min": float(alphas[i]),
            "violated": bool(lhs[i] < -err[i]), "wigner0": float(w[0])}


def fig3(nbar_values=FIG3_NBAR, eps_values=FIG3_EPS, alphas=FIG3_ALPHA) -> dict:
    rows = []
    boundary = []
    for nbar in nbar_values:
        base = states.auto_cutoff(states.make_spats, float(nbar))
        mandel = states.photon_stats(base).mandel_q
        first = None
        for eps in eps_values:
            pt = spats_point(float(nbar), float(eps), alphas, base)
            pt.update(nbar=float(nbar), epsilon=float(eps), loss=float(1 - eps), mandel_q=mandel)
            rows.append(pt)
            if first is None and pt["violated"]:
                first = float(eps)
        boundary.append({"nbar": float(nbar), "epsilon": first,
                         "loss": None if first is None else 1 - first})
    return {"rows": rows, "boundary": boundary}


def fig5(threads=None, n: int = 81, half_width: float = 2.0) -> dict:
    cat = states.make_even_cat(CAT_OMEGA, 40)
    grid = PhaseGrid.square(half_width, n)
    lhs = witness_field(cat, grid, CAT_SPEC, threads=threads)
    # zero-count covariance = pi (1 - s) / 2 * lhs
    scale = np.pi * (1 - CAT_SPEC.s.s) / 2
    return {"witness": lhs, "covariance_scale": scale}
