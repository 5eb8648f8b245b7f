"""Zero-count correlations behind a balanced beam splitter sample the
s = -3, k = 1/2 inequality for an even cat state.  A seeded Monte Carlo run
of the detection chain reproduces the exact covariance within its error."""

import numpy as np

from psw import MultiplexConfig, PhaseGrid, covariance_exact, simulate_clicks, states, witness_field
from psw.figures import CAT_SPEC

cat = states.make_even_cat(0.7, cutoff=40)
cfg = MultiplexConfig.balanced(eta=0.5, channels=2)

exact = covariance_exact(cat, 0, cfg.eta, 0.5)
est = simulate_clicks(cat, 0, cfg, shots=10**6, seed=1)
dev = (est.covariance - exact.value) / est.std_err_cov
print(f"alpha = 0: exact covariance {exact.value:+.6f}, Monte Carlo {est.covariance:+.6f}"
      f" +- {est.std_err_cov:.6f} ({dev:+.1f} sigma)")

fld = witness_field(cat, PhaseGrid.square(2.0, 41), CAT_SPEC)
best = fld.min_result()
scale = np.pi * (1 - CAT_SPEC.s.s) / 2
print(f"most negative covariance {scale * best.value:+.5f} at alpha = {best.alpha:.2f}")
at_min = simulate_clicks(cat, best.alpha, cfg, shots=10**6, seed=2)
sigmas = -at_min.covariance / at_min.std_err_cov
print(f"Monte Carlo there: {at_min.covariance:+.5f} +- {at_min.std_err_cov:.5f}, {sigmas:.0f} sigma below zero")
