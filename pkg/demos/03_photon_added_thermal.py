"""Single-photon-added thermal states under loss.

Sub-Poissonian statistics disappear above nbar = 1/sqrt(2), and W(0) turns
positive at transmission 1/2, yet the W - 2 pi Q^2 inequality keeps detecting
nonclassicality well beyond both boundaries.  This runs a coarse version of
the full (nbar, transmission) scan; `psw figure fig3` produces the fine one.
"""

import numpy as np

from psw import figures

print(f"Mandel Q changes sign at nbar = {figures.spats_mandel_crossing():.6f}")
for nbar in (0.2, 0.5):
    print(f"nbar = {nbar}: W(0) changes sign at transmission {figures.spats_wigner_crossing(nbar):.6f}")

nbar_values = np.round(np.arange(0, 9) * 0.25, 10)
eps_values = np.round(np.arange(0, 51) * 0.02, 10)
data = figures.fig3(nbar_values, eps_values)
print("\n nbar   smallest transmission with a certified violation")
for b in data["boundary"]:
    eps = "none" if b["epsilon"] is None else f"{b['epsilon']:.2f} (loss {b['loss']:.2f})"
    print(f" {b['nbar']:4.2f}   {eps}")
