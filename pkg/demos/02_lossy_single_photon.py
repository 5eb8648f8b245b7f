"""A single photon after loss: W(0) turns positive at q = 1/2, but the
W - 2 pi Q^2 inequality stays violated for every q > 0."""

from psw import figures, states, witness_wq

data = figures.fig2(step=0.1)
print("   q     W(0)      W(0) - 2 pi Q(0)^2   -2 q^2 / pi")
for q, w0, lhs in zip(data["q"], data["wigner0"], data["witness0"]):
    print(f"{q:5.2f}  {w0:+.5f}   {lhs:+.6f}            {-2 * q * q / 3.141592653589793:+.6f}")
print(f"W(0) vanishes at q = {figures.wigner_origin_crossing():.6f}")
print(f"q = 0.01: witness = {witness_wq(states.make_lossy_single_photon(0.01), 0).value:+.2e}")
