"""Splitting one mode over N click detectors gives the N-factor inequality.
Coherent light saturates it; a photon-added thermal state violates it."""

from psw import MultiplexConfig, WitnessSpec, multi_zero_count_witness, states, witness_multi

coherent = states.make_coherent(0.8, 40)
spats = states.apply_loss(states.make_spats(0.5, 120), 0.8)
for n in (2, 3, 4):
    cfg = MultiplexConfig.balanced(0.9, n)
    c = multi_zero_count_witness(coherent, 0.3, cfg).value
    s = multi_zero_count_witness(spats, 0.0, cfg).value
    print(f"N = {n}: coherent {c:+.2e}   lossy SPATS {s:+.5f}")

spec = WitnessSpec.multi(0.0, (1 / 3, 1 / 3, 1 / 3))
r = witness_multi(states.fock(1), 0, spec)
print(f"|1>, three equal factors at s = 0: {r.value:+.4f} (violated: {r.violated})")
