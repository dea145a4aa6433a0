"""Tour of two-qubit gate geometry: coordinates, mirrors, local equivalence.

Every two-qubit gate, modulo single-qubit rotations before and after, is a
point (a, b, c) in a tetrahedral chamber.  The mirror of a gate (the gate
followed by a SWAP) is another point given by a simple two-branch affine map.
"""

import numpy as np

from mirage import gates, weyl

np.set_printoptions(precision=4, suppress=True)

print("Canonical coordinates of familiar gates (units of pi):")
for name, mat in [("identity", np.eye(4)), ("CNOT", gates.CX),
                  ("iSWAP", gates.ISWAP), ("SWAP", gates.SWAP),
                  ("CZ", gates.CZ), ("sqrt-iSWAP", weyl.canonical_gate(weyl.SQISWAP_POINT))]:
    pt = np.asarray(weyl.canonical_coordinates(mat)) / np.pi
    print(f"  {name:11s} -> ({pt[0]:.4f}, {pt[1]:.4f}, {pt[2]:.4f}) pi")

print("\nCoordinates ignore single-qubit dressing:")
rng = np.random.default_rng(0)
u = weyl.haar_random_2q(rng)
g = weyl.haar_random_1q_batch(rng, (4,))
dressed = np.kron(g[1], g[0]) @ u @ np.kron(g[3], g[2])
print("  bare:   ", np.asarray(weyl.canonical_coordinates(u)))
print("  dressed:", np.asarray(weyl.canonical_coordinates(dressed)))

print("\nThe mirror map exchanges CNOT <-> iSWAP and identity <-> SWAP:")
for name, pt in [("CNOT", weyl.CNOT_POINT), ("identity", weyl.IDENTITY_POINT),
                 ("SWAP", weyl.SWAP_POINT)]:
    print(f"  mirror({name}) = {np.asarray(weyl.mirror_coordinates(pt)) / np.pi} pi")

print("\nMirroring twice is the identity (SWAP * SWAP = I):")
pts = weyl.random_chamber_points(rng, 5)
back = weyl.mirror_coordinates_batch(weyl.mirror_coordinates_batch(pts))
print("  max |p - mirror(mirror(p))| =", np.abs(pts - back).max())

print("\nGate fidelity separates classes: F(I, SWAP) =",
      weyl.gate_fidelity(np.eye(4), gates.SWAP))
