"""Distance between two subspaces, from principal angles and by sampling.

The best proof for the subspace-distance problem is the first principal
vector; it is accepted with probability cos^2 of the smallest angle.
"""

import math

from qoneway import proofs

for angle in (0.0, 0.1, 2 * math.asin(0.05 * math.sqrt(2)), 0.7, 2 * math.asin(0.45 * math.sqrt(2)), math.pi / 2):
    inst = proofs.lsd_instance(8, angle, seed=5)
    dist = proofs.lsd_distance(inst)
    acc, _ = proofs.lsd_optimal_proof(inst)
    sampled = proofs.lsd_sampled_distance(inst, samples=4000, seed=5)
    value = {0: "far", 1: "close"}.get(proofs.lsd_value(inst), "between")
    print(f"angle {angle:.4f}: distance {dist:.6f} ({value:7s}) best acceptance {acc:.6f}"
          f" sampled distance {sampled:.6f}")
