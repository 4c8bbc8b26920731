"""Check the entropy facts the learner relies on, on random states."""

import numpy as np

from qoneway import relative_entropy, relative_min_entropy, trace_distance, von_neumann_entropy
from qoneway.experiments import inequality_sweep, teleport_sweep
from qoneway.measures import pinch, pinsker_bound
from qoneway.sampling import random_density_matrix, random_projector

rng = np.random.default_rng(3)
rho = random_density_matrix(4, rng)
sigma = random_density_matrix(4, rng)
s = relative_entropy(rho, sigma)
print(f"S(rho) = {von_neumann_entropy(rho):.4f} bits")
print(f"S(rho||sigma) = {s:.4f} <= S_inf(rho||sigma) = {relative_min_entropy(rho, sigma):.4f}")
print(f"trace distance {trace_distance(rho, sigma):.4f} <= Pinsker bound {pinsker_bound(s):.4f}")

q = random_projector(4, 2, rng)
print(f"after pinching with a rank-2 projector: {relative_entropy(pinch(rho, q), pinch(sigma, q)):.4f} <= {s:.4f}")

print("\nsweeping 300 random pairs:")
for name, suite in inequality_sweep(300, seed=1).items():
    print(f"  {name:9s} {suite.failures} failures, smallest margin {suite.worst_margin:.2e}")

checks = teleport_sweep(50, seed=1)
print(f"\nteleportation prior on 50 qubit states: all pass = {all(c.passed for c in checks)},"
      f" largest S_inf = {max(c.min_entropy for c in checks):.4f} (bound 2)")
