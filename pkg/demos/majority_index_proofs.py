"""Quantum proofs for the majority-index problem at n = 121.

Bob holds 11 indices I; the answer is 1 when x is 1 on all of them, 0 when it
is 1 on at most 9 of them.  A quantum proof lets him check this with one
measurement; a cheating prover can do no better than k / sqrt(n).
"""

import math

from qoneway import proofs

n, root = 121, 11
print(" k  value      uniform proof  best cheat  k/sqrt(n)")
for k in range(root + 1):
    value = proofs.majix_value_from_count(k, root)
    inst = proofs.majix_instance(n, value, seed=k, k=k)
    uniform = proofs.majix_acceptance(inst, proofs.honest_proof(inst))
    cheat = proofs.majix_optimal_cheat(inst).value
    label = {0: "0", 1: "1"}.get(value, "undefined")
    print(f"{k:2d}  {label:9s}  {uniform:13.4f}  {cheat:10.4f}  {k / math.sqrt(n):9.4f}")

boundary = proofs.majix_instance(n, 0, seed=1, k=9)
mc = proofs.majix_monte_carlo(boundary, reps=11, trials=5000, seed=1)
print(f"\nBob-to-Alice protocol with 11 sampled indices, k=9: accepted {mc.rate:.4f}"
      f" (exact {proofs.bob_to_alice_acceptance(boundary):.4f}, bound 0.9^11 = {0.9**11:.4f})")
print(f"its message length: {proofs.bob_to_alice_bits(n)} bits")
