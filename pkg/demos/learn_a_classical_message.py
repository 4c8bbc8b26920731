"""Turn a small quantum one-way protocol into a classical one.

Alice's quantum message is replaced by a short transcript: Bob starts from
the shared prior, and each time his current guess answers a question badly
Alice tells him which question it was and how far off the true state is.
"""

import math

from qoneway import LearnerConfig, compile_deterministic_protocol, random_protocol
from qoneway.learner import audit_progress
from qoneway.oracle import exact_one_way_cost, validate_compiled

p, f = random_protocol(q=2, x_count=6, y_count=24, epsilon=1e-4, seed=7)
print(f"protocol: {p.q} qubits, {f.x_count} Alice inputs, {f.y_count} Bob inputs")
print(f"prior budget max_x S(rho_x || prior) = {p.prior_budget:.3f} bits")

cfg = LearnerConfig(epsilon=1e-4)
det = compile_deterministic_protocol(p, f, cfg, audit=True)
ok, counterexample = validate_compiled(det, f)
print(f"compiled protocol agrees with f on every defined cell: {ok}")

for x, run in det.runs.items():
    report = audit_progress(run)
    drops = [f"{u.progress:.3f}>={u.deficit / 2:.3f}" for u in run.audit]
    print(f"  x={x}: {run.updates} updates, entropy drops {drops or '-'}, audit ok={report.passed}")

print(f"longest message: {det.cost} bits (guarantee {det.cost_bound(p.prior_budget):.1f})")
print(f"update limit per x: {2 * p.q / (5 * math.sqrt(cfg.epsilon)):.0f}")

oracle = exact_one_way_cost(f)
print(f"exact deterministic cost: {oracle.bits} bits with {oracle.chromatic_number} messages;"
      f" the learner used {det.distinct_messages} distinct messages")
