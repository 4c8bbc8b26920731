"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (with the measured numbers
and runtime) straight to the terminal, then asserts.
"""

import math
import time

import numpy as np
import pytest

from qoneway import proofs
from qoneway.experiments import claim_sweep, inequality_sweep, learn_instance, suite_protocols, teleport_sweep
from qoneway.instances import bundled_instance_path, parse_instance_file
from qoneway.oracle import exact_one_way_cost

SEED = 20261016
N = 121
ROOT = 11


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str, started: float, limit: float):
        elapsed = time.perf_counter() - started
        ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}; {elapsed:.1f}s (limit {limit:.0f}s)")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def learn_runs():
    """The 50 compiled protocols shared by criteria 2 and 8."""
    t = time.perf_counter()
    runs = [learn_instance(p, f, 1e-4, i)[0] for i, (p, f) in enumerate(suite_protocols(50, SEED, 1e-4))]
    return runs, time.perf_counter() - t


def test_criterion_1_progress_claim(report):
    t = time.perf_counter()
    events = claim_sweep(1000, SEED)
    bad = [e for e in events if not e.passed]
    grid = {(e.d, e.epsilon) for e in events}
    ok = not bad and len(events) >= 1000 and grid == {(d, e) for d in (2, 4, 8) for e in (1e-4, 1e-6)}
    worst = min(e.margin for e in events)
    report(1, "progress claim", ok, f"{len(events)} events, {len(bad)} failures, worst margin {worst:.3e}", t, 30)


def test_criterion_2_learner_end_to_end(report, learn_runs):
    learn_runs, build = learn_runs
    t = time.perf_counter() - build
    limit = 2 * 2 / (5 * math.sqrt(1e-4))
    mismatched = [o.index for o in learn_runs if not o.matches]
    over = [o.index for o in learn_runs if o.max_updates > min(limit, o.update_limit)]
    shapes_ok = all(o.q <= 2 and o.x_count <= 8 and o.y_count <= 32 for o in learn_runs)
    ok = len(learn_runs) == 50 and not mismatched and not over and shapes_ok
    most = max(o.max_updates for o in learn_runs)
    report(
        2, "compiled protocol matches f", ok,
        f"{len(learn_runs)} protocols, mismatches {mismatched}, max per-x updates {most} (limit {limit:.0f})", t, 120,
    )


def test_criterion_3_inequality_suites(report):
    t = time.perf_counter()
    suites = inequality_sweep(1000, SEED)
    ok = all(s.passed and s.trials == 1000 for s in suites.values())
    detail = ", ".join(f"{s.name} {s.failures}/{s.trials} fail" for s in suites.values())
    report(3, "entropy inequalities", ok, detail, t, 60)


def test_criterion_4_teleport_prior(report):
    t = time.perf_counter()
    checks = teleport_sweep(100, SEED, q=1)
    ok = len(checks) == 100 and all(c.passed for c in checks)
    dev = max(c.max_deviation for c in checks)
    top = max(c.min_entropy for c in checks)
    report(4, "teleportation prior", ok, f"max |sigma - I/2| {dev:.1e}, max S_inf {top:.6f} <= 2", t, 10)


def test_criterion_5_majix_values(report):
    t = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_complete = min(
        proofs.majix_acceptance(inst, proofs.honest_proof(inst))
        for inst in (proofs.majix_instance(N, 1, rng) for _ in range(100))
    )
    cheat_gap = 0.0
    zero_max = 0.0
    undefined = []
    for k in range(ROOT + 1):
        value = proofs.majix_value_from_count(k, ROOT)
        if value == proofs.UNDEFINED:
            undefined.append(k)
        for _ in range(3):
            inst = proofs.majix_instance(N, value, rng, k=k)
            cheat = proofs.majix_optimal_cheat(inst)
            cheat_gap = max(cheat_gap, abs(cheat.value - k / math.sqrt(N)))
            if value == 0:
                zero_max = max(zero_max, cheat.value)
    ok = abs(worst_complete - 1) <= 1e-9 and cheat_gap <= 1e-9 and zero_max <= 0.9 and undefined == [10]
    report(
        5, "MajIx completeness and soundness", ok,
        f"min completeness {worst_complete:.12f}, |cheat - k/sqrt(n)| <= {cheat_gap:.1e}, "
        f"max cheat on 0-inputs {zero_max:.4f}, undefined k {undefined}",
        t, 10,
    )


def test_criterion_6_majix_bob_to_alice(report):
    t = time.perf_counter()
    trials = 10_000
    p = 0.9**proofs.DEFAULT_REPS
    limit = p + 3 * math.sqrt(p * (1 - p) / trials)
    boundary = proofs.majix_instance(N, 0, SEED, k=9)
    honest = proofs.majix_instance(N, 1, SEED + 1)
    sound = proofs.majix_monte_carlo(boundary, proofs.DEFAULT_REPS, trials, SEED)
    complete = proofs.majix_monte_carlo(honest, proofs.DEFAULT_REPS, trials, SEED)
    ok = sound.rate <= limit and complete.rate == 1.0
    report(
        6, "MajIx Bob-to-Alice", ok,
        f"boundary acceptance {sound.rate:.4f} <= {limit:.4f} (exact {proofs.bob_to_alice_acceptance(boundary):.4f}), "
        f"completeness {complete.rate}",
        t, 10,
    )


def test_criterion_7_lsd_thresholds(report):
    t = time.perf_counter()
    close_angle = 2 * math.asin(proofs.LSD_CLOSE / 2)
    far_angle = 2 * math.asin(proofs.LSD_FAR / 2)
    close = [proofs.lsd_instance(8, a, SEED + i) for i, a in enumerate(np.linspace(0, close_angle, 5))]
    far = [proofs.lsd_instance(8, a, SEED + i) for i, a in enumerate(np.linspace(far_angle, math.pi / 2, 5))]
    close_min = min(proofs.lsd_optimal_proof(inst)[0] for inst in close)
    far_max = max(proofs.lsd_optimal_proof(inst)[0] for inst in far)
    gap = 0.0
    for i, inst in enumerate(close + far + [proofs.lsd_instance(8, 0.6, SEED + 99)]):
        gap = max(gap, abs(proofs.lsd_sampled_distance(inst, 10_000, SEED + i) - proofs.lsd_distance(inst)))
    ok = close_min >= 0.98 - 1e-12 and far_max <= 0.0361 + 1e-12 and gap <= 1e-3
    report(
        7, "LSD thresholds", ok,
        f"min close acceptance {close_min:.6f}, max far acceptance {far_max:.6f}, max sampled gap {gap:.1e}",
        t, 30,
    )


def test_criterion_8_oracle_consistency(report, learn_runs):
    learn_runs, _ = learn_runs
    t = time.perf_counter()
    violations = [o.index for o in learn_runs if o.chromatic_number > o.distinct_messages]
    f = parse_instance_file(bundled_instance_path("xor_shift_n4.txt"))
    res = exact_one_way_cost(f)
    ok = not violations and res.exact and res.bits <= 2 * math.log2(4)
    report(
        8, "oracle lower bound", ok,
        f"chi <= distinct messages on {len(learn_runs) - len(violations)}/{len(learn_runs)} protocols, "
        f"xor-shift n=4 cost {res.bits} bits (chi {res.chromatic_number}) <= 4",
        t, 60,
    )
