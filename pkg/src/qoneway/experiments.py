"""Seeded randomized sweeps used by the command line and the acceptance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import measures
from .learner import LearnerConfig, audit_progress, compile_deterministic_protocol, deficit, update_guess
from .linalg import is_psd
from .oracle import exact_one_way_cost, validate_compiled
from .protocol import random_protocol, teleport_prior
from .sampling import make_rng, random_density_matrix, random_projector

CLAIM_SLACK = 1e-8
INEQUALITY_TOL = 1e-9


def random_target(q: np.ndarray, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Random mixed state with ``Tr(Q rho) >= 1 - eps``, coherent across the two blocks."""
    d = q.shape[0]
    comp = np.eye(d) - q
    terms = int(rng.integers(1, d + 1))
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((d, d), dtype=complex)
    for w in weights:
        g = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        inside = q @ g
        outside = comp @ g
        inside /= np.linalg.norm(inside)
        e = eps * rng.random()
        v = math.sqrt(1 - e) * inside
        n_out = np.linalg.norm(outside)
        if n_out > 0:
            v = v + math.sqrt(e) * outside / n_out
        rho += w * np.outer(v, v.conj())
    return 0.5 * (rho + rho.conj().T)


def random_guess(q: np.ndarray, a_target: float, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank state with deficit ``1 - Tr(Q sigma) = a_target``."""
    d = q.shape[0]
    r = float(np.trace(q).real)
    sigma = random_density_matrix(d, rng)
    a0 = deficit(sigma, q)
    if a0 < a_target:
        lam = (a_target - a0) / (1 - a0)
        sigma = (1 - lam) * sigma + lam * (np.eye(d) - q) / (d - r)
    else:
        lam = 1 - a_target / a0
        sigma = (1 - lam) * sigma + lam * q / r
    return 0.5 * (sigma + sigma.conj().T)


@dataclass(frozen=True)
class ClaimEvent:
    d: int
    epsilon: float
    rank: int
    deficit: float
    eps_y: float
    progress: float
    trace_restored: float

    @property
    def margin(self) -> float:
        return self.progress - self.deficit / 2

    @property
    def passed(self) -> bool:
        return self.margin >= -CLAIM_SLACK


def claim_event(d: int, eps: float, rng: np.random.Generator, rank: int | None = None):
    """One random update: returns the event and the ``(rho, sigma, Q)`` it used."""
    r = rank if rank is not None else int(rng.integers(1, d))
    q = random_projector(d, r, rng)
    rho = random_target(q, eps, rng)
    trigger = 10 * math.sqrt(eps)
    a = trigger + (0.999 - trigger) * rng.random()
    sigma = random_guess(q, a, rng)
    eps_y = max(0.0, deficit(rho, q))
    new = update_guess(sigma, q, eps_y, trigger=trigger)
    before = measures.relative_entropy(rho, sigma)
    after = measures.relative_entropy(rho, new)
    event = ClaimEvent(d, eps, r, deficit(sigma, q), eps_y, before - after, abs(deficit(new, q) - eps_y))
    return event, (rho, sigma, q)


def claim_sweep(events: int, seed, dims=(2, 4, 8), epsilons=(1e-4, 1e-6)) -> list[ClaimEvent]:
    rng = make_rng(seed)
    out = []
    for i in range(events):
        d = dims[i % len(dims)]
        eps = epsilons[(i // len(dims)) % len(epsilons)]
        out.append(claim_event(d, eps, rng)[0])
    return out


@dataclass
class SuiteResult:
    name: str
    trials: int = 0
    failures: int = 0
    first_failure: dict | None = field(default=None, repr=False)
    worst_margin: float = math.inf

    def record(self, ok: bool, margin: float, witness: dict):
        self.trials += 1
        self.worst_margin = min(self.worst_margin, margin)
        if not ok:
            self.failures += 1
            if self.first_failure is None:
                self.first_failure = witness

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _random_pair(rng: np.random.Generator):
    d = int(rng.choice([2, 4, 8]))
    rho_rank = int(rng.integers(1, d + 1))
    rho = random_density_matrix(d, rng, rank=rho_rank)
    if rng.random() < 0.1:
        sigma = rho.copy() if rho_rank == d else random_density_matrix(d, rng)
    else:
        sigma = random_density_matrix(d, rng)
    return d, rho, sigma


def _pair_quantities(rho, sigma) -> dict:
    return {
        "s": measures.relative_entropy(rho, sigma),
        "td": measures.trace_distance(rho, sigma),
        "smax": measures.relative_min_entropy(rho, sigma),
    }


def _record_pair(suites: dict, rho, sigma, p, values: dict | None = None):
    v = values if values is not None else _pair_quantities(rho, sigma)
    s, td, smax = v["s"], v["td"], v["smax"]
    witness = {"rho": rho, "sigma": sigma, "projector": p}
    if "pinsker" in suites and math.isfinite(s):
        bound = measures.pinsker_bound(s)
        suites["pinsker"].record(td <= bound + INEQUALITY_TOL, bound - td, witness)
    if "ordering" in suites:
        margin = smax - s if math.isfinite(smax) else math.inf
        suites["ordering"].record(s <= smax + INEQUALITY_TOL, margin, witness)
    if "klein" in suites:
        ok = s >= -INEQUALITY_TOL and ((s <= INEQUALITY_TOL) == (td <= 1e-6))
        suites["klein"].record(ok, s, witness)
    if "uhlmann" in suites and p is not None:
        sp = measures.relative_entropy(measures.pinch(rho, p), measures.pinch(sigma, p))
        suites["uhlmann"].record(sp <= s + INEQUALITY_TOL, s - sp, witness)


SUITES = ("pinsker", "ordering", "klein", "uhlmann")


def inequality_sweep(trials: int, seed) -> dict[str, SuiteResult]:
    """Pinsker, ordering ``S <= S_inf``, Klein and pinching monotonicity on random states."""
    rng = make_rng(seed)
    suites = {name: SuiteResult(name) for name in SUITES}
    for _ in range(trials):
        d, rho, sigma = _random_pair(rng)
        p = random_projector(d, int(rng.integers(1, d)), rng)
        _record_pair(suites, rho, sigma, p)
    return suites


def replay_states(witness: dict, suite: str | None = None) -> dict[str, SuiteResult]:
    """Re-run the checks (or one suite's check) on the states stored in a failure witness."""
    names = SUITES if suite is None else (suite,)
    suites = {name: SuiteResult(name) for name in names}
    _record_pair(suites, witness["rho"], witness["sigma"], witness.get("projector"))
    return suites


@dataclass(frozen=True)
class TeleportCheck:
    max_deviation: float
    theta_psd: bool
    min_entropy: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= 1e-10 and self.theta_psd and self.min_entropy <= self.bound + 1e-9


def teleport_sweep(trials: int, seed, q: int = 1) -> list[TeleportCheck]:
    rng = make_rng(seed)
    d = 2**q
    out = []
    for _ in range(trials):
        rho = random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1)))
        rep = teleport_prior(rho)
        out.append(
            TeleportCheck(
                float(np.max(np.abs(rep.sigma - np.eye(d) / d))),
                bool(is_psd(rep.sigma - rho / 4**q)),
                rep.min_entropy,
                rep.bound,
            )
        )
    return out


@dataclass
class LearnOutcome:
    index: int
    q: int
    x_count: int
    y_count: int
    max_updates: int
    update_limit: float
    matches: bool
    cost: int
    cost_bound: float
    distinct_messages: int
    chromatic_number: int
    oracle_exact: bool
    audit_passed: bool
    min_progress_margin: float

    @property
    def passed(self) -> bool:
        return (
            self.matches
            and self.audit_passed
            and self.max_updates <= self.update_limit
            and self.chromatic_number <= self.distinct_messages
        )


def learn_instance(p, f, epsilon: float, index: int = 0, exact_limit: int = 20) -> tuple[LearnOutcome, object]:
    cfg = LearnerConfig(epsilon)
    det = compile_deterministic_protocol(p, f, cfg, audit=True)
    ok, _ = validate_compiled(det, f)
    reports = [audit_progress(run) for run in det.runs.values()]
    margins = [u.progress - u.deficit / 2 for run in det.runs.values() for u in run.audit]
    oracle = exact_one_way_cost(f, exact_limit)
    outcome = LearnOutcome(
        index=index,
        q=p.q,
        x_count=f.x_count,
        y_count=f.y_count,
        max_updates=max(run.updates for run in det.runs.values()),
        update_limit=2 * p.q / (5 * math.sqrt(epsilon)),
        matches=ok,
        cost=det.cost,
        cost_bound=det.cost_bound(p.prior_budget),
        distinct_messages=det.distinct_messages,
        chromatic_number=oracle.chromatic_number,
        oracle_exact=oracle.exact,
        audit_passed=all(r.passed for r in reports),
        min_progress_margin=min(margins) if margins else math.inf,
    )
    return outcome, det


def suite_protocols(count: int, seed, epsilon: float = 1e-4):
    """Yield ``count`` random ``(protocol, function)`` pairs with ``q <= 2``, ``|X| <= 8``, ``|Y| <= 32``."""
    rng = make_rng(seed)
    for _ in range(count):
        q = int(rng.integers(1, 3))
        xs = int(rng.integers(2, 9))
        ys = int(rng.integers(4, 33))
        yield random_protocol(q, xs, ys, epsilon, rng)


def learn_suite(count: int, seed, epsilon: float = 1e-4, exact_limit: int = 20) -> list[LearnOutcome]:
    """Compile and check every protocol of :func:`suite_protocols`."""
    return [
        learn_instance(p, f, epsilon, i, exact_limit)[0]
        for i, (p, f) in enumerate(suite_protocols(count, seed, epsilon))
    ]
