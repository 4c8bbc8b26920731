"""Compile a one-way quantum protocol into a deterministic one.

Bob keeps a classical description of a guess state, starting from the
protocol's input-independent prior.  Alice, who knows both her message state
and Bob's guess, walks Bob's inputs in ascending order.  Whenever the guess
misjudges a defined cell by at least ``10 sqrt(eps)`` she sends that column,
the function value and her true error (on a grid of step ``eps**2``), and both
sides rescale the two measurement blocks of the guess so that it reproduces
the announced acceptance.  Each such update lowers ``S(rho || guess)`` by at
least half the misjudgement, which bounds the number of messages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import measures
from .linalg import as_matrix, hermitian_eig
from .protocol import (
    PartialFunction,
    ProtocolInvariantError,
    QuantumOneWayProtocol,
    verify_protocol,
)

DEGENERATE_DEFICIT = 1e-9
PROGRESS_SLACK = 1e-8
# guesses stay full rank (every update scales both blocks by positive factors),
# so their tiny eigenvalues are genuine and stay in the support
GUESS_SUPPORT = 0.0


class DegenerateGuessError(ValueError):
    """The guess puts (numerically) no weight on the target block."""


class ContractViolation(ValueError):
    """An update was requested for a cell the guess already handles."""


class InternalConsistencyError(RuntimeError):
    """A compiled protocol disagreed with the function it was compiled from."""


@dataclass(frozen=True)
class LearnerConfig:
    epsilon: float = 1e-6
    psd_tol: float = 1e-9
    entropy_tol: float = PROGRESS_SLACK

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1e-4:
            raise ValueError(f"epsilon must lie in (0, 1e-4], got {self.epsilon}")

    @property
    def trigger(self) -> float:
        return 10.0 * math.sqrt(self.epsilon)

    @property
    def quantum_precision(self) -> float:
        return self.epsilon**2

    @property
    def grid_bits(self) -> int:
        return math.ceil(math.log2(1.0 / self.quantum_precision))

    @property
    def grid_max(self) -> int:
        return int(round(self.epsilon / self.quantum_precision))

    def quantize(self, eps_y: float) -> int:
        """Grid index of ``eps_y``: rounded down, but never to 0 for a positive error."""
        if eps_y <= 0.0:
            return 0
        idx = math.floor(eps_y / self.quantum_precision * (1 + 1e-12))
        return min(self.grid_max, max(1, idx))

    def grid_value(self, index: int) -> float:
        return index * self.quantum_precision


@dataclass(frozen=True)
class TranscriptRecord:
    y: int
    value: int
    grid_index: int

    def eps_tilde(self, cfg: LearnerConfig) -> float:
        return cfg.grid_value(self.grid_index)


def encode_transcript(records, m: int, grid_bits: int) -> str:
    """Concatenate fixed-width records: ``y`` (m bits), value (1 bit), grid index."""
    out = []
    for r in records:
        out.append(format(r.y, f"0{m}b") if m else "")
        out.append(str(r.value))
        out.append(format(r.grid_index, f"0{grid_bits}b"))
    return "".join(out)


def decode_transcript(bits: str, m: int, grid_bits: int) -> list[TranscriptRecord]:
    width = m + 1 + grid_bits
    if len(bits) % width:
        raise ValueError(f"transcript length {len(bits)} is not a multiple of the record width {width}")
    records = []
    for start in range(0, len(bits), width):
        chunk = bits[start : start + width]
        y = int(chunk[:m], 2) if m else 0
        records.append(TranscriptRecord(y, int(chunk[m]), int(chunk[m + 1 :], 2)))
    return records


def oriented_projector(projector, value: int) -> np.ndarray:
    """``P`` for value 1, ``I - P`` for value 0."""
    p = as_matrix(projector)
    if value == 1:
        return p
    if value == 0:
        return np.eye(p.shape[0]) - p
    raise ValueError(f"value must be 0 or 1, got {value}")


def deficit(sigma, q) -> float:
    """``1 - Tr(Q sigma)``: the guess weight outside the oriented block."""
    return 1.0 - float(np.einsum("ij,ji->", as_matrix(q), as_matrix(sigma)).real)


def update_guess(sigma, q, eps_tilde: float, trigger: float | None = None) -> np.ndarray:
    """Rescale the blocks of ``sigma`` so that ``Tr(Q sigma') = 1 - eps_tilde``.

    ``sigma' = (1-e)/(1-a) Q sigma Q + e/a (I-Q) sigma (I-Q)`` with
    ``a = 1 - Tr(Q sigma)``.  Passing ``trigger`` enforces ``a >= trigger``.
    """
    sigma = as_matrix(sigma)
    q = as_matrix(q)
    a = deficit(sigma, q)
    if a >= 1.0 - DEGENERATE_DEFICIT:
        raise DegenerateGuessError(
            f"guess has deficit a = {a:.12g}; its support misses the target block (infinite relative entropy)"
        )
    if trigger is not None and a < trigger:
        raise ContractViolation(f"deficit a = {a:.6g} is below the update trigger {trigger:.6g}")
    if not 0.0 <= eps_tilde <= 1.0:
        raise ValueError(f"eps_tilde must lie in [0, 1], got {eps_tilde}")
    comp = np.eye(q.shape[0]) - q
    inside = q @ sigma @ q
    new = ((1.0 - eps_tilde) / (1.0 - a)) * inside
    if eps_tilde > 0.0:
        new = new + (eps_tilde / a) * (comp @ sigma @ comp)
    return 0.5 * (new + new.conj().T)


@dataclass(frozen=True)
class UpdateAudit:
    """Entropy bookkeeping of one update, evaluated against the true message."""

    y: int
    deficit: float
    eps_y: float
    eps_tilde: float
    entropy_before: float
    entropy_after: float
    pinched_entropy: float  # S(pinch rho || pinch sigma)
    entropy_gain_from_pinch: float  # S(pinch rho) - S(rho)
    rank: int

    @property
    def progress(self) -> float:
        return self.entropy_before - self.entropy_after


@dataclass
class LearningRun:
    x: int
    target: np.ndarray
    guesses: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    decisions: dict = field(default_factory=dict)
    audit: list = field(default_factory=list)
    initial_entropy: float = 0.0
    prior_budget: float = 0.0
    config: LearnerConfig | None = None

    @property
    def updates(self) -> int:
        return len(self.transcript)

    @property
    def final_entropy(self) -> float:
        return self.audit[-1].entropy_after if self.audit else self.initial_entropy


def run_learning(
    p: QuantumOneWayProtocol,
    f: PartialFunction,
    x: int,
    cfg: LearnerConfig | None = None,
    audit: bool = True,
) -> LearningRun:
    """Alice's side of the compiled protocol for input ``x``.

    With ``audit`` set, every update also records the entropy quantities needed
    by :func:`audit_progress`; these use the true message, which Bob never sees.
    """
    cfg = cfg or LearnerConfig()
    err = verify_protocol(p, f)
    if err > cfg.epsilon:
        raise ProtocolInvariantError("protocol error", f"observed error {err:.6g} exceeds epsilon {cfg.epsilon:.6g}")
    rho = p.messages[x]
    sigma = p.prior
    rho_spec = None
    run = LearningRun(x=x, target=rho, guesses=[sigma], prior_budget=p.prior_budget, config=cfg)
    if audit:
        rho_spec = hermitian_eig(rho)
        run.initial_entropy = measures.relative_entropy(rho, sigma, rho_spectrum=rho_spec, support_threshold=GUESS_SUPPORT)
    current = run.initial_entropy
    for y in f.defined_columns(x):
        value = f(x, y)
        P = p.measurements[y]
        q = oriented_projector(P, value)
        a = deficit(sigma, q)
        if a < cfg.trigger:
            decision = int(float(np.einsum("ij,ji->", P, sigma).real) >= 0.5)
            if decision != value:
                raise InternalConsistencyError(f"threshold rule misjudged (x={x}, y={y}) with deficit {a}")
            run.decisions[y] = decision
            continue
        eps_y = max(0.0, deficit(rho, q))
        idx = cfg.quantize(eps_y)
        record = TranscriptRecord(y, value, idx)
        new_sigma = update_guess(sigma, q, record.eps_tilde(cfg), trigger=cfg.trigger)
        if audit:
            after = measures.relative_entropy(rho, new_sigma, rho_spectrum=rho_spec, support_threshold=GUESS_SUPPORT)
            pr = measures.pinch(rho, q)
            run.audit.append(
                UpdateAudit(
                    y=y,
                    deficit=a,
                    eps_y=eps_y,
                    eps_tilde=record.eps_tilde(cfg),
                    entropy_before=current,
                    entropy_after=after,
                    pinched_entropy=measures.relative_entropy(
                        pr, measures.pinch(sigma, q), support_threshold=GUESS_SUPPORT
                    ),
                    entropy_gain_from_pinch=measures.von_neumann_entropy(pr) - measures.von_neumann_entropy(rho),
                    rank=int(round(np.trace(q).real)),
                )
            )
            current = after
        run.transcript.append(record)
        run.decisions[y] = value
        sigma = new_sigma
        run.guesses.append(sigma)
    return run


@dataclass(frozen=True)
class AuditLine:
    step: str
    passed: bool
    detail: str


@dataclass
class AuditReport:
    lines: list

    @property
    def passed(self) -> bool:
        return all(line.passed for line in self.lines)

    @property
    def failures(self) -> list:
        return [line for line in self.lines if not line.passed]


def audit_progress(run: LearningRun) -> AuditReport:
    """Check every recorded update against the progress guarantee and its proof steps.

    Lines are emitted per update for: progress ``>= a/2``, monotonicity under
    pinching, the entropy gain of pinching being at most ``H(eps_y)`` and
    finiteness; then once for the iteration bound and, when the final relative
    entropy is at most ``5 sqrt(eps)``, for the trace-distance consequence.
    """
    cfg = run.config or LearnerConfig()
    lines = []
    tol = cfg.entropy_tol
    for i, u in enumerate(run.audit):
        tag = f"update {i} (y={u.y}, rank={u.rank})"
        lines.append(
            AuditLine(
                "progress",
                u.progress >= u.deficit / 2 - tol,
                f"{tag}: dS = {u.progress:.9g}, a/2 = {u.deficit / 2:.9g}",
            )
        )
        lines.append(
            AuditLine(
                "uhlmann",
                u.pinched_entropy <= u.entropy_before + tol,
                f"{tag}: S(pinched) = {u.pinched_entropy:.9g} <= S = {u.entropy_before:.9g}",
            )
        )
        h = measures.binary_entropy(min(1.0, u.eps_y))
        lines.append(
            AuditLine(
                "araki-lieb",
                u.entropy_gain_from_pinch <= h + tol,
                f"{tag}: S(pinch rho) - S(rho) = {u.entropy_gain_from_pinch:.9g} <= H(eps_y) = {h:.9g}",
            )
        )
        lines.append(AuditLine("finite", math.isfinite(u.entropy_after), f"{tag}: S after = {u.entropy_after!r}"))
    if run.audit:
        limit = run.prior_budget / (5 * math.sqrt(cfg.epsilon)) + 1
        lines.append(
            AuditLine("iteration bound", run.updates <= limit, f"{run.updates} updates, limit {limit:.6g}")
        )
        final = run.final_entropy
        if final <= 5 * math.sqrt(cfg.epsilon):
            td = measures.trace_distance(run.target, run.guesses[-1])
            lines.append(AuditLine("pinsker", td < 0.1, f"final S = {final:.6g}, trace distance = {td:.6g}"))
    return AuditReport(lines)


@dataclass
class CompiledProtocol:
    """Deterministic one-way protocol: Alice sends a transcript, Bob replays it.

    Bob's side only uses the prior, his projectors, the column order and the
    grid; ``messages`` maps each Alice input to her bit string.
    """

    prior: np.ndarray
    measurements: np.ndarray
    config: LearnerConfig
    m: int
    messages: dict
    runs: dict = field(default_factory=dict, repr=False)

    @property
    def record_bits(self) -> int:
        return self.m + 1 + self.config.grid_bits

    def message(self, x: int) -> str:
        return self.messages[x]

    @property
    def cost(self) -> int:
        return max((len(b) for b in self.messages.values()), default=0)

    @property
    def distinct_messages(self) -> int:
        return len(set(self.messages.values()))

    def bob_decisions(self, message: str) -> list[int]:
        """Bob's output for every column, given Alice's message."""
        records = {r.y: r for r in decode_transcript(message, self.m, self.config.grid_bits)}
        sigma = self.prior
        out = []
        for y, P in enumerate(self.measurements):
            r = records.get(y)
            if r is not None:
                q = oriented_projector(P, r.value)
                sigma = update_guess(sigma, q, r.eps_tilde(self.config), trigger=self.config.trigger)
                out.append(r.value)
            else:
                out.append(int(float(np.einsum("ij,ji->", P, sigma).real) >= 0.5))
        return out

    def bob_output(self, message: str, y: int) -> int:
        return self.bob_decisions(message)[y]

    def cost_bound(self, prior_budget: float) -> float:
        return (prior_budget / (5 * math.sqrt(self.config.epsilon)) + 1) * self.record_bits


def compile_deterministic_protocol(
    p: QuantumOneWayProtocol,
    f: PartialFunction,
    cfg: LearnerConfig | None = None,
    audit: bool = False,
) -> CompiledProtocol:
    """Run the learner for every ``x`` and check Bob's replay on every defined cell."""
    cfg = cfg or LearnerConfig()
    messages = {}
    runs = {}
    for x in range(f.x_count):
        run = run_learning(p, f, x, cfg, audit=audit)
        runs[x] = run
        messages[x] = encode_transcript(run.transcript, f.m, cfg.grid_bits)
    det = CompiledProtocol(p.prior, p.measurements, cfg, f.m, messages, runs)
    for x in range(f.x_count):
        out = det.bob_decisions(messages[x])
        for y in f.defined_columns(x):
            if out[y] != f(x, y):
                raise InternalConsistencyError(f"replayed decision differs from f at (x={x}, y={y})")
    return det
