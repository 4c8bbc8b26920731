"""Partial Boolean functions and one-way quantum protocols.

A :class:`QuantumOneWayProtocol` fixes one message state per Alice input and
one projector per Bob input; Bob accepts with probability ``Tr(P_y rho_x)``.
Entanglement assistance is modelled abstractly through an input-independent
prior state together with a bound on ``S(rho_x || prior)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import measures
from .linalg import as_matrix, check_hermitian, hermitian_defect, hermitian_eig, tensor_product
from .sampling import make_rng, random_unitary

UNDEFINED = -1
DEFAULT_DIM_CAP = 256
_SYMBOLS = {"0": 0, "1": 1, "*": UNDEFINED}


class ProtocolInvariantError(ValueError):
    """A protocol or function violates one of its stated invariants.

    ``invariant`` names the violated invariant (e.g. ``"message trace"``).
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant} invariant violated: {message}")
        self.invariant = invariant


class DimensionCapError(ValueError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"required dimension {required} exceeds the dimension cap {cap}; rerun with a cap >= {required}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True, eq=False)
class PartialFunction:
    """Lookup table ``values[x, y]`` with entries 0, 1 or ``UNDEFINED``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int8)
        if v.ndim != 2 or v.size == 0:
            raise ProtocolInvariantError("table shape", f"expected a non-empty 2-D table, got shape {v.shape}")
        if not np.all(np.isin(v, (0, 1, UNDEFINED))):
            raise ProtocolInvariantError("symbol", "entries must be 0, 1 or undefined")
        if not np.any(v != UNDEFINED):
            raise ProtocolInvariantError("defined cell", "at least one entry must be defined")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "PartialFunction":
        """Build from strings over ``0``, ``1`` and ``*`` (undefined), one per Alice input."""
        bad = {c for row in rows for c in row} - _SYMBOLS.keys()
        if bad:
            raise ProtocolInvariantError("symbol", f"unexpected symbols {sorted(bad)}; use 0, 1 or *")
        if len({len(row) for row in rows}) > 1:
            raise ProtocolInvariantError("table shape", "rows have different lengths")
        return cls(np.array([[_SYMBOLS[c] for c in row] for row in rows], dtype=np.int8))

    def to_rows(self) -> list[str]:
        inv = {0: "0", 1: "1", UNDEFINED: "*"}
        return ["".join(inv[int(c)] for c in row) for row in self.values]

    @property
    def x_count(self) -> int:
        return self.values.shape[0]

    @property
    def y_count(self) -> int:
        return self.values.shape[1]

    @property
    def m(self) -> int:
        """Bits needed to name a column."""
        return math.ceil(math.log2(self.y_count)) if self.y_count > 1 else 0

    def __call__(self, x: int, y: int) -> int:
        return int(self.values[x, y])

    def defined(self, x: int, y: int) -> bool:
        return self.values[x, y] != UNDEFINED

    def defined_columns(self, x: int) -> list[int]:
        return [int(y) for y in np.flatnonzero(self.values[x] != UNDEFINED)]

    def defined_cells(self):
        for x, y in zip(*np.nonzero(self.values != UNDEFINED)):
            yield int(x), int(y)

    def __eq__(self, other):
        return isinstance(other, PartialFunction) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


def constant_function(x_count: int, y_count: int, value: int = 1) -> PartialFunction:
    return PartialFunction(np.full((x_count, y_count), value, dtype=np.int8))


def equality_function(bits: int) -> PartialFunction:
    n = 2**bits
    return PartialFunction(np.eye(n, dtype=np.int8))


def xor_shift_function(n: int) -> PartialFunction:
    """``f(x, i; y, j) = x[i XOR j]`` under the promise ``x == y``.

    Rows are indexed ``x * n + i`` and columns ``y * n + j`` with ``x``, ``y``
    read as ``n``-bit strings (bit 0 first).  ``n`` must be a power of two.
    """
    if n < 1 or n & (n - 1):
        raise ValueError("n must be a power of two")
    size = 2**n * n
    table = np.full((size, size), UNDEFINED, dtype=np.int8)
    for x in range(2**n):
        bits = [(x >> (n - 1 - b)) & 1 for b in range(n)]
        for i in range(n):
            for j in range(n):
                table[x * n + i, x * n + j] = bits[i ^ j]
    return PartialFunction(table)


@dataclass(frozen=True, eq=False)
class QuantumOneWayProtocol:
    """Per-``x`` message states, per-``y`` projectors, and the error bound ``epsilon``.

    ``prior`` is Bob's input-independent starting state (``I/d`` by default) and
    ``prior_budget`` a claimed bound on ``S(rho_x || prior)`` for every ``x``;
    when omitted it is computed as the maximum over the messages.
    """

    messages: np.ndarray
    measurements: np.ndarray
    epsilon: float
    prior: np.ndarray | None = None
    prior_budget: float | None = None
    # set by constructions that are valid by design (tensor powers, padding):
    # skips state checks and reuses the known entropies
    _rho_prior_entropies: tuple = field(default=(), repr=False)

    def __post_init__(self):
        msgs = np.array(self.messages, dtype=complex)
        meas = np.array(self.measurements, dtype=complex)
        if msgs.ndim != 3 or msgs.shape[1] != msgs.shape[2]:
            raise ProtocolInvariantError("dimension", f"messages must have shape (X, d, d), got {msgs.shape}")
        d = msgs.shape[1]
        if meas.ndim != 3 or meas.shape[1:] != (d, d):
            raise ProtocolInvariantError("dimension", f"measurements must have shape (Y, {d}, {d}), got {meas.shape}")
        prior = np.eye(d, dtype=complex) / d if self.prior is None else as_matrix(self.prior).astype(complex)
        if prior.shape != (d, d):
            raise ProtocolInvariantError("dimension", f"prior must be {d}x{d}, got {prior.shape}")
        if not 0.0 <= float(self.epsilon) < 0.5:
            raise ProtocolInvariantError("epsilon", f"error bound must lie in [0, 1/2), got {self.epsilon}")
        for a in (msgs, meas, prior):
            a.setflags(write=False)
        object.__setattr__(self, "messages", msgs)
        object.__setattr__(self, "measurements", meas)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if self._rho_prior_entropies:
            ents = tuple(float(e) for e in self._rho_prior_entropies)
        else:
            self._check_states()
            ents = tuple(measures.relative_entropy(r, prior) for r in msgs)
        object.__setattr__(self, "_rho_prior_entropies", ents)
        if self.prior_budget is None:
            object.__setattr__(self, "prior_budget", max(ents))
        budget = float(self.prior_budget)
        object.__setattr__(self, "prior_budget", budget)
        if not math.isfinite(budget):
            raise ProtocolInvariantError("prior budget", "S(rho_x || prior) is infinite for some x")
        for x, s in enumerate(ents):
            if s > budget + 1e-9:
                raise ProtocolInvariantError(
                    "prior budget", f"S(rho_{x} || prior) = {s:.6g} exceeds prior_budget {budget:.6g}"
                )

    def _check_states(self):
        for x, rho in enumerate(self.messages):
            try:
                measures.check_state(rho, name=f"message {x}")
            except measures.InvalidStateError as exc:
                kind = "message trace" if "trace" in str(exc) else "message PSD"
                raise ProtocolInvariantError(kind, str(exc)) from None
            except ValueError as exc:
                raise ProtocolInvariantError("message Hermitian", str(exc)) from None
        for y, p in enumerate(self.measurements):
            if hermitian_defect(p) > 1e-10 or float(np.max(np.abs(p @ p - p))) > 1e-10:
                raise ProtocolInvariantError("projector", f"measurement {y} is not a Hermitian idempotent")
        try:
            measures.check_state(self.prior, name="prior")
        except ValueError as exc:
            raise ProtocolInvariantError("prior state", str(exc)) from None

    @property
    def dim(self) -> int:
        return self.messages.shape[1]

    @property
    def q(self) -> int:
        """Message length in qubits, ``ceil(log2 d)``."""
        return max(0, math.ceil(math.log2(self.dim)))

    @property
    def x_count(self) -> int:
        return self.messages.shape[0]

    @property
    def y_count(self) -> int:
        return self.measurements.shape[0]

    def prior_relative_entropy(self, x: int) -> float:
        """``S(rho_x || prior)`` (cached at construction)."""
        return self._rho_prior_entropies[x]


def acceptance_probability(p: QuantumOneWayProtocol, x: int, y: int) -> float:
    """``Tr(P_y rho_x)`` clamped to [0, 1]."""
    val = float(np.einsum("ij,ji->", p.measurements[y], p.messages[x]).real)
    if val < -1e-9 or val > 1 + 1e-9:
        raise ProtocolInvariantError("acceptance range", f"Tr(P_{y} rho_{x}) = {val} outside [0, 1]")
    return min(1.0, max(0.0, val))


def cell_error(p: QuantumOneWayProtocol, f: PartialFunction, x: int, y: int) -> float:
    acc = acceptance_probability(p, x, y)
    return 1.0 - acc if f(x, y) == 1 else acc


def verify_protocol(p: QuantumOneWayProtocol, f: PartialFunction) -> float:
    """Largest error over defined cells; the protocol is valid iff this is <= ``p.epsilon``."""
    if (p.x_count, p.y_count) != f.values.shape:
        raise ProtocolInvariantError(
            "dimension", f"protocol is {p.x_count}x{p.y_count} but function table is {f.values.shape}"
        )
    acc = np.einsum("yij,xji->xy", p.measurements, p.messages).real
    acc = np.clip(acc, 0.0, 1.0)
    err = np.where(f.values == 1, 1.0 - acc, acc)
    err = np.where(f.values == UNDEFINED, 0.0, err)
    return float(err.max())


def binomial_tail(k: int, error: float) -> float:
    """Probability that a strict majority of ``k`` independent trials err."""
    need = (k + 1) // 2
    return float(sum(math.comb(k, j) * error**j * (1 - error) ** (k - j) for j in range(need, k + 1)))


def binomial_tail_exact(k: int, error: Fraction) -> Fraction:
    need = (k + 1) // 2
    return sum((math.comb(k, j) * error**j * (1 - error) ** (k - j) for j in range(need, k + 1)), Fraction(0))


def majority_projector(p: np.ndarray, k: int) -> np.ndarray:
    """Projector onto outcome patterns of ``k`` copies of ``{P, I-P}`` with a strict majority of accepts."""
    d = p.shape[0]
    comp = np.eye(d) - p
    # exact[j] projects onto patterns with exactly j accepts so far
    exact = [np.ones((1, 1), dtype=complex)]
    for _ in range(k):
        nxt = [np.kron(exact[0], comp)]
        for j in range(1, len(exact)):
            nxt.append(np.kron(exact[j - 1], p) + np.kron(exact[j], comp))
        nxt.append(np.kron(exact[-1], p))
        exact = nxt
    return sum(exact[(k + 1) // 2 :])


def boost(
    p: QuantumOneWayProtocol, f: PartialFunction | None, k: int, dim_cap: int = DEFAULT_DIM_CAP
) -> QuantumOneWayProtocol:
    """Majority vote over ``k`` parallel copies (``k`` odd).

    The new error bound is the binomial tail at the old bound; when ``f`` is
    given, the boosted protocol is checked against it.
    """
    if k < 1 or k % 2 == 0:
        raise ValueError(f"repetitions must be a positive odd integer, got {k}")
    if k == 1:
        return p
    required = p.dim**k
    if required > dim_cap:
        raise DimensionCapError(required, dim_cap)
    messages = np.array([tensor_product(*([rho] * k)) for rho in p.messages])
    measurements = np.array([majority_projector(P, k) for P in p.measurements])
    prior = tensor_product(*([p.prior] * k))
    # S(rho^{(x)k} || sigma^{(x)k}) = k S(rho || sigma)
    ents = tuple(k * p.prior_relative_entropy(x) for x in range(p.x_count))
    boosted = QuantumOneWayProtocol(
        messages, measurements, binomial_tail(k, p.epsilon), prior, p.prior_budget * k, ents
    )
    if f is not None:
        err = verify_protocol(boosted, f)
        if err > boosted.epsilon + 1e-12:
            raise ProtocolInvariantError("boosted error", f"observed {err} exceeds {boosted.epsilon}")
    return boosted


def pauli_group(q: int) -> list[np.ndarray]:
    single = [
        np.eye(2, dtype=complex),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    return [tensor_product(*ops) for ops in itertools.product(single, repeat=q)]


@dataclass(frozen=True)
class TeleportReport:
    sigma: np.ndarray
    theta: np.ndarray
    theta_min_eigenvalue: float
    theta_trace: float
    min_entropy: float
    bound: float

    @property
    def theta_psd(self) -> bool:
        return self.theta_min_eigenvalue >= -1e-9

    @property
    def ok(self) -> bool:
        return self.theta_psd and self.min_entropy <= self.bound + 1e-9


def teleport_prior(message) -> TeleportReport:
    """Bob's view of a teleported ``q``-qubit message before corrections.

    Averages ``P rho P^dagger`` over the ``4**q`` Pauli corrections.  The
    identity branch contributes ``rho / 4**q``; the remainder ``theta`` must be
    PSD, which bounds ``S_inf(rho || sigma)`` by ``2q``.
    """
    rho = measures.check_state(message, name="message")
    d = rho.shape[0]
    q = int(round(math.log2(d)))
    if 2**q != d or not 1 <= q <= 3:
        raise ValueError(f"teleport_prior needs d = 2**q with q in 1..3, got d = {d}")
    paulis = pauli_group(q)
    branches = [P @ rho @ P.conj().T for P in paulis]
    sigma = sum(branches) / len(paulis)
    theta = sum(branches[1:]) / len(paulis)
    return TeleportReport(
        sigma=sigma,
        theta=theta,
        theta_min_eigenvalue=float(hermitian_eig(check_hermitian(theta)).eigenvalues[-1]),
        theta_trace=float(np.trace(theta).real),
        min_entropy=measures.relative_min_entropy(rho, sigma),
        bound=2.0 * q,
    )


def pad_to_half_rank(p: QuantumOneWayProtocol) -> QuantumOneWayProtocol:
    """Embed into dimension ``2d`` so that every measurement has rank exactly ``d``.

    Messages and prior live in the first block; each projector is extended on
    the second block, which no message touches, so acceptance probabilities and
    relative entropies are unchanged.
    """
    d = p.dim
    e0 = np.diag([1.0, 0.0]).astype(complex)
    e1 = np.diag([0.0, 1.0]).astype(complex)
    messages = np.array([np.kron(e0, r) for r in p.messages])
    meas = []
    for P in p.measurements:
        r = int(round(np.trace(P).real))
        fill = np.diag([1.0] * (d - r) + [0.0] * r).astype(complex)
        meas.append(np.kron(e0, P) + np.kron(e1, fill))
    return QuantumOneWayProtocol(
        messages, np.array(meas), p.epsilon, np.kron(e0, p.prior), p.prior_budget, p._rho_prior_entropies
    )


def induced_function(messages: np.ndarray, measurements: np.ndarray, epsilon: float) -> PartialFunction:
    """Partial function computed with error at most ``epsilon``; other cells undefined."""
    acc = np.einsum("yij,xji->xy", measurements, messages).real
    table = np.full(acc.shape, UNDEFINED, dtype=np.int8)
    table[acc >= 1 - epsilon] = 1
    table[acc <= epsilon] = 0
    return PartialFunction(table)


def random_protocol(
    q: int,
    x_count: int,
    y_count: int,
    epsilon: float,
    seed,
    *,
    noise: float = 3e-3,
    mixing: float = 1e-5,
) -> tuple[QuantumOneWayProtocol, PartialFunction]:
    """Random protocol with many defined cells, and the partial function it computes.

    Each message is a slightly perturbed basis vector of a random basis, mixed
    with ``mixing`` of white noise.  Each projector has rank ``d/2``: it
    contains the basis vectors of an accept-set of labels, avoids those of a
    reject-set, and is filled up with a random subspace of what remains, so
    the projectors generally do not commute.  Cells whose acceptance is not
    within ``epsilon`` of 0 or 1 are left undefined.
    """
    rng = make_rng(seed)
    d = 2**q
    half = max(1, d // 2)
    basis = random_unitary(d, rng)
    labels = rng.integers(0, d, size=x_count)
    messages = []
    for k in labels:
        g = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        psi = basis[:, k] + noise * (basis @ g) / math.sqrt(2)
        psi /= np.linalg.norm(psi)
        rho = (1 - mixing) * np.outer(psi, psi.conj()) + mixing * np.eye(d) / d
        messages.append(0.5 * (rho + rho.conj().T))
    measurements = []
    for _ in range(y_count):
        perm = rng.permutation(d)
        n_acc = int(rng.integers(1, half + 1)) if d > 1 else 1
        accept = perm[:n_acc]
        rest = perm[n_acc:]
        n_rej = int(rng.integers(0, min(half, len(rest)) + 1))
        free = rest[n_rej:]
        cols = [basis[:, i] for i in accept]
        need = half - n_acc
        if need > 0:
            sub = basis[:, free]
            mix = random_unitary(len(free), rng)[:, :need]
            cols.extend((sub @ mix).T)
        b = np.column_stack(cols)
        P = b @ b.conj().T
        measurements.append(0.5 * (P + P.conj().T))
    messages = np.array(messages)
    measurements = np.array(measurements)
    f = induced_function(messages, measurements, epsilon)
    return QuantumOneWayProtocol(messages, measurements, epsilon), f
