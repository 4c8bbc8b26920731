"""Prover-assisted one-way protocols: MajIx and linear space distance (LSD).

Indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import hermitian_eig
from .protocol import UNDEFINED
from .sampling import make_rng, random_orthogonal

NORM_TOL = 1e-10
LSD_CLOSE = 0.1 * math.sqrt(2)
LSD_FAR = 0.9 * math.sqrt(2)
DEFAULT_REPS = 11


class InvalidInstanceError(ValueError):
    pass


def _isqrt_exact(n: int) -> int:
    r = math.isqrt(n)
    if r * r != n:
        raise InvalidInstanceError(f"n = {n} is not a perfect square")
    return r


@dataclass(frozen=True, eq=False)
class MajIxInstance:
    """Alice's string ``x`` and Bob's ``sqrt(n)`` distinct indices ``I``."""

    n: int
    x: np.ndarray
    I: tuple

    def __post_init__(self):
        root = _isqrt_exact(self.n)
        x = np.array(self.x, dtype=np.int8).ravel()
        if x.shape != (self.n,) or not np.all((x == 0) | (x == 1)):
            raise InvalidInstanceError(f"x must be a 0/1 vector of length {self.n}")
        idx = tuple(int(i) for i in self.I)
        if len(idx) != root:
            raise InvalidInstanceError(f"I must hold sqrt(n) = {root} indices, got {len(idx)}")
        if len(set(idx)) != len(idx):
            raise InvalidInstanceError("indices in I must be distinct")
        if any(i < 0 or i >= self.n for i in idx):
            raise InvalidInstanceError(f"indices must lie in 0..{self.n - 1}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "I", idx)

    @property
    def root(self) -> int:
        return math.isqrt(self.n)

    @property
    def k(self) -> int:
        """Number of positions of ``I`` where ``x`` is 1."""
        return int(sum(self.x[i] for i in self.I))

    def __eq__(self, other):
        return (
            isinstance(other, MajIxInstance)
            and self.n == other.n
            and self.I == other.I
            and np.array_equal(self.x, other.x)
        )

    def __hash__(self):
        return hash((self.n, self.I, self.x.tobytes()))


def majix_value_from_count(k: int, root: int) -> int:
    if k == root:
        return 1
    if 10 * k <= 9 * root:
        return 0
    return UNDEFINED


def majix_value(inst: MajIxInstance) -> int:
    """1 if ``x`` is all ones on ``I``, 0 if at most ``0.9 sqrt(n)`` ones there, else undefined."""
    return majix_value_from_count(inst.k, inst.root)


def check_proof(proof, n: int) -> np.ndarray:
    alpha = np.asarray(proof, dtype=complex).ravel()
    if alpha.shape != (n,):
        raise InvalidInstanceError(f"proof must have {n} amplitudes, got {alpha.shape[0]}")
    norm = float(np.vdot(alpha, alpha).real)
    if abs(norm - 1.0) > NORM_TOL:
        raise InvalidInstanceError(f"proof is not normalised: sum |alpha|^2 = {norm!r}")
    return alpha


def phi_I(inst: MajIxInstance) -> np.ndarray:
    v = np.zeros(inst.n, dtype=complex)
    v[list(inst.I)] = 1.0 / inst.n**0.25
    return v


def majix_acceptance_simulated(inst: MajIxInstance, proof) -> float:
    """Alice projects onto ``{i : x_i = 1}``, Bob measures ``span(phi_I)``; product of both."""
    alpha = check_proof(proof, inst.n)
    projected = np.where(inst.x == 1, alpha, 0)
    alice = float(np.vdot(projected, projected).real)
    if alice == 0.0:
        return 0.0
    psi = projected / math.sqrt(alice)
    bob = abs(np.vdot(phi_I(inst), psi)) ** 2
    return alice * bob


def majix_acceptance_closed_form(inst: MajIxInstance, proof) -> float:
    alpha = check_proof(proof, inst.n)
    s = sum(alpha[i] for i in inst.I if inst.x[i] == 1)
    return abs(s) ** 2 / math.sqrt(inst.n)


def majix_acceptance(inst: MajIxInstance, proof) -> float:
    """Acceptance probability of the one-way QMA protocol on ``proof``.

    Evaluated by simulation and by the closed form; they must agree to 1e-10.
    """
    sim = majix_acceptance_simulated(inst, proof)
    closed = majix_acceptance_closed_form(inst, proof)
    if abs(sim - closed) > 1e-10:
        raise ArithmeticError(f"simulation {sim!r} and closed form {closed!r} disagree")
    return sim


def honest_proof(inst: MajIxInstance) -> np.ndarray:
    """Uniform superposition over ``I``."""
    v = np.zeros(inst.n, dtype=complex)
    v[list(inst.I)] = 1.0 / math.sqrt(inst.root)
    return v


@dataclass(frozen=True)
class CheatResult:
    value: float
    proof: np.ndarray
    closed_form: float
    soundness_bound: float = 0.9


def majix_optimal_cheat(inst: MajIxInstance, full: bool = False) -> CheatResult:
    """Best acceptance over all unit proofs and a proof attaining it.

    The acceptance operator is ``Pi_x |phi_I><phi_I| Pi_x``, which vanishes
    off ``span{|i> : i in I}``; its top eigenpair is computed on that block
    (or on the whole space with ``full=True``) and checked against ``k/sqrt(n)``.
    """
    if full:
        support = list(range(inst.n))
    else:
        support = list(inst.I)
    phi = phi_I(inst)[support]
    mask = inst.x[support] == 1
    v = np.where(mask, phi, 0)
    op = np.outer(v, v.conj())
    spec = hermitian_eig(op)
    value = max(0.0, float(spec.eigenvalues[0]))
    proof = np.zeros(inst.n, dtype=complex)
    if value > 0:
        top = spec.eigenvectors[:, 0]
        proof[support] = top
    else:
        # every proof is rejected; return any unit vector outside I
        outside = next((i for i in range(inst.n) if i not in set(inst.I)), inst.I[0])
        proof[outside] = 1.0
    closed = inst.k / math.sqrt(inst.n)
    if abs(value - closed) > 1e-9:
        raise ArithmeticError(f"eigen optimum {value!r} differs from k/sqrt(n) = {closed!r}")
    return CheatResult(value, proof, closed)


def majix_bob_to_alice(inst: MajIxInstance, reps: int = DEFAULT_REPS, seed=None) -> int:
    """Bob sends ``reps`` indices drawn uniformly (with replacement) from ``I``; Alice checks them all."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    rng = make_rng(seed)
    picks = rng.integers(0, inst.root, size=reps)
    return int(all(inst.x[inst.I[j]] == 1 for j in picks))


def bob_to_alice_bits(n: int, reps: int = DEFAULT_REPS) -> int:
    return reps * math.ceil(math.log2(n))


def bob_to_alice_acceptance(inst: MajIxInstance, reps: int = DEFAULT_REPS) -> float:
    """Exact acceptance probability ``(k/sqrt(n))**reps``."""
    return (inst.k / inst.root) ** reps


@dataclass(frozen=True)
class MonteCarloResult:
    seed: int
    n: int
    k: int
    reps: int
    trials: int
    accepted: int

    @property
    def rate(self) -> float:
        return self.accepted / self.trials

    @property
    def standard_error(self) -> float:
        p = self.rate
        return math.sqrt(max(p * (1 - p), 0.0) / self.trials)


def majix_monte_carlo(inst: MajIxInstance, reps: int, trials: int, seed: int) -> MonteCarloResult:
    """Repeat :func:`majix_bob_to_alice`; trial ``t`` is seeded with ``(seed, t)``."""
    accepted = sum(
        majix_bob_to_alice(inst, reps, np.random.SeedSequence([seed, t])) for t in range(trials)
    )
    return MonteCarloResult(seed, inst.n, inst.k, reps, trials, accepted)


def majix_instance(n: int, target: int, seed, k: int | None = None) -> MajIxInstance:
    """Random instance with exactly ``k`` ones of ``x`` inside ``I``.

    ``target=1`` forces ``k = sqrt(n)``; ``target=0`` draws ``k`` uniformly
    from the 0-region unless given; ``target=UNDEFINED`` needs an explicit ``k``.
    """
    rng = make_rng(seed)
    root = _isqrt_exact(n)
    if target == 1:
        k = root if k is None else k
    elif target == 0 and k is None:
        k = int(rng.integers(0, (9 * root) // 10 + 1))
    elif k is None:
        raise ValueError("an explicit k is needed for this target")
    if majix_value_from_count(k, root) != target:
        raise ValueError(f"k = {k} does not give value {target} at n = {n}")
    idx = rng.choice(n, size=root, replace=False)
    x = rng.integers(0, 2, size=n).astype(np.int8)
    ones = rng.choice(root, size=k, replace=False)
    x[idx] = 0
    x[idx[ones]] = 1
    return MajIxInstance(n, x, tuple(int(i) for i in idx))


@dataclass(frozen=True, eq=False)
class LsdInstance:
    """Two ``d/4``-dimensional subspaces of ``R^d`` given by orthonormal basis columns."""

    d: int
    V: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        if self.d < 4 or self.d % 4:
            raise InvalidInstanceError(f"d must be a positive multiple of 4, got {self.d}")
        k = self.d // 4
        for name in ("V", "W"):
            b = np.array(getattr(self, name), dtype=float)
            if b.shape != (self.d, k):
                raise InvalidInstanceError(f"{name} must be {self.d}x{k}, got {b.shape}")
            dev = float(np.max(np.abs(b.T @ b - np.eye(k))))
            if dev > NORM_TOL:
                raise InvalidInstanceError(f"{name} basis is not orthonormal (deviation {dev:.3e})")
            b.setflags(write=False)
            object.__setattr__(self, name, b)

    def __eq__(self, other):
        return (
            isinstance(other, LsdInstance)
            and self.d == other.d
            and np.array_equal(self.V, other.V)
            and np.array_equal(self.W, other.W)
        )

    def __hash__(self):
        return hash((self.d, self.V.tobytes(), self.W.tobytes()))


def lsd_principal_cosine(inst: LsdInstance) -> float:
    """Largest singular value of ``V^T W``, i.e. the cosine of the smallest principal angle."""
    m = inst.V.T @ inst.W
    top = hermitian_eig(m @ m.T).eigenvalues[0]
    return min(1.0, math.sqrt(max(0.0, top)))


def lsd_distance(inst: LsdInstance) -> float:
    """Minimum Euclidean distance ``sqrt(2 - 2 cos theta_1)`` between unit vectors of the subspaces.

    For small angles ``theta_1`` is recovered from its sine (smallest singular
    value of the part of V orthogonal to W) to avoid cancellation in ``1 - cos``.
    """
    c = lsd_principal_cosine(inst)
    if c < 0.7:
        return math.sqrt(max(0.0, 2.0 - 2.0 * c))
    resid = inst.V - inst.W @ (inst.W.T @ inst.V)
    sin2 = max(0.0, float(hermitian_eig(resid.T @ resid).eigenvalues[-1]))
    theta = math.asin(min(1.0, math.sqrt(sin2)))
    return 2.0 * math.sin(theta / 2.0)


def lsd_value(inst: LsdInstance) -> int:
    dist = lsd_distance(inst)
    if dist <= LSD_CLOSE:
        return 1
    if dist >= LSD_FAR:
        return 0
    return UNDEFINED


def lsd_protocol(inst: LsdInstance, proof) -> float:
    """Acceptance ``|P_W P_V psi|^2``: Alice keeps the part in V, Bob then tests W."""
    psi = np.asarray(proof, dtype=float).ravel()
    if psi.shape != (inst.d,):
        raise InvalidInstanceError(f"proof must have length {inst.d}")
    norm = float(psi @ psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise InvalidInstanceError(f"proof is not a unit vector: |psi|^2 = {norm!r}")
    in_v = inst.V @ (inst.V.T @ psi)
    in_w = inst.W @ (inst.W.T @ in_v)
    return float(in_w @ in_w)


def lsd_optimal_proof(inst: LsdInstance) -> tuple[float, np.ndarray]:
    """Optimal acceptance ``cos^2 theta_1`` and the first principal vector of V attaining it."""
    m = inst.V.T @ inst.W
    spec = hermitian_eig(m @ m.T)
    u = spec.eigenvectors[:, 0].real
    if np.linalg.norm(u) < 0.5:
        u = spec.eigenvectors[:, 0].imag
    v = inst.V @ u
    v /= np.linalg.norm(v)
    return lsd_protocol(inst, v), v


def _unit_in(basis: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    c = coeffs / np.linalg.norm(coeffs, axis=-1, keepdims=True)
    return c @ basis.T


def lsd_sampled_distance(inst: LsdInstance, samples: int = 10_000, seed=0) -> float:
    """Randomised minimisation of ``|v - w|`` over unit ``v`` in V and ``w`` in W.

    Half the budget goes to uniform sampling, the rest to a shrinking-step
    random local search from the best sample.  Uses only distance evaluations.
    """
    rng = make_rng(seed)
    k = inst.d // 4
    n_global = samples // 2
    a = rng.standard_normal((n_global, k))
    b = rng.standard_normal((n_global, k))
    dist = np.linalg.norm(_unit_in(inst.V, a) - _unit_in(inst.W, b), axis=1)
    best = int(np.argmin(dist))
    ca, cb, best_d = a[best] / np.linalg.norm(a[best]), b[best] / np.linalg.norm(b[best]), float(dist[best])
    step = 0.5
    remaining = samples - n_global
    batch = 50
    while remaining > 0:
        m = min(batch, remaining)
        remaining -= m
        pa = ca + step * rng.standard_normal((m, k))
        pb = cb + step * rng.standard_normal((m, k))
        dd = np.linalg.norm(_unit_in(inst.V, pa) - _unit_in(inst.W, pb), axis=1)
        j = int(np.argmin(dd))
        if dd[j] < best_d:
            best_d = float(dd[j])
            ca, cb = pa[j] / np.linalg.norm(pa[j]), pb[j] / np.linalg.norm(pb[j])
        else:
            step *= 0.7
    return best_d


def lsd_instance(d: int, angle: float, seed) -> LsdInstance:
    """Random instance whose principal angles all equal ``angle`` (so ``theta_1 = angle``)."""
    if d < 4 or d % 4:
        raise InvalidInstanceError(f"d must be a positive multiple of 4, got {d}")
    rng = make_rng(seed)
    k = d // 4
    rot = random_orthogonal(d, rng)
    eye = np.eye(d)
    V = eye[:, :k]
    W = math.cos(angle) * eye[:, :k] + math.sin(angle) * eye[:, k : 2 * k]
    return LsdInstance(d, rot @ V, rot @ W)
