"""Dense complex Hermitian linear algebra.

Everything here works on small dense ``numpy`` arrays (dimension at most a few
hundred).  The eigensolver is a cyclic Jacobi method for complex Hermitian
matrices; the rotations of one round-robin step act on disjoint index pairs and
are applied together as vectorized row/column updates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import math

import numpy as np

HERMITIAN_TOL = 1e-12
ZERO_EIGENVALUE = 1e-12
PSD_TOL = 1e-9
_SCALAR_MAX_DIM = 8


class NotHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


class SupportViolation(ValueError):
    """Raised when a spectral function is undefined on a retained eigenvalue."""


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition ``M = U diag(eigenvalues) U^dagger``.

    Eigenvalues are sorted in descending order; ``eigenvectors`` holds the
    matching unit eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m, tol: float = HERMITIAN_TOL, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    defect = hermitian_defect(a)
    if defect > tol * scale:
        raise NotHermitianError(
            f"{name} is not Hermitian: max|M - M^dagger| = {defect:.3e} exceeds {tol:.1e}"
        )
    return 0.5 * (a + a.conj().T)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings of the circle method: every pair (p, q) appears exactly once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


_SCHEDULES: dict[int, list[tuple[np.ndarray, np.ndarray]]] = {}


def _schedule(n: int):
    if n not in _SCHEDULES:
        _SCHEDULES[n] = _round_robin(n)
    return _SCHEDULES[n]


def _jacobi_scalar(m: np.ndarray, max_sweeps: int, tol: float) -> Spectrum:
    # row-cyclic order on Python complex scalars; faster than numpy below d ~ 6
    n = m.shape[0]
    a = [[complex(x) for x in row] for row in m.tolist()]
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    fro = math.sqrt(sum(abs(x) ** 2 for row in a for x in row))
    target, skip = tol * fro, 1e-20 * fro
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                r = abs(apq)
                if r <= skip:
                    continue
                phase = apq / r
                tau = (a[q][q].real - a[p][p].real) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                g_pq, g_qp = s * phase, -s * phase.conjugate()
                for row in a:
                    x, y = row[p], row[q]
                    row[p], row[q] = x * c + y * g_qp, x * g_pq + y * c
                rp, rq = a[p], a[q]
                cg_qp, cg_pq = g_qp.conjugate(), g_pq.conjugate()
                for k in range(n):
                    x, y = rp[k], rq[k]
                    rp[k], rq[k] = c * x + cg_qp * y, cg_pq * x + c * y
                rp[q] = rq[p] = 0j
                for row in v:
                    x, y = row[p], row[q]
                    row[p], row[q] = x * c + y * g_qp, x * g_pq + y * c
        off = math.sqrt(sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= target:
            break
    w = np.array([a[i][i].real for i in range(n)])
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], np.array(v, dtype=complex)[:, order], sweeps)


def jacobi_eigh(m, max_sweeps: int = 60, tol: float = 1e-15) -> Spectrum:
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix (no Hermiticity check)."""
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    if 1 < n <= _SCALAR_MAX_DIM and np.any(a):
        return _jacobi_scalar(a, max_sweeps, tol)
    v = np.eye(n, dtype=complex)
    sweeps = 0
    if n > 1:
        fro = float(np.linalg.norm(a))
        if fro == 0.0:
            return Spectrum(np.zeros(n), v, 0)
        target = tol * fro
        skip = 1e-20 * fro
        schedule = _schedule(n)
        diag_mask = np.eye(n, dtype=bool)
        for sweeps in range(1, max_sweeps + 1):
            for ps, qs in schedule:
                apq = a[ps, qs]
                r = np.abs(apq)
                active = r > skip
                if not np.any(active):
                    continue
                ps_, qs_, apq, r = ps[active], qs[active], apq[active], r[active]
                phase = apq / r
                app = a[ps_, ps_].real
                aqq = a[qs_, qs_].real
                tau = (aqq - app) / (2.0 * r)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G = [[c, s*e^{i phi}], [-s*e^{-i phi}, c]] acting on columns (p, q)
                g_pq = s * phase
                g_qp = -s * np.conj(phase)
                col_p = a[:, ps_].copy()
                col_q = a[:, qs_]
                a[:, ps_] = col_p * c + col_q * g_qp
                a[:, qs_] = col_p * g_pq + col_q * c
                row_p = a[ps_, :].copy()
                row_q = a[qs_, :]
                a[ps_, :] = c[:, None] * row_p + np.conj(g_qp)[:, None] * row_q
                a[qs_, :] = np.conj(g_pq)[:, None] * row_p + c[:, None] * row_q
                a[ps_, qs_] = 0.0
                a[qs_, ps_] = 0.0
                vp = v[:, ps_].copy()
                vq = v[:, qs_]
                v[:, ps_] = vp * c + vq * g_qp
                v[:, qs_] = vp * g_pq + vq * c
            off = float(np.linalg.norm(a[~diag_mask]))
            if off <= target:
                break
    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], v[:, order], sweeps)


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Descending eigendecomposition of a Hermitian matrix.

    Raises :class:`NotHermitianError` when ``max|M - M^dagger|`` exceeds
    ``tol`` (relative to the largest entry when that exceeds one).
    """
    return jacobi_eigh(check_hermitian(m, tol))


def spectral_apply(
    m,
    g: Callable[[np.ndarray], np.ndarray],
    zero_policy: str = "error",
    spectrum: Spectrum | None = None,
) -> np.ndarray:
    """Apply ``g`` to the eigenvalues of a Hermitian matrix.

    ``zero_policy`` controls eigenvalues below ``ZERO_EIGENVALUE`` in magnitude:

    ``"keep"``
        pass them to ``g`` like any other eigenvalue;
    ``"zero"``
        treat them as exact zeros contributing 0 (the ``0 log 0 = 0`` convention);
    ``"error"``
        raise :class:`SupportViolation` if ``g`` is not finite there.
    """
    spec = spectrum if spectrum is not None else hermitian_eig(m)
    lam = spec.eigenvalues
    small = np.abs(lam) < ZERO_EIGENVALUE
    if zero_policy not in ("keep", "zero", "error"):
        raise ValueError(f"unknown zero_policy {zero_policy!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        if zero_policy == "zero":
            mapped = np.zeros_like(lam)
            if np.any(~small):
                mapped[~small] = g(lam[~small])
        else:
            mapped = np.asarray(g(lam), dtype=float)
    if not np.all(np.isfinite(mapped)):
        raise SupportViolation("spectral function undefined at a retained eigenvalue")
    u = spec.eigenvectors
    return (u * mapped) @ u.conj().T


def tensor_product(*ms) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, as_matrix(m))
    return out


def partial_trace(rho, dims: Sequence[int], keep: int | Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order; for a bipartite
    state on ``d_A * d_B`` use ``dims=(d_A, d_B)`` and ``keep=1`` for B.
    """
    rho = as_matrix(rho)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValueError(f"dimension {rho.shape[0]} does not factor as {dims}")
    keep = [keep] if isinstance(keep, (int, np.integer)) else list(keep)
    nsys = len(dims)
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:nsys])
    col = list(letters[nsys : 2 * nsys])
    for k in range(nsys):
        if k not in keep:
            col[k] = row[k]
    out_idx = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    t = np.einsum("".join(row) + "".join(col) + "->" + out_idx, t)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def projector_onto(vectors: Iterable, tol: float = 1e-10) -> np.ndarray:
    """Orthogonal projector onto the span of ``vectors`` (modified Gram-Schmidt)."""
    vecs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if not vecs:
        raise ValueError("need at least one vector (or pass dim via zero_projector)")
    d = vecs[0].shape[0]
    basis: list[np.ndarray] = []
    for v in vecs:
        if v.shape[0] != d:
            raise ValueError("vectors must share one dimension")
        w = v.copy()
        for _ in range(2):
            for b in basis:
                w = w - (b.conj() @ w) * b
        norm = np.linalg.norm(w)
        if norm > tol * max(1.0, np.linalg.norm(v)):
            basis.append(w / norm)
    if not basis:
        return np.zeros((d, d), dtype=complex)
    b = np.column_stack(basis)
    return b @ b.conj().T


def is_psd(m, tol: float = PSD_TOL) -> bool:
    return bool(hermitian_eig(m).eigenvalues[-1] >= -tol)


def is_projector(p, tol: float = 1e-10) -> bool:
    p = as_matrix(p)
    return hermitian_defect(p) <= tol and float(np.max(np.abs(p @ p - p))) <= tol


def rank(m, tol: float = 1e-10) -> int:
    return int(np.sum(np.abs(hermitian_eig(m).eigenvalues) > tol))
