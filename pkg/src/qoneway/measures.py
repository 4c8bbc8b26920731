"""Entropies and distances of density matrices, in bits.

Entropies are plain floats; an infinite relative entropy is ``math.inf``
(never a large finite sentinel).
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import (
    ZERO_EIGENVALUE,
    Spectrum,
    as_matrix,
    check_hermitian,
    hermitian_eig,
)

STATE_TOL = 1e-9


class InvalidStateError(ValueError):
    """Input is not a density matrix (PSD with unit trace)."""


def _checked(rho, tol: float = STATE_TOL, name: str = "state") -> tuple[np.ndarray, Spectrum]:
    rho = check_hermitian(rho, name=name)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"{name} has trace {tr!r}, expected 1 within {tol:g}")
    spec = hermitian_eig(rho)
    if spec.eigenvalues[-1] < -tol:
        raise InvalidStateError(f"{name} is not PSD: minimum eigenvalue {spec.eigenvalues[-1]:.3e}")
    return rho, spec


def check_state(rho, tol: float = STATE_TOL, name: str = "state") -> np.ndarray:
    return _checked(rho, tol, name)[0]


def _clamp(value: float) -> float:
    if -STATE_TOL < value < 0.0:
        return 0.0
    return value


def _entropy_terms(lam: np.ndarray) -> float:
    lam = lam[lam >= ZERO_EIGENVALUE]
    return float(-np.sum(lam * np.log2(lam)))


def von_neumann_entropy(rho) -> float:
    """``-Tr rho log2 rho`` with the convention ``0 log 0 = 0``."""
    return _clamp(_entropy_terms(_checked(rho)[1].eigenvalues))


def binary_entropy(u: float) -> float:
    return cross_binary_entropy(u, u)


def cross_binary_entropy(u: float, v: float) -> float:
    """``-u log2 v - (1-u) log2 (1-v)``; infinite when ``v`` puts zero mass where ``u`` does not."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError(f"arguments must lie in [0, 1], got u={u}, v={v}")
    total = 0.0
    for weight, p in ((u, v), (1.0 - u, 1.0 - v)):
        if weight == 0.0:
            continue
        if p == 0.0:
            return math.inf
        total -= weight * math.log2(p)
    return total


def _support_leak(rho: np.ndarray, spec: Spectrum, threshold: float = ZERO_EIGENVALUE) -> float:
    """Weight of ``rho`` on the numerical kernel of the state with spectrum ``spec``."""
    kernel = spec.eigenvectors[:, spec.eigenvalues <= threshold]
    if kernel.shape[1] == 0:
        return 0.0
    return float(np.trace(kernel.conj().T @ rho @ kernel).real)


def support_contained(rho, sigma) -> bool:
    """True iff ``supp rho`` lies inside ``supp sigma`` up to the zero-eigenvalue threshold."""
    rho = as_matrix(rho)
    return _support_leak(rho, hermitian_eig(sigma)) < ZERO_EIGENVALUE


def relative_entropy(
    rho,
    sigma,
    *,
    rho_spectrum: Spectrum | None = None,
    support_threshold: float = ZERO_EIGENVALUE,
) -> float:
    """``Tr rho log2 rho - Tr rho log2 sigma``, or ``inf`` if the supports are not nested.

    Both traces are evaluated separately, each in the eigenbasis of its own
    logarithm's argument; only the support of ``sigma`` enters the second term.
    Eigenvalues of ``sigma`` at or below ``support_threshold`` count as zero.
    Callers that know ``sigma`` is full rank (e.g. the learner's guesses, whose
    small eigenvalues are genuine) may pass ``0.0`` to keep every positive one.
    """
    if rho_spectrum is None:
        rho, rs = _checked(rho, name="rho")
    else:
        rho, rs = check_hermitian(rho, name="rho"), rho_spectrum
    sigma, ss = _checked(sigma, name="sigma")
    if _support_leak(rho, ss, support_threshold) >= ZERO_EIGENVALUE:
        return math.inf
    keep = ss.eigenvalues > support_threshold
    u = ss.eigenvectors[:, keep]
    weights = np.einsum("ij,ik,kj->j", u.conj(), rho, u).real
    cross = float(np.sum(weights * np.log2(ss.eigenvalues[keep])))
    return _clamp(-_entropy_terms(rs.eigenvalues) - cross)


def relative_min_entropy(rho, sigma) -> float:
    """Smallest ``c`` with ``sigma - rho / 2**c`` PSD.

    Computed as ``log2`` of the top eigenvalue of ``sigma^{-1/2} rho sigma^{-1/2}``
    on the support of ``sigma``; ``inf`` when ``rho`` leaves that support.
    """
    rho = check_state(rho, name="rho")
    sigma, ss = _checked(sigma, name="sigma")
    if _support_leak(rho, ss) >= ZERO_EIGENVALUE:
        return math.inf
    keep = ss.eigenvalues > ZERO_EIGENVALUE
    u = ss.eigenvectors[:, keep]
    inv_sqrt = u * (1.0 / np.sqrt(ss.eigenvalues[keep]))
    m = inv_sqrt.conj().T @ rho @ inv_sqrt
    top = hermitian_eig(0.5 * (m + m.conj().T), tol=1e-9).eigenvalues[0]
    return math.log2(top)


def trace_norm(m) -> float:
    return float(np.sum(np.abs(hermitian_eig(m, tol=1e-9).eigenvalues)))


def trace_distance(rho, sigma) -> float:
    """Trace norm of ``rho - sigma`` (ranges over [0, 2] for states)."""
    return trace_norm(as_matrix(rho) - as_matrix(sigma))


def pinch(rho, projector) -> np.ndarray:
    """Unread two-outcome measurement ``P rho P + (I-P) rho (I-P)``."""
    rho = as_matrix(rho)
    p = as_matrix(projector)
    q = np.eye(p.shape[0]) - p
    return p @ rho @ p + q @ rho @ q


def pinsker_bound(rel_entropy: float) -> float:
    """Trace-distance ceiling ``sqrt(2 ln 2 S)`` implied by a relative entropy in bits."""
    return math.sqrt(2.0 * math.log(2.0) * rel_entropy)
