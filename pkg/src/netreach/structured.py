"""Sufficient reachability conditions for structured follower matrices.

Symmetric ``A_f``: with ``A_f = Q diag(lambda) Q^T``, the pair is reachable
when the eigenvalues are distinct and every eigenvector has a nonzero
projection on every column of ``B_f``.

Circulant ``A_f = Circ(a_0, ..., a_{n-1})``: the Fourier matrix
``Phi[k, l] = w^(k l) / sqrt(n)`` with ``w = exp(2 pi j / n)`` diagonalizes
it, ``A_f = Phi Gamma Phi^*`` with ``Gamma_kk = sum_j a_j w^(k j)``. The
same argument then needs ``phi_k^T b != 0`` for every row ``phi_k`` of
``Phi`` and, as in the symmetric case, distinct symbol values.

Both tests are one-sided: they may only assert reachability, and every
assertion is cross-checked against the Kalman rank test.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NumericalFailure
from .reach import DEFAULT_TOL, ReachabilityReport, Verdict, kalman_test

__all__ = [
    "EigenData",
    "CirculantData",
    "StructuredVerdict",
    "is_symmetric",
    "eigen_data",
    "symmetric_sufficiency_test",
    "detect_circulant",
    "circulant_matrix",
    "fourier_matrix",
    "circulant_eigenvalues",
    "circulant_data",
    "circulant_sufficiency_test",
]


@dataclass(frozen=True, eq=False)
class EigenData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # unit-norm columns
    orthonormal: bool


@dataclass(frozen=True, eq=False)
class CirculantData:
    first_row: np.ndarray
    omega: complex
    Phi: np.ndarray
    Gamma: np.ndarray  # diagonal entries (symbol values)

    def reconstruct(self) -> np.ndarray:
        return self.Phi @ np.diag(self.Gamma) @ self.Phi.conj().T


@dataclass(frozen=True, eq=False)
class StructuredVerdict:
    """Outcome of a sufficiency test.

    ``verdict`` is ``Verdict.REACHABLE`` when the structure applies and its
    hypotheses hold, otherwise ``None`` (the test says nothing).
    ``consistent`` is False only if an asserted verdict contradicts the
    Kalman cross-check.
    """

    structure: str
    applies: bool
    hypotheses_hold: bool
    verdict: Verdict | None
    cross_check: ReachabilityReport | None
    detail: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        if self.verdict is None or self.cross_check is None:
            return True
        return self.cross_check.verdict is self.verdict

    def to_document(self) -> dict:
        return {
            "structure": self.structure,
            "applies": self.applies,
            "hypotheses_hold": self.hypotheses_hold,
            "verdict": None if self.verdict is None else self.verdict.value,
            "consistent": self.consistent,
            "detail": self.detail,
            "cross_check": None if self.cross_check is None else self.cross_check.to_document(),
        }


def _square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    return M


def is_symmetric(M, tol: float = DEFAULT_TOL) -> bool:
    M = _square(M)
    if M.size == 0:
        return True
    scale = max(1.0, np.max(np.abs(M)))
    return bool(np.max(np.abs(M - M.T)) <= tol * scale)


def eigen_data(M, symmetric: bool | None = None) -> EigenData:
    M = _square(M)
    if symmetric is None:
        symmetric = is_symmetric(M)
    try:
        if symmetric:
            lam, V = np.linalg.eigh(0.5 * (M + M.T))
        else:
            lam, V = np.linalg.eig(M)
            V = V / np.linalg.norm(V, axis=0)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from None
    return EigenData(lam, V, bool(symmetric))


def _min_gap(values) -> float:
    v = np.asarray(values)
    if v.size < 2:
        return float("inf")
    d = np.abs(v[:, None] - v[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def _projection_margin(P, B, tol):
    """Smallest ``|P[i, j]|`` and whether every entry clears ``tol * max(1, ||b_j||)``."""
    if B.shape[1] == 0:
        return 0.0, False
    mags = np.abs(P)
    col_scale = np.maximum(1.0, np.linalg.norm(B, axis=0))
    return float(mags.min()), bool(np.all(mags > tol * col_scale[None, :]))


def symmetric_sufficiency_test(agg, tol: float = DEFAULT_TOL) -> StructuredVerdict:
    A, B = _square(agg.A_f), np.asarray(agg.B_f, dtype=float)
    if not is_symmetric(A, tol):
        return StructuredVerdict("symmetric", False, False, None, None, {"reason": "A_f is not symmetric"})
    eig = eigen_data(A, symmetric=True)
    rho = float(np.max(np.abs(eig.eigenvalues))) if eig.eigenvalues.size else 0.0
    gap = _min_gap(eig.eigenvalues)
    distinct = gap > tol * max(1.0, rho)
    min_proj, proj_ok = _projection_margin(eig.eigenvectors.T @ B, B, tol)
    holds = distinct and proj_ok
    detail = {
        "min_eigen_gap": gap,
        "eigenvalues_distinct": distinct,
        "min_projection": min_proj,
        "projections_nonzero": proj_ok,
    }
    cross = kalman_test(A, B, tol)
    return StructuredVerdict("symmetric", True, holds, Verdict.REACHABLE if holds else None, cross, detail)


def detect_circulant(M, tol: float = DEFAULT_TOL) -> np.ndarray | None:
    """First row of ``M`` if each row is the cyclic right shift of the one above."""
    M = _square(M)
    n = M.shape[0]
    if n == 0:
        return None
    first = M[0]
    scale = max(1.0, np.max(np.abs(M)))
    for r in range(1, n):
        if np.max(np.abs(M[r] - np.roll(first, r))) > tol * scale:
            return None
    return first.copy()


def circulant_matrix(first_row) -> np.ndarray:
    row = np.asarray(first_row, dtype=float).ravel()
    return np.array([np.roll(row, r) for r in range(row.size)])


def _root_powers(n: int) -> np.ndarray:
    k = np.arange(n)
    # reduce the exponent mod n before exponentiating to keep the phase exact
    return np.exp(2j * np.pi * (np.outer(k, k) % n) / n)


def fourier_matrix(n: int) -> np.ndarray:
    if n < 1:
        raise DimensionMismatch("Fourier matrix order must be >= 1")
    return _root_powers(n) / np.sqrt(n)


def circulant_eigenvalues(first_row) -> np.ndarray:
    """Symbol values ``sum_j a_j w^(k j)`` for ``k = 0..n-1``."""
    row = np.asarray(first_row, dtype=float).ravel()
    if row.size == 0:
        raise DimensionMismatch("circulant first row must be nonempty")
    return _root_powers(row.size) @ row


def circulant_data(first_row) -> CirculantData:
    row = np.asarray(first_row, dtype=float).ravel()
    n = row.size
    return CirculantData(row, complex(np.exp(2j * np.pi / n)), fourier_matrix(n), circulant_eigenvalues(row))


def circulant_sufficiency_test(agg, tol: float = DEFAULT_TOL) -> StructuredVerdict:
    A, B = _square(agg.A_f), np.asarray(agg.B_f, dtype=float)
    row = detect_circulant(A, tol)
    if row is None:
        return StructuredVerdict("circulant", False, False, None, None, {"reason": "A_f is not circulant"})
    data = circulant_data(row)
    gamma = data.Gamma
    rho = float(np.max(np.abs(gamma)))
    gap = _min_gap(gamma)
    distinct = gap > tol * max(1.0, rho)
    min_proj, proj_ok = _projection_margin(data.Phi @ B, B, tol)
    min_proj_conj, proj_conj_ok = _projection_margin(data.Phi.conj() @ B, B, tol)
    holds = proj_ok and distinct
    if holds:
        status = "asserts-reachable"
    elif proj_ok:
        status = "projection-condition-met/declined-repeated-eigenvalues"
    else:
        status = "hypotheses-fail"
    detail = {
        "first_row": row.tolist(),
        "symbol_values": {"real": gamma.real.tolist(), "imag": gamma.imag.tolist()},
        "min_eigen_gap": gap,
        "eigenvalues_distinct": distinct,
        "min_projection": min_proj,
        "projections_nonzero": proj_ok,
        "min_projection_conjugate": min_proj_conj,
        "projections_conjugate_nonzero": proj_conj_ok,
        "status": status,
    }
    cross = kalman_test(A, B, tol)
    return StructuredVerdict("circulant", True, holds, Verdict.REACHABLE if holds else None, cross, detail)
