"""Rank tests for leader- and base-reachability.

Three independent routes decide whether ``(A, B)`` is reachable:

* ``kalman``  - numerical rank of ``[B, AB, ..., A^(n-1) B]``, powers by
  repeated multiplication;
* ``pbh``     - no left eigenvector of ``A`` is orthogonal to ``B``;
* ``gramian`` - rank of ``sum_{t<n} A^t B B^T (A^T)^t`` accumulated by the
  Stein recursion ``W <- A W A^T + B B^T``.

The Kalman route never touches an eigensolver, so the first two serve as
oracles for each other.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionMismatch, NumericalFailure

DEFAULT_TOL = 1e-10

__all__ = [
    "DEFAULT_TOL",
    "Verdict",
    "Method",
    "ReachabilityReport",
    "controllability_matrix",
    "numerical_rank",
    "kalman_test",
    "pbh_test",
    "gramian_test",
    "reachability_gramian",
    "reachability_test",
    "is_leader_reachable",
    "is_base_reachable",
]


class Verdict(enum.Enum):
    REACHABLE = "Reachable"
    UNREACHABLE = "Unreachable"


class Method(enum.Enum):
    KALMAN = "KalmanRank"
    PBH = "PBH"
    GRAMIAN = "Gramian"


@dataclass(frozen=True, eq=False)
class ReachabilityReport:
    """Verdict plus the evidence it rests on.

    For ``KalmanRank`` and ``Gramian``, ``singular_values`` are those of the
    tested matrix and ``rank`` counts the ones above
    ``tolerance * max(1, sigma_1)``. For ``PBH`` they are the per-eigenvalue
    margins ``sigma_min(N^H B)`` (``N`` an orthonormal left eigenbasis) and
    ``rank`` is ``state_dim`` minus the total eigenspace deficiency.
    """

    verdict: Verdict
    method: Method
    rank: int
    state_dim: int
    singular_values: tuple[float, ...]
    tolerance: float
    witness: np.ndarray | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def reachable(self) -> bool:
        return self.verdict is Verdict.REACHABLE

    @property
    def margin(self) -> float:
        """``sigma_n / max(1, sigma_1)``; 0 when fewer than ``state_dim`` values exist."""
        sv = self.singular_values
        if self.state_dim == 0:
            return float("inf")
        if len(sv) < self.state_dim:
            return 0.0
        if self.method is Method.PBH:
            return min(sv)
        return sv[self.state_dim - 1] / max(1.0, sv[0])

    def to_document(self) -> dict:
        doc = {
            "verdict": self.verdict.value,
            "method": self.method.value,
            "rank": self.rank,
            "state_dim": self.state_dim,
            "tolerance": self.tolerance,
            "singular_values": list(self.singular_values),
        }
        if self.witness is not None:
            w = np.asarray(self.witness)
            doc["witness"] = {"real": w.real.tolist(), "imag": w.imag.tolist()}
        if self.notes:
            doc["notes"] = list(self.notes)
        return doc


def _check_pair(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got shape {A.shape}")
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if B.ndim != 2 or B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"B must have {A.shape[0]} rows, got shape {B.shape}")
    return A, B


def controllability_matrix(A, B) -> np.ndarray:
    """``(B, AB, ..., A^(n-1) B)``, shape ``n x (n m)``."""
    A, B = _check_pair(A, B)
    return kernels.krylov(A, B, A.shape[0])


def _svdvals(M) -> np.ndarray:
    if M.size == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(M)):
        raise NumericalFailure("matrix has non-finite entries")
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from None


def numerical_rank(M, tol: float = DEFAULT_TOL) -> tuple[int, np.ndarray]:
    """Count singular values above ``tol * max(1, sigma_1)``.

    Returns
    -------
    rank : int
    singular_values : ndarray
        Descending.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    sv = _svdvals(np.atleast_2d(np.asarray(M, dtype=float)))
    if sv.size == 0:
        return 0, sv
    threshold = tol * max(1.0, sv[0])
    return int(np.count_nonzero(sv > threshold)), sv


def _rank_report(M, n, tol, method) -> ReachabilityReport:
    rank, sv = numerical_rank(M, tol) if n else (0, np.zeros(0))
    verdict = Verdict.REACHABLE if rank == n else Verdict.UNREACHABLE
    return ReachabilityReport(verdict, method, rank, n, tuple(float(s) for s in sv), tol)


def kalman_test(A, B, tol: float = DEFAULT_TOL) -> ReachabilityReport:
    A, B = _check_pair(A, B)
    return _rank_report(controllability_matrix(A, B), A.shape[0], tol, Method.KALMAN)


def reachability_gramian(A, B, T: int) -> np.ndarray:
    """Finite-horizon Gramian ``sum_{t<T} A^t B B^T (A^T)^t``."""
    A, B = _check_pair(A, B)
    if T < 1:
        raise DimensionMismatch("Gramian horizon must be >= 1")
    BBt = B @ B.T
    W = BBt.copy()
    for _ in range(T - 1):
        W = A @ W @ A.T + BBt
    return 0.5 * (W + W.T)


def gramian_test(A, B, tol: float = DEFAULT_TOL) -> ReachabilityReport:
    A, B = _check_pair(A, B)
    n = A.shape[0]
    if n == 0:
        return _rank_report(np.zeros((0, 0)), 0, tol, Method.GRAMIAN)
    return _rank_report(reachability_gramian(A, B, n), n, tol, Method.GRAMIAN)


def _eigenvalue_clusters(lam, scale):
    """Group numerically repeated eigenvalues; returns list of index arrays."""
    radius = 1e-7 * scale
    unassigned = list(range(len(lam)))
    clusters = []
    while unassigned:
        k = unassigned.pop(0)
        members = [k] + [j for j in unassigned if abs(lam[j] - lam[k]) <= radius]
        unassigned = [j for j in unassigned if j not in members]
        clusters.append(np.array(members))
    return clusters


def pbh_test(A, B, tol: float = DEFAULT_TOL) -> ReachabilityReport:
    """Eigenvector (Popov-Belevitch-Hautus) test.

    For each distinct eigenvalue the whole left eigenspace ``N`` is taken
    from the null space of ``(A - lambda I)^H``, so repeated eigenvalues are
    handled: the pair fails when some ``nu = N c`` has
    ``||nu^H B|| <= tol * ||nu|| * max(1, ||B||)``. The first such ``nu`` is
    returned as the witness.
    """
    A, B = _check_pair(A, B)
    n, m = B.shape
    if n == 0:
        return ReachabilityReport(Verdict.REACHABLE, Method.PBH, 0, 0, (), tol)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise NumericalFailure("matrix has non-finite entries")
    try:
        lam = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from None

    a_scale = max(1.0, np.linalg.norm(A, 2))
    b_scale = max(1.0, np.linalg.norm(B, 2)) if m else 1.0
    threshold = tol * b_scale
    margins = []
    deficiency = 0
    witness = None
    for idx in _eigenvalue_clusters(lam, max(1.0, np.max(np.abs(lam)))):
        mu = lam[idx].mean()
        M = (A - mu * np.eye(n)).conj().T
        try:
            _, s, Vh = np.linalg.svd(M)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"SVD did not converge: {exc}") from None
        # null-space dimension: at least one vector, at most the algebraic multiplicity
        loose = int(np.count_nonzero(s <= 1e-8 * a_scale))
        g = min(max(1, loose), len(idx))
        N = Vh[n - g:].conj().T  # orthonormal columns spanning the left eigenspace
        P = N.conj().T @ B  # nu^H B = c^H P for nu = N c
        U, sp, _ = np.linalg.svd(P, full_matrices=True) if m else (np.eye(g), np.zeros(0), None)
        sp_full = np.zeros(g)
        sp_full[: min(g, m)] = sp[: min(g, m)]
        margins.append(float(sp_full.min()))
        failed = int(np.count_nonzero(sp_full <= threshold))
        if failed:
            deficiency += failed
            if witness is None:
                c = U[:, int(np.argmin(sp_full))]
                nu = N @ c
                witness = nu / np.linalg.norm(nu)

    rank = n - deficiency
    verdict = Verdict.REACHABLE if deficiency == 0 else Verdict.UNREACHABLE
    return ReachabilityReport(
        verdict, Method.PBH, rank, n, tuple(sorted(margins, reverse=True)), tol, witness
    )


_METHODS = {
    "kalman": kalman_test,
    "pbh": pbh_test,
    "gramian": gramian_test,
    Method.KALMAN: kalman_test,
    Method.PBH: pbh_test,
    Method.GRAMIAN: gramian_test,
}


def reachability_test(A, B, method="kalman", tol: float = DEFAULT_TOL) -> ReachabilityReport:
    try:
        fn = _METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    return fn(A, B, tol)


def is_leader_reachable(agg, tol: float = DEFAULT_TOL, method="kalman") -> ReachabilityReport:
    """Reachability of the follower aggregate with leader states as input."""
    return reachability_test(agg.A_f, agg.B_f, method, tol)


def is_base_reachable(agg, tol: float = DEFAULT_TOL, method="kalman") -> ReachabilityReport:
    """Reachability of the leader aggregate under the base-station command."""
    return reachability_test(agg.A_l, agg.B_l, method, tol)
