"""Minimum-energy steering of follower states through the leaders.

The base station only drives the leaders, and the leader states drive the
followers, so the whole chain is the cascade

    [x_f]+   [A_f  B_f] [x_f]   [ 0 ]
    [x_l]  = [ 0   A_l] [x_l] + [B_l] u

Follower steerability is decided directly on this cascade: the followers
can be sent anywhere in ``T`` steps iff ``P_f @ steering_map(A_c, B_c, T)``
has full row rank ``n_f`` (``P_f = [I 0]``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from . import kernels
from .aggregate import AggregateSystem, Trajectory, simulate_subsystem_level, stack_initial_state
from .errors import DimensionMismatch, HorizonTooShort, NumericalFailure
from .reach import DEFAULT_TOL, Method, ReachabilityReport, Verdict, numerical_rank

__all__ = [
    "CascadeSystem",
    "SteeringPlan",
    "PlanVerification",
    "build_cascade",
    "steering_map",
    "projected_steering_map",
    "follower_steerable",
    "minimum_feasible_horizon",
    "min_energy_steer",
    "verify_plan",
]


@dataclass(frozen=True, eq=False)
class CascadeSystem:
    A_c: np.ndarray
    B_c: np.ndarray
    P_f: np.ndarray
    C_c: np.ndarray
    n_f: int
    n_l: int

    @property
    def state_dim(self) -> int:
        return self.n_f + self.n_l

    @property
    def input_dim(self) -> int:
        return self.B_c.shape[1]


@dataclass(frozen=True, eq=False)
class SteeringPlan:
    horizon: int
    inputs: np.ndarray  # T x m, row t is u_t
    predicted: Trajectory
    target: np.ndarray
    achieved_error: float
    energy: float

    @property
    def x0(self) -> np.ndarray:
        return self.predicted.states[0]

    def to_document(self) -> dict:
        return {
            "horizon": self.horizon,
            "inputs": self.inputs.tolist(),
            "target": self.target.tolist(),
            "x0": self.x0.tolist(),
            "achieved_error": self.achieved_error,
            "energy": self.energy,
        }


@dataclass(frozen=True)
class PlanVerification:
    resimulated_error: float
    energy_recomputed: float
    predicted_error: float

    @property
    def discrepancy(self) -> float:
        return abs(self.resimulated_error - self.predicted_error)


def build_cascade(agg: AggregateSystem) -> CascadeSystem:
    n_f, n_l = agg.A_f.shape[0], agg.A_l.shape[0]
    if n_l == 0:
        raise DimensionMismatch("cascade needs at least one leader state")
    m = agg.B_l.shape[1]
    A_c = np.block([[agg.A_f, agg.B_f], [np.zeros((n_l, n_f)), agg.A_l]])
    B_c = np.vstack([np.zeros((n_f, m)), agg.B_l])
    P_f = np.hstack([np.eye(n_f), np.zeros((n_f, n_l))])
    C_c = block_diag(agg.C_f, agg.C_l)
    return CascadeSystem(A_c, B_c, P_f, C_c, n_f, n_l)


def steering_map(A, B, T: int) -> np.ndarray:
    """Map ``vec(u_0, ..., u_{T-1})`` to ``x_T - A^T x_0``.

    Column blocks are ``(A^(T-1) B, ..., AB, B)``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or B.ndim != 2 or B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"incompatible shapes A {A.shape}, B {B.shape}")
    if T < 1:
        raise DimensionMismatch("steering horizon must be >= 1")
    m = B.shape[1]
    K = kernels.krylov(A, B, T)
    blocks = [K[:, k * m:(k + 1) * m] for k in range(T)]
    return np.hstack(blocks[::-1]) if m else K


def projected_steering_map(cascade: CascadeSystem, T: int) -> np.ndarray:
    return cascade.P_f @ steering_map(cascade.A_c, cascade.B_c, T)


def follower_steerable(cascade: CascadeSystem, tol: float = DEFAULT_TOL, horizon: int | None = None) -> ReachabilityReport:
    """Full row rank test of the follower rows of the cascade steering map.

    ``horizon`` defaults to the cascade state dimension, where the map spans
    the same space as the controllability matrix.

    The rank is taken on the map of ``A_c / max(1, rho(A_c))``. Scaling ``A``
    by a nonzero constant only rescales the column blocks, so the exact rank
    is unchanged, but without it the powers of an expansive ``A_c`` push
    ``sigma_1`` far enough up that the relative cutoff swallows real
    directions.
    """
    T = cascade.state_dim if horizon is None else horizon
    n_f = cascade.n_f
    if T < 1:
        raise DimensionMismatch("steering horizon must be >= 1")
    rho = float(np.max(np.abs(np.linalg.eigvals(cascade.A_c)))) if cascade.state_dim else 0.0
    scale = 1.0 / max(1.0, rho)
    M = cascade.P_f @ steering_map(scale * cascade.A_c, cascade.B_c, T)
    rank, sv = numerical_rank(M, tol)
    verdict = Verdict.REACHABLE if rank == n_f else Verdict.UNREACHABLE
    return ReachabilityReport(
        verdict, Method.KALMAN, rank, n_f, tuple(float(s) for s in sv), tol,
        notes=(f"follower rows of the {T}-step cascade steering map, A_c scaled by {scale:.17g}",),
    )


def minimum_feasible_horizon(cascade: CascadeSystem, tol: float = DEFAULT_TOL, max_horizon: int | None = None) -> int | None:
    """Smallest ``T`` at which the followers are steerable, by bisection.

    Returns None if not steerable even at ``max_horizon`` (default: state dim).
    """
    hi = cascade.state_dim if max_horizon is None else max_horizon
    if not follower_steerable(cascade, tol, hi).reachable:
        return None
    lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        if follower_steerable(cascade, tol, mid).reachable:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _free_response(A, x0, T):
    x = x0
    for _ in range(T):
        x = A @ x
    return x


def min_energy_steer(
    cascade: CascadeSystem,
    x0=None,
    target=None,
    T: int | None = None,
    tol: float = DEFAULT_TOL,
) -> SteeringPlan:
    """Least-norm base commands that put the followers on ``target`` at step ``T``.

    Parameters
    ----------
    cascade : CascadeSystem
    x0 : array_like, optional
        Full cascade state (followers then leaders); zero if omitted.
    target : array_like
        Desired follower state, length ``n_f``.
    T : int, optional
        Horizon; defaults to the cascade state dimension.
    tol : float
        Relative singular-value cutoff for the pseudo-inverse.

    Raises
    ------
    HorizonTooShort
        If the projected steering map is row-deficient at ``T``.
    """
    n, m, n_f = cascade.state_dim, cascade.input_dim, cascade.n_f
    T = n if T is None else int(T)
    if T < 1:
        raise DimensionMismatch("steering horizon must be >= 1")
    x0 = stack_initial_state(n, x0)
    target = np.asarray(target, dtype=float).ravel()
    if target.shape != (n_f,):
        raise DimensionMismatch(f"target has {target.size} entries, expected {n_f}")

    M = projected_steering_map(cascade, T)
    residual = target - cascade.P_f @ _free_response(cascade.A_c, x0, T)
    try:
        U, s, Vh = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from None
    rank = int(np.count_nonzero(s > tol * max(1.0, s[0]))) if s.size else 0
    if rank < n_f:
        raise HorizonTooShort(
            f"follower steering map has rank {rank} < {n_f} at horizon {T}",
            horizon=T, rank=rank, required=n_f,
        )
    vec_u = Vh[:rank].T @ ((U[:, :rank].T @ residual) / s[:rank])
    inputs = vec_u.reshape(T, m)

    X = kernels.lti_rollout(cascade.A_c, cascade.B_c, x0, inputs)
    predicted = Trajectory(np.arange(T + 1), X, X @ cascade.C_c.T)
    error = float(np.linalg.norm(cascade.P_f @ X[-1] - target))
    return SteeringPlan(T, inputs, predicted, target, error, float(np.sum(inputs ** 2)))


def verify_plan(spec, plan: SteeringPlan) -> PlanVerification:
    """Replay ``plan.inputs`` through the subsystem-level simulator."""
    n_f = spec.dims.n_f
    if plan.target.shape != (n_f,):
        raise DimensionMismatch(f"plan target has {plan.target.size} entries, network has n_f = {n_f}")
    traj = simulate_subsystem_level(spec, plan.x0, plan.inputs, plan.horizon)
    err = float(np.linalg.norm(traj.states[-1, :n_f] - plan.target))
    return PlanVerification(err, float(np.sum(plan.inputs ** 2)), plan.achieved_error)
