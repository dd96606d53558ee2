"""Stacked closed-loop matrices and network simulation.

Closing the follower loop ``v = L w`` gives

    x_f[t+1] = (Abar_f + Bbar_f L_ff C_f) x_f[t] + (Bbar_f L_lf C_l) x_l[t]
    x_l[t+1] = A_l x_l[t] + B_l u[t]

where ``L = (L_ff, L_lf)`` is split after the follower output columns.
Two simulators are provided: one that steps every subsystem with its own
local control law, and one that steps the stacked matrices. They are
written independently so each can check the other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from . import kernels
from .errors import DimensionMismatch
from .model import BaseInputMode, NetworkDims, NetworkSpec

__all__ = [
    "AggregateSystem",
    "Trajectory",
    "split_gain",
    "dense_gain",
    "build_aggregate",
    "stack_initial_state",
    "simulate_subsystem_level",
    "simulate_aggregate",
]


def _ro(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    M.flags.writeable = False
    return M


def _bdiag(mats, cols=0) -> np.ndarray:
    if not mats:
        return np.zeros((0, cols))
    return block_diag(*mats)


@dataclass(frozen=True, eq=False)
class AggregateSystem:
    A_f: np.ndarray
    B_f: np.ndarray
    C_f: np.ndarray
    A_l: np.ndarray
    B_l: np.ndarray
    C_l: np.ndarray
    dims: NetworkDims
    Abar_f: np.ndarray | None = None
    Bbar_f: np.ndarray | None = None
    L_ff: np.ndarray | None = None
    L_lf: np.ndarray | None = None

    def __post_init__(self):
        for name in ("A_f", "B_f", "C_f", "A_l", "B_l", "C_l", "Abar_f", "Bbar_f", "L_ff", "L_lf"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _ro(value))

    @classmethod
    def from_matrices(cls, A_f, B_f, A_l=None, B_l=None, C_f=None, C_l=None) -> "AggregateSystem":
        """Wrap bare matrices, e.g. to run reachability tests on a hand-built pair.

        Missing leader matrices default to a scalar reachable leader per
        column of ``B_f``; missing output matrices default to identities.
        """
        A_f = np.atleast_2d(np.asarray(A_f, dtype=float))
        B_f = np.asarray(B_f, dtype=float).reshape(A_f.shape[0], -1)
        n_f, n_l = A_f.shape[0], B_f.shape[1]
        A_l = np.zeros((n_l, n_l)) if A_l is None else np.atleast_2d(np.asarray(A_l, dtype=float))
        B_l = np.eye(n_l) if B_l is None else np.asarray(B_l, dtype=float).reshape(n_l, -1)
        C_f = np.eye(n_f) if C_f is None else np.atleast_2d(np.asarray(C_f, dtype=float))
        C_l = np.eye(n_l) if C_l is None else np.atleast_2d(np.asarray(C_l, dtype=float))
        dims = NetworkDims(
            n_f=n_f, m_f=0, p_f=C_f.shape[0], n_l=n_l, p_l=C_l.shape[0],
            p_bar=C_f.shape[0] + C_l.shape[0], m_base=B_l.shape[1],
        )
        return cls(A_f, B_f, C_f, A_l, B_l, C_l, dims)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States and outputs at steps ``0..T`` (one row per step)."""

    times: np.ndarray
    states: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        if not (len(self.times) == self.states.shape[0] == self.outputs.shape[0]):
            raise DimensionMismatch("trajectory arrays disagree on the number of steps")

    @property
    def horizon(self) -> int:
        return len(self.times) - 1


def dense_gain(spec: NetworkSpec) -> np.ndarray:
    """Assemble the ``m_f x p_bar`` gain matrix from its sparse blocks."""
    subs = spec.subsystems
    row_off, col_off = {}, {}
    r = c = 0
    for s in subs:
        col_off[s.id] = c
        c += s.p
        if s.is_follower:
            row_off[s.id] = r
            r += s.m
    L = np.zeros((r, c))
    for (i, j), block in spec.gains.blocks.items():
        ri, cj = row_off[i], col_off[j]
        L[ri:ri + block.shape[0], cj:cj + block.shape[1]] = block
    return L


def split_gain(spec: NetworkSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(L_ff, L_lf)``: the first ``p_f`` columns of ``L`` and the rest."""
    L = dense_gain(spec)
    p_f = spec.dims.p_f
    return L[:, :p_f], L[:, p_f:]


def build_aggregate(spec: NetworkSpec) -> AggregateSystem:
    fol, lea = spec.followers, spec.leaders
    dims = spec.dims
    Abar = _bdiag([s.A for s in fol])
    Bbar = _bdiag([s.B for s in fol])
    C_f = _bdiag([s.C for s in fol])
    L_ff, L_lf = split_gain(spec)
    A_l = _bdiag([s.A for s in lea])
    C_l = _bdiag([s.C for s in lea])
    if spec.base_input_mode is BaseInputMode.SHARED:
        B_l = np.vstack([s.B for s in lea]) if lea else np.zeros((0, 0))
    else:
        B_l = _bdiag([s.B for s in lea])

    if Bbar.shape[1] != L_ff.shape[0] or L_ff.shape[1] != C_f.shape[0] or L_lf.shape[1] != C_l.shape[0]:
        raise DimensionMismatch("gain matrix does not conform to the stacked subsystem matrices")
    A_f = Abar + Bbar @ L_ff @ C_f
    B_f = Bbar @ L_lf @ C_l
    return AggregateSystem(A_f, B_f, C_f, A_l, B_l, C_l, dims, Abar, Bbar, L_ff, L_lf)


def stack_initial_state(spec_or_n, x0) -> np.ndarray:
    """Accept a stacked vector or a list of per-subsystem vectors."""
    if isinstance(spec_or_n, NetworkSpec):
        n = sum(s.n for s in spec_or_n.subsystems)
    else:
        n = int(spec_or_n)
    if x0 is None:
        return np.zeros(n)
    if isinstance(x0, (list, tuple)) and x0 and all(np.ndim(v) == 1 for v in x0):
        x0 = np.concatenate([np.asarray(v, dtype=float) for v in x0])
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape != (n,):
        raise DimensionMismatch(f"initial state has {x0.size} entries, expected {n}")
    return x0


def _input_sequence(u, T, m):
    if u is None:
        if T is None:
            raise DimensionMismatch("either an input sequence or a horizon is required")
        return np.zeros((T, m)), T
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u.reshape(-1, m) if m else u.reshape(-1, 0)
    if u.ndim != 2 or u.shape[1] != m:
        raise DimensionMismatch(f"input sequence must have {m} columns, got shape {u.shape}")
    if T is None:
        T = u.shape[0]
    if T < 0:
        raise DimensionMismatch("horizon must be >= 0")
    if u.shape[0] < T:
        raise DimensionMismatch(f"input sequence has {u.shape[0]} steps, horizon is {T}")
    return np.ascontiguousarray(u[:T]), T


def simulate_subsystem_level(spec: NetworkSpec, x0, u=None, T: int | None = None) -> Trajectory:
    """Step every subsystem with its local law ``v_i = sum_j L_ij w_j``.

    Parameters
    ----------
    spec : NetworkSpec
    x0 : array_like or list of array_like
        Stacked initial state (followers then leaders) or one vector per subsystem.
    u : array_like, optional
        Base commands, one row per step, ``m_base`` columns. Zero if omitted.
    T : int, optional
        Number of steps; defaults to the length of ``u``.
    """
    x0 = stack_initial_state(spec, x0)
    U, T = _input_sequence(u, T, spec.dims.m_base)
    X, W = kernels.network_rollout(kernels.pack_network(spec), x0, U)
    return Trajectory(np.arange(T + 1), X, W)


def simulate_aggregate(agg: AggregateSystem, x0_f, x0_l, u=None, T: int | None = None) -> Trajectory:
    """Step the stacked follower/leader recursion."""
    n_f, n_l = agg.A_f.shape[0], agg.A_l.shape[0]
    x0 = np.concatenate([stack_initial_state(n_f, x0_f), stack_initial_state(n_l, x0_l)])
    U, T = _input_sequence(u, T, agg.B_l.shape[1])
    A = np.block([[agg.A_f, agg.B_f], [np.zeros((n_l, n_f)), agg.A_l]])
    B = np.vstack([np.zeros((n_f, agg.B_l.shape[1])), agg.B_l])
    X = kernels.lti_rollout(A, B, x0, U)
    C = block_diag(agg.C_f, agg.C_l)
    return Trajectory(np.arange(T + 1), X, X @ C.T)
