"""Pure numpy implementations of the hot kernels.

These are the reference versions. ``_kernels.pyx`` implements the same
signatures with typed loops; :mod:`netreach.kernels` picks one at import.
"""
import numpy as np


def krylov(A, B, k):
    """Return ``[B, AB, ..., A^(k-1) B]`` built by repeated multiplication."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    n, m = B.shape
    out = np.empty((n, k * m))
    if k == 0:
        return out
    block = B
    out[:, :m] = block
    for i in range(1, k):
        block = A @ block
        out[:, i * m:(i + 1) * m] = block
    return out


def lti_rollout(A, B, x0, U):
    """Iterate ``x[t+1] = A x[t] + B u[t]`` over the rows of ``U``."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    U = np.ascontiguousarray(U, dtype=np.float64)
    T = U.shape[0]
    X = np.empty((T + 1, A.shape[0]))
    X[0] = x0
    for t in range(T):
        X[t + 1] = A @ X[t] + B @ U[t]
    return X


def network_rollout(pack, x0, U):
    """Simulate the network one subsystem at a time.

    ``pack`` is the flat layout produced by :func:`netreach.kernels.pack_network`.
    Follower commands are rebuilt every step from the neighbours' outputs;
    leaders read their slice of the base command.
    """
    nd, md, pd = pack.n_dims, pack.m_dims, pack.p_dims
    xo, po, uo = pack.x_off, pack.p_off, pack.u_off
    N = nd.shape[0]
    U = np.ascontiguousarray(U, dtype=np.float64)
    T = U.shape[0]

    A = [pack.A_flat[pack.a_off[i]:pack.a_off[i + 1]].reshape(nd[i], nd[i]) for i in range(N)]
    B = [pack.B_flat[pack.b_off[i]:pack.b_off[i + 1]].reshape(nd[i], md[i]) for i in range(N)]
    C = [pack.C_flat[pack.c_off[i]:pack.c_off[i + 1]].reshape(pd[i], nd[i]) for i in range(N)]
    incoming = [[] for _ in range(N)]
    for g in range(pack.g_to.shape[0]):
        i, j = pack.g_to[g], pack.g_from[g]
        L = pack.G_flat[pack.g_off[g]:pack.g_off[g + 1]].reshape(md[i], pd[j])
        incoming[i].append((j, L))

    X = np.empty((T + 1, xo[N]))
    W = np.empty((T + 1, po[N]))
    X[0] = x0
    for t in range(T + 1):
        x = X[t]
        w = W[t]
        for j in range(N):
            w[po[j]:po[j + 1]] = C[j] @ x[xo[j]:xo[j + 1]]
        if t == T:
            break
        nxt = X[t + 1]
        for i in range(N):
            if i < pack.n_followers:
                v = np.zeros(md[i])
                for j, L in incoming[i]:
                    v += L @ w[po[j]:po[j + 1]]
            else:
                v = U[t, uo[i]:uo[i] + md[i]]
            nxt[xo[i]:xo[i + 1]] = A[i] @ x[xo[i]:xo[i + 1]] + B[i] @ v
    return X, W
