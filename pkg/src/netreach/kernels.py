"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``NETREACH_PURE_PYTHON=1`` to force the fallback.
"""
import os
from typing import NamedTuple

import numpy as np

from . import _kernels_py

if os.environ.get("NETREACH_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

krylov = _impl.krylov
lti_rollout = _impl.lti_rollout
network_rollout = _impl.network_rollout


class NetworkPack(NamedTuple):
    """Flat, offset-indexed copy of a network for the rollout kernels."""

    n_followers: int
    n_dims: np.ndarray
    m_dims: np.ndarray
    p_dims: np.ndarray
    x_off: np.ndarray
    p_off: np.ndarray
    u_off: np.ndarray
    a_off: np.ndarray
    b_off: np.ndarray
    c_off: np.ndarray
    A_flat: np.ndarray
    B_flat: np.ndarray
    C_flat: np.ndarray
    g_to: np.ndarray
    g_from: np.ndarray
    g_off: np.ndarray
    G_flat: np.ndarray


def _offsets(sizes):
    out = np.zeros(len(sizes) + 1, dtype=np.int64)
    np.cumsum(sizes, out=out[1:])
    return out


def _flat(mats):
    if not mats:
        return np.zeros(0)
    return np.ascontiguousarray(np.concatenate([np.ravel(M) for M in mats]), dtype=np.float64)


def pack_network(spec):
    """Flatten a :class:`~netreach.model.NetworkSpec` into a :class:`NetworkPack`."""
    subs = spec.subsystems
    nd = np.array([s.n for s in subs], dtype=np.int64)
    md = np.array([s.m for s in subs], dtype=np.int64)
    pd = np.array([s.p for s in subs], dtype=np.int64)
    nf = spec.n_followers
    u_off = np.zeros(len(subs), dtype=np.int64)
    if spec.base_input_mode.value == "independent":
        u_off[nf:] = _offsets(md[nf:])[:-1]

    index = {s.id: k for k, s in enumerate(subs)}
    blocks = sorted(
        (((index[i], index[j]), L) for (i, j), L in spec.gains.blocks.items()),
        key=lambda item: item[0],
    )
    g_to = np.array([k[0] for k, _ in blocks], dtype=np.int64)
    g_from = np.array([k[1] for k, _ in blocks], dtype=np.int64)
    return NetworkPack(
        n_followers=nf,
        n_dims=nd,
        m_dims=md,
        p_dims=pd,
        x_off=_offsets(nd),
        p_off=_offsets(pd),
        u_off=u_off,
        a_off=_offsets(nd * nd),
        b_off=_offsets(nd * md),
        c_off=_offsets(pd * nd),
        A_flat=_flat([s.A for s in subs]),
        B_flat=_flat([s.B for s in subs]),
        C_flat=_flat([s.C for s in subs]),
        g_to=g_to,
        g_from=g_from,
        g_off=_offsets([L.size for _, L in blocks]),
        G_flat=_flat([L for _, L in blocks]),
    )
