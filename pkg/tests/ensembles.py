"""Random instance generators shared by the property and acceptance tests."""
import numpy as np

from netreach.model import BaseInputMode, DimensionProfile


def well_conditioned(rng, n, kappa=1e3):
    """Random ``n x n`` matrix with condition number at most ``kappa``."""
    Q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    Q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.exp(rng.uniform(0.0, np.log(kappa), n))
    s[0], s[-1] = 1.0, kappa if n > 1 else 1.0
    return Q1 @ np.diag(s) @ Q2


def random_pair(rng, max_n=12, max_m=4, p_unreachable=0.4, kappa=1e3):
    """``(A, B, expected_reachable)``.

    Reachable draws are Gaussian with ``A`` scaled to spectral radius ~1.
    Unreachable ones are a Kalman-decomposed pair (uncontrollable block of
    random size) hidden by a similarity with condition number <= ``kappa``.
    """
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    if rng.random() >= p_unreachable:
        return rng.standard_normal((n, n)) / np.sqrt(n), rng.standard_normal((n, m)), True
    r = int(rng.integers(0, n))
    At = rng.standard_normal((n, n)) / np.sqrt(n)
    At[r:, :r] = 0.0
    Bt = np.zeros((n, m))
    Bt[:r] = rng.standard_normal((r, m))
    S = well_conditioned(rng, n, kappa)
    return S @ At @ np.linalg.inv(S), S @ Bt, False


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def distinct_spectrum(rng, n, min_gap=0.1):
    steps = min_gap + rng.random(n)
    lam = np.cumsum(steps)
    return lam - lam.mean()


MIXED_PROFILES = [
    DimensionProfile.scalar(3, 1),
    DimensionProfile(((2, 1, 1), (2, 1, 1), (2, 1, 1)), ((2, 1, 1),)),
    DimensionProfile(((2, 2, 2), (2, 2, 2), (1, 1, 1)), ((2, 1, 1), (1, 1, 1))),
    DimensionProfile(((3, 1, 2), (1, 2, 1)), ((2, 2, 1), (1, 2, 2)), base_input_mode=BaseInputMode.SHARED),
    DimensionProfile.scalar(5, 2),
]


def random_profile(rng, max_state=16):
    """Random profile whose cascade state dimension is at most ``max_state``."""
    while True:
        nf = int(rng.integers(1, 5))
        nl = int(rng.integers(1, 3))
        dims = [tuple(int(v) for v in (rng.integers(1, 4), rng.integers(1, 3), rng.integers(1, 3))) for _ in range(nf + nl)]
        if sum(d[0] for d in dims) <= max_state:
            return DimensionProfile(tuple(dims[:nf]), tuple(dims[nf:]))
