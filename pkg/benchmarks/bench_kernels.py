"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--steps 2000]
"""
import argparse
import timeit

import numpy as np

from netreach import _kernels_py
from netreach.kernels import pack_network
from netreach.aggregate import build_aggregate
from netreach.model import DimensionProfile, random_network, scale_dynamics
from netreach.synth import build_cascade

try:
    from netreach import _kernels as _kernels_ext
except ImportError:
    _kernels_ext = None


def cases(steps):
    rng = np.random.default_rng(0)
    A, B = rng.standard_normal((8, 8)) / 4, rng.standard_normal((8, 2))
    yield "krylov n=8 k=64", lambda k: k.krylov(A, B, 64)

    A, B = rng.standard_normal((16, 16)) / 6, rng.standard_normal((16, 3))
    x0, U = rng.standard_normal(16), rng.standard_normal((steps, 3))
    yield f"lti_rollout n=16 T={steps}", lambda k: k.lti_rollout(A, B, x0, U)

    for nf, nl in ((5, 1), (20, 4)):
        spec = random_network(1, DimensionProfile(((2, 1, 1),) * nf, ((2, 1, 1),) * nl))
        # keep the rollout bounded so the timing is not dominated by inf/nan arithmetic
        A_c = build_cascade(build_aggregate(spec)).A_c
        spec = scale_dynamics(spec, 0.9 / np.max(np.abs(np.linalg.eigvals(A_c))))
        pack = pack_network(spec)
        n = sum(s.n for s in spec.subsystems)
        x0 = rng.standard_normal(n)
        U = rng.standard_normal((steps, spec.dims.m_base))
        yield f"network_rollout N={nf + nl} T={steps}", (lambda p, x, u: lambda k: k.network_rollout(p, x, u))(pack, x0, U)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args()

    backends = [("python", _kernels_py)]
    if _kernels_ext is not None:
        backends.append(("cython", _kernels_ext))
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"{'case':<32}" + "".join(f"{name:>12}" for name, _ in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, fn in cases(args.steps):
        times = []
        for _, mod in backends:
            fn(mod)  # warm up
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)))
        row = f"{label:<32}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
