"""Monte-Carlo evidence that reachability is generic in the network parameters.

Unreachability of the follower aggregate is a polynomial condition on the
parameters (every ``n_f x n_f`` minor of the controllability matrix
vanishes), so it fails only on a proper algebraic set. Random draws from
an absolutely continuous distribution should therefore be reachable with
probability one, and small perturbations of a reachable network should stay
reachable. The functions here measure both; the results are consistent
with that picture, not a proof of it.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .aggregate import build_aggregate, dense_gain
from .errors import InvalidProfile
from .model import DimensionProfile, GainMatrix, NetworkSpec, SubsystemModel, random_network
from .reach import DEFAULT_TOL, is_base_reachable, is_leader_reachable
from .synth import build_cascade, follower_steerable

__all__ = [
    "GenericityReport",
    "trial_seed",
    "run_trial",
    "genericity_experiment",
    "network_parameters",
    "network_from_parameters",
    "leader_margin",
    "margin_probe",
]

PROPERTIES = ("leader", "base", "cascade")


@dataclass(frozen=True)
class GenericityReport:
    trials: int
    reachable_count: dict
    min_margin: float
    seed: int
    profile: DimensionProfile
    tolerance: float
    margins: tuple[float, ...] = ()
    failures: tuple[dict, ...] = field(default=())

    def fraction(self, prop: str) -> float:
        return self.reachable_count[prop] / self.trials

    def to_document(self) -> dict:
        return {
            "label": "consistent with generic reachability" if not self.failures else "counterexamples found",
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "profile": self.profile.to_document(),
            "reachable_count": dict(self.reachable_count),
            "min_margin": self.min_margin,
            "failures": list(self.failures),
        }


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial seed derived from ``(seed, trial)``; independent of execution order."""
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, np.uint64)[0])


def leader_margin(agg, tol: float = DEFAULT_TOL) -> float:
    """``sigma_{n_f}(R_l) / max(1, sigma_1(R_l))``, the distance-to-unreachability proxy."""
    return is_leader_reachable(agg, tol).margin


def run_trial(profile: DimensionProfile, seed: int, tol: float = DEFAULT_TOL) -> dict:
    agg = build_aggregate(random_network(seed, profile))
    leader = is_leader_reachable(agg, tol)
    base = is_base_reachable(agg, tol)
    cascade = follower_steerable(build_cascade(agg), tol)
    return {
        "seed": seed,
        "leader": leader.reachable,
        "base": base.reachable,
        "cascade": cascade.reachable,
        "margin": leader.margin,
    }


def _run_chunk(args):
    profile, seeds, tol = args
    return [run_trial(profile, s, tol) for s in seeds]


def genericity_experiment(
    profile: DimensionProfile,
    trials: int,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    workers: int | None = None,
) -> GenericityReport:
    """Draw ``trials`` random networks and count how many are reachable.

    With ``workers > 1`` the trials are split across processes; per-trial
    seeds make the report identical to a serial run.
    """
    if trials < 1:
        raise InvalidProfile("trials must be >= 1")
    profile.check()
    seeds = [trial_seed(seed, k) for k in range(trials)]
    if workers and workers > 1:
        chunks = [seeds[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, [(profile, c, tol) for c in chunks]))
        by_seed = {r["seed"]: r for part in parts for r in part}
        results = [by_seed[s] for s in seeds]
    else:
        results = _run_chunk((profile, seeds, tol))

    counts = {p: sum(r[p] for r in results) for p in PROPERTIES}
    failures = tuple(
        {"trial": k, "trial_seed": r["seed"], "property": p}
        for k, r in enumerate(results)
        for p in PROPERTIES
        if not r[p]
    )
    margins = tuple(r["margin"] for r in results)
    return GenericityReport(trials, counts, min(margins), seed, profile, tol, margins, failures)


# --------------------------------------------------------------------------
# parameter-space perturbations


def network_parameters(spec: NetworkSpec) -> np.ndarray:
    """Stack ``vec(A_1..A_N), vec(B_1..B_N), vec(C_1..C_N), vec(L)`` (column-major vec)."""
    subs = spec.subsystems
    parts = [s.A.ravel(order="F") for s in subs]
    parts += [s.B.ravel(order="F") for s in subs]
    parts += [s.C.ravel(order="F") for s in subs]
    parts.append(dense_gain(spec).ravel(order="F"))
    return np.concatenate(parts)


def network_from_parameters(spec: NetworkSpec, theta) -> NetworkSpec:
    """Inverse of :func:`network_parameters`, using ``spec`` for shapes and roles.

    Every follower gain block becomes present (dense ``L``).
    """
    theta = np.asarray(theta, dtype=float)
    subs = spec.subsystems
    pos = 0

    def take(shape):
        nonlocal pos
        size = shape[0] * shape[1]
        out = theta[pos:pos + size].reshape(shape, order="F")
        pos += size
        return out

    As = [take(s.A.shape) for s in subs]
    Bs = [take(s.B.shape) for s in subs]
    Cs = [take(s.C.shape) for s in subs]
    L = take(dense_gain(spec).shape)
    if pos != theta.size:
        raise ValueError(f"parameter vector has {theta.size} entries, expected {pos}")

    new_subs = tuple(
        SubsystemModel(s.id, s.role, A, B, C) for s, A, B, C in zip(subs, As, Bs, Cs)
    )
    blocks = {}
    r = 0
    for si in subs:
        if not si.is_follower:
            continue
        c = 0
        for sj in subs:
            blocks[(si.id, sj.id)] = L[r:r + si.m, c:c + sj.p]
            c += sj.p
        r += si.m
    return NetworkSpec(new_subs, GainMatrix(blocks), spec.base_input_mode, spec.description)


def margin_probe(
    spec: NetworkSpec,
    direction_seed: int = 0,
    steps: int = 8,
    magnitudes=None,
    direction=None,
    tol: float = DEFAULT_TOL,
) -> list[tuple[float, float]]:
    """Leader-reachability margin along ``theta + s * d`` for a fixed direction ``d``.

    ``d`` is a unit-norm Gaussian direction drawn from ``direction_seed``
    unless given explicitly (then used unscaled). ``magnitudes`` default to
    ``steps`` points spaced geometrically over ``1e-8 .. 1e-1``.
    """
    theta = network_parameters(spec)
    if direction is None:
        d = np.random.default_rng(direction_seed).standard_normal(theta.size)
        d /= np.linalg.norm(d)
    else:
        d = np.asarray(direction, dtype=float)
        if d.shape != theta.shape:
            raise ValueError(f"direction has {d.size} entries, expected {theta.size}")
    if magnitudes is None:
        magnitudes = np.logspace(-8, -1, steps)
    out = []
    for s in magnitudes:
        perturbed = network_from_parameters(spec, theta + s * d)
        out.append((float(s), leader_margin(build_aggregate(perturbed), tol)))
    return out
