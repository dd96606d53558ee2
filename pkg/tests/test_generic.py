import numpy as np
import pytest

from netreach.aggregate import build_aggregate, dense_gain
from netreach.errors import InvalidProfile
from netreach.generic import (
    genericity_experiment,
    leader_margin,
    margin_probe,
    network_from_parameters,
    network_parameters,
    trial_seed,
)
from netreach.model import DimensionProfile, random_network

from ensembles import MIXED_PROFILES

FIG3_SHAPE = DimensionProfile.scalar(3, 1)


def test_trial_seeds_distinct_and_stable():
    seeds = [trial_seed(7, k) for k in range(100)]
    assert len(set(seeds)) == 100
    assert seeds == [trial_seed(7, k) for k in range(100)]
    assert trial_seed(7, 0) != trial_seed(8, 0)


def test_deterministic_report():
    a = genericity_experiment(FIG3_SHAPE, 1, seed=5)
    b = genericity_experiment(FIG3_SHAPE, 1, seed=5)
    assert a == b
    assert a.to_document() == b.to_document()


def test_small_run_counts():
    r = genericity_experiment(MIXED_PROFILES[2], 50, seed=1)
    assert all(r.reachable_count[p] == 50 for p in ("leader", "base", "cascade"))
    assert r.min_margin > r.tolerance
    assert r.fraction("leader") == 1.0 and r.failures == ()
    assert all(m >= 0 for m in r.margins)


def test_leader_coupling_removed():
    r = genericity_experiment(DimensionProfile.scalar(3, 1, leader_coupling=False), 30, seed=0)
    assert r.reachable_count["leader"] == 0
    assert r.reachable_count["cascade"] == 0
    assert {f["property"] for f in r.failures} == {"leader", "cascade"}
    assert r.to_document()["label"] == "counterexamples found"


def test_parallel_matches_serial():
    a = genericity_experiment(MIXED_PROFILES[1], 24, seed=3)
    b = genericity_experiment(MIXED_PROFILES[1], 24, seed=3, workers=3)
    assert a == b


def test_invalid_arguments():
    with pytest.raises(InvalidProfile):
        genericity_experiment(FIG3_SHAPE, 0)
    with pytest.raises(InvalidProfile):
        genericity_experiment(DimensionProfile(((1, 1, 1),), ()), 5)


@pytest.mark.parametrize("profile", MIXED_PROFILES)
def test_parameter_round_trip(profile):
    spec = random_network(4, profile)
    theta = network_parameters(spec)
    again = network_from_parameters(spec, theta)
    assert np.array_equal(network_parameters(again), theta)
    assert np.array_equal(dense_gain(again), dense_gain(spec))
    with pytest.raises(ValueError):
        network_from_parameters(spec, theta[:-1])


def test_probe_zero_magnitude(fig3):
    base = leader_margin(build_aggregate(fig3))
    [(s, m)] = margin_probe(fig3, magnitudes=[0.0])
    assert s == 0.0 and m == base


def test_probe_continuity(fig3):
    base = leader_margin(build_aggregate(fig3))
    probe = margin_probe(fig3, direction_seed=2, steps=8)
    mags = [s for s, _ in probe]
    assert np.allclose(mags, np.logspace(-8, -1, 8))
    for s, m in probe:
        # singular values move at most by the perturbation of the matrix; a loose Lipschitz bound
        assert abs(m - base) <= 200 * s
        assert m > 1e-10


def test_probe_towards_decoupling(fig3):
    theta = network_parameters(fig3)
    d = np.zeros_like(theta)
    # the leader column of the dense gain sits at the end of theta in column-major order
    n_f = fig3.dims.m_f
    d[-n_f:] = -theta[-n_f:]
    probe = margin_probe(fig3, magnitudes=[0.0, 0.5, 0.9, 0.99, 0.999, 1.0], direction=d)
    margins = [m for _, m in probe]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(margins, margins[1:]))
    assert margins[-2] < 0.02 * margins[0] < margins[-3]
    assert margins[-1] == 0.0
