import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netreach.aggregate import AggregateSystem, build_aggregate
from netreach.errors import DimensionMismatch
from netreach.model import BaseInputMode, GainMatrix, NetworkSpec, Role, SubsystemModel
from netreach.reach import (
    Method,
    Verdict,
    controllability_matrix,
    gramian_test,
    is_base_reachable,
    is_leader_reachable,
    kalman_test,
    numerical_rank,
    pbh_test,
    reachability_gramian,
)

from ensembles import random_pair, well_conditioned
from oracles import cofactor_det, exact, krylov_columns

# hand-computed Krylov columns of the two worked examples
FIG3_COLS = [[1, 0, 0], [0.2, 2, 3], [5.04, 6.8, 7.2]]
FIG4_COLS = [[1, 0, 0], [0.2, 0.5, 1], [1.04, 1.2, 0.65]]


def test_oracle_columns_match_hand_values():
    A3 = exact([[0.2, 1, 1], [2, 0.2, 2], [3, 3, 0.2]])
    cols = krylov_columns(A3, exact([[1, 0, 0]])[0], 3)
    assert cols == exact(FIG3_COLS)
    A4 = exact([[0.2, 1, 0.5], [0.5, 0.2, 1], [1, 0.5, 0.2]])
    assert krylov_columns(A4, exact([[1, 0, 0]])[0], 3) == exact(FIG4_COLS)


def test_controllability_zero_A():
    R = controllability_matrix(np.zeros((3, 3)), np.eye(3))
    assert np.array_equal(R, np.hstack([np.eye(3), np.zeros((3, 6))]))


@pytest.mark.parametrize("agg_name, cols, det", [("fig3_agg", FIG3_COLS, -6), ("fig4_agg", FIG4_COLS, -0.875)])
def test_worked_examples(agg_name, cols, det, request):
    agg = request.getfixturevalue(agg_name)
    R = controllability_matrix(agg.A_f, agg.B_f)
    assert np.allclose(R, np.array(cols).T, rtol=1e-14, atol=1e-14)
    assert float(cofactor_det(R.tolist())) == pytest.approx(det, abs=1e-12)
    assert float(cofactor_det(np.array(cols).T.tolist())) == pytest.approx(det, abs=1e-12)
    report = is_leader_reachable(agg)
    assert report.verdict is Verdict.REACHABLE and report.rank == 3 and report.method is Method.KALMAN


def test_controllability_shape_errors():
    with pytest.raises(DimensionMismatch):
        controllability_matrix(np.zeros((2, 3)), np.zeros((2, 1)))
    with pytest.raises(DimensionMismatch):
        controllability_matrix(np.zeros((2, 2)), np.zeros((3, 1)))


@pytest.mark.parametrize(
    "M, rank",
    [(np.zeros((3, 4)), 0), (np.eye(5), 5), (np.diag([1.0, 1e-14]), 1), (np.diag([1e12, 1e3]), 2)],
)
def test_numerical_rank(M, rank):
    r, sv = numerical_rank(M, 1e-10)
    assert r == rank
    assert np.all(np.diff(sv) <= 0)


def test_zero_input_unreachable():
    agg = AggregateSystem.from_matrices(np.eye(3), np.zeros((3, 1)))
    report = is_leader_reachable(agg)
    assert report.verdict is Verdict.UNREACHABLE and report.rank == 0
    for test in (kalman_test, pbh_test, gramian_test):
        assert not test(np.diag([0.5, 2.0]), np.zeros((2, 2))).reachable


def _leader_spec(mode, b2=1.0):
    subs = (
        SubsystemModel(1, Role.FOLLOWER, [[0.2]], [[1.0]], [[1.0]]),
        SubsystemModel(2, Role.LEADER, [[0.2]], [[1.0]], [[1.0]]),
        SubsystemModel(3, Role.LEADER, [[0.2]], [[b2]], [[1.0]]),
    )
    return NetworkSpec(subs, GainMatrix({(1, 2): [[1.0]]}), mode)


def test_base_reachable_single_leader(fig3_agg):
    assert is_base_reachable(fig3_agg).verdict is Verdict.REACHABLE


def test_base_reachable_independent_leaders():
    agg = build_aggregate(_leader_spec(BaseInputMode.INDEPENDENT))
    for method in ("kalman", "pbh", "gramian"):
        assert is_base_reachable(agg, method=method).reachable


def test_base_unreachable_shared_identical_leaders():
    agg = build_aggregate(_leader_spec(BaseInputMode.SHARED))
    # R_b = [[1, 0.2], [1, 0.2]] has identical rows
    assert agg.B_l.tolist() == [[1.0], [1.0]]
    for method in ("kalman", "pbh", "gramian"):
        report = is_base_reachable(agg, method=method)
        assert report.verdict is Verdict.UNREACHABLE
    assert is_base_reachable(agg).rank == 1


def test_pbh_basic():
    assert pbh_test(np.zeros((3, 3)), np.eye(3)).reachable
    report = pbh_test(np.eye(2), np.array([[1.0], [1.0]]))
    assert report.verdict is Verdict.UNREACHABLE
    w = report.witness
    assert abs(abs(np.vdot(w, [1, -1])) / np.sqrt(2) - 1) < 1e-12


def test_pbh_agrees_on_fig3(fig3_agg):
    assert pbh_test(fig3_agg.A_f, fig3_agg.B_f).verdict is kalman_test(fig3_agg.A_f, fig3_agg.B_f).verdict


def test_pbh_jordan_block():
    J = np.array([[2.0, 1.0], [0.0, 2.0]])
    assert pbh_test(J, np.array([[0.0], [1.0]])).reachable
    bad = pbh_test(J, np.array([[1.0], [0.0]]))
    assert not bad.reachable
    assert abs(abs(bad.witness[1]) - 1) < 1e-8


def test_pbh_complex_witness():
    # rotation block: complex-conjugate modes, uncontrollable from the third state
    A = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.5]])
    B = np.array([[0.0], [0.0], [1.0]])
    report = pbh_test(A, B)
    assert not report.reachable
    w = report.witness
    assert np.linalg.norm(w.conj() @ B) < 1e-12
    lam = (w.conj() @ A @ w) / np.vdot(w, w)
    assert np.linalg.norm(w.conj() @ A - lam * w.conj()) < 1e-10
    assert abs(abs(lam) - 1) < 1e-10


def test_gramian_basics(rng):
    B = rng.standard_normal((3, 2))
    A = rng.standard_normal((3, 3))
    assert np.allclose(reachability_gramian(A, B, 1), B @ B.T)
    assert np.allclose(reachability_gramian(np.zeros((3, 3)), np.eye(3), 5), np.eye(3))
    W = reachability_gramian(A, B, 4)
    assert np.allclose(W, W.T, atol=0)
    assert np.linalg.eigvalsh(W).min() > -1e-12 * np.abs(W).max()
    with pytest.raises(DimensionMismatch):
        reachability_gramian(A, B, 0)


def test_gramian_rank_matches_kalman(fig3_agg):
    W = reachability_gramian(fig3_agg.A_f, fig3_agg.B_f, 3)
    assert numerical_rank(W)[0] == 3 == kalman_test(fig3_agg.A_f, fig3_agg.B_f).rank


def test_report_invariants(rng):
    for _ in range(50):
        A, B, _ = random_pair(rng)
        for test in (kalman_test, gramian_test):
            r = test(A, B)
            sv = np.array(r.singular_values)
            assert r.rank == int(np.count_nonzero(sv > r.tolerance * max(1.0, sv[0])))
            assert r.reachable == (r.rank == r.state_dim)


def test_method_agreement_small_ensemble(rng):
    for _ in range(200):
        A, B, expected = random_pair(rng)
        verdicts = {t(A, B).verdict for t in (kalman_test, pbh_test, gramian_test)}
        assert verdicts == {Verdict.REACHABLE if expected else Verdict.UNREACHABLE}


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_similarity_invariance(seed):
    rng = np.random.default_rng(seed)
    A, B, _ = random_pair(rng, max_n=8)
    S = well_conditioned(rng, A.shape[0])
    Si = np.linalg.inv(S)
    assert kalman_test(S @ A @ Si, S @ B).verdict is kalman_test(A, B).verdict


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_cayley_hamilton_saturation(seed):
    rng = np.random.default_rng(seed)
    # a mild similarity keeps spurious singular values far below the cutoff
    A, B, _ = random_pair(rng, kappa=10.0)
    n = A.shape[0]
    from netreach.kernels import krylov

    assert numerical_rank(krylov(A, B, 2 * n))[0] <= numerical_rank(controllability_matrix(A, B))[0]
