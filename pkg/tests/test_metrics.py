import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fbqelm.emission import spontaneous_pattern, stimulated_pattern
from fbqelm.lattice import BinWindow, CorrelationPattern
from fbqelm.metrics import (ConfusionMatrix, mse_nmse, pattern_fidelity, r2_score, score_report, uhlmann_fidelity,
                            witness_confusion)
from fbqelm.reservoir import ReservoirMap, conjugated_seed_chain
from fbqelm.synthesis import dp_state, random_coefficients
from fbqelm.tasks.witness import PHI_PLUS

finite = st.floats(-10, 10)


def test_mse_nmse_examples():
    t = np.array([1.0, 2.0, 4.0, 7.0])
    assert mse_nmse(t, t) == (0.0, 0.0)
    assert mse_nmse(np.full(4, t.mean()), t)[1] == pytest.approx(1.0)
    assert mse_nmse(t + 0.3, t)[0] == pytest.approx(0.09)
    assert r2_score(t, t) == 1.0
    with pytest.raises(ValueError, match="variance"):
        mse_nmse(t, np.ones(4))
    with pytest.raises(ValueError):
        mse_nmse(t[:3], t)


@given(arrays(float, 12, elements=finite), arrays(float, 12, elements=finite))
def test_nmse_is_mse_over_variance(p, t):
    if np.var(t) < 1e-6:
        return
    mse, nmse = mse_nmse(p, t)
    assert mse >= 0
    assert nmse == pytest.approx(mse / np.var(t))


@given(arrays(float, 10, elements=finite), arrays(float, 10, elements=finite))
def test_r2_plus_nmse_is_one(p, t):
    if np.var(t) < 1e-6:
        return
    rep = score_report(p, t)
    assert abs(rep.r2 + rep.nmse - 1) < 1e-12


def test_score_report_multitask_averages():
    rng = np.random.default_rng(0)
    T = rng.normal(size=(30, 3))
    P = T + 0.1 * rng.normal(size=(30, 3))
    rep = score_report(P, T)
    per = [mse_nmse(P[:, m], T[:, m]) for m in range(3)]
    assert rep.mse == pytest.approx(np.mean([p[0] for p in per]))
    assert rep.nmse == pytest.approx(np.mean([p[1] for p in per]))
    assert rep.r2 == pytest.approx(1 - rep.nmse)
    assert len(rep.to_dict()["per_task"]) == 3
    assert score_report(P[:, 0], T[:, 0]).per_task == ()


def test_pattern_fidelity_examples():
    A = np.array([[1.0, 2.0], [0.0, 3.0]])
    assert pattern_fidelity(A, A) == pytest.approx(1.0)
    assert pattern_fidelity(A, 5 * A) == pytest.approx(1.0)
    assert pattern_fidelity(np.diag([1.0, 0]), np.diag([0, 1.0])) == 0.0
    assert pattern_fidelity(A, A, "bhattacharyya") == pytest.approx(1.0)
    assert pattern_fidelity(np.diag([1.0, 0]), np.diag([0, 1.0]), "bhattacharyya") == 0.0
    with pytest.raises(ValueError):
        pattern_fidelity(A, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        pattern_fidelity(A, A, "other")


@given(arrays(float, (3, 3), elements=st.floats(0, 5)), arrays(float, (3, 3), elements=st.floats(0, 5)))
def test_pattern_fidelity_bounded_symmetric(a, b):
    if a.sum() == 0 or b.sum() == 0:
        return
    for kind in ("frobenius", "bhattacharyya"):
        f = pattern_fidelity(a, b, kind)
        assert 0 <= f <= 1
        assert f == pytest.approx(pattern_fidelity(b, a, kind))


def test_stimulated_and_spontaneous_patterns_are_faithful(rng):
    for _ in range(20):
        state = dp_state(random_coefficients(4, rng))
        rmap = ReservoirMap.from_settings(1.4, rng.uniform(0, 6), rng.uniform(0, 6))
        stim = stimulated_pattern(state, rmap, conjugated_seed_chain(rmap.idler))
        spon = spontaneous_pattern(state, rmap)
        assert pattern_fidelity(stim, spon) >= 1 - 1e-10
        assert pattern_fidelity(CorrelationPattern(stim.values, BinWindow(-3, 4)), spon, "bhattacharyya") >= 1 - 1e-10


def test_uhlmann_examples():
    rho = np.diag([0.5, 0.3, 0.2, 0.0])
    assert uhlmann_fidelity(rho, rho) == pytest.approx(1.0)
    assert uhlmann_fidelity(np.array([1, 0, 0, 0]), np.array([0, 1, 0, 0])) == pytest.approx(0.0, abs=1e-15)
    assert uhlmann_fidelity(PHI_PLUS, np.eye(4) / 4) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        uhlmann_fidelity(np.array([[1, 1j], [0, 0]]), np.eye(2) / 2)
    with pytest.raises(ValueError):
        uhlmann_fidelity(np.diag([1.5, -0.5]), np.eye(2) / 2)


def test_uhlmann_pure_states_overlap(rng):
    for _ in range(20):
        a = rng.normal(size=4) + 1j * rng.normal(size=4)
        b = rng.normal(size=4) + 1j * rng.normal(size=4)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        assert uhlmann_fidelity(a, b) == pytest.approx(abs(np.vdot(a, b)) ** 2, abs=1e-7)
        rho = np.diag(rng.dirichlet(np.ones(4)))
        assert uhlmann_fidelity(a, rho) == pytest.approx(np.real(a.conj() @ rho @ a), abs=1e-7)
        assert uhlmann_fidelity(rho, a) == pytest.approx(uhlmann_fidelity(a, rho), abs=1e-7)


def test_witness_confusion_examples():
    true = np.array([-0.4, -0.2, -0.1, 0.1, 0.3])
    cm, acc, fpr = witness_confusion(true, true)
    assert acc == 1.0 and fpr == 0.0 and cm == ConfusionMatrix(3, 2, 0, 0)
    cm, acc, fpr = witness_confusion(-true, true)
    assert acc == 0.0 and fpr == 1.0
    assert cm.total == 5
    _, _, fpr = witness_confusion(np.array([-0.1, -0.2, 0.2, -0.1, 0.3]), true,
                                  separable=[False, False, False, True, True])
    assert fpr == pytest.approx(0.5)
    with pytest.raises(ValueError):
        witness_confusion(true[:3], true)
