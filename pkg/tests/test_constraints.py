import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwrm.constraints import (WeightedValues, constrain_scatters, constrain_variances,
                              is_feasible, optimal_threshold, sym_eigen, truncate,
                              truncation_objective)
from cwrm.core import BadConfigError, ZeroWeightsError
from cwrm.oracle import grid_threshold


def test_objective_example():
    wv = WeightedValues([1.0, 100.0], [0.5, 0.5], 4.0)
    want = 0.5 * (np.log(13) + 1 / 13) + 0.5 * (np.log(52) + 100 / 52)
    assert truncation_objective(wv, 13.0) == pytest.approx(want, rel=1e-14)


def test_threshold_example():
    wv = WeightedValues([1.0, 100.0], [0.5, 0.5], 4.0)
    m = optimal_threshold(wv)
    assert m == pytest.approx(13.0, rel=1e-12)
    np.testing.assert_allclose(truncate(wv.values, m, wv.c), [13.0, 52.0])
    assert grid_threshold(wv, 100_000).argument == pytest.approx(13.0, rel=1e-3)


def test_variances_c1_pool_to_weighted_mean():
    v, m = constrain_variances([0.25, 0.01], [0.5, 0.5], 1.0)
    np.testing.assert_allclose(v, [0.13, 0.13], rtol=1e-12)
    assert m == pytest.approx(0.13)


def test_feasible_input_is_untouched():
    v, m = constrain_variances([1.0, 3.0], [0.2, 0.8], 5.0)
    assert m is None and list(v) == [1.0, 3.0]
    T = np.array([np.eye(2), 2 * np.eye(2)])
    S, m = constrain_scatters(T, [0.5, 0.5], 2.0)
    assert m is None and np.array_equal(S, T)


def test_zero_eigenvalue_becomes_positive():
    T = np.array([[[1.0, 1.0], [1.0, 1.0]]])    # rank one
    S, m = constrain_scatters(T, [1.0], 10.0)
    ev = np.linalg.eigvalsh(S[0])
    assert m > 0 and ev.min() > 0 and ev.max() / ev.min() <= 10 * (1 + 1e-12)


def test_all_zero_values_hit_floor():
    v, m = constrain_variances([0.0, 0.0], [0.5, 0.5], 4.0)
    assert m > 0 and np.all(v > 0)


def test_errors():
    with pytest.raises(ZeroWeightsError):
        optimal_threshold(WeightedValues([1.0, 2.0], [0.0, 0.0], 2.0))
    with pytest.raises(BadConfigError):
        WeightedValues([1.0], [1.0], 0.5)
    with pytest.raises(ValueError):
        WeightedValues([-1.0], [1.0], 2.0)
    with pytest.raises(ValueError):
        sym_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_sym_eigen_reconstructs():
    A = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]])
    lam, U = sym_eigen(A)
    assert np.all(np.diff(lam) <= 0)
    np.testing.assert_allclose(U.T @ np.diag(lam) @ U, A, atol=1e-12)


def test_c1_makes_scatters_spherical_and_equal():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(3, 2, 2))
    T = A @ np.swapaxes(A, 1, 2)
    S, m = constrain_scatters(T, [0.2, 0.3, 0.5], 1.0)
    np.testing.assert_allclose(S, np.broadcast_to(m * np.eye(2), S.shape), rtol=1e-12,
                               atol=1e-14)


values = st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=8)


@settings(max_examples=200, deadline=None)
@given(values, st.floats(1.0, 1e4), st.integers(0, 2**31))
def test_threshold_beats_every_probe(v, c, seed):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(len(v)))
    wv = WeightedValues(v, w, c)
    m = optimal_threshold(wv)
    f = truncation_objective(wv, m)
    probes = np.geomspace(min(v) / c / 10, max(v) * 10, 400)
    assert np.all(f <= truncation_objective(wv, probes) + 1e-12 * np.abs(f) + 1e-12)
    t = truncate(wv.values, m, c)
    assert t.max() <= c * t.min() * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.floats(1.0, 100.0), st.integers(0, 2**31))
def test_constrained_scatters_feasible_and_symmetric(G, d, c, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(G, d, d)) * rng.uniform(0.01, 10, size=(G, 1, 1))
    T = A @ np.swapaxes(A, 1, 2)
    S, _ = constrain_scatters(T, rng.dirichlet(np.ones(G)), c)
    np.testing.assert_array_equal(S, np.swapaxes(S, 1, 2))
    ev = np.linalg.eigvalsh(S)
    assert ev.min() > 0 and ev.max() <= c * ev.min() * (1 + 1e-8)


def test_truncation_keeps_eigenvectors():
    V = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    T = np.array([V @ np.diag([100.0, 1.0]) @ V.T])
    S, m = constrain_scatters(T, [1.0], 4.0)
    np.testing.assert_allclose(S[0], V @ np.diag([4 * m, m]) @ V.T, rtol=1e-12)
    assert is_feasible(np.linalg.eigvalsh(S[0]), 4.0, rtol=1e-12)
