import numpy as np
import pytest

from cwrm import Dataset, FitConfig, fit_trimmed_mixreg
from cwrm.baselines import fit_trimmed_mixreg_once, mixreg_trimmed_loglik

from conftest import random_dataset


def test_lts_recovers_clean_line():
    x = np.linspace(0, 5, 20)
    y = 1.0 + 2.0 * x + np.random.default_rng(0).normal(0, 0.01, 20)
    y[[3, 11]] += 40.0
    res = fit_trimmed_mixreg(Dataset(x, y), FitConfig(G=1, alpha=0.1, n_starts=20))
    assert list(np.flatnonzero(res.resp.z == 0)) == [3, 11]
    assert res.params.slopes[0, 0] == pytest.approx(2.0, abs=0.01)


def test_monotone_and_feasible(rng):
    data = random_dataset(rng, n=100, d=2)
    cfg = FitConfig(G=2, alpha=0.1, c_eps=2.0)
    ratios = []
    res = fit_trimmed_mixreg_once(data, cfg, trace=lambda it, p, r, o: ratios.append(
        p.variance_ratio()))
    h = np.array(res.history)
    assert np.all(np.diff(h) >= -1e-8 * np.abs(h[:-1]))
    assert max(ratios) <= 2.0 * (1 + 1e-8)
    assert res.objective == pytest.approx(mixreg_trimmed_loglik(data, res.params, res.resp.z))


def test_ignores_covariate_spread(rng):
    # the baseline does not model x, so shifting x far away along the fitted
    # lines leaves its objective unchanged
    data = random_dataset(rng, n=60)
    cfg = FitConfig(G=2, n_starts=4)
    a = fit_trimmed_mixreg(data, cfg)
    b = fit_trimmed_mixreg(data.translated([5.0], 0.0), cfg)
    assert b.objective == pytest.approx(a.objective, rel=1e-8)
