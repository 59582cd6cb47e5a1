"""Trimmed mixture of linear regressions.

Same trimmed, constrained EM as the cluster-weighted model, but the
component density is only ``pi_g * N(y; b_g'x + b0_g, sigma_g^2)``: the
covariate distribution is ignored, so trimming only sees vertical residuals.
With G = 1 this is least trimmed squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import constrain_variances
from .core import Dataset, FitConfig, TrimmedFit, validate_dataset
from .density import LOG_2PI, logsumexp_rows
from .em import (_best_of_starts, _component_mass, _Model, _ols_init, _renormalised,
                 _run_start, _weighted_moments)


@dataclass(frozen=True, eq=False)
class MixRegParams:
    weights: np.ndarray
    intercepts: np.ndarray
    slopes: np.ndarray
    noise_vars: np.ndarray

    def __post_init__(self):
        for name in ("weights", "intercepts", "slopes", "noise_vars"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def G(self):
        return self.weights.shape[0]

    @property
    def d(self):
        return self.slopes.shape[1]

    def permuted(self, perm):
        perm = np.asarray(perm)
        return MixRegParams(self.weights[perm], self.intercepts[perm], self.slopes[perm],
                            self.noise_vars[perm])

    def variance_ratio(self):
        return float(self.noise_vars.max() / self.noise_vars.min())


def mixreg_log_densities(dataset: Dataset, params: MixRegParams):
    """(n, G) matrix of log(pi_g * N(y_i; b_g'x_i + b0_g, sigma_g^2))."""
    resid = dataset.y[:, None] - (dataset.x @ params.slopes.T + params.intercepts)
    with np.errstate(divide="ignore"):
        log_w = np.log(params.weights)
    return (log_w - 0.5 * (LOG_2PI + np.log(params.noise_vars))
            - 0.5 * resid * resid / params.noise_vars)


def mixreg_trimmed_loglik(dataset: Dataset, params: MixRegParams, z) -> float:
    keep = np.asarray(z) == 1
    if not np.any(keep):
        return 0.0
    return float(logsumexp_rows(mixreg_log_densities(dataset.subset(keep), params)).sum())


def _from_draws(xs, ys, weights, config):
    fits = [_ols_init(x, y) for x, y in zip(xs, ys)]
    b0 = np.array([f[0] for f in fits])
    b = np.array([f[1] for f in fits])
    v, _ = constrain_variances([f[2] for f in fits], weights, config.c_eps)
    return MixRegParams(weights, b0, b, v)


def mixreg_m_step(dataset: Dataset, resp, config: FitConfig) -> MixRegParams:
    keep = resp.z == 1
    h = int(keep.sum())
    Nk = _component_mass(resp, h)
    weights = Nk / h
    _, _, b0, b, s2 = _weighted_moments(dataset.x[keep], dataset.y[keep], resp.tau[keep], Nk)
    v, _ = constrain_variances(s2, weights, config.c_eps)
    return MixRegParams(weights, b0, b, v)


def _replace(params, g, x, y, config):
    w = _renormalised(params.weights, g, params.G)
    b0 = np.array(params.intercepts)
    b = np.array(params.slopes)
    v = np.array(params.noise_vars)
    b0[g], b[g], v[g] = _ols_init(x, y)
    v, _ = constrain_variances(v, w, config.c_eps)
    return MixRegParams(w, b0, b, v)


MIXREG = _Model(_from_draws, mixreg_log_densities, mixreg_m_step, _replace)


def fit_trimmed_mixreg_once(dataset: Dataset, config: FitConfig, start_index: int = 0,
                            trace=None) -> TrimmedFit:
    validate_dataset(dataset, config)
    return _run_start(dataset, config, start_index, MIXREG, trace)


def fit_trimmed_mixreg(dataset: Dataset, config: FitConfig) -> TrimmedFit:
    """Best-of-starts trimmed mixture of regressions; `config.c_x` is ignored."""
    validate_dataset(dataset, config)
    return _best_of_starts(dataset, config, MIXREG)
