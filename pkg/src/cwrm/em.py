"""Trimmed and constrained EM for the linear Gaussian cluster-weighted model.

One start runs::

    params = initialize(...)
    resp, obj = E/C-step(params)          # obj is the trimmed log-likelihood
    repeat:
        params = constrained M-step(resp)
        resp, obj = E/C-step(params)
    until the relative change of obj drops below rel_tol or max_iter is hit

The objective is always evaluated right after a C-step, i.e. with the best
trimming set for the current parameters, so the recorded sequence is
non-decreasing.  `fit` runs several starts and keeps the best one.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple, Optional

import numpy as np

from .constraints import constrain_scatters, constrain_variances
from .core import (AllStartsFailedError, Dataset, DegenerateDensityError,
                   EmptyComponentError, FitConfig, ModelParams, Responsibilities,
                   TooFewPointsError, TrimmedFit, ZeroWeightsError, map_classify,
                   retained_count, validate_dataset)
from .density import (ComponentCache, component_log_densities, logsumexp_rows,
                      posteriors_from_log)

MAX_REDRAWS = 5
EMPTY_MASS = 1e-10


def start_rng(seed: int, start_index: int) -> np.random.Generator:
    """Independent stream for one start, a pure function of (seed, start_index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed),
                                                         spawn_key=(int(start_index),)))


def worker_count(config: FitConfig) -> int:
    """`config.workers`, capped by the CWRM_THREADS environment variable."""
    env = os.environ.get("CWRM_THREADS", "").strip()
    if env.isdigit() and int(env) >= 1:
        return min(config.workers, int(env))
    return config.workers


# --------------------------------------------------------------------------
# regression and moment helpers

def _min_norm_solve(S, b):
    return np.linalg.lstsq(S, b, rcond=None)[0]


def weighted_regression(dataset: Dataset, weights):
    """Weighted least squares of y on x.

    Returns ``(intercept, slope, s2)`` where `s2` is the weighted mean of the
    squared residuals.  A singular weighted covariance of `x` gives the
    minimum-norm slope.
    """
    w = np.asarray(weights, dtype=float)
    W = w.sum()
    if not W > 0:
        raise ZeroWeightsError("regression weights sum to zero")
    x, y = dataset.x, dataset.y
    xbar = w @ x / W
    ybar = w @ y / W
    xc = x - xbar
    yc = y - ybar
    Sxx = (xc * w[:, None]).T @ xc / W
    Sxy = (xc * w[:, None]).T @ yc / W
    slope = _min_norm_solve(Sxx, Sxy)
    intercept = ybar - slope @ xbar
    r = y - x @ slope - intercept
    return float(intercept), slope, float(w @ (r * r) / W)


def _ols_init(x, y):
    """Centered OLS with minimum-norm slope; returns (b0, b, mean squared residual)."""
    xbar = x.mean(axis=0)
    ybar = y.mean()
    xc = x - xbar
    slope = _min_norm_solve(xc.T @ xc, xc.T @ (y - ybar))
    b0 = ybar - slope @ xbar
    r = y - x @ slope - b0
    return b0, slope, float(np.mean(r * r))


def _weighted_moments(x, y, tau, Nk):
    """Per-component weighted means, scatters and regressions (vectorised over G)."""
    mu = tau.T @ x / Nk[:, None]                           # (G, d)
    ybar = tau.T @ y / Nk                                   # (G,)
    xc = x[:, None, :] - mu[None, :, :]                     # (n, G, d)
    yc = y[:, None] - ybar[None, :]                         # (n, G)
    txc = xc * tau[:, :, None]
    T = np.einsum("ngi,ngj->gij", txc, xc) / Nk[:, None, None]
    Sxy = np.einsum("ngi,ng->gi", txc, yc) / Nk[:, None]
    G, d = mu.shape
    slopes = np.empty((G, d))
    for g in range(G):
        if d == 1:
            t = T[g, 0, 0]
            slopes[g, 0] = Sxy[g, 0] / t if t > 0 else 0.0
        else:
            slopes[g] = _min_norm_solve(T[g], Sxy[g])
    intercepts = ybar - np.einsum("gi,gi->g", slopes, mu)
    resid = y[:, None] - (x @ slopes.T + intercepts)
    s2 = np.einsum("ng,ng->g", tau, resid * resid) / Nk
    return mu, T, intercepts, slopes, s2


# --------------------------------------------------------------------------
# model-specific pieces, shared with the mixture-of-regressions baseline

class _Model(NamedTuple):
    from_draws: Callable      # (x_groups, y_groups, weights, config) -> params
    log_densities: Callable   # (dataset, params) -> (n, G)
    m_step: Callable          # (dataset, resp, config) -> params
    replace: Callable         # (params, g, x, y, config) -> params with comp g re-drawn


def _cwm_from_draws(xs, ys, weights, config):
    G = len(xs)
    d = xs[0].shape[1]
    means = np.empty((G, d))
    T = np.empty((G, d, d))
    b0 = np.empty(G)
    b = np.empty((G, d))
    s2 = np.empty(G)
    for g in range(G):
        means[g] = xs[g].mean(axis=0)
        T[g] = np.atleast_2d(np.cov(xs[g], rowvar=False))
        b0[g], b[g], s2[g] = _ols_init(xs[g], ys[g])
    S, _ = constrain_scatters(T, weights, config.c_x)
    v, _ = constrain_variances(s2, weights, config.c_eps)
    return ModelParams(weights, means, S, b0, b, v)


def _cwm_log_densities(dataset, params):
    return component_log_densities(dataset.x, dataset.y, params,
                                   ComponentCache.from_params(params))


def _component_mass(resp, h):
    Nk = resp.tau.sum(axis=0)
    empty = np.flatnonzero(Nk < EMPTY_MASS * h)
    if empty.size:
        raise EmptyComponentError(empty)
    return Nk


def m_step(dataset: Dataset, resp: Responsibilities, config: FitConfig) -> ModelParams:
    """Constrained M-step for the cluster-weighted model.

    Raises `EmptyComponentError` when a component's posterior mass is below
    ``1e-10 * h``.
    """
    keep = resp.z == 1
    h = int(keep.sum())
    tau = resp.tau[keep]
    Nk = _component_mass(resp, h)
    weights = Nk / h
    mu, T, b0, b, s2 = _weighted_moments(dataset.x[keep], dataset.y[keep], tau, Nk)
    S, _ = constrain_scatters(T, weights, config.c_x)
    v, _ = constrain_variances(s2, weights, config.c_eps)
    return ModelParams(weights, mu, S, b0, b, v)


def _renormalised(weights, g, G):
    w = np.array(weights, dtype=float)
    w[g] = 1.0 / G
    return w / w.sum()


def _cwm_replace(params, g, x, y, config):
    w = _renormalised(params.weights, g, params.G)
    means = np.array(params.means)
    S = np.array(params.scatters)
    b0 = np.array(params.intercepts)
    b = np.array(params.slopes)
    v = np.array(params.noise_vars)
    means[g] = x.mean(axis=0)
    S[g] = np.atleast_2d(np.cov(x, rowvar=False))
    b0[g], b[g], v[g] = _ols_init(x, y)
    S, _ = constrain_scatters(S, w, config.c_x)
    v, _ = constrain_variances(v, w, config.c_eps)
    return ModelParams(w, means, S, b0, b, v)


CWM = _Model(_cwm_from_draws, _cwm_log_densities, m_step, _cwm_replace)


# --------------------------------------------------------------------------
# E/C-step and objective

def _select(logD, h):
    # stable sort on -logD: among equal densities the smaller index is kept
    order = np.argsort(-logD, kind="stable")
    z = np.zeros(logD.shape[0], dtype=np.int8)
    z[order[:h]] = 1
    return z


def _e_and_c(dataset, params, h, model):
    comp = model.log_densities(dataset, params)
    logD = logsumexp_rows(comp)
    z = _select(logD, h)
    keep = z == 1
    tau = np.zeros_like(comp)
    tau[keep] = posteriors_from_log(comp[keep])
    return Responsibilities(tau, z), float(logD[keep].sum())


def e_and_c_step(dataset: Dataset, params: ModelParams, alpha: float) -> Responsibilities:
    """Keep the floor(n(1-alpha)) points of largest mixture density; posteriors on them."""
    h = retained_count(dataset.n, alpha)
    return _e_and_c(dataset, params, h, CWM)[0]


def trimmed_loglik(dataset: Dataset, params: ModelParams, z) -> float:
    """Sum of the mixture log density over the rows with ``z == 1``."""
    keep = np.asarray(z) == 1
    if not np.any(keep):
        return 0.0
    sub = dataset.subset(keep)
    comp = _cwm_log_densities(sub, params)
    return float(logsumexp_rows(comp).sum())


# --------------------------------------------------------------------------
# initialisation and the multi-start driver

def _draw_groups(rng, dataset, G):
    k = dataset.d + 2
    if G * k > dataset.n:
        raise TooFewPointsError(f"need {G * k} distinct observations, have {dataset.n}")
    idx = rng.choice(dataset.n, size=G * k, replace=False).reshape(G, k)
    return [dataset.x[i] for i in idx], [dataset.y[i] for i in idx]


def _random_weights(rng, G):
    # uniform on the open simplex; exact zeros have probability zero
    w = rng.dirichlet(np.ones(G))
    while np.any(w <= 0):
        w = rng.dirichlet(np.ones(G))
    return w


def _initialize(dataset, config, rng, model):
    xs, ys = _draw_groups(rng, dataset, config.G)
    w = _random_weights(rng, config.G)
    return model.from_draws(xs, ys, w, config)


def initialize(dataset: Dataset, config: FitConfig, rng: np.random.Generator) -> ModelParams:
    """Random feasible starting point from G disjoint draws of d+2 observations.

    Means and scatters are the sample moments of each draw, regressions are
    OLS fits with mean squared residual as variance; the constraints are then
    enforced and the weights drawn uniformly on the simplex.
    """
    return _initialize(dataset, config, rng, CWM)


def _run_start(dataset, config, start_index, model, trace=None):
    rng = start_rng(config.seed, start_index)
    h = retained_count(dataset.n, config.alpha)
    failed = dict(labels=np.zeros(dataset.n, dtype=int), objective=-np.inf, n_iter=0,
                  converged=False, start_index=start_index)
    params = _initialize(dataset, config, rng, model)
    try:
        resp, obj = _e_and_c(dataset, params, h, model)
    except DegenerateDensityError:
        return TrimmedFit(params=params, resp=None, **failed)
    history = [obj]
    redraws = []
    retries = np.zeros(config.G, dtype=int)
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        try:
            new = model.m_step(dataset, resp, config)
        except EmptyComponentError as exc:
            retries[exc.components] += 1
            if np.any(retries > MAX_REDRAWS):
                return TrimmedFit(params=params, resp=resp, history=tuple(history),
                                  redraws=tuple(redraws), **failed)
            new = params
            for g in exc.components:
                xs, ys = _draw_groups(rng, dataset, 1)
                new = model.replace(new, g, xs[0], ys[0], config)
            redraws.append(it)
        try:
            resp_new, obj_new = _e_and_c(dataset, new, h, model)
        except DegenerateDensityError:
            return TrimmedFit(params=new, resp=resp, history=tuple(history),
                              redraws=tuple(redraws), **failed)
        if trace is not None:
            trace(it, new, resp_new, obj_new)
        change = abs(obj_new - obj) / (1.0 + abs(obj_new))
        params, resp, obj = new, resp_new, obj_new
        history.append(obj)
        if change < config.rel_tol and (not redraws or redraws[-1] != it):
            converged = True
            break
    return TrimmedFit(params=params, resp=resp, labels=map_classify(resp), objective=obj,
                      n_iter=it, converged=converged, start_index=start_index,
                      history=tuple(history), redraws=tuple(redraws))


def fit_once(dataset: Dataset, config: FitConfig, start_index: int = 0,
             trace: Optional[Callable] = None) -> TrimmedFit:
    """One trimmed EM run from the start with index `start_index`.

    A start whose components keep emptying after `MAX_REDRAWS` re-draws is
    reported with objective ``-inf``.  `trace`, if given, is called as
    ``trace(iteration, params, resp, objective)`` after every M-step.
    """
    validate_dataset(dataset, config)
    return _run_start(dataset, config, start_index, CWM, trace)


def _best_of_starts(dataset, config, model):
    starts = range(config.n_starts)
    workers = min(worker_count(config), config.n_starts)
    run = lambda k: _run_start(dataset, config, k, model)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(k) for k in starts]
    objs = np.array([r.objective for r in results])
    if not np.any(np.isfinite(objs)):
        raise AllStartsFailedError(f"all {config.n_starts} starts failed")
    # argmax returns the first maximum: ties go to the smallest start index
    best = results[int(np.argmax(objs))]
    return TrimmedFit(params=best.params, resp=best.resp, labels=best.labels,
                      objective=best.objective, n_iter=best.n_iter, converged=best.converged,
                      start_index=best.start_index, history=best.history,
                      redraws=best.redraws, start_objectives=tuple(objs.tolist()))


def fit(dataset: Dataset, config: FitConfig) -> TrimmedFit:
    """Trimmed cluster-weighted restricted model fit, best of `config.n_starts` starts.

    Examples
    --------
    >>> from cwrm import datagen
    >>> data = datagen.simulate(datagen.preset("simdata1"), seed=3)
    >>> res = fit(data, FitConfig(G=2, alpha=0.1, n_starts=10))
    >>> int((res.labels == 0).sum())
    20
    """
    validate_dataset(dataset, config)
    return _best_of_starts(dataset, config, CWM)


__all__ = ["e_and_c_step", "fit", "fit_once", "initialize", "m_step",
           "start_rng", "trimmed_loglik", "weighted_regression"]
