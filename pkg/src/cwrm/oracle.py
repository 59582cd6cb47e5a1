"""Brute-force reference solutions used to check the fitting code.

These are written straight from the definitions and deliberately share no
code with `constraints`, `density`, `em` or `baselines`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Dataset, TooLargeError

MAX_N = 16
# same floor the truncation solver falls back to when every value is zero
VAR_FLOOR = 1e-300


@dataclass(frozen=True)
class OracleResult:
    objective: float
    argument: object


def _h(n, alpha):
    return int(np.floor(n * (1.0 - alpha) + 1e-9))


def _subsets(n, h):
    return np.array(list(itertools.combinations(range(n), h)), dtype=int)


def _normal_logpdf(v, mean, var):
    return -0.5 * np.log(2.0 * np.pi * var) - (v - mean) ** 2 / (2.0 * var)


def exhaustive_trimmed_cwm_g1(dataset: Dataset, alpha: float) -> OracleResult:
    """Global maximum of the trimmed likelihood for one component and d = 1.

    Every subset of size floor(n(1-alpha)) is fitted in closed form (sample
    mean and variance of x, OLS of y on x, mean squared residual) and the
    best log-likelihood is returned together with its subset.
    """
    if dataset.n > MAX_N:
        raise TooLargeError(f"n={dataset.n} exceeds {MAX_N}")
    if dataset.d != 1:
        raise ValueError("oracle only handles d = 1")
    x, y = dataset.x[:, 0], dataset.y
    S = _subsets(dataset.n, _h(dataset.n, alpha))
    xs, ys = x[S], y[S]
    mx = xs.mean(axis=1, keepdims=True)
    my = ys.mean(axis=1, keepdims=True)
    vx = ((xs - mx) ** 2).mean(axis=1, keepdims=True)
    cxy = ((xs - mx) * (ys - my)).mean(axis=1, keepdims=True)
    slope = np.where(vx > 0, cxy / np.where(vx > 0, vx, 1.0), 0.0)
    icpt = my - slope * mx
    s2 = ((ys - icpt - slope * xs) ** 2).mean(axis=1, keepdims=True)
    vx = np.maximum(vx, VAR_FLOOR)
    s2 = np.maximum(s2, VAR_FLOOR)
    ll = (_normal_logpdf(xs, mx, vx) + _normal_logpdf(ys, icpt + slope * xs, s2)).sum(axis=1)
    k = int(np.argmax(ll))
    return OracleResult(float(ll[k]), tuple(S[k].tolist()))


def exhaustive_lts(dataset: Dataset, alpha: float) -> OracleResult:
    """Least trimmed squares by enumeration, reported as a Gaussian log-likelihood.

    The objective is ``sum log N(y_i; fitted_i, s2)`` over the best subset,
    with ``s2`` the mean squared residual, i.e. ``-h/2 (log(2 pi s2) + 1)``.
    """
    if dataset.n > MAX_N:
        raise TooLargeError(f"n={dataset.n} exceeds {MAX_N}")
    h = _h(dataset.n, alpha)
    A = np.column_stack([np.ones(dataset.n), dataset.x])
    best_ssr, best = np.inf, None
    for sub in itertools.combinations(range(dataset.n), h):
        sub = list(sub)
        coef = np.linalg.lstsq(A[sub], dataset.y[sub], rcond=None)[0]
        r = dataset.y[sub] - A[sub] @ coef
        ssr = float(r @ r)
        if ssr < best_ssr:
            best_ssr, best = ssr, (tuple(sub), coef, r)
    sub, coef, r = best
    s2 = max(best_ssr / h, VAR_FLOOR)
    ll = _normal_logpdf(r, 0.0, s2).sum()
    return OracleResult(float(ll), sub)


def truncation_grid_values(values, weights, c, m):
    """The truncation objective on an array of thresholds, from its definition."""
    v = np.asarray(values, dtype=float)[None, :]
    w = np.asarray(weights, dtype=float)[None, :]
    m = np.asarray(m, dtype=float)[:, None]
    t = np.minimum(c * m, np.maximum(v, m))
    return (w * (np.log(t) + v / t)).sum(axis=1)


def grid_threshold(wv, n_grid: int = 100_000) -> OracleResult:
    """Minimise the truncation objective over a log-spaced grid of thresholds.

    The grid spans [smallest breakpoint / 10, largest breakpoint * 10], where
    the breakpoints are the values and the values divided by c.
    """
    if n_grid < 1000:
        raise ValueError("n_grid must be at least 1000")
    v = np.asarray(wv.values, dtype=float)
    bps = np.concatenate([v, v / wv.c])
    bps = bps[bps > 0]
    grid = np.geomspace(bps.min() / 10.0, bps.max() * 10.0, n_grid)
    f = np.concatenate([truncation_grid_values(v, wv.weights, wv.c, chunk)
                        for chunk in np.array_split(grid, max(1, n_grid // 5000))])
    k = int(np.argmin(f))
    return OracleResult(float(f[k]), float(grid[k]))
