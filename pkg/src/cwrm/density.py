"""Log-space densities of the linear Gaussian cluster-weighted model.

Every function accepts either a single observation or a batch: `x` may be a
vector of length d or an (n, d) array, `y` a scalar or an (n,) array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DegenerateDensityError, ModelParams, NonPositiveVarianceError

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class ComponentCache:
    """Per-component quantities reused across observations.

    ``chol[g]`` is the lower Cholesky factor of the g-th scatter matrix.
    """

    chol: np.ndarray
    logdet: np.ndarray
    log_noise_var: np.ndarray
    log_weights: np.ndarray

    @classmethod
    def from_params(cls, params: ModelParams) -> "ComponentCache":
        # LinAlgError on a non-SPD scatter: constrained parameters never get here
        chol = np.linalg.cholesky(params.scatters)
        logdet = 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
        if np.any(params.noise_vars <= 0):
            raise NonPositiveVarianceError("noise variances must be positive")
        with np.errstate(divide="ignore"):
            log_w = np.log(params.weights)
        return cls(chol, logdet, np.log(params.noise_vars), log_w)


def log_gauss_uni(v, mean, var):
    """Log density of N(mean, var) at `v`."""
    if np.any(np.asarray(var) <= 0):
        raise NonPositiveVarianceError(f"variance must be positive, got {var}")
    r = np.asarray(v, dtype=float) - mean
    return -0.5 * np.log(2.0 * np.pi * var) - r * r / (2.0 * var)


def _mahalanobis_sq(x, mu, chol):
    diff = np.atleast_2d(np.asarray(x, dtype=float) - mu)
    sol = np.linalg.solve(chol, diff.T)
    return np.einsum("ij,ij->j", sol, sol)


def log_gauss_multi(x, mu, cache: ComponentCache, g: int = 0):
    """Log density of N_d(mu, Sigma_g) at `x`, using the cached factor of Sigma_g.

    `g` is the 0-based component index into `cache`.
    """
    x = np.asarray(x, dtype=float)
    chol = cache.chol[g]
    d = chol.shape[0]
    q = _mahalanobis_sq(x, mu, chol)
    out = -0.5 * d * LOG_2PI - 0.5 * cache.logdet[g] - 0.5 * q
    return out[0] if x.ndim == 1 else out


def component_log_density(x, y, params: ModelParams, cache: ComponentCache, g: int):
    """log D_g(x, y): weight times regression density times covariate density.

    `g` is 0-based.  A zero weight gives -inf.
    """
    x = np.asarray(x, dtype=float)
    fitted = x @ params.slopes[g] + params.intercepts[g]
    r = np.asarray(y, dtype=float) - fitted
    ly = -0.5 * (LOG_2PI + cache.log_noise_var[g]) - 0.5 * r * r / params.noise_vars[g]
    return cache.log_weights[g] + ly + log_gauss_multi(x, params.means[g], cache, g)


def component_log_densities(x, y, params: ModelParams, cache: ComponentCache = None):
    """Matrix of log D_g(x_i, y_i), shape (n, G)."""
    if cache is None:
        cache = ComponentCache.from_params(params)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = x.shape[1]
    resid = y[:, None] - (x @ params.slopes.T + params.intercepts)
    # one batched triangular solve for all components: (G, d, d) x (G, d, n)
    diff = x.T[None, :, :] - params.means[:, :, None]
    sol = np.linalg.solve(cache.chol, diff)
    q = np.einsum("gdn,gdn->ng", sol, sol)
    const = (cache.log_weights - 0.5 * (LOG_2PI + cache.log_noise_var)
             - 0.5 * d * LOG_2PI - 0.5 * cache.logdet)
    return const - 0.5 * resid * resid / params.noise_vars - 0.5 * q


def logsumexp_rows(a):
    """Row-wise log-sum-exp, ``max + log(sum(exp(a - max)))``.

    Rows that are entirely -inf give -inf.
    """
    a = np.asarray(a, dtype=float)
    top = a.max(axis=-1, keepdims=True)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.exp(a - safe).sum(axis=-1)) + safe[..., 0]
    return out


def mixture_log_density(x, y, params: ModelParams, cache: ComponentCache = None):
    """log D(x, y) = log sum_g D_g(x, y)."""
    comp = component_log_densities(x, y, params, cache)
    out = logsumexp_rows(comp)
    return out[0] if np.ndim(y) == 0 else out


def posteriors_from_log(comp):
    """Normalise rows of component log densities into posterior probabilities."""
    comp = np.atleast_2d(comp)
    top = comp.max(axis=1, keepdims=True)
    if np.any(~np.isfinite(top)):
        raise DegenerateDensityError("all component densities vanish for some observation")
    w = np.exp(comp - top)
    return w / w.sum(axis=1, keepdims=True)


def posteriors(x, y, params: ModelParams, cache: ComponentCache = None):
    """Posterior membership probabilities tau_g = D_g / D, shape (G,) or (n, G)."""
    out = posteriors_from_log(component_log_densities(x, y, params, cache))
    return out[0] if np.ndim(y) == 0 else out
