"""Eigenvalue-ratio and variance-ratio constraints via optimal truncation.

Given positive values v_j (eigenvalues of the covariate scatter matrices, or
regression error variances) with weights w_j, the constrained update clamps
every value into ``[m, c*m]`` where the threshold m minimises

    f(m) = sum_j w_j * (log t_j + v_j / t_j),   t_j = min(c*m, max(v_j, m)).

f is continuously differentiable, and between consecutive breakpoints
{v_j} U {v_j / c} the sets of values clamped from below and from above are
fixed, so the stationary point on each piece has a closed form.  Checking one
candidate per piece finds the global minimiser.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BadConfigError, NoConvergenceError, ZeroWeightsError

# smallest threshold ever returned; only reached when every value is zero
M_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class WeightedValues:
    values: np.ndarray
    weights: np.ndarray
    c: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if v.shape != w.shape:
            raise ValueError("values and weights must have the same length")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise ValueError("values and weights must be finite")
        if np.any(v < 0) or np.any(w < 0):
            raise ValueError("values and weights must be non-negative")
        if not self.c >= 1:
            raise BadConfigError(f"constraint constant must be >= 1, got {self.c}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "c", float(self.c))


def truncate(e, m, c):
    """Clamp `e` into ``[m, c*m]``."""
    return np.minimum(c * m, np.maximum(e, m))


def truncation_objective(wv: WeightedValues, m):
    """Evaluate f(m); `m` may be a scalar or an array of thresholds."""
    m = np.asarray(m, dtype=float)
    v = wv.values
    t = truncate(v, m[..., None], wv.c)
    with np.errstate(divide="ignore"):
        terms = np.log(t) + v / t
    return (terms * wv.weights).sum(axis=-1)


def _candidates(v, w, c):
    """One candidate threshold per piece of f, plus the weighted mean."""
    bps = np.unique(np.concatenate([v, v / c]))
    bps = bps[bps > 0]
    cands = [bps]
    if bps.size:
        lo = np.concatenate([[0.0], bps])
        hi = np.concatenate([bps, [np.inf]])
        # probe inside each piece to classify values as below/above the clamp
        probe = np.where(np.isinf(hi), 2.0 * lo, np.where(lo == 0, 0.5 * hi, 0.5 * (lo + hi)))
        below = v[None, :] < probe[:, None]
        above = v[None, :] > c * probe[:, None]
        num = (below * (w * v)).sum(axis=1) + (above * (w * v / c)).sum(axis=1)
        den = (below * w).sum(axis=1) + (above * w).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            mstar = np.where(den > 0, num / den, probe)
        cands.append(np.clip(mstar, lo, hi))
    wsum = w.sum()
    if wsum > 0:
        cands.append([np.dot(w, v) / wsum])
    m = np.concatenate([np.atleast_1d(a) for a in cands])
    return np.unique(m[m > 0])


def optimal_threshold(wv: WeightedValues) -> float:
    """Global minimiser of `truncation_objective` (smallest one on ties)."""
    v, w = wv.values, wv.weights
    if v.size == 0:
        raise ValueError("no values to truncate")
    keep = w > 0
    if not np.any(keep):
        raise ZeroWeightsError("all weights are zero")
    v, w = v[keep], w[keep]
    cands = _candidates(v, w, wv.c)
    if cands.size == 0:
        return M_FLOOR
    f = truncation_objective(WeightedValues(v, w, wv.c), cands)
    # candidates are sorted, so argmin picks the smallest m among exact ties
    return float(cands[int(np.argmin(f))])


def is_feasible(values, c, rtol=0.0) -> bool:
    values = np.asarray(values, dtype=float)
    return bool(values.min() > 0 and values.max() <= c * values.min() * (1 + rtol))


def sym_eigen(A):
    """Eigen-decomposition ``A = U.T @ diag(lam) @ U`` with `lam` descending.

    Rows of `U` are the eigenvectors.
    """
    A = np.asarray(A, dtype=float)
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-10 * max(1.0, np.abs(A).max(initial=0.0)):
        raise ValueError("matrix is not symmetric")
    try:
        lam, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return lam[::-1], V[:, ::-1].T


def constrain_scatters(T, weights, c_x):
    """Enforce the eigenvalue-ratio bound `c_x` jointly on all G matrices.

    Returns the constrained matrices (G, d, d) and the threshold used.  Inputs
    that already satisfy the bound are returned unchanged.
    """
    T = np.asarray(T, dtype=float)
    weights = np.asarray(weights, dtype=float)
    G, d, _ = T.shape
    if not np.any(weights > 0):
        raise ZeroWeightsError("all component weights are zero")
    lam, V = np.linalg.eigh(T)
    lam = np.maximum(lam, 0.0)
    if is_feasible(lam, c_x):
        return T.copy(), None
    wv = WeightedValues(lam.reshape(-1), np.repeat(weights, d), c_x)
    m = optimal_threshold(wv)
    t = truncate(lam, m, c_x)
    out = np.einsum("gij,gj,gkj->gik", V, t, V)
    out = 0.5 * (out + np.swapaxes(out, 1, 2))
    return out, m


def constrain_variances(s2, weights, c_eps):
    """Enforce the variance-ratio bound `c_eps`; returns (variances, threshold)."""
    s2 = np.maximum(np.asarray(s2, dtype=float), 0.0)
    weights = np.asarray(weights, dtype=float)
    if not np.any(weights > 0):
        raise ZeroWeightsError("all component weights are zero")
    if is_feasible(s2, c_eps):
        return s2.copy(), None
    m = optimal_threshold(WeightedValues(s2, weights, c_eps))
    return truncate(s2, m, c_eps), m
