"""Domain types shared by the fitting, generation and reporting code."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class CWRMError(ValueError):
    """Base class for all errors raised by this package."""


class NonFiniteError(CWRMError):
    pass


class TooFewPointsError(CWRMError):
    pass


class BadConfigError(CWRMError):
    pass


class NonPositiveVarianceError(CWRMError):
    pass


class DegenerateDensityError(CWRMError):
    pass


class ZeroWeightsError(CWRMError):
    pass


class NoConvergenceError(CWRMError):
    pass


class EmptyComponentError(CWRMError):
    """Raised by the M-step when a component has (almost) no posterior mass."""

    def __init__(self, components):
        self.components = list(components)
        super().__init__(f"empty components: {self.components}")


class AllStartsFailedError(CWRMError):
    pass


class UnknownPresetError(CWRMError):
    pass


class TooLargeError(CWRMError):
    pass


class LengthMismatchError(CWRMError):
    pass


def retained_count(n: int, alpha: float) -> int:
    """Number of observations kept by trimming level `alpha`, floor(n(1-alpha)).

    A tolerance of 1e-9 absorbs products such as 10 * (1 - 0.9) landing just
    below an integer.
    """
    return int(math.floor(n * (1.0 - alpha) + 1e-9))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Covariates `x` (n, d), response `y` (n,), optional ground-truth labels.

    Labels use 0 for contamination and 1..G for the generating component.
    """

    x: np.ndarray
    y: np.ndarray
    true_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise LengthMismatchError(
                f"x has shape {x.shape} but y has length {y.shape[0]}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.true_labels is not None:
            lab = np.asarray(self.true_labels, dtype=int).reshape(-1)
            if lab.shape[0] != y.shape[0]:
                raise LengthMismatchError("true_labels length differs from n")
            if lab.size and lab.min() < 0:
                raise CWRMError("true_labels must be non-negative")
            lab.setflags(write=False)
            object.__setattr__(self, "true_labels", lab)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def translated(self, shift_x, shift_y) -> "Dataset":
        return Dataset(self.x + np.asarray(shift_x, dtype=float), self.y + shift_y,
                       self.true_labels)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        lab = None if self.true_labels is None else self.true_labels[idx]
        return Dataset(self.x[idx], self.y[idx], lab)


@dataclass(frozen=True)
class FitConfig:
    """Tuning constants for one trimmed fit.

    Parameters
    ----------
    G : number of mixture components.
    alpha : trimming level in [0, 1).
    c_x : bound on the ratio between any two eigenvalues of the covariate
        scatter matrices (all components pooled).
    c_eps : bound on the ratio between any two regression error variances.
    n_starts, max_iter, rel_tol : multi-start and stopping controls.  A start
        stops when ``|obj - obj_prev| / (1 + |obj|) < rel_tol``.
    seed : base seed; start ``k`` uses a stream derived from ``(seed, k)``.
    workers : number of threads running starts; results do not depend on it.
    """

    G: int = 2
    alpha: float = 0.1
    c_x: float = 20.0
    c_eps: float = 20.0
    n_starts: int = 64
    max_iter: int = 200
    rel_tol: float = 1e-8
    seed: int = 0
    workers: int = 1

    def check(self):
        if int(self.G) != self.G or self.G < 1:
            raise BadConfigError(f"G must be a positive integer, got {self.G}")
        if not (0.0 <= self.alpha < 1.0):
            raise BadConfigError(f"alpha must lie in [0, 1), got {self.alpha}")
        for name in ("c_x", "c_eps"):
            c = getattr(self, name)
            if not (np.isfinite(c) and c >= 1.0):
                raise BadConfigError(f"{name} must be a finite real >= 1, got {c}")
        if self.n_starts < 1 or self.max_iter < 1:
            raise BadConfigError("n_starts and max_iter must be positive")
        if not self.rel_tol > 0:
            raise BadConfigError("rel_tol must be positive")
        if self.seed < 0:
            raise BadConfigError("seed must be unsigned")
        if self.workers < 1:
            raise BadConfigError("workers must be positive")


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Parameters of a linear Gaussian cluster-weighted model with G components.

    ``weights`` (G,), ``means`` (G, d), ``scatters`` (G, d, d),
    ``intercepts`` (G,), ``slopes`` (G, d), ``noise_vars`` (G,).
    """

    weights: np.ndarray
    means: np.ndarray
    scatters: np.ndarray
    intercepts: np.ndarray
    slopes: np.ndarray
    noise_vars: np.ndarray

    def __post_init__(self):
        for name in ("weights", "means", "scatters", "intercepts", "slopes", "noise_vars"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def G(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]

    def permuted(self, perm) -> "ModelParams":
        perm = np.asarray(perm)
        return ModelParams(self.weights[perm], self.means[perm], self.scatters[perm],
                           self.intercepts[perm], self.slopes[perm], self.noise_vars[perm])

    def eigen_ratio(self) -> float:
        ev = np.linalg.eigvalsh(self.scatters)
        return float(ev.max() / ev.min())

    def variance_ratio(self) -> float:
        return float(self.noise_vars.max() / self.noise_vars.min())

    def check_feasible(self, c_x, c_eps, rtol=1e-8):
        """Raise `BadConfigError` unless the parameters satisfy both constraints."""
        w = self.weights
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise BadConfigError("weights are not on the simplex")
        S = self.scatters
        if np.max(np.abs(S - np.swapaxes(S, 1, 2)), initial=0.0) > 1e-10:
            raise BadConfigError("scatter matrices are not symmetric")
        ev = np.linalg.eigvalsh(S)
        if ev.min() <= 0:
            raise BadConfigError("scatter matrices are not positive definite")
        if ev.max() / ev.min() > c_x * (1 + rtol):
            raise BadConfigError(f"eigenvalue ratio {ev.max() / ev.min():g} exceeds {c_x:g}")
        if self.noise_vars.min() <= 0:
            raise BadConfigError("noise variances must be positive")
        if self.variance_ratio() > c_eps * (1 + rtol):
            raise BadConfigError(f"variance ratio {self.variance_ratio():g} exceeds {c_eps:g}")

    def allclose(self, other: "ModelParams", atol=0.0, rtol=1e-12) -> bool:
        return all(np.allclose(getattr(self, k), getattr(other, k), atol=atol, rtol=rtol)
                   for k in ("weights", "means", "scatters", "intercepts", "slopes",
                             "noise_vars"))


@dataclass(frozen=True, eq=False)
class Responsibilities:
    """Posterior matrix ``tau`` (n, G) and 0/1 trimming indicator ``z`` (n,)."""

    tau: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float)
        z = np.array(self.z, dtype=np.int8)
        tau.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "z", z)


@dataclass(frozen=True, eq=False)
class TrimmedFit:
    """Result of a trimmed fit.

    ``labels`` holds 0 for trimmed rows and the 1-based MAP component
    otherwise.  ``history`` lists the objective after every C-step of the
    winning start; ``redraws`` marks the iterations at which an empty
    component was re-initialised (the objective may drop there).
    """

    params: object
    resp: Responsibilities
    labels: np.ndarray
    objective: float
    n_iter: int
    converged: bool
    start_index: int
    history: tuple = field(default=())
    redraws: tuple = field(default=())
    start_objectives: tuple = field(default=())


def validate_dataset(dataset: Dataset, config: FitConfig) -> None:
    """Check a dataset and a configuration jointly.

    Raises
    ------
    NonFiniteError
        If `x` or `y` has a NaN or infinite entry.
    BadConfigError
        If the configuration itself is invalid.
    TooFewPointsError
        If fewer than ``G * (d + 2)`` observations survive trimming, since
        each component is initialised from ``d + 2`` distinct points.
    """
    config.check()
    if dataset.n < 1 or dataset.d < 1:
        raise TooFewPointsError("dataset must have at least one row and one covariate")
    if not (np.all(np.isfinite(dataset.x)) and np.all(np.isfinite(dataset.y))):
        raise NonFiniteError("dataset contains NaN or infinite values")
    h = retained_count(dataset.n, config.alpha)
    need = config.G * (dataset.d + 2)
    if h < need:
        raise TooFewPointsError(
            f"only {h} observations retained with alpha={config.alpha}; "
            f"{need} needed for G={config.G}, d={dataset.d}")


def map_classify(resp: Responsibilities) -> np.ndarray:
    """MAP labels: 0 for trimmed rows, else 1 + argmax of the posterior row.

    `np.argmax` returns the first maximum, so ties go to the smallest index.
    """
    labels = np.argmax(resp.tau, axis=1) + 1
    labels[resp.z == 0] = 0
    return labels
