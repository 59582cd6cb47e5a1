"""Seeded samplers for cluster-weighted data and contamination scenarios.

Presets ``simdata1`` ... ``simdata8`` are standard robustness scenarios for
trimmed cluster-weighted models (pointwise and background noise, nearly
collinear covariates, a local exact fit, leverage points), and
``tone_analog_1..4`` is a synthetic stand-in for a contaminated tone
perception benchmark.  Only counts, locations and variance ratios are fixed
by the scenarios; other component parameters are defaults chosen to give
well-separated groups with unit-order scatters and are marked
``# repo default`` below.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import CWRMError, Dataset, UnknownPresetError

KINDS = ("background_box", "pointwise", "collinear_x", "exact_fit_xy")


@dataclass(frozen=True)
class Component:
    weight: float
    mean: tuple
    cov: tuple
    intercept: float
    slope: tuple
    noise_var: float

    def __post_init__(self):
        mean = tuple(float(v) for v in np.atleast_1d(self.mean))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        slope = tuple(float(v) for v in np.atleast_1d(self.slope))
        d = len(mean)
        if cov.shape != (d, d) or len(slope) != d:
            raise CWRMError("component mean, cov and slope dimensions disagree")
        if not np.allclose(cov, cov.T) or np.linalg.eigvalsh(cov).min() <= 0:
            raise CWRMError("component covariance must be symmetric positive definite")
        if self.noise_var < 0 or self.weight < 0:
            raise CWRMError("weights and noise variances must be non-negative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", tuple(map(tuple, cov.tolist())))
        object.__setattr__(self, "slope", slope)

    @property
    def d(self):
        return len(self.mean)


@dataclass(frozen=True)
class ContaminationSpec:
    """Added outliers, all labelled 0.

    background_box
        uniform on the box ``low``..``high`` in (x_1..x_d, y) space.
    pointwise
        ``N(center, spread^2 I)`` in (x, y) space.
    collinear_x, exact_fit_xy
        covariates ``anchor + t * direction`` with ``t ~ U(t_range)`` plus
        isotropic ``jitter`` orthogonal to `direction`; response
        ``response_intercept + response_slope'x + N(0, response_jitter^2)``.
        `collinear_x` is meant for near-degenerate covariates with an ordinary
        response, `exact_fit_xy` for responses lying almost exactly on a
        hyperplane.
    """

    kind: str
    count: int
    low: Optional[tuple] = None
    high: Optional[tuple] = None
    center: Optional[tuple] = None
    spread: float = 0.1
    anchor: Optional[tuple] = None
    direction: Optional[tuple] = None
    t_range: tuple = (0.0, 1.0)
    jitter: float = 0.0
    response_intercept: float = 0.0
    response_slope: Optional[tuple] = None
    response_jitter: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CWRMError(f"unknown contamination kind {self.kind!r}")
        if self.count < 0 or self.spread < 0 or self.jitter < 0 or self.response_jitter < 0:
            raise CWRMError("counts, spreads and jitters must be non-negative")
        for name in ("low", "high", "center", "anchor", "direction", "t_range",
                     "response_slope"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(float(a) for a in np.atleast_1d(v)))


@dataclass(frozen=True)
class ScenarioSpec:
    components: tuple
    n_clean: int
    contamination: tuple = ()
    seed: int = 0
    counts: Optional[tuple] = None

    def __post_init__(self):
        comps = tuple(c if isinstance(c, Component) else Component(**c)
                      for c in self.components)
        conts = tuple(c if isinstance(c, ContaminationSpec) else ContaminationSpec(**c)
                      for c in self.contamination)
        if not comps:
            raise CWRMError("at least one component is required")
        if len({c.d for c in comps}) != 1:
            raise CWRMError("components have different dimensions")
        w = np.array([c.weight for c in comps])
        if abs(w.sum() - 1.0) > 1e-9:
            raise CWRMError("component weights must sum to 1")
        if self.counts is not None:
            counts = tuple(int(k) for k in self.counts)
            if len(counts) != len(comps) or sum(counts) != self.n_clean:
                raise CWRMError("per-component counts must match components and n_clean")
            object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "contamination", conts)

    @property
    def d(self):
        return self.components[0].d

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["components"] = [Component(**{k: (tuple(map(tuple, v)) if k == "cov" else v)
                                           for k, v in c.items()})
                              for c in data["components"]]
        data["contamination"] = [ContaminationSpec(**c) for c in data.get("contamination", ())]
        return cls(**data)


def _orthonormal_complement(direction):
    u = direction / np.linalg.norm(direction)
    # project the identity off u and orthonormalise what is left
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(len(u))]))
    return q[:, 1:len(u)]


def sample_cwm(spec: ScenarioSpec, rng: np.random.Generator) -> Dataset:
    """Draw `spec.n_clean` labelled points from the generative CWM."""
    G = len(spec.components)
    if spec.counts is not None:
        labels = np.repeat(np.arange(G), spec.counts)
    else:
        labels = np.sort(rng.choice(G, size=spec.n_clean,
                                    p=[c.weight for c in spec.components]))
    x = np.empty((spec.n_clean, spec.d))
    y = np.empty(spec.n_clean)
    for g, comp in enumerate(spec.components):
        idx = np.flatnonzero(labels == g)
        xg = rng.multivariate_normal(comp.mean, comp.cov, size=idx.size)
        eps = rng.normal(0.0, np.sqrt(comp.noise_var), size=idx.size)
        x[idx] = xg
        y[idx] = comp.intercept + xg @ np.asarray(comp.slope) + eps
    return Dataset(x, y, labels + 1)


def contaminate(dataset: Dataset, spec: ContaminationSpec, rng: np.random.Generator) -> Dataset:
    """Append `spec.count` outliers (label 0) generated by `spec.kind`."""
    if spec.count == 0:
        return dataset
    d, k = dataset.d, spec.count
    if spec.kind == "background_box":
        pts = rng.uniform(spec.low, spec.high, size=(k, d + 1))
        xn, yn = pts[:, :d], pts[:, d]
    elif spec.kind == "pointwise":
        pts = np.asarray(spec.center) + spec.spread * rng.standard_normal((k, d + 1))
        xn, yn = pts[:, :d], pts[:, d]
    else:
        direction = np.asarray(spec.direction, dtype=float)
        t = rng.uniform(spec.t_range[0], spec.t_range[1], size=k)
        xn = np.asarray(spec.anchor) + t[:, None] * direction
        if d > 1 and spec.jitter > 0:
            basis = _orthonormal_complement(direction)
            xn = xn + spec.jitter * rng.standard_normal((k, d - 1)) @ basis.T
        elif spec.jitter > 0:
            xn = xn + spec.jitter * rng.standard_normal((k, 1))
        slope = np.zeros(d) if spec.response_slope is None else np.asarray(spec.response_slope)
        yn = spec.response_intercept + xn @ slope + spec.response_jitter * rng.standard_normal(k)
    labels = dataset.true_labels
    if labels is None:
        labels = np.ones(dataset.n, dtype=int)
    return Dataset(np.vstack([dataset.x, xn]), np.concatenate([dataset.y, yn]),
                   np.concatenate([labels, np.zeros(k, dtype=int)]))


def simulate(spec: ScenarioSpec, seed: Optional[int] = None) -> Dataset:
    """Clean sample followed by every contamination block, one seeded stream."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    data = sample_cwm(spec, rng)
    for c in spec.contamination:
        data = contaminate(data, c, rng)
    return data


# --------------------------------------------------------------------------
# presets

def _two_lines(n1, n2, c1, c2, contamination=()):
    return ScenarioSpec(components=(Component(**c1), Component(**c2)), n_clean=n1 + n2,
                        counts=(n1, n2), contamination=tuple(contamination))


# repo default: two groups in d = 1 with different covariate scatters
_SIM1_A = dict(weight=0.5, mean=3.0, cov=1.0, intercept=2.0, slope=1.5, noise_var=0.25)
_SIM1_B = dict(weight=0.5, mean=8.0, cov=1.44, intercept=12.0, slope=-0.5, noise_var=0.25)

TONE_LOCATIONS = ((2.5, 5.0), (6.0, 4.0), (0.0, 0.5), (5.0, 2.5))


def _simdata1(background=False):
    if background:
        cont = ContaminationSpec("background_box", 20, low=(-2.0, -5.0), high=(16.0, 25.0))
    else:
        cont = ContaminationSpec("pointwise", 20, center=(15.0, 20.0), spread=0.1)
    return _two_lines(90, 90, _SIM1_A, _SIM1_B, [cont])


def _simdata2():
    # covariate clusters at (2,2) and (4,4); one common regression plane
    common = dict(intercept=1.0, slope=(1.0, 0.5), noise_var=0.25)  # repo default
    c1 = dict(weight=0.5, mean=(2.0, 2.0), cov=0.16 * np.eye(2), **common)
    c2 = dict(weight=0.5, mean=(4.0, 4.0), cov=0.16 * np.eye(2), **common)
    cont = ContaminationSpec("collinear_x", 20, anchor=(4.4, 3.6), direction=(1.0, 1.0),
                             t_range=(-0.6, 0.6), jitter=1e-3,
                             response_intercept=1.0, response_slope=(1.0, 0.5),
                             response_jitter=0.5)
    return _two_lines(90, 90, c1, c2, [cont])


def _simdata3():
    # repo default: two groups sharing the covariate distribution, plus four
    # points lying almost exactly on the line y = 0
    c1 = dict(weight=0.5, mean=2.0, cov=1.0, intercept=1.0, slope=1.0, noise_var=0.25)
    c2 = dict(weight=0.5, mean=2.0, cov=1.0, intercept=2.0, slope=0.2, noise_var=0.25)
    cont = ContaminationSpec("exact_fit_xy", 4, anchor=(1.0,), direction=(1.0,),
                             t_range=(0.0, 2.0), response_intercept=0.0,
                             response_slope=(0.0,), response_jitter=1e-5)
    return _two_lines(98, 98, c1, c2, [cont])


def _simdata4():
    # different covariate scatters; the c_x = 1 fit forces them equal
    c1 = dict(weight=0.5, mean=2.0, cov=0.25, intercept=0.0, slope=2.0, noise_var=0.25)
    c2 = dict(weight=0.5, mean=8.0, cov=2.25, intercept=10.0, slope=-1.0, noise_var=0.25)
    cont = ContaminationSpec("background_box", 20, low=(-2.0, -10.0), high=(14.0, 15.0))
    return _two_lines(90, 90, c1, c2, [cont])


def _simdata5():
    # error variances 0.5^2 and 0.1^2 (ratio 25)
    c1 = dict(weight=0.5, mean=3.0, cov=1.0, intercept=1.0, slope=1.0, noise_var=0.25)
    c2 = dict(weight=0.5, mean=7.0, cov=1.0, intercept=12.0, slope=-1.0, noise_var=0.01)
    cont = ContaminationSpec("background_box", 20, low=(-1.0, -3.0), high=(11.0, 12.0))
    return _two_lines(90, 90, c1, c2, [cont])


def _simdata6():
    c1 = dict(weight=0.5, mean=2.0, cov=1.0, intercept=0.0, slope=3.0, noise_var=0.25)
    c2 = dict(weight=0.5, mean=6.0, cov=1.0, intercept=20.0, slope=-1.0, noise_var=0.25)
    cont = ContaminationSpec("pointwise", 20, center=(4.0, -4.0), spread=0.1)
    return _two_lines(90, 90, c1, c2, [cont])


# simdata7/8 share the clean part: no remarkable difference in the X distributions
_SIM78_A = dict(weight=0.5, mean=5.0, cov=2.0, intercept=1.0, slope=2.0, noise_var=0.25)
_SIM78_B = dict(weight=0.5, mean=5.0, cov=2.0, intercept=14.0, slope=-1.0, noise_var=0.25)


def _simdata7():
    # vertical outliers inside the covariate range
    cont = ContaminationSpec("pointwise", 20, center=(5.0, 22.0), spread=0.5)
    return _two_lines(90, 90, _SIM78_A, _SIM78_B, [cont])


def _simdata8():
    # bad leverage points far out in x, lying close to an extension of neither line
    cont = ContaminationSpec("pointwise", 20, center=(20.0, 20.0), spread=0.5)
    return _two_lines(90, 90, _SIM78_A, _SIM78_B, [cont])


def _tone_analog(location):
    # repo default: lines y = x and y = 2 crossing at (2, 2), covariates mostly in
    # [1.4, 3.4]; 15 contaminating points out of 165 (about 9%)
    c1 = dict(weight=0.5, mean=2.4, cov=0.15, intercept=0.0, slope=1.0, noise_var=0.04)
    c2 = dict(weight=0.5, mean=2.4, cov=0.15, intercept=2.0, slope=0.0, noise_var=0.01)
    cont = ContaminationSpec("pointwise", 15, center=TONE_LOCATIONS[location], spread=0.1)
    return _two_lines(75, 75, c1, c2, [cont])


PRESETS = {
    "simdata1": _simdata1,
    "simdata1_background": lambda: _simdata1(background=True),
    "simdata2": _simdata2,
    "simdata3": _simdata3,
    "simdata4": _simdata4,
    "simdata5": _simdata5,
    "simdata6": _simdata6,
    "simdata7": _simdata7,
    "simdata8": _simdata8,
}
for _i in range(len(TONE_LOCATIONS)):
    PRESETS[f"tone_analog_{_i + 1}"] = (lambda i: lambda: _tone_analog(i))(_i)


def preset(name: str, location: Optional[int] = None) -> ScenarioSpec:
    """Named scenario.  ``preset("tone_analog", location=k)`` equals ``tone_analog_{k+1}``."""
    if name == "tone_analog":
        if location is None or not 0 <= location < len(TONE_LOCATIONS):
            raise UnknownPresetError("tone_analog needs location in 0..3")
        return _tone_analog(location)
    try:
        return PRESETS[name]()
    except KeyError:
        raise UnknownPresetError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def true_params(spec: ScenarioSpec) -> dict:
    """Generating parameters as arrays, for evaluation against a fit."""
    comps = spec.components
    return dict(weights=np.array([c.weight for c in comps]),
                means=np.array([c.mean for c in comps]),
                scatters=np.array([c.cov for c in comps]),
                intercepts=np.array([c.intercept for c in comps]),
                slopes=np.array([c.slope for c in comps]),
                noise_vars=np.array([c.noise_var for c in comps]))
