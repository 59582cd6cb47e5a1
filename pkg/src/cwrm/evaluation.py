"""Scoring a fitted labelling against ground truth."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import LengthMismatchError


@dataclass(frozen=True)
class Metrics:
    """Summary of a fit against known labels.

    ``recall`` is the fraction of contaminating rows (true label 0) that were
    trimmed; ``false_trim_rate`` the fraction of clean rows that were trimmed.
    ``class_error`` is computed on rows that are clean and retained, after
    matching fitted to true components so as to minimise it.  ``matching[k]``
    is the true component (1-based) matched to fitted component ``k + 1``,
    or 0 if unmatched.  Rates are NaN when their denominator is empty.
    """

    recall: float
    false_trim_rate: float
    class_error: float
    matching: tuple
    param_errors: Optional[dict] = None

    def to_dict(self):
        return asdict(self)


def _rate(num, den):
    return float(num) / int(den) if den else float("nan")


def match_components(true_labels, labels):
    """Best one-to-one matching of fitted to true components on clean retained rows.

    Returns ``(matching, n_agree, n_rows)``.
    """
    true_labels = np.asarray(true_labels)
    labels = np.asarray(labels)
    use = (true_labels > 0) & (labels > 0)
    G_fit = int(max(labels.max(initial=0), 1))
    G_true = int(max(true_labels.max(initial=0), 1))
    conf = np.zeros((G_fit, G_true))
    np.add.at(conf, (labels[use] - 1, true_labels[use] - 1), 1)
    rows, cols = linear_sum_assignment(conf, maximize=True)
    matching = np.zeros(G_fit, dtype=int)
    matching[rows] = cols + 1
    return tuple(matching.tolist()), int(conf[rows, cols].sum()), int(use.sum())


def classification_error(true_labels, labels) -> float:
    _, agree, total = match_components(true_labels, labels)
    return _rate(total - agree, total)


def parameter_errors(params, truth: dict, matching) -> dict:
    """Absolute errors of each matched fitted component against the truth.

    `truth` maps field names (as in `datagen.true_params`) to arrays indexed by
    true component.  Vector and matrix fields report the largest absolute
    entry-wise difference.
    """
    out = {}
    for k, t in enumerate(matching):
        if t == 0:
            continue
        row = {}
        for name, true_val in truth.items():
            if not hasattr(params, name):
                continue
            fitted = np.asarray(getattr(params, name))[k]
            row[name] = float(np.max(np.abs(fitted - np.asarray(true_val)[t - 1])))
        out[str(k + 1)] = row
    return out


def evaluate(true_labels, labels, params=None, truth: Optional[dict] = None) -> Metrics:
    """Score fitted `labels` (0 = trimmed) against `true_labels` (0 = contamination).

    Examples
    --------
    >>> m = evaluate([0, 1, 1, 2, 2], [0, 2, 2, 1, 1])
    >>> m.recall, m.class_error, m.matching
    (1.0, 0.0, (2, 1))
    """
    true_labels = np.asarray(true_labels, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if true_labels.shape != labels.shape:
        raise LengthMismatchError(
            f"{labels.size} fitted labels for {true_labels.size} labelled rows")
    contam = true_labels == 0
    trimmed = labels == 0
    matching, agree, total = match_components(true_labels, labels)
    perr = None
    if params is not None and truth is not None:
        perr = parameter_errors(params, truth, matching)
    return Metrics(recall=_rate((contam & trimmed).sum(), contam.sum()),
                   false_trim_rate=_rate((~contam & trimmed).sum(), (~contam).sum()),
                   class_error=_rate(total - agree, total),
                   matching=matching, param_errors=perr)
