"""JSON run reports and CSV data files."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .baselines import MixRegParams
from .core import CWRMError, Dataset, FitConfig, ModelParams, TrimmedFit

SCHEMA = 1
LABEL_COLUMN = "true_label"


class CsvFormatError(CWRMError):
    """Malformed CSV input (ragged rows, non-numeric cells, unknown column)."""


class ReportFormatError(CWRMError):
    pass


# --------------------------------------------------------------------------
# reports

def params_to_dict(params) -> dict:
    kind = "cwm" if isinstance(params, ModelParams) else "mixreg"
    out = {"kind": kind}
    for f in fields(params):
        out[f.name] = np.asarray(getattr(params, f.name)).tolist()
    return out


def params_from_dict(data: dict):
    data = dict(data)
    kind = data.pop("kind")
    cls = {"cwm": ModelParams, "mixreg": MixRegParams}.get(kind)
    if cls is None:
        raise ReportFormatError(f"unknown parameter kind {kind!r}")
    return cls(**{k: np.asarray(v, dtype=float) for k, v in data.items()})


def bands(params) -> list:
    """Regression line and +-2 sigma half-width of every component."""
    return [{"component": g + 1,
             "intercept": float(params.intercepts[g]),
             "slope": np.asarray(params.slopes[g]).tolist(),
             "half_width": float(2.0 * np.sqrt(params.noise_vars[g]))}
            for g in range(params.G)]


@dataclass
class RunReport:
    """Everything needed to reproduce and inspect one fit.

    `wall_time` is the only field that varies between identical runs.
    """

    method: str
    config: dict
    n: int
    retained: int
    params: dict
    labels: list
    z: list
    max_posterior: list
    objective: float
    bands: list
    n_iter: int
    converged: bool
    start_index: int
    wall_time: float = 0.0
    schema: int = field(default=SCHEMA)

    @classmethod
    def from_fit(cls, method: str, config: FitConfig, result: TrimmedFit,
                 wall_time: float = 0.0) -> "RunReport":
        z = np.asarray(result.resp.z, dtype=int)
        cfg = asdict(config)
        cfg.pop("workers")
        return cls(method=method, config=cfg, n=int(z.size), retained=int(z.sum()),
                   params=params_to_dict(result.params),
                   labels=np.asarray(result.labels, dtype=int).tolist(), z=z.tolist(),
                   max_posterior=np.asarray(result.resp.tau).max(axis=1).tolist(),
                   objective=float(result.objective), bands=bands(result.params),
                   n_iter=int(result.n_iter), converged=bool(result.converged),
                   start_index=int(result.start_index), wall_time=float(wall_time))

    def model_params(self):
        return params_from_dict(self.params)

    def to_dict(self, include_wall_time: bool = True) -> dict:
        out = asdict(self)
        if not include_wall_time:
            out.pop("wall_time")
        # schema first, for humans reading the file
        return {"schema": out.pop("schema"), **out}

    def to_json(self, include_wall_time: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_time), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        if data.get("schema") != SCHEMA:
            raise ReportFormatError(f"unsupported report schema {data.get('schema')!r}")
        names = {f.name for f in fields(cls)}
        missing = names - set(data) - {"wall_time"}
        if missing:
            raise ReportFormatError(f"report lacks fields {sorted(missing)}")
        return cls(**{k: v for k, v in data.items() if k in names})

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ReportFormatError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)


# --------------------------------------------------------------------------
# CSV

def _column_index(spec, names: Sequence[str], ncol: int) -> int:
    if isinstance(spec, str) and not spec.lstrip("-").isdigit():
        if spec not in names:
            raise CsvFormatError(f"no column named {spec!r}")
        return list(names).index(spec)
    k = int(spec)
    if not -ncol <= k < ncol:
        raise CsvFormatError(f"column index {k} out of range for {ncol} columns")
    return k % ncol


def parse_csv(text: str, header: bool = True, response=None) -> tuple:
    """Parse CSV text into a `Dataset` and the covariate column names.

    The response is the last non-label column unless `response` (a column
    name, or a 0-based index, negative counting from the end) says otherwise.
    A column named ``true_label`` is read as ground truth when a header is
    present.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise CsvFormatError("no rows")
    if header:
        names, rows = [c.strip() for c in rows[0]], rows[1:]
    else:
        names = [f"col{j + 1}" for j in range(len(rows[0]))]
    ncol = len(names)
    for i, r in enumerate(rows):
        if len(r) != ncol:
            raise CsvFormatError(f"row {i + 1 + header} has {len(r)} fields, expected {ncol}")
    if not rows:
        raise CsvFormatError("no data rows")
    try:
        values = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise CsvFormatError(f"non-numeric cell: {exc}") from None
    label_col = names.index(LABEL_COLUMN) if header and LABEL_COLUMN in names else None
    if response is None:
        candidates = [j for j in range(ncol) if j != label_col]
        if len(candidates) < 2:
            raise CsvFormatError("need at least one covariate and a response column")
        y_col = candidates[-1]
    else:
        y_col = _column_index(response, names, ncol)
        if y_col == label_col:
            raise CsvFormatError("the label column cannot be the response")
    x_cols = [j for j in range(ncol) if j not in (y_col, label_col)]
    if not x_cols:
        raise CsvFormatError("no covariate columns")
    labels = None
    if label_col is not None:
        lab = values[:, label_col]
        if np.any(lab != np.round(lab)) or np.any(lab < 0):
            raise CsvFormatError("true_label must hold non-negative integers")
        labels = lab.astype(int)
    data = Dataset(values[:, x_cols], values[:, y_col], labels)
    return data, [names[j] for j in x_cols]


def read_csv(path, header: bool = True, response=None) -> tuple:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_csv(fh.read(), header=header, response=response)


def _fmt(v):
    return repr(float(v))


def dataset_to_csv(data: Dataset, header: bool = True) -> str:
    """Columns x_1..x_d, y and, when labels are known, true_label."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = [f"x_{j + 1}" for j in range(data.d)] + ["y"]
    if data.true_labels is not None:
        cols.append(LABEL_COLUMN)
    if header:
        w.writerow(cols)
    for i in range(data.n):
        row = [_fmt(v) for v in data.x[i]] + [_fmt(data.y[i])]
        if data.true_labels is not None:
            row.append(int(data.true_labels[i]))
        w.writerow(row)
    return buf.getvalue()


def rows_to_csv(report: RunReport) -> str:
    """Per-row table: index, label, trimmed flag and largest posterior."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "label", "trimmed", "max_posterior"])
    for i, (lab, z, p) in enumerate(zip(report.labels, report.z, report.max_posterior)):
        w.writerow([i, lab, int(z == 0), _fmt(p)])
    return buf.getvalue()


def table_to_csv(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    buf = io.StringIO()
    columns = list(columns or (rows[0].keys() if rows else []))
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
