"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the summary lines
interleaved with the test names; they are printed even without ``-s``.
"""

import json
import time

import numpy as np
import pytest

from cwrm import Dataset, FitConfig, datagen, fit, fit_once, fit_trimmed_mixreg, trimmed_loglik
from cwrm.cli import main
from cwrm.constraints import WeightedValues, optimal_threshold, truncation_objective
from cwrm.evaluation import evaluate
from cwrm.oracle import exhaustive_lts, exhaustive_trimmed_cwm_g1, grid_threshold

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance] criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    return emit


# --------------------------------------------------------------------------
# criteria 1 and 2 share their runs

def _random_config(rng):
    n = int(rng.integers(30, 201))
    d = int(rng.choice([1, 2, 3]))
    G = int(rng.choice([1, 2, 3]))
    alpha = float(rng.choice([0.0, 0.05, 0.1, 0.25]))
    c_x, c_eps = (float(c) for c in rng.choice([1.0, 5.0, 20.0], size=2))
    G_true = int(rng.integers(1, 4))
    lab = rng.integers(0, G_true, size=n)
    centers = rng.normal(scale=3.0, size=(G_true, d))
    scales = rng.uniform(0.3, 2.0, size=(G_true, d))
    x = centers[lab] + rng.normal(size=(n, d)) * scales[lab]
    b = rng.normal(scale=2.0, size=(G_true, d))
    y = np.einsum("ij,ij->i", x, b[lab]) + rng.normal(scale=rng.uniform(0.1, 1.5), size=n)
    out = rng.random(n) < alpha / 2                       # a few gross outliers
    y[out] += rng.normal(scale=30.0, size=out.sum())
    cfg = FitConfig(G=G, alpha=alpha, c_x=c_x, c_eps=c_eps, seed=int(rng.integers(1 << 30)))
    return Dataset(x, y), cfg


@pytest.fixture(scope="module")
def property_runs():
    rng = np.random.default_rng(2024)
    runs = []
    t0 = time.perf_counter()
    for _ in range(200):
        data, cfg = _random_config(rng)
        steps = []
        res = fit_once(data, cfg, start_index=0,
                       trace=lambda it, p, r, o: steps.append((it, p)))
        runs.append((data, cfg, res, steps))
    return runs, time.perf_counter() - t0


def test_criterion_1_monotone_objective(property_runs, report):
    runs, elapsed = property_runs
    bad = 0
    for _, _, res, _ in runs:
        h = res.history
        for k in range(1, len(h)):
            if k in res.redraws:
                continue            # a re-initialised component may lower the objective
            if h[k] < h[k - 1] - 1e-8 * abs(h[k - 1]):
                bad += 1
    n_steps = sum(len(r[2].history) - 1 for r in runs)
    ok = bad == 0 and elapsed < 120
    report(1, ok, f"{bad} decreasing steps out of {n_steps} in 200 runs, {elapsed:.1f}s")
    assert bad == 0
    assert elapsed < 120


def test_criterion_2_feasibility(property_runs, report):
    runs, _ = property_runs
    problems = []
    for data, cfg, res, steps in runs:
        for it, p in steps:
            ev = np.linalg.eigvalsh(p.scatters)
            if ev.max() > cfg.c_x * ev.min() * (1 + 1e-8):
                problems.append(("eigen ratio", it))
            if p.variance_ratio() > cfg.c_eps * (1 + 1e-8):
                problems.append(("variance ratio", it))
            if cfg.c_x == 1.0:
                a = p.scatters[0, 0, 0]
                target = np.broadcast_to(a * np.eye(p.d), p.scatters.shape)
                if np.max(np.abs(p.scatters - target)) > 1e-8 * a:
                    problems.append(("spherical", it))
            if cfg.c_eps == 1.0:
                v = p.noise_vars
                if np.max(np.abs(v - v[0])) > 1e-10 * v[0]:
                    problems.append(("equal variances", it))
    checked = sum(len(s) for _, _, _, s in runs)
    report(2, not problems, f"{len(problems)} violations over {checked} M-steps")
    assert not problems


# --------------------------------------------------------------------------

def test_criterion_3_threshold_vs_grid(report):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worse, worst_rel = 0, 0.0
    for _ in range(1000):
        K = int(rng.integers(1, 13))
        # values over 8 decades; starting at 1 keeps f away from 0 so that the
        # relative comparison measures the solver, not a cancellation
        v = 10.0 ** rng.uniform(0.0, 8.0, K)
        w = rng.dirichlet(np.ones(K))
        c = 10.0 ** rng.uniform(0.0, 4.0)
        wv = WeightedValues(v, w, c)
        f = float(truncation_objective(wv, optimal_threshold(wv)))
        g = grid_threshold(wv, 100_000).objective
        worse += f > g + 1e-9
        worst_rel = max(worst_rel, abs(f - g) / abs(g))
    elapsed = time.perf_counter() - t0
    ok = worse == 0 and worst_rel <= 1e-7 and elapsed < 60
    report(3, ok, f"solver worse than grid in {worse}/1000, max relative gap "
                  f"{worst_rel:.2e}, {elapsed:.1f}s")
    assert worse == 0
    assert worst_rel <= 1e-7
    assert elapsed < 60


# --------------------------------------------------------------------------

def _tiny_instance(rng):
    x = rng.normal(size=12)
    y = 1.0 + 0.5 * x + rng.normal(scale=0.3, size=12)
    k = rng.choice(12, size=2, replace=False)
    y[k] += rng.normal(scale=5.0, size=2)
    return Dataset(x, y)


def test_criterion_4_global_optimum_g1(report):
    rng = np.random.default_rng(99)
    t0 = time.perf_counter()
    cwm_bad, lts_bad, worst = 0, 0, 0.0
    for i in range(50):
        data = _tiny_instance(rng)
        cfg = FitConfig(G=1, alpha=1 / 6, n_starts=50, seed=i)
        for fitter, oracle, tag in ((fit, exhaustive_trimmed_cwm_g1, "cwm"),
                                    (fit_trimmed_mixreg, exhaustive_lts, "lts")):
            ref = oracle(data, 1 / 6).objective
            got = fitter(data, cfg).objective
            rel = abs(got - ref) / abs(ref)
            worst = max(worst, rel)
            if rel > 1e-6 or got > ref + 1e-9:
                if tag == "cwm":
                    cwm_bad += 1
                else:
                    lts_bad += 1
    elapsed = time.perf_counter() - t0
    ok = cwm_bad == 0 and lts_bad == 0 and elapsed < 120
    report(4, ok, f"mismatches cwm {cwm_bad}/50, lts {lts_bad}/50, max relative gap "
                  f"{worst:.1e}, {elapsed:.1f}s")
    assert cwm_bad == 0 and lts_bad == 0
    assert elapsed < 120


# --------------------------------------------------------------------------

def test_criterion_5_simdata1(report):
    spec = datagen.preset("simdata1")
    truth = datagen.true_params(spec)["slopes"][:, 0]
    t0 = time.perf_counter()
    good = 0
    slopes = []
    for rep in range(100):
        data = datagen.simulate(spec, seed=1000 + rep)
        res = fit(data, FitConfig(G=2, alpha=0.1, c_x=20, c_eps=20, n_starts=32, seed=rep))
        m = evaluate(data.true_labels, res.labels)
        good += m.recall == 1.0 and m.class_error <= 0.10
        # fitted slope for true component g, via the label matching
        order = np.argsort(m.matching)
        slopes.append(res.params.slopes[order, 0])
    elapsed = time.perf_counter() - t0
    slopes = np.array(slopes)
    se = slopes.std(axis=0, ddof=1) / np.sqrt(len(slopes))
    z = np.abs(slopes.mean(axis=0) - truth) / se
    ok = good >= 95 and np.all(z <= 3) and elapsed < 300
    report(5, ok, f"{good}/100 replicates clean, mean slopes {np.round(slopes.mean(0), 4)} "
                  f"vs {truth}, |z| {np.round(z, 2)}, {elapsed:.1f}s")
    assert good >= 95
    assert np.all(z <= 3)
    assert elapsed < 300


# --------------------------------------------------------------------------

def test_criterion_6_table1_pattern(report):
    t0 = time.perf_counter()
    cw_yes, mr_no = [], []
    for loc in range(4):
        spec = datagen.preset("tone_analog", location=loc)
        a = b = 0
        for rep in range(100):
            data = datagen.simulate(spec, seed=2000 + rep)
            out = data.true_labels == 0
            cfg = FitConfig(G=2, alpha=0.1, c_x=1, c_eps=1, n_starts=12, seed=rep)
            a += bool(np.all(fit(data, cfg).labels[out] == 0))
            b += not np.all(fit_trimmed_mixreg(data, cfg).labels[out] == 0)
        cw_yes.append(a)
        mr_no.append(b)
    elapsed = time.perf_counter() - t0
    ok = min(cw_yes) >= 90 and min(mr_no[1:]) >= 90 and elapsed < 600
    report(6, ok, f"trimmed CWRM 'Yes' per location {cw_yes}/100, trimmed mixreg 'No' "
                  f"{mr_no}/100 (leverage locations are the last three), {elapsed:.1f}s")
    assert min(cw_yes) >= 90
    assert min(mr_no[1:]) >= 90
    assert elapsed < 600


# --------------------------------------------------------------------------

# The degenerate maximum on simdata3 is reached by only about 1% of random
# starts, so both simdata3 arms search harder than the default.
SPURIOUS_STARTS = {"simdata2": 64, "simdata3": 300}


def _spurious(data, labels):
    """Some component takes >= 80% of its points from the planted set."""
    for g in np.unique(labels[labels > 0]):
        if np.mean(data.true_labels[labels == g] == 0) >= 0.8:
            return True
    return False


def _spurious_count(name, alpha, c_x, c_eps):
    spec = datagen.preset(name)
    k = 0
    for rep in range(100):
        data = datagen.simulate(spec, seed=3000 + rep)
        cfg = FitConfig(G=2, alpha=alpha, c_x=c_x, c_eps=c_eps,
                        n_starts=SPURIOUS_STARTS[name], seed=rep)
        k += _spurious(data, fit(data, cfg).labels)
    return k


def test_criterion_7_spurious_solutions(report):
    t0 = time.perf_counter()
    s2 = _spurious_count("simdata2", 0.0, 20, 20)
    s3 = _spurious_count("simdata3", 0.02, 20, 20)
    s3_loose = _spurious_count("simdata3", 0.02, 20, 1e10)
    elapsed = time.perf_counter() - t0
    ok = s2 <= 10 and s3 <= 10 and s3_loose >= 50
    report(7, ok, f"spurious fits: simdata2 c=20 {s2}/100, simdata3 c=20 {s3}/100, "
                  f"simdata3 c_eps=1e10 {s3_loose}/100, {elapsed:.1f}s")
    assert s2 <= 10
    assert s3 <= 10
    assert s3_loose >= 50


# --------------------------------------------------------------------------

def test_criterion_8_equivariance(report):
    rng = np.random.default_rng(8)
    worst, label_changes, perm_gap = 0.0, 0, 0.0
    for i in range(20):
        d = int(rng.integers(1, 4))
        G = int(rng.integers(1, 4))
        x = rng.normal(size=(120, d)) + rng.integers(0, G, size=(120, 1)) * 4.0
        data = Dataset(x, x @ rng.normal(size=d) + rng.normal(scale=0.5, size=120))
        cfg = FitConfig(G=G, alpha=0.1, n_starts=4, seed=i)
        shift_x, shift_y = rng.normal(scale=10.0, size=d), float(rng.normal(scale=10.0))
        a = fit(data, cfg)
        b = fit(data.translated(shift_x, shift_y), cfg)
        label_changes += not np.array_equal(a.labels, b.labels)
        gaps = [abs(b.objective - a.objective) / abs(a.objective),
                np.max(np.abs(b.params.means - a.params.means - shift_x)),
                np.max(np.abs(b.params.scatters - a.params.scatters)),
                np.max(np.abs(b.params.slopes - a.params.slopes)),
                np.max(np.abs(b.params.noise_vars - a.params.noise_vars))]
        worst = max(worst, max(gaps))
        perm = rng.permutation(G)
        perm_gap = max(perm_gap, abs(trimmed_loglik(data, a.params.permuted(perm), a.resp.z)
                                     - a.objective) / abs(a.objective))
    ok = worst <= 1e-8 and label_changes == 0 and perm_gap <= 1e-14
    report(8, ok, f"max translation discrepancy {worst:.1e}, label changes {label_changes}/20, "
                  f"permutation objective gap {perm_gap:.1e}")
    assert label_changes == 0
    assert worst <= 1e-8
    assert perm_gap <= 1e-14


# --------------------------------------------------------------------------

def test_criterion_9_cli_determinism(tmp_path, monkeypatch, report):
    data_path = tmp_path / "d.csv"
    main(["simulate", "--preset", "simdata1", "--seed", "5", "--out", str(data_path)])
    outputs = []
    for run, threads in enumerate(["1", "1", "8"]):
        monkeypatch.setenv("CWRM_THREADS", threads)
        out = tmp_path / f"r{run}.json"
        assert main(["fit", str(data_path), "--groups", "2", "--alpha", "0.1", "--cx", "20",
                     "--ceps", "20", "--seed", "7", "--starts", "32", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        rep.pop("wall_time")
        rows = (tmp_path / f"r{run}_rows.csv").read_text()
        outputs.append((json.dumps(rep, sort_keys=True), rows))
    same = outputs[0] == outputs[1] == outputs[2]
    report(9, same, "two single-thread runs and an 8-thread run "
                    + ("agree byte for byte" if same else "differ"))
    assert same
