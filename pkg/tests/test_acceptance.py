"""Acceptance suite: one test per release criterion, with a printed verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS/FAIL line
per criterion. Three sub-criteria marked [defect] in their names assert
published comparison values that our stronger benchmark optimizer makes
unreachable; they are expected to stay red and are documented in the
project notes. Everything else must pass.
"""

import functools
import json
import time

import numpy as np
import pytest

import cmpmix as cm
from cmpmix.cli import main as cli_main
from cmpmix.datasets import (
    SIM_10PT_EQUIVALENT_FITS,
    hospital_days,
    icecream,
    sim_5pt,
    sim_10pt,
    sim_15pt_broad,
    sim_15pt_spike,
)
from cmpmix.cmp import pmf_rows
from cmpmix.em import m_step_lambdas, m_step_nus
from cmpmix.io import fit_report, read_dataset
from cmpmix.shape import round_counts
from cmpmix.sim import PRESETS
from cmpmix.types import CmpParams, EmConfig, FrequencyTable, GridSpec, MixtureParams, Support


def criterion(label, budget_seconds):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                print(f"ACCEPTANCE {label}: FAIL ({type(exc).__name__})")
                raise
            elapsed = time.perf_counter() - start
            print(f"ACCEPTANCE {label}: PASS ({elapsed:.2f}s)")
            assert elapsed < budget_seconds, f"runtime {elapsed:.1f}s over budget {budget_seconds}s"

        return wrapper

    return decorate


@criterion("1 normalization", 1.0)
def test_criterion_1_normalization_suite():
    rng = np.random.default_rng(1)
    for upper in (5, 10, 15):
        support = Support(1, upper)
        lams = rng.uniform(0.05, 50.0, 1000)
        nus = rng.uniform(0.0, 10.0, 1000)
        sums = pmf_rows(lams, nus, support).sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) < 1e-12


@criterion("2 special-case reductions", 1.0)
def test_criterion_2_special_cases():
    import math

    support = Support(1, 10)
    xs = support.values()
    pois = 3.0**xs / np.array([math.factorial(int(x)) for x in xs])
    pois /= pois.sum()
    assert np.max(np.abs(cm.pmf_truncated(CmpParams(3.0, 1.0), support) - pois)) < 1e-12

    geo = cm.pmf_untruncated(CmpParams(0.5, 0.0))
    assert np.max(np.abs(geo - 0.5 * 0.5 ** np.arange(len(geo)))) < 1e-10

    bern = cm.pmf_untruncated(CmpParams(1.0, 50.0))
    assert bern[:2].sum() >= 0.999


@criterion("3 reference expected counts", 1.0)
def test_criterion_3_reference_columns():
    data = sim_10pt()
    targets = [
        np.array([22, 2, 0, 1, 2, 4, 7, 13, 20, 29]),
        np.array([21, 3, 0, 0, 1, 4, 8, 14, 21, 28]),
        np.array([22, 2, 0, 0, 1, 4, 8, 14, 21, 28]),
    ]
    for mix, target in zip(SIM_10PT_EQUIVALENT_FITS, targets):
        got = round_counts(cm.expected_counts(cm.mixture_pmf(mix, data.support), 100))
        assert np.max(np.abs(got - target)) <= 1, (got, target)


@criterion("4 identifiability", 1.0)
def test_criterion_4_identifiability():
    data = sim_10pt()
    pmfs = [cm.mixture_pmf(mix, data.support) for mix in SIM_10PT_EQUIVALENT_FITS]
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.max(np.abs(pmfs[i] - pmfs[j])) < 0.02
    lls = [cm.observed_loglik(mix, data) for mix in SIM_10PT_EQUIVALENT_FITS]
    assert max(lls) - min(lls) < 1.0


@criterion("5 EM ascent and determinism", 300.0)
def test_criterion_5_ascent_and_determinism():
    grid = GridSpec(points_per_region=8, min_spacing=5e-3)
    config = EmConfig(max_em_iterations=40)
    rng = np.random.default_rng(20260810)
    supports = [5, 10, 15]
    sizes = [50, 100, 1000]
    for i in range(50):
        size = supports[i % 3]
        n = sizes[(i // 3) % 3]
        counts = rng.multinomial(n, rng.dirichlet(np.ones(size)))
        data = FrequencyTable(support=Support(1, size), counts=counts)
        first = cm.em_fit(data, grid, config)
        trace = np.array(first.loglik_trace)
        assert np.all(np.diff(trace) >= -1e-9), f"dataset {i}: trace decreased"
        second = cm.em_fit(data, grid, config)
        assert first.loglik_trace == second.loglik_trace, f"dataset {i}: trace differs"
        assert first.params == second.params, f"dataset {i}: params differ"
        assert first.init_used == second.init_used


@criterion("6 fit quality: CMP aic near reference and shape", 120.0)
def test_criterion_6_cmp_side():
    data = sim_5pt()
    fit = cm.em_fit(data)
    assert fit.aic == pytest.approx(338.83, abs=5.0)
    assert fit.shape.modes == ((1, 1), (5, 5))
    assert fit.shape.lodes == ((2, 2),)


@criterion("6 fit quality: aic ordering [defect]", 120.0)
def test_criterion_6_aic_ordering_defect():
    # The benchmark reaches loglik -150.78 on this table while the
    # saturated bound is -149.42, so no 5-parameter fit can win the
    # 4-unit penalty difference under either aic convention.
    data = sim_5pt()
    fit = cm.em_fit(data)
    assert fit.aic < fit.benchmark.aic


@criterion("6 fit quality: benchmark aic proximity [defect]", 120.0)
def test_criterion_6_poisson_proximity_defect():
    # Our optimized benchmark fits strictly better than the published
    # 349.02 value (which reflects a weaker basin), landing near 333.6.
    data = sim_5pt()
    fit = cm.fit_poisson_mixture(data)
    assert fit.aic == pytest.approx(349.02, abs=5.0)


@criterion("7 shape golden rows", 1.0)
def test_criterion_7_shape_goldens():
    shape10 = cm.detect_shape(sim_10pt().counts)
    assert shape10.modes == ((1, 1), (10, 10)) and shape10.lodes == ((3, 3),)
    broad = cm.detect_shape(sim_15pt_broad().counts)
    assert broad.modes == ((4, 4), (15, 15)) and broad.lodes == ((1, 1), (12, 12))
    spike = cm.detect_shape(sim_15pt_spike().counts)
    assert spike.modes == ((1, 1), (10, 10)) and spike.lodes == ((4, 4), (15, 15))


@criterion("8 recovery at scale", 300.0)
def test_criterion_8_recovery_at_scale():
    preset = PRESETS["bimodal10"]
    data = cm.sample_mixture(preset.generator, preset.support, 100000, seed=20260810)
    fit = cm.em_fit(data)
    fitted = cm.mixture_pmf(fit.params, preset.support)
    generator = cm.mixture_pmf(preset.generator, preset.support)
    assert np.max(np.abs(fitted - generator)) <= 0.01


@criterion("9 coarse-grid oracle equivalence", 30.0)
def test_criterion_9_coarse_grid_oracle():
    grid = GridSpec(
        nu_regions=((0.0, 10.0),), points_per_region=5, min_spacing=1e9,
        lambda_range=(0.1, 20.0),
    )
    nu_axis = np.linspace(0.0, 10.0, 5)
    lam_axis = np.linspace(0.1, 20.0, 5)
    rng = np.random.default_rng(909)
    for case in range(20):
        size = int(rng.choice([5, 8, 10]))
        counts = rng.multinomial(int(rng.choice([60, 200])), rng.dirichlet(np.ones(size)))
        data = FrequencyTable(support=Support(1, size), counts=counts)
        p = float(rng.uniform(0.1, 0.9))
        l1, l2 = float(rng.uniform(0.5, 5)), float(rng.uniform(2, 15))
        got = m_step_nus(data, p, l1, l2, grid)
        best = (-np.inf, None, None)
        for a in nu_axis:
            for b in nu_axis:
                mix = MixtureParams(p, CmpParams(l1, float(a)), CmpParams(l2, float(b)))
                ll = cm.observed_loglik(mix, data)
                if ll > best[0]:
                    best = (ll, float(a), float(b))
        assert (got[0], got[1]) == (best[1], best[2]), f"case {case} nus"
        assert got[2] == pytest.approx(best[0], rel=1e-12)

        n1, n2 = float(rng.uniform(0, 5)), float(rng.uniform(0, 2))
        got = m_step_lambdas(data, p, n1, n2, grid)
        best = (-np.inf, None, None)
        for a in lam_axis:
            for b in lam_axis:
                mix = MixtureParams(p, CmpParams(float(a), n1), CmpParams(float(b), n2))
                ll = cm.observed_loglik(mix, data)
                if ll > best[0]:
                    best = (ll, float(a), float(b))
        assert (got[0], got[1]) == (best[1], best[2]), f"case {case} lambdas"


@criterion("10 CLI end-to-end", 120.0)
def test_criterion_10_cli_end_to_end(capsys, tmp_path, data_dir):
    # compare: full-resolution fit of the shipped 10-point fixture
    report_path = tmp_path / "report.json"
    code = cli_main(["compare", str(data_dir / "sim_10pt.csv"), "--json", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["n"] == 100
    kinds = {m["model_kind"]: m for m in report["models"]}
    assert set(kinds) == {"poisson_mixture", "cmp_mixture"}
    cmp_entry, pois_entry = kinds["cmp_mixture"], kinds["poisson_mixture"]
    assert cmp_entry["k"] == 5 and pois_entry["k"] == 3
    assert cmp_entry["loglik"] >= pois_entry["loglik"]
    assert sum(cmp_entry["expected_counts"]) == pytest.approx(100, abs=1e-6)
    assert cmp_entry["modes"] == [[1], [10]]
    for entry in (cmp_entry, pois_entry):
        assert set(entry["params"]) == {"p", "lambda1", "nu1", "lambda2", "nu2"}
        assert np.isfinite(entry["aic"]) and np.isfinite(entry["aic_observed"])

    # simulate: byte-deterministic and parseable
    sim_a, sim_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli_main(["simulate", "--preset", "bimodal10", "--seed", "7", "--out", str(sim_a)]) == 0
    assert cli_main(["simulate", "--preset", "bimodal10", "--seed", "7", "--out", str(sim_b)]) == 0
    assert sim_a.read_bytes() == sim_b.read_bytes()
    assert read_dataset(sim_a).n == 100

    # surface: text and JSON agree cell by cell
    assert cli_main(
        ["surface", str(data_dir / "sim_10pt.csv"), "--p", "0.24", "--lambda1", "1.13",
         "--lambda2", "9", "--nu1-grid", "3:4:3", "--nu2-grid", "0.7:0.9:3"]
    ) == 0
    text_rows = capsys.readouterr().out.strip().splitlines()[2:]
    surf_json = tmp_path / "surface.json"
    assert cli_main(
        ["surface", str(data_dir / "sim_10pt.csv"), "--p", "0.24", "--lambda1", "1.13",
         "--lambda2", "9", "--nu1-grid", "3:4:3", "--nu2-grid", "0.7:0.9:3",
         "--json", str(surf_json)]
    ) == 0
    matrix = json.loads(surf_json.read_text())["loglik"]
    for text_row, json_row in zip(text_rows, matrix):
        assert [float(v) for v in text_row.split()] == pytest.approx(json_row, rel=1e-9)

    # shape: golden modes/lodes
    assert cli_main(["shape", str(data_dir / "sim_10pt.csv")]) == 0
    shape = json.loads(capsys.readouterr().out)
    assert shape["modes"] == [[1], [10]] and shape["lodes"] == [[3]]


@criterion("10 CLI report aic clause [defect]", 120.0)
def test_criterion_10_cli_aic_clause_defect(tmp_path, data_dir):
    # The published comparison (370.0 vs 370.6) needs the weaker benchmark:
    # ours sits within 1 nat of the saturated loglik, leaving less than the
    # 2-unit margin this clause allows.
    report_path = tmp_path / "report.json"
    assert cli_main(["compare", str(data_dir / "sim_10pt.csv"), "--json", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    kinds = {m["model_kind"]: m for m in report["models"]}
    assert kinds["cmp_mixture"]["aic"] <= kinds["poisson_mixture"]["aic"] + 2.0


class TestRealDataRegression:
    """Our own first-run outputs, frozen as goldens (loose published refs)."""

    @pytest.mark.parametrize("name,loader", [("icecream_cmp", icecream), ("hospital_days_cmp", hospital_days)])
    def test_golden_fit(self, golden_dir, name, loader):
        golden = json.loads((golden_dir / f"{name}.json").read_text())
        fit = cm.em_fit(loader())
        got = fit_report(fit)
        assert got["model_kind"] == golden["model_kind"]
        assert got["modes"] == golden["modes"]
        assert got["lodes"] == golden["lodes"]
        assert got["loglik"] == pytest.approx(golden["loglik"], rel=1e-6)
        assert got["aic"] == pytest.approx(golden["aic"], rel=1e-6)
        for key in ("p", "lambda1", "nu1", "lambda2", "nu2"):
            assert got["params"][key] == pytest.approx(golden["params"][key], rel=1e-6)
        assert got["expected_counts"] == pytest.approx(golden["expected_counts"], rel=1e-5)

    def test_hospital_modes_sanity(self, golden_dir):
        # loose published reference: first mode 1, second mode at the
        # censored top bin
        golden = json.loads((golden_dir / "hospital_days_cmp.json").read_text())
        assert golden["modes"] == [[1], [15]]
