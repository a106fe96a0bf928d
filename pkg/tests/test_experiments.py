import json
import math

import numpy as np
import pytest

from fdlap.continuum import corpus_by_id
from fdlap.dirichlet import assemble, solve
from fdlap.experiments import (CSV_COLUMNS, ConfigError, ExperimentConfig, RateReport, comparison_rate, dumps, emit,
                               fit_rate, run_comparison, run_dirichlet_convergence, run_extension,
                               run_kernel_validation, run_max_principle)


def test_fit_rate_recovers_a_power_law():
    hs = 2.0 ** -np.arange(3, 9)
    slope, intercept, rms = fit_rate(hs, 3.0 * hs**0.7)
    assert slope == pytest.approx(0.7, abs=1e-12)
    assert intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert rms < 1e-12


@pytest.mark.parametrize("hs, es", [
    ([0.5, 0.25, 0.125], [1, 1, 1]),
    ([0.5, 0.25, 0.25, 0.1], [1, 1, 1, 1]),
    ([0.1, 0.2, 0.3, 0.4], [1, 1, 1, 1]),
    ([0.5, 0.25, 0.125, 0.0625], [1, 0, 1, 1]),
])
def test_fit_rate_rejects_bad_data(hs, es):
    with pytest.raises(ValueError):
        fit_rate(hs, es)


def test_rate_report_status():
    hs = 2.0 ** -np.arange(3, 8)
    good = RateReport.from_pairs("x", "c", 0.2, 0.6, hs, hs**0.2, expected=0.2)
    assert good.band == pytest.approx((0.1, 0.35)) and good.status == "pass" and good.passed
    off = RateReport.from_pairs("x", "c", 0.2, 0.6, hs, hs**0.5, expected=0.2)
    assert off.status == "fail" and not off.passed
    noisy = RateReport.from_pairs("x", "c", 0.2, 0.6, hs, hs**0.2 * np.array([1, 3, 0.3, 4, 0.2]), expected=0.2)
    assert noisy.status == "rate not established" and not noisy.passed
    free = RateReport.from_pairs("x", "c", 0.2, 0.6, hs, hs**2)
    assert free.status == "reported" and free.passed
    rows = good.rows()
    assert len(rows) == 5 and set(rows[0]) == set(CSV_COLUMNS) and rows[0]["R"] == ""


def test_config_validation():
    for bad in (dict(s=[1.2]), dict(alpha=[0.0]), dict(h=[]), dict(h=[3, 3]), dict(R_factor=1.0),
                dict(format="xml"), dict(tol=0.0), dict(samples=0), dict(corpus=["nope"])):
        with pytest.raises(ConfigError):
            ExperimentConfig(**bad)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"speed": 3})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("[1, 2]")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load("/nonexistent/config.json")


def test_config_round_trip(tmp_path):
    cfg = ExperimentConfig(s=[0.15], h=[0.5, 0.25, 0.1, 0.05], h_exponents=False, seed=7, format="json")
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    assert cfg.mesh_sizes == [0.5, 0.25, 0.1, 0.05]
    assert ExperimentConfig(h=[5, 3, 4]).mesh_sizes == [0.125, 0.0625, 0.03125]
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert ExperimentConfig.load(str(path)) == cfg
    # a JSON result document parses back to its config
    doc = dumps([{"experiment": "e", "error": 1.0}], "json", cfg)
    assert ExperimentConfig.from_json(doc) == cfg
    assert cfg.replace(seed=None, samples=3).samples == 3


def test_csv_schema_and_float_repr():
    hs = 2.0 ** -np.arange(3, 7)
    rep = RateReport.from_pairs("demo", "c", 0.2, 0.6, hs, 0.1 * hs**0.4, expected=0.4, Rs=[1, 2, 3, 4])
    text = dumps([rep, {"experiment": "extra", "s": np.float64(0.1), "error": 1 / 3, "threshold": 9}])
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 6
    assert lines[-1] == "extra,0.1,,,,0.3333333333333333,,"
    assert "np.float64" not in text
    with pytest.raises(ConfigError):
        dumps([], "xml")


def test_emit_paths(tmp_path):
    rows = [{"experiment": "e", "error": 2.0}]
    path = tmp_path / "out.csv"
    text = emit(rows, "csv", str(path))
    assert path.read_text() == text
    missing = tmp_path / "nope" / "out.csv"
    with pytest.raises(FileNotFoundError, match="nope"):
        emit(rows, "csv", str(missing))


def test_comparison_rates():
    assert comparison_rate(corpus_by_id("holder_0.6"), 0.2) == (0, pytest.approx(0.2))
    assert comparison_rate(corpus_by_id("c1_0.3"), 0.3) == (0, pytest.approx(0.7))
    l, rate = comparison_rate(corpus_by_id("c1_0.6"), 0.2)
    assert l == 1 and rate == pytest.approx(0.2)
    with pytest.raises(ConfigError):
        comparison_rate(corpus_by_id("holder_0.3"), 0.2)


def test_comparison_on_a_smooth_entry():
    cfg = ExperimentConfig(s=[0.5], corpus=["gauss"], h=[2, 3, 4, 5], window=1.0)
    (rep,) = run_comparison(cfg)
    assert rep.status == "reported" and rep.diagnostics["derivative_order"] == 0
    assert np.all(np.diff(rep.errors) < 0)
    assert rep.slope > 1.5


def test_comparison_case_i_rate():
    cfg = ExperimentConfig(s=[0.2], corpus=["holder_0.9"], h=[3, 4, 5, 6, 7])
    (rep,) = run_comparison(cfg)
    assert rep.expected == pytest.approx(0.5) and rep.status == "pass"


def test_comparison_rejects_a_hypothesis_mismatch():
    with pytest.raises(ConfigError):
        run_comparison(ExperimentConfig(s=[0.4], corpus=["holder_0.6"], h=[3, 4, 5, 6]))


def test_dirichlet_convergence_small():
    cfg = ExperimentConfig(s=[0.2], alpha=[0.3], h=[3, 4, 5, 6])
    (rep,) = run_dirichlet_convergence(cfg)
    d = rep.diagnostics
    assert len(rep.Rs) == 4 and all(R >= 2.2 for R in rep.Rs)
    assert max(d["cg_residuals"]) <= cfg.tol
    assert all(r > 0 for r in d["exterior_ratio"])
    assert np.all(np.diff(rep.errors) < 0)


def test_zero_source_gives_zero_solution():
    rep = solve(assemble(0.2, 0.1, 2.0, 0.0))
    assert rep.iterations == 0 and np.all(rep.interior == 0.0)


def test_kernel_validation_passes():
    rows = run_kernel_validation(ExperimentConfig())
    assert all(r["passed"] for r in rows)
    checks = {r["experiment"] for r in rows}
    assert {"kernel:quadrature", "kernel:alternate", "kernel:zero_row", "kernel:kernel_sum"} <= checks


def test_extension_rows_pass():
    rows = run_extension(ExperimentConfig(s=[0.3]))
    assert {r["experiment"] for r in rows} == {"extension:dtn", "extension:ntd"}
    assert all(r["passed"] for r in rows)


def test_max_principle_run_is_deterministic():
    cfg = ExperimentConfig(s=[0.3], h=[2, 3], R_values=[1.0, 2.0], seed=5)
    a = run_max_principle(cfg, instances=6)
    b = run_max_principle(cfg, instances=6)
    assert a["passed"] and a["instances_hold"]
    assert json.dumps(a, sort_keys=True, default=float) == json.dumps(b, sort_keys=True, default=float)
