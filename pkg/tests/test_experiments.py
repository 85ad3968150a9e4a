import json
import math

import numpy as np
import pytest

from twoopt_lab import experiments as X
from twoopt_lab.experiments import ExperimentConfig, RecordRow


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(seeds=[])
    with pytest.raises(ValueError):
        ExperimentConfig(n=[2])
    with pytest.raises(ValueError):
        ExperimentConfig(model="phi", phi=[0.5])
    with pytest.raises(ValueError):
        ExperimentConfig(model="gaussian", sigma=0)
    with pytest.raises(ValueError):
        ExperimentConfig(pivot="scripted")
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"bogus": 1})
    cfg = ExperimentConfig.from_dict({"model": "phi", "n": 50, "phi": [1, 2], "seeds": 3})
    assert cfg.settings() == [(50, 1.0), (50, 2.0)] and cfg.seeds == [3]


def test_columns_in_order():
    assert X.COLUMNS[:18] == (
        "seed", "model", "n", "d", "phi_effective", "p", "pivot", "init", "steps", "init_length",
        "final_length", "opt_length", "opt_lower_bound", "ratio", "pairs_disjoint",
        "pairs_type01", "min_delta", "runtime_ms")


def test_small_opt_rows():
    cfg = ExperimentConfig(n=[9], seeds=list(range(6)), starts=3)
    rows = X.run_experiment(cfg)
    assert len(rows) == 6
    for r in rows:
        assert not r.error and not r.check()
        assert r.opt_length is not None and r.ratio >= 1 - 1e-12
        assert r.opt_lower_bound <= r.opt_length
        assert r.runtime_ms is None


def test_row_count_and_order():
    cfg = ExperimentConfig(n=[12, 10], seeds=[3, 1], with_opt=False)
    rows = X.run_experiment(cfg)
    assert [(r.seed, r.n) for r in rows] == [(1, 12), (1, 10), (3, 12), (3, 10)]


@pytest.mark.parametrize("init", ["random", "nearest", "cheapest", "random_order"])
@pytest.mark.parametrize("pivot", ["first", "best", "random"])
def test_models_and_rules(init, pivot):
    for model in ("uniform", "phi", "gaussian"):
        cfg = ExperimentConfig(model=model, n=[14], phi=[3], sigma=0.3, pivot=pivot, init=init,
                               seeds=[0])
        (r,) = X.run_experiment(cfg)
        assert not r.error and not r.check()
        assert r.pairs_disjoint is not None and r.pairs_type01 is not None


def test_gaussian_reports_both_phis():
    cfg = ExperimentConfig(model="gaussian", n=[10], sigma=0.2, alpha=1.0, seeds=[0])
    (r,) = X.run_experiment(cfg)
    assert r.phi_effective == pytest.approx(r.phi_raw * 9, rel=1e-12)


def test_gadget_rows():
    cfg = ExperimentConfig(model="gadget", family="euclidean", n=[3], pivot="scripted", seeds=[0])
    (r,) = X.run_experiment(cfg)
    assert r.steps == 50 and r.n == 24 and r.init == "gadget"
    cfg = ExperimentConfig(model="gadget", family="manhattan", n=[1], pivot="first", seeds=[0])
    (r,) = X.run_experiment(cfg)
    assert not r.error and r.p == "1"


def test_truncation_flag():
    cfg = ExperimentConfig(n=[60], seeds=[0], step_limit=3, with_opt=False)
    (r,) = X.run_experiment(cfg)
    assert r.steps == 3 and r.truncated


def test_error_rows_do_not_stop_the_sweep(monkeypatch):
    real = X.build_instance

    def flaky(cfg, n, phi, seed):
        if seed == 1:
            raise RuntimeError("boom")
        return real(cfg, n, phi, seed)

    monkeypatch.setattr(X, "build_instance", flaky)
    rows = X.run_experiment(ExperimentConfig(n=[8], seeds=[0, 1, 2]))
    assert [bool(r.error) for r in rows] == [False, True, False]
    assert "boom" in rows[1].error


def test_csv_and_jsonl_format():
    cfg = ExperimentConfig(n=[8, 16], seeds=[0, 1])
    rows = X.run_experiment(cfg)
    text = X.format_rows(rows, cfg, "csv")
    assert text.splitlines()[0] == X.CSV_VERSION
    parsed = X.read_rows_csv(text)
    assert len(parsed) == 4 and list(parsed[0]) == list(X.COLUMNS)
    assert float(parsed[0]["final_length"]) == rows[0].final_length
    assert "# loglog_slope_steps_vs_n" in text
    lines = X.format_rows(rows, cfg, "jsonl").splitlines()
    assert len(lines) == 5 and json.loads(lines[0])["seed"] == 0
    assert "summary" in json.loads(lines[-1])
    with pytest.raises(ValueError):
        X.format_rows(rows, cfg, "xml")


def test_deterministic_and_parallel_equal():
    cfg = ExperimentConfig(model="phi", n=[15, 30], phi=[1, 4], seeds=[0, 1, 2], pivot="random")
    a = X.format_rows(X.run_experiment(cfg), cfg)
    b = X.format_rows(X.run_experiment(cfg), cfg)
    cfg.workers = 2
    c = X.format_rows(X.run_experiment(cfg), cfg)
    assert a == b == c


def test_timing_opt_in():
    cfg = ExperimentConfig(n=[10], seeds=[0], record_timing=True)
    (r,) = X.run_experiment(cfg)
    assert r.runtime_ms is not None and r.runtime_ms >= 0


def test_loglog_slope():
    assert X.loglog_slope([1, 2, 4], [3, 12, 48]) == pytest.approx(2.0)


def test_record_row_check():
    r = RecordRow(0, "uniform", 5, 2, 1.0, "2", "first", "random", 2, 1.0, 2.0, 1.0, 0.0, 0.5,
                  0, 0, 0.1, None)
    assert set(r.check()) == {"final_length > init_length", "ratio < 1"}
