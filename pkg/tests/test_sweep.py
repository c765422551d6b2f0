import csv
import json
import math

import numpy as np
import pytest

from aonlab import BudgetExceeded, PreconditionError, SweepConfig, Task, emit, run_sweep
from aonlab.sweep import CSV_COLUMNS, DEFAULT_RATIOS, SweepResult, SweepRow, load_config, load_json

SMALL = dict(p=10, k=2, sigma2=0.2, trials=100, timing=False)


class TestConfig:
    def test_defaults(self):
        cfg = SweepConfig()
        assert (cfg.p, cfg.k, cfg.sigma2, cfg.trials) == (24, 3, 0.03, 200)
        assert cfg.ratios == DEFAULT_RATIOS
        assert cfg.tasks == frozenset(Task)

    def test_ratio_grid(self):
        cfg = SweepConfig(p=16, k=2, sigma2=2 / 3, ratios=(0.5, 1.0, 1.01, 2.0))
        # n* = 6 exactly, so 1.0 must not round up to 7
        assert cfg.grid() == [3, 6, 7, 12]

    def test_n_grid_wins(self):
        assert SweepConfig(n_grid=(0, 4, 2)).grid() == [0, 4, 2]

    @pytest.mark.parametrize("kwargs", [dict(trials=0), dict(n_grid=()), dict(n_grid=(-1,)), dict(ratios=(-0.5,))])
    def test_invalid(self, kwargs):
        with pytest.raises(PreconditionError):
            SweepConfig(**kwargs)

    def test_unknown_task(self):
        with pytest.raises(PreconditionError):
            Task.parse("nope")

    def test_dict_round_trip(self):
        cfg = SweepConfig(n_grid=(1, 2), tasks={Task.MMSE, Task.DIVERGENCE}, lam=3.0)
        assert SweepConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


class TestRunSweep:
    def test_no_data_baseline(self):
        res = run_sweep(SweepConfig(n_grid=(0,), tasks={Task.MMSE}, **SMALL))
        assert res.rows[0].mmse_ratio == pytest.approx(1.0, abs=1e-9)
        assert res.rows[0].detect_risk_linear is None

    def test_row_per_grid_point(self):
        res = run_sweep(SweepConfig(n_grid=(0, 1, 3), **SMALL))
        assert [r.n for r in res.rows] == [0, 1, 3]
        # the residual test is skipped without observations
        assert res.rows[0].detect_risk_residual is None
        assert res.rows[1].detect_risk_residual is not None

    def test_ranges(self):
        res = run_sweep(SweepConfig(ratios=(0.5, 1.0, 2.0), **SMALL))
        for row in res.rows:
            for name in ("mle_fail_rate", "tv_mc"):
                assert 0 <= getattr(row, name) <= 1
            for name in ("detect_risk_residual", "detect_risk_linear"):
                assert 0 <= getattr(row, name) <= 2
            assert row.mmse_ratio >= 0
            assert row.chi2_exact >= 0

    def test_task_columns_independent(self):
        both = run_sweep(SweepConfig(n_grid=(2,), tasks={Task.MMSE, Task.MLE_RISK}, **SMALL)).rows[0]
        alone = run_sweep(SweepConfig(n_grid=(2,), tasks={Task.MLE_RISK}, **SMALL)).rows[0]
        assert both.mle_fail_rate == alone.mle_fail_rate

    def test_budget_message(self):
        with pytest.raises(BudgetExceeded, match="shrink"):
            run_sweep(SweepConfig(budget=1000, **{**SMALL, "timing": True}))

    def test_enumeration_limit(self):
        with pytest.raises(BudgetExceeded):
            run_sweep(SweepConfig(p=200, k=5, n_grid=(1,)))

    def test_threads_identical(self):
        cfg = SweepConfig(ratios=(0.5, 1.5), **SMALL)
        a = run_sweep(cfg)
        b = run_sweep(SweepConfig(ratios=(0.5, 1.5), threads=4, **SMALL))
        assert a.rows == b.rows

    def test_timing_recorded(self):
        res = run_sweep(SweepConfig(n_grid=(1,), tasks={Task.DETECT_LINEAR}, **{**SMALL, "timing": True}))
        assert res.rows[0].wall_time_s > 0


class TestEmit:
    @pytest.fixture
    def result(self):
        return run_sweep(SweepConfig(n_grid=(0, 2), **SMALL))

    def test_csv_shape(self, result, tmp_path):
        path = tmp_path / "out.csv"
        emit(result, "csv", path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[0] == "n,n_over_nstar,mmse_ratio,mmse_se,mle_fail_rate,detect_risk_residual,detect_risk_linear,chi2_exact,kl_mc,tv_mc,wall_time_s"
        rows = list(csv.reader(lines))
        assert len(rows) == 3
        assert all(len(r) == 11 for r in rows)
        # missing values stay empty
        assert rows[1][CSV_COLUMNS.index("detect_risk_residual")] == ""
        assert rows[1][CSV_COLUMNS.index("wall_time_s")] == ""

    def test_ten_significant_digits(self, tmp_path):
        row = SweepRow(n=3, n_over_nstar=1 / 3, mmse_ratio=math.pi)
        path = tmp_path / "out.csv"
        emit(SweepResult(SweepConfig(**SMALL), [row]), "csv", path)
        values = path.read_text().splitlines()[1].split(",")
        assert values[:3] == ["3", "0.3333333333", "3.141592654"]

    def test_empty_tasks(self, tmp_path):
        res = run_sweep(SweepConfig(n_grid=(1,), tasks=set(), **SMALL))
        emit(SweepResult(res.config, []), "csv", tmp_path / "h.csv")
        assert (tmp_path / "h.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
        emit(SweepResult(res.config, []), "json", tmp_path / "h.json")
        doc = json.loads((tmp_path / "h.json").read_text())
        assert doc["rows"] == [] and doc["config"]["tasks"] == []

    def test_json_round_trip(self, result, tmp_path):
        path = tmp_path / "out.json"
        emit(result, "json", path)
        back = load_json(path)
        assert back.rows == result.rows
        assert back.config == result.config

    def test_byte_identical(self, tmp_path):
        cfg = SweepConfig(ratios=(0.5, 1.0), **SMALL)
        emit(run_sweep(cfg), "csv", tmp_path / "a.csv")
        emit(run_sweep(cfg), "csv", tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_bad_format(self, result, tmp_path):
        with pytest.raises(PreconditionError):
            emit(result, "xml", tmp_path / "x")

    def test_io_error_surfaces(self, result, tmp_path):
        with pytest.raises(OSError):
            emit(result, "csv", tmp_path / "missing" / "out.csv")


class TestIniConfig:
    def test_full(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text(
            "[model]\np = 12\nk = 2\nsigma2 = 0.25\nlambda = 3.5\n"
            "[sweep]\nratios = 0.5, 1, 2\ntrials = 150\ntasks = mmse divergence\nalpha = 0.2\n"
            "[run]\nseed = 42\nthreads = 2\nbudget = 1e9\ntiming = no\n"
        )
        cfg = load_config(path)
        assert (cfg.p, cfg.k, cfg.sigma2, cfg.lam) == (12, 2, 0.25, 3.5)
        assert cfg.ratios == (0.5, 1.0, 2.0)
        assert cfg.tasks == {Task.MMSE, Task.DIVERGENCE}
        assert (cfg.seed, cfg.threads, cfg.budget, cfg.timing, cfg.alpha) == (42, 2, 10**9, False, 0.2)

    def test_defaults_and_matched_lambda(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[model]\nlambda = lambda0\n[sweep]\nn_grid = 0 1 2\n")
        cfg = load_config(path)
        assert cfg.lam is None and cfg.n_grid == (0, 1, 2) and cfg.p == 24

    def test_unknown_section(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[extra]\nx = 1\n")
        with pytest.raises(PreconditionError):
            load_config(path)


def test_mmse_trend_small_profile():
    res = run_sweep(SweepConfig(p=12, k=2, sigma2=0.05, ratios=(0.25, 1.0, 3.0), trials=200, tasks={Task.MMSE}, timing=False))
    ratios = np.array(res.column("mmse_ratio"))
    ses = np.array(res.column("mmse_se"))
    assert np.all(np.diff(ratios) <= 3 * np.hypot(ses[1:], ses[:-1]))
