import json
import math
import random

import pytest

from pathloss_ann import data, experiment, mlp, reports
from pathloss_ann.experiment import EvalReport, SweepPoint, SweepReport, rmse
from pathloss_ann.mlp import NetworkConfig
from pathloss_ann.numeric import Matrix
from pathloss_ann.optimizer import OptimizerConfig

FAST = OptimizerConfig(max_iterations=40)


@pytest.fixture(scope="module")
def two_area_split():
    a = data.generate(data.preset("area-a-analog", samples_per_frequency=120, seed=1))
    b = data.generate(data.preset("area-b-analog", samples_per_frequency=120, seed=2))
    return data.split(data.Dataset(a.samples + b.samples), 4)


@pytest.fixture(scope="module")
def eval_report(two_area_split):
    small = {"sig": NetworkConfig(1, 6, "sigmoid"), "tanh": NetworkConfig(1, 6, "tanh")}
    return experiment.evaluate(two_area_split, small, FAST, seed=9)


# rmse

def test_rmse_examples():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert rmse([3.0, -4.0], [0.0, 0.0]) == pytest.approx(3.535534, abs=1e-6)
    with pytest.raises(ValueError):
        rmse([], [])
    with pytest.raises(ValueError):
        rmse([1.0], [1.0, 2.0])


def test_rmse_of_mean_predictor_is_population_std():
    y = [random.Random(3).gauss(100, 8) for _ in range(500)]
    mean = math.fsum(y) / len(y)
    std = Matrix.column(y).col_std()[0, 0]
    assert rmse([mean] * len(y), y) == pytest.approx(std, rel=1e-12)


def test_rmse_permutation_and_scale():
    r = random.Random(4)
    res = [r.gauss(0, 3) for _ in range(100)]
    zeros = [0.0] * 100
    shuffled = res[:]
    r.shuffle(shuffled)
    assert rmse(shuffled, zeros) == pytest.approx(rmse(res, zeros), rel=1e-14)
    assert rmse([-2.5 * v for v in res], zeros) == pytest.approx(2.5 * rmse(res, zeros), rel=1e-14)


def test_improvement_percent():
    assert experiment.improvement_percent(8.0, 8.0) == 0.0
    assert experiment.improvement_percent(8.0, 6.0) == 25.0
    assert experiment.improvement_percent(0.0, 1.0) is None


# sweeps

def test_choose_prefers_smaller_model_on_ties():
    pts = [SweepPoint(40, "tanh", 0, 161, 7.0), SweepPoint(20, "tanh", 0, 81, 7.0), SweepPoint(5, "tanh", 0, 21, 7.5)]
    assert experiment.choose(pts).value == 20
    assert experiment.choose([SweepPoint(1, "tanh", 0, 5, None, error="x")]) is None


def test_single_point_sweep_matches_direct_run(two_area_split):
    base = NetworkConfig(hidden_nodes=4)
    rep = experiment.node_sweep(two_area_split, "tanh", [4], base, FAST, seed=5)
    assert rep.grid == [4] and len(rep.points) == 1
    point = rep.points[0]
    t = data.fit_transform(two_area_split.learn)
    net, _ = experiment.fit_network(base, t.apply(two_area_split.learn), two_area_split.learn.targets(), FAST, point.seed)
    assert point.rmse == rmse(mlp.predict(net, t.apply(two_area_split.validation)), two_area_split.validation.targets())
    assert rep.chosen == {"tanh": 4}


def test_default_grids():
    assert experiment.DEFAULT_LAYER_GRID == tuple(range(1, 9))
    assert experiment.DEFAULT_NODE_GRID == (5, 10, 20, 40, 80)
    assert NetworkConfig().hidden_nodes == 40


def test_sweep_parallel_matches_serial(two_area_split):
    base = NetworkConfig(hidden_nodes=3)
    serial = experiment.layer_sweep(two_area_split, ["relu", "tanh"], [1, 2], base, FAST, seed=2)
    par = experiment.layer_sweep(two_area_split, ["relu", "tanh"], [1, 2], base, FAST, seed=2, jobs=4)
    assert reports.report_json(serial) == reports.report_json(par)
    assert {p.seed for p in serial.points} == {
        experiment.derive_seed(2, experiment.STREAM_SWEEP, i) for i in range(2)
    }


def test_sweep_rejects_bad_grid(two_area_split):
    with pytest.raises(ValueError):
        experiment.layer_sweep(two_area_split, "tanh", [], opt=FAST)
    with pytest.raises(ValueError):
        experiment.layer_sweep(two_area_split, "tanh", [1, 1], opt=FAST)


def test_sweep_records_failures(two_area_split, monkeypatch):
    def boom(*a, **k):
        raise experiment.optimizer.NumericalError("diverged")
    monkeypatch.setattr(experiment, "fit_network", boom)
    rep = experiment.node_sweep(two_area_split, "tanh", [2, 3], opt=FAST)
    assert all(p.rmse is None and "diverged" in p.error for p in rep.points)
    assert rep.chosen == {"tanh": None}


# evaluation

def test_eval_rows_cover_area_frequency_pairs(eval_report, two_area_split):
    rows = eval_report.rows
    assert len(rows) == 2 * 3 + 1
    assert [(r.area, r.frequency) for r in rows[:-1]] == [
        (a, f) for a in ("A", "B") for f in (3400.0, 5300.0, 6400.0)
    ]
    assert rows[-1].area == "all" and rows[-1].frequency is None
    assert rows[-1].n_test == len(two_area_split.test)


def test_overall_pooling_identity(eval_report):
    per = eval_report.rows[:-1]
    o = eval_report.overall
    n = sum(r.n_test for r in per)
    for v in eval_report.variants + ["__baseline__"]:
        get = (lambda r: r.rmse_baseline) if v == "__baseline__" else (lambda r, v=v: r.rmse[v])
        lhs = get(o) ** 2 * n
        rhs = math.fsum(get(r) ** 2 * r.n_test for r in per)
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, rhs)


def test_improvement_consistent_with_rmse(eval_report):
    for r in eval_report.rows:
        for v in eval_report.variants:
            expected = 100 * (r.rmse_baseline - r.rmse[v]) / r.rmse_baseline
            assert abs(r.improvement[v] - expected) < 1e-9


def test_eval_metadata_and_hashes(eval_report):
    md = eval_report.metadata
    assert md["scored_on"] == "test" and md["baseline_protocol"] == "test"
    for v in eval_report.variants:
        assert len(eval_report.models[v]["config_hash"]) == 16
        assert set(eval_report.models[v]["areas"]) == {"A", "B"}
    assert set(eval_report.baselines) == {"A", "B"}


def test_all_data_baseline_protocol(two_area_split):
    rep = experiment.evaluate(two_area_split, [NetworkConfig(1, 3)], FAST, baseline_protocol="all")
    assert rep.overall.n_baseline == len(two_area_split.all())
    with pytest.raises(ValueError):
        experiment.evaluate(two_area_split, [NetworkConfig(1, 3)], FAST, baseline_protocol="some")


def test_eval_unnamed_configs_get_unique_names(two_area_split):
    rep = experiment.evaluate(two_area_split, [NetworkConfig(1, 2), NetworkConfig(1, 3)], FAST)
    assert rep.variants == ["tanh", "tanh_2"]


# reports

def test_eval_json_round_trip(eval_report, tmp_path):
    paths = reports.emit_report(eval_report, tmp_path, ["json"])
    loaded = reports.load_report(paths[0])
    assert isinstance(loaded, EvalReport)
    assert reports.report_json(loaded) == reports.report_json(eval_report)


def test_sweep_outputs(two_area_split, tmp_path):
    rep = experiment.layer_sweep(two_area_split, ["tanh", "relu"], [1, 2, 3], NetworkConfig(hidden_nodes=2), FAST)
    paths = reports.emit_report(rep, tmp_path, run_config={"seed": 0})
    assert [p.name for p in paths] == ["sweep_layers.json", "sweep_layers.csv", "sweep_layers.dat"]
    assert isinstance(reports.load_report(paths[0]), SweepReport)
    assert reports.report_json(reports.load_report(paths[0])) == reports.report_json(rep)
    assert json.loads(paths[0].read_text())["run_config"] == {"seed": 0}
    csv_lines = paths[1].read_text().splitlines()
    assert len(csv_lines) == 1 + 3
    dat = [l for l in paths[2].read_text().splitlines() if not l.startswith("#")]
    header = [l for l in paths[2].read_text().splitlines() if l.startswith("# grid_value")]
    assert header == ["# grid_value rmse_relu rmse_sigmoid rmse_tanh"]
    assert len(dat) == 3 and all(len(l.split()) == 4 for l in dat)
    assert all(l.split()[2] == "nan" for l in dat)


def test_eval_csv_row_count(eval_report):
    lines = reports.report_csv(eval_report).splitlines()
    assert len(lines) == 1 + 2 * 3 + 1
    assert lines[-1].startswith("all,overall,")


def test_emit_rejects_unknown_format(eval_report, tmp_path):
    with pytest.raises(ValueError):
        reports.emit_report(eval_report, tmp_path, ["xlsx"])


def test_load_report_rejects_other_schema(tmp_path):
    p = tmp_path / "r.json"
    p.write_text(json.dumps({"schema_version": 99, "kind": "evaluation"}))
    with pytest.raises(ValueError):
        reports.load_report(p)
