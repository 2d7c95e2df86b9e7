import json

import pytest

from glnz import cost
from glnz.campaign import (
    CSV_COLUMNS,
    WORKERS_ENV,
    ExperimentConfig,
    HeavyTierError,
    generate,
    load_records,
    run_campaign,
    worker_count,
)
from glnz.cli import main
from glnz.rng import derive_seed


def _config(tmp_path, **kw):
    data = {
        "generator": "silverman",
        "grid": {"n": [6, 8], "T": [1]},
        "seeds_per_cell": 2,
        "campaign_seed": 11,
        "results": "out.csv",
        "records": "rec.jsonl",
    }
    data.update(kw)
    return ExperimentConfig.from_dict(data, base=tmp_path)


def test_empty_grid_writes_header_only(tmp_path):
    cfg = _config(tmp_path, grid={})
    summary = run_campaign(cfg)
    assert summary.computed == 0
    assert (tmp_path / "out.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_campaign_csv_and_resume(tmp_path):
    cfg = _config(tmp_path)
    first = run_campaign(cfg)
    assert first.computed == 4 and first.failed == 0
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0] == "n,params,shortest_bits,longest_bits,found,stage,seconds"
    assert len(lines) == 5
    assert all(line.split(",")[4] == "true" for line in lines[1:])
    assert lines[1].startswith("6,T=1,")
    again = run_campaign(cfg)
    assert again.computed == 0 and again.skipped == 4


def test_resume_drops_torn_line_and_reruns_it(tmp_path):
    cfg = _config(tmp_path)
    run_campaign(cfg)
    path = tmp_path / "rec.jsonl"
    lines = path.read_text().splitlines(keepends=True)
    path.write_text("".join(lines[:-1]) + lines[-1][: len(lines[-1]) // 2])
    assert len(load_records(path)) == 3
    assert path.read_text() == "".join(lines[:-1])
    summary = run_campaign(cfg)
    assert summary.computed == 1 and summary.skipped == 3


def test_corrupt_middle_line_is_an_error(tmp_path):
    path = tmp_path / "rec.jsonl"
    path.write_text('{"a": 1}\nnot json\n{"b": 2}\n')
    with pytest.raises(ValueError):
        load_records(path)


def test_trial_seeds_follow_derive_seed(tmp_path):
    cfg = _config(tmp_path)
    trials = cfg.trials()
    assert [(t["cell"], t["trial"]) for t in trials] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    for t in trials:
        assert t["seed"] == derive_seed(11, t["cell"], t["trial"])
    assert len({t["key"] for t in trials}) == 4
    other = _config(tmp_path, delta=0.75)
    assert other.trials()[0]["key"] != trials[0]["key"]


def test_changed_settings_are_not_skipped(tmp_path):
    run_campaign(_config(tmp_path, grid={"n": [6], "T": [1]}, seeds_per_cell=1))
    summary = run_campaign(_config(tmp_path, grid={"n": [6], "T": [1]}, seeds_per_cell=1, schedule=[3]))
    assert summary.computed == 1


def test_trial_errors_are_recorded(tmp_path):
    cfg = _config(tmp_path, generator="embedded", grid={"n": [6]}, fixed={"d": 9, "T": 1, "l": 3}, seeds_per_cell=1)
    summary = run_campaign(cfg)
    assert summary.failed == 1
    assert summary.records[0]["error"].startswith("ValueError")
    assert (tmp_path / "out.csv").read_text().splitlines()[1].split(",")[5] == "error"


def test_heavy_cells_refused(tmp_path):
    cfg = _config(tmp_path, generator="drs", grid={"n": [912], "R": [24]})
    with pytest.raises(HeavyTierError):
        run_campaign(cfg)
    assert not (tmp_path / "rec.jsonl").exists()


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        _config(tmp_path, colour="red")
    with pytest.raises(ValueError):
        _config(tmp_path, generator="nope")
    with pytest.raises(ValueError):
        _config(tmp_path, seeds_per_cell=0)


def test_worker_count(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert worker_count() == 1
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ValueError):
        worker_count()


def test_parallel_matches_serial(tmp_path):
    serial = run_campaign(_config(tmp_path / "a"), workers=1)
    parallel = run_campaign(_config(tmp_path / "b"), workers=2)
    strip = lambda recs: sorted((r["key"], r["matrix_sha256"], r["found"], r["stage"]) for r in recs)
    assert strip(serial.records) == strip(parallel.records)


def test_generate_validates_params():
    with pytest.raises(ValueError):
        generate("silverman", {"n": 4}, 0)
    with pytest.raises(ValueError):
        generate("silverman", {"n": 4, "T": 1, "q": 3}, 0)
    assert generate("drs", {"n": 4, "R": 1, "permutations": "identity"}, 0).n == 4


def test_cost_forecasts():
    assert cost.is_heavy(cost.forecast_instance_seconds("drs", {"n": 912, "R": 24}))
    assert not cost.is_heavy(cost.forecast_instance_seconds("silverman", {"n": 100, "T": 1}))
    assert not cost.is_heavy(cost.forecast_instance_seconds("drs", {"n": 128, "R": 12}))
    small = cost.forecast_attack_seconds(64, 100)
    assert cost.forecast_attack_seconds(128, 100) > small
    assert cost.forecast_attack_seconds(64, 200) > small
    assert cost.forecast_attack_seconds(64, 100, (3, 4, 5, 6)) > small
    with pytest.raises(ValueError):
        cost.forecast_gram_bits("nope", {"n": 2})


def test_campaign_cli(tmp_path, capsys):
    cfg = {"generator": "silverman", "grid": {"n": [5]}, "fixed": {"T": 1}, "seeds_per_cell": 1, "results": "r.csv", "records": "r.jsonl"}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["campaign", str(tmp_path / "c.json")]) == 0
    assert "computed 1" in capsys.readouterr().out
    assert main(["campaign", str(tmp_path / "c.json")]) == 0
    assert "computed 0, skipped 1" in capsys.readouterr().out
    assert main(["campaign", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "bad.json").write_text(json.dumps({"generator": "silverman", "bogus": 1}))
    assert main(["campaign", str(tmp_path / "bad.json")]) == 1
