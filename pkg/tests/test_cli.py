"""Command-line harness: schema validation, exit codes, report determinism."""
import json

import pytest

from wedgelab import cli


def test_default_config_passes_schema():
    cfg = cli.load_config(None, "oracle-crosscheck")
    assert cfg["schema_version"] == cli.SCHEMA_VERSION


def test_config_schema_rejects_unknown_keys(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "bogus": 3}))
    with pytest.raises(cli.ConfigValidationError):
        cli.load_config(str(bad), "oracle-crosscheck")
    bad.write_text(json.dumps({"schema_version": 999}))
    with pytest.raises(cli.ConfigValidationError):
        cli.load_config(str(bad), "oracle-crosscheck")
    bad.write_text("{not json")
    with pytest.raises(cli.ConfigValidationError):
        cli.load_config(str(bad), "oracle-crosscheck")


def test_config_experiment_name_must_match(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"schema_version": 1,
                             "experiment": {"name": "local-net"}}))
    with pytest.raises(cli.ConfigValidationError):
        cli.load_config(str(f), "oracle-crosscheck")


def test_config_hash_is_stable_and_order_independent():
    h1 = cli.config_hash({"a": 1, "b": [1, 2]})
    h2 = cli.config_hash({"b": [1, 2], "a": 1})
    assert h1 == h2 and len(h1) == 64


def test_run_is_deterministic_and_reports_pass():
    cfg = {"schema_version": 1}
    b1, t1 = cli.run_experiment("oracle-crosscheck", cfg, 0, "default", 1)
    b2, t2 = cli.run_experiment("oracle-crosscheck", cfg, 0, "default", 1)
    assert b1["passed"]
    assert json.dumps(b1, sort_keys=True) == json.dumps(b2, sort_keys=True)
    assert "experiment_seconds" in t1 and "experiment_seconds" not in b1


def test_exit_codes(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.DEFAULT_OUT_ENV, str(tmp_path))
    assert cli.main(["oracle-crosscheck"]) == 0
    # config error
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "nope": True}))
    assert cli.main(["oracle-crosscheck", "--config", str(bad)]) == 2
    assert cli.main(["oracle-crosscheck", "--jobs", "0"]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-experiment"])
    assert exc.value.code == 2
    # capacity: a bump too deep in the wedge for the tabulated window range
    deep = tmp_path / "deep.json"
    deep.write_text(json.dumps(
        {"schema_version": 1,
         "experiment": {"name": "bisognano-wichmann",
                        "parameters": {"bump_radii": [0.2],
                                       "depth_ratio": 30.0}}}))
    assert cli.main(["bisognano-wichmann", "--config", str(deep)]) == 3


def test_reports_and_plot_data_written(tmp_path, capsys):
    body, timings = cli.run_experiment("string-fields",
                                       {"schema_version": 1}, 0, "default", 1)
    path = cli.write_report(body, timings, tmp_path)
    assert path.exists()
    loaded = json.loads(path.read_text())
    assert loaded["body"]["experiment_id"] == "halfline-string-localization"
    lines = (tmp_path / "reports.jsonl").read_text().splitlines()
    assert len(lines) == 1
    cli.write_report(body, timings, tmp_path)  # append-only log grows
    assert len((tmp_path / "reports.jsonl").read_text().splitlines()) == 2
    csv = tmp_path / "string-fields-support-profile.csv"
    assert csv.exists()
    header = csv.read_text().splitlines()[0]
    assert header == "x1,abs_k"
    with pytest.raises(cli.ConfigValidationError):
        cli.emit_plot_data(body, "no-such-kind", tmp_path)


def test_tolerance_profiles_cover_the_same_keys():
    assert set(cli.TOLERANCE_PROFILES["strict"]) == \
        set(cli.TOLERANCE_PROFILES["default"])
