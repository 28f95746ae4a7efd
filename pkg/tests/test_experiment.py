import json
import warnings

import pytest

from otafl.experiment import (
    COLUMNS,
    ConfigError,
    ExperimentConfig,
    dbm_to_mw,
    emit_metrics,
    main,
    mw_to_dbm,
    read_metrics,
    resolve_config,
    run_experiment,
)

TINY = dict(num_devices=3, rounds=2, hidden=4, num_features=3, samples_per_device=40,
            test_samples=50, batch_size=8)


def tiny(**kw):
    return resolve_config("desk", None, {**TINY, **kw})


def test_db_conversion():
    assert dbm_to_mw(23.0) == pytest.approx(199.526, rel=1e-5)
    assert mw_to_dbm(dbm_to_mw(-110.0)) == pytest.approx(-110.0)


def test_zero_rounds_empty(tmp_path):
    assert run_experiment(tiny(rounds=0)) == []
    out = tmp_path / "m.csv"
    assert main(["--rounds", "0", "--out", str(out)]) == 0
    assert out.read_text() == ",".join(COLUMNS) + "\n"


def test_reference_preset():
    cfg = resolve_config("paper-iv")
    assert (cfg.num_devices, cfg.num_subcarriers, cfg.l_os) == (40, 32, 4)
    assert (cfg.p_avg_dbm, cfg.p_inst_dbm, cfg.oob_threshold_dbm) == (23.0, 26.0, -10.0)
    assert (cfg.rounds, cfg.lr, cfg.batch_size, cfg.bandwidth_hz) == (500, 1.0, 256, 60e3)


def test_precedence():
    cfg = resolve_config("paper-iv", {"rounds": 7, "seed": 3}, {"seed": 11, "scheme": None})
    assert cfg.rounds == 7 and cfg.seed == 11 and cfg.num_devices == 40


def test_validation_names_field():
    with pytest.raises(ConfigError, match="num_devices"):
        resolve_config("desk", None, {"num_devices": 0})
    with pytest.raises(ConfigError, match="bogus"):
        resolve_config("desk", {"bogus": 1})
    with pytest.raises(ConfigError, match="p_avg_dbm"):
        ExperimentConfig(p_avg_dbm=float("nan")).validate()


def test_negative_headroom_warns():
    with pytest.warns(UserWarning, match="headroom"):
        ExperimentConfig(p_inst_dbm=20.0).validate()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ExperimentConfig().validate()


def test_link_units():
    link = ExperimentConfig(noise_psd_dbm_hz=-110.0).link()
    assert link.noise_var_sc == pytest.approx(1e-11 * 60e3)
    assert link.a_max**2 == pytest.approx(10**2.6)


def test_determinism(tmp_path):
    cfg = tiny(scheme="ofdm")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_metrics(run_experiment(cfg), a)
    emit_metrics(run_experiment(cfg), b)
    assert a.read_bytes() == b.read_bytes()


def test_round_trip(tmp_path):
    recs = run_experiment(tiny(rounds=1, scheme="sc"))
    path = tmp_path / "m.csv"
    emit_metrics(recs, path)
    assert len(path.read_text().splitlines()) == 2
    back = read_metrics(path)
    assert back == [{c: recs[0][c] for c in COLUMNS}]


def test_header_only(tmp_path):
    path = tmp_path / "m.csv"
    emit_metrics([], path)
    assert path.read_text().splitlines() == [",".join(COLUMNS)]
    assert COLUMNS[:4] == ["scenario", "seed", "round", "scheme"]


def test_jsonl(tmp_path):
    recs = run_experiment(tiny())
    path = tmp_path / "m.jsonl"
    emit_metrics(recs, path, "jsonl")
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(lines) == 2 and all(list(obj) == COLUMNS for obj in lines)


def test_write_error_has_path(tmp_path):
    bad = tmp_path / "missing" / "m.csv"
    with pytest.raises(OSError, match="missing"):
        emit_metrics([], bad)


def test_cli(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("\n".join(f"{k}: {v}" for k, v in TINY.items()) + "\n")
    out = tmp_path / "m.csv"
    assert main(["--config", str(cfg), "--scheme", "sc", "--clip", "off", "--seed", "4", "--out", str(out)]) == 0
    rows = read_metrics(out)
    assert [r["round"] for r in rows] == [0, 1]
    assert all(r["scheme"] == "sc" and r["clip"] is False and r["seed"] == 4 for r in rows)


def test_cli_errors(tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert main(["--config", str(tmp_path / "nope.yaml"), "--out", str(out)]) != 0
    assert main(["--preset", "nope", "--out", str(out)]) != 0
    assert "preset" in capsys.readouterr().err
    assert main(["--rounds", "0", "--out", str(tmp_path / "x" / "m.csv")]) != 0
    with pytest.raises(SystemExit):
        main(["--scheme", "fm", "--out", str(out)])
