import json

import pytest

from fracvar import cli
from fracvar.experiments import EXPERIMENTS, ConfigError, ExperimentConfig
from fracvar.ops import spectral


def test_list_prints_sixteen(capsys):
    assert cli.main(["list"]) == 0
    names = capsys.readouterr().out.split()
    assert len(names) == 16 and set(names) == set(EXPERIMENTS)


@pytest.mark.parametrize("name,anchor", [("decay", "Decay estimates for BV^{α,p} functions"),
                                         ("gns", "Gagliardo–Nirenberg–Sobolev inequality")])
def test_describe_cites_anchor(capsys, name, anchor):
    assert cli.main(["describe", name]) == 0
    assert anchor in capsys.readouterr().out


def test_every_experiment_has_description(capsys):
    for name in EXPERIMENTS:
        assert cli.main(["describe", name]) == 0
    assert cli.main(["describe", "nope"]) == 2


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "semigroup"]) == 0
    assert cli.main(["run", "homogeneity", "--grid-n", "64"]) == 1
    assert cli.main(["run", "unknown-name"]) == 2
    assert cli.main(["run", "duality", "--grid-n", "1000"]) == 2
    assert cli.main(["run", "duality", "--backend", "fft"]) == 2
    assert cli.main(["run", "duality", "--seed", "-1"]) == 2
    assert cli.main([]) == 2


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "d.cfg"
    cfg.write_text("grid_n = 512\nalpha = 0.5\n")
    out = tmp_path / "out"
    assert cli.main(["run", "duality", "--config", str(cfg), "--grid-n", "256", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["config"]["grid_n"] == 256 and rep["config"]["alpha"] == 0.5
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert cli.main(["run", "duality", "--config", str(bad)]) == 2


def test_config_round_trip():
    cfg = ExperimentConfig.from_strings({"experiment": "decay", "grid_n": "1024", "radii": "0.1, 0.2",
                                         "levels": "3,4"})
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_strings({"experiment": "decay", "grid_n": "many"})


def test_same_seed_gives_identical_csv(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["run", "duality", "--seed", "7", "--out", str(tmp_path / d)]) == 0
    csvs = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    assert csvs
    for name in csvs:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    ja = json.loads((tmp_path / "a" / "report.json").read_text())
    jb = json.loads((tmp_path / "b" / "report.json").read_text())
    ja.pop("timing"), jb.pop("timing")
    ja["config"]["out"] = jb["config"]["out"] = None
    assert ja == jb


def test_capacity_subcommand(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("grid_n = 256\ngrid_l = 4\nalpha = 0.5\nobstacle = -0.5:0.5\n")
    assert cli.main(["capacity", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "capacity.json").read_text())["converged"] is True
    cfg.write_text("grid_n = 256\n")
    assert cli.main(["capacity", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_example_subcommand(tmp_path, capsys):
    assert cli.main(["example", "grad-indicator", "--alpha", "0.3", "--grid-n", "256",
                     "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "grad-indicator.csv").read_text().splitlines()
    assert lines[0] == "x,value" and len(lines) == 257
    verdict = json.loads((tmp_path / "grad-indicator.json").read_text())
    assert abs(verdict["fitted_exponent"] - 0.7) < 1e-6


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("FRACVAR_THREADS", "2")
    assert spectral.fft_workers() == 2
    monkeypatch.setenv("FRACVAR_THREADS", "0")
    with pytest.raises(ValueError):
        spectral.fft_workers()
    monkeypatch.delenv("FRACVAR_THREADS")
    assert spectral.fft_workers() == -1
    monkeypatch.setenv("FRACVAR_THREADS", "1")
    assert cli.main(["run", "semigroup"]) == 0
