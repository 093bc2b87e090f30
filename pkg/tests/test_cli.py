import dataclasses
from fractions import Fraction

import pytest

from kummerflow import config_path as _config_path
from kummerflow.cli import ConfigError, RunConfig, csv_text, main

SHIPPED = ["default.cfg", "example1_z2.cfg", "example2_z4.cfg", "example3_bd8.cfg"]
MINIMAL = """
[lattice]
v1 = 1, 0
v2 = i, 0
v3 = 0, 1
v4 = 0, i

[group]
g1 = {g}
"""


def config_path(name):
    return str(_config_path(name))


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def failing_rows(report: str) -> list[str]:
    return [line for line in report.splitlines() if line.startswith("FAIL")]


@pytest.mark.parametrize("name", SHIPPED)
def test_config_round_trip(name):
    cfg = RunConfig.from_file(config_path(name))
    again = RunConfig.from_text(cfg.to_text())
    assert again == cfg
    assert again.to_text() == cfg.to_text()


def test_parse_fields():
    cfg = RunConfig.from_file(config_path("example3_bd8.cfg"))
    assert cfg.generators == [[["i", "0"], ["0", "-i"]], [["0", "-1"], ["1", "0"]]]
    assert cfg.vol == 16
    assert cfg.ledger_eps == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 10)]


def test_invalid_configs():
    base = RunConfig.from_file(config_path("default.cfg"))
    with pytest.raises(ConfigError, match="must not be empty"):
        dataclasses.replace(base, eps_list=[])
    with pytest.raises(ConfigError, match="decreasing"):
        dataclasses.replace(base, eps_list=[0.01, 0.05])
    with pytest.raises(ConfigError, match="positive"):
        dataclasses.replace(base, tolerances={**base.tolerances, "ode": 0.0})
    with pytest.raises(ConfigError, match="unknown stages"):
        dataclasses.replace(base, stages=["plot"])
    with pytest.raises(ConfigError):
        RunConfig.from_text("[group]\ng1 = -1, 0; 0, -1\n")


def test_empty_eps_override_is_a_config_error(tmp_path, capsys):
    rc = main(["sweep", "--stage", "gluing", "--config", config_path("default.cfg"), "--eps", "", "--out", str(tmp_path)])
    assert rc == 2
    assert "must not be empty" in capsys.readouterr().err


def test_trivial_group(tmp_path, capsys):
    path = write(tmp_path, MINIMAL.format(g="1, 0; 0, 1"))
    assert main(["classify", "--config", path, "--out", str(tmp_path)]) == 2
    assert "Γ nontrivial required" in capsys.readouterr().err


def test_incompatible_lattice_reported(tmp_path, capsys):
    text = MINIMAL.format(g="i, 0; 0, -i").replace("v2 = i, 0", "v2 = 2*i, 1/3")
    rc = main(["classify", "--config", write(tmp_path, text), "--out", str(tmp_path)])
    assert rc == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "compatib" in out


@pytest.mark.parametrize(
    "name,expect",
    [("example1_z2.cfg", {"A1": 16}), ("example2_z4.cfg", {"A3": 4, "A1": 6}), ("example3_bd8.cfg", {"D4": 2, "A3": 3, "A1": 2})],
)
def test_classify_golden_fixtures(tmp_path, capsys, name, expect):
    rc = main(["classify", "--config", config_path(name), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    text = (tmp_path / "classification.txt").read_text()
    for label, count in expect.items():
        assert sum(1 for line in text.splitlines() if f"\t{label}\t" in line or line.endswith(f"\t{label}")) == count, text
    assert "summary:" in out


def test_gluing_sweep_csv_is_deterministic(tmp_path):
    cfg = config_path("default.cfg")
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert main(["sweep", "--stage", "gluing", "--config", cfg, "--out", str(d)]) == 0
        outs.append((d / "gluing.csv").read_bytes())
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0].split(",")
    assert {"epsilon", "k", "sup_value", "fitted_slope"} <= set(header)


def test_masolver_sweep_columns(tmp_path):
    rc = main(["solve-ma", "--config", config_path("default.cfg"), "--out", str(tmp_path)])
    assert rc == 0
    header = (tmp_path / "masolver.csv").read_text().splitlines()[0].split(",")
    assert {"epsilon", "delta", "iterations", "max_contraction_ratio", "final_residual", "c0_delta_norm"} <= set(header)


def test_too_large_epsilon_fails_loudly(tmp_path, capsys):
    rc = main(["solve-ma", "--config", config_path("default.cfg"), "--eps", "0.3,0.2,0.1", "--out", str(tmp_path)])
    assert rc == 1
    assert "FAIL" in capsys.readouterr().out


def test_ledger_only_subset(tmp_path):
    rc = main(["verify-all", "--config", config_path("example2_z4.cfg"), "--stages", "ledger", "--out", str(tmp_path)])
    report = (tmp_path / "report.txt").read_text()
    sections = [line for line in report.splitlines() if line.startswith("[")]
    assert sections == ["[ledger]"]
    assert (tmp_path / "ledger.txt").exists()
    fails = failing_rows(report)
    # everything passes except the Gram matrix versus cup-pairing comparison
    assert all("gram_vs_cup" in line for line in fails)
    assert rc == (1 if fails else 0)


def test_csv_formatting():
    text = csv_text([{"a": 1.0 / 3.0, "b": True}, {"a": 2.0, "c": "x"}])
    assert text.splitlines() == ["a,b,c", "0.333333333333,true,", "2,,x"]


def test_verify_all_default(tmp_path):
    rc = main(["verify-all", "--config", config_path("default.cfg"), "--out", str(tmp_path)])
    report = (tmp_path / "report.txt").read_text()
    for name in ("gluing.csv", "masolver.csv", "forms.csv", "bubbling.csv", "ledger.txt", "classification.txt"):
        assert (tmp_path / name).exists()
    fails = failing_rows(report)
    assert all("gram_vs_cup" in line for line in fails), fails
    assert rc == (1 if fails else 0)
