import pytest

from cutvem.cli import main
from cutvem.config import config_from_mapping, load_config
from cutvem.harness import StudyConfig, parse_csv_report


def test_config_nested_and_dotted(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('n_values = [10, 20]\nalpha_plus = 100\n"output.format" = "csv"\n'
                 "[interface]\nr = 0.5\ncx = 0.1\n")
    cfg = load_config(p)
    assert cfg.n_values == (10, 20) and cfg.alpha_plus == 100.0
    assert cfg.interface_r == 0.5 and cfg.interface_cx == 0.1
    assert cfg.output_format == "csv"


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown"):
        config_from_mapping({"interface": {"radius": 1.0}})
    with pytest.raises(ValueError):
        config_from_mapping({"n_values": [1]})


def test_config_overrides_base():
    base = StudyConfig(beta_plus=100.0)
    cfg = config_from_mapping({"gamma_k": 2}, base)
    assert cfg.beta_plus == 100.0 and cfg.gamma_k == 2.0


def test_cli_solve(capsys):
    assert main(["solve", "--n", "10"]) == 0
    out = capsys.readouterr().out
    assert "N=10" in out and "e0=" in out and "e1=" in out


def test_cli_study_csv_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "s.toml"
    cfg.write_text("n_values = [40]\nbeta_plus = 100.0\n")
    out = tmp_path / "r.csv"
    code = main(["study", str(cfg), "--n-values", "10", "20", "--output-format", "csv",
                 "--output-path", str(out)])
    assert code == 0
    rep = parse_csv_report(out.read_text())
    assert [r.n for r in rep.rows] == [10, 20]
    assert rep.rows[0].rate0 is None and rep.rows[1].rate0 > 0.8


def test_cli_study_markdown_stdout(capsys):
    assert main(["study", "--n-values", "10"]) == 0
    assert "| 1/10 |" in capsys.readouterr().out


def test_cli_certify(capsys):
    assert main(["certify", "--n-values", "10", "20"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and all("PASS" in l for l in lines)
    assert main(["certify", "--n-values", "5"]) == 1


def test_cli_properties(capsys):
    code = main(["properties", "--seed", "2", "--circles", "3", "--quads", "50"])
    out = capsys.readouterr().out
    assert out.startswith("seed=2") and "unisolvence" in out
    assert code in (0, 1)


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 3\n")
    assert main(["study", str(bad)]) == 2
    assert "unknown config key" in capsys.readouterr().err
