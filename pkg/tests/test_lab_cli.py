"""Descriptors, verdict reports and the command line."""
import json
from pathlib import Path

import pytest

from okbody.config import ConfigError, load_config, parse_grid
from okbody.lab_cli import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, main, verify_lemma_semigroup, verify_theorem_main_a

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_missing_input_exits_1(tmp_path):
    assert main(["body", "--input", str(tmp_path / "none.toml")]) == EXIT_ERROR


def test_line_precise_errors(tmp_path):
    p = write(tmp_path, '[variety]\nkind = "projective_space"\ndim = 2\n\n[divisor]\ndegree = 1\n\n[experiment]\ntruncation = 1\n')
    with pytest.raises(ConfigError, match=r"cfg.toml:9: truncation"):
        load_config(p)
    p = write(tmp_path, '[variety]\nkind = "cube"\n')
    with pytest.raises(ConfigError, match=r":2: unknown variety kind"):
        load_config(p)
    p = write(tmp_path, '[variety]\nkind = "projective_space"\n[divisor]\ndegree = 0.5\n')
    with pytest.raises(ConfigError, match=r":4: bad divisor"):
        load_config(p)
    p = write(tmp_path, '[variety\nkind = 1\n')
    with pytest.raises(ConfigError, match="line 1"):
        load_config(p)


def test_json_descriptor(tmp_path):
    p = write(tmp_path, json.dumps({"variety": {"kind": "projective_space", "dim": 2}, "divisor": {"degree": 1}}), "cfg.json")
    cfg = load_config(p, truncation=4)
    assert verify_theorem_main_a(cfg).passed
    bad = write(tmp_path, '{\n  "variety": {\n    "kind": \n}', "bad.json")
    with pytest.raises(ConfigError, match=r"bad.json:4"):
        load_config(bad)


def test_seed_precedence(tmp_path, monkeypatch):
    p = write(tmp_path, '[variety]\nkind = "projective_space"\n[experiment]\nseed = 4\n')
    assert load_config(p).seed == 4
    monkeypatch.setenv("NOK_SEED", "9")
    assert load_config(p).seed == 9
    assert load_config(p, seed=2).seed == 2


def test_grid_parsing_and_big_range(tmp_path):
    assert parse_grid("1/2,1/2;1/4,1/4") == [(0.5, 0.5), (0.25, 0.25)]
    p = write(tmp_path, '[variety]\nkind = "projective_space"\n[divisor]\ndegree = 1\n[experiment]\ntruncation = 4\na_grid = [["1"], ["1/2"]]\n')
    with pytest.raises(ConfigError, match="big range"):
        verify_theorem_main_a(load_config(p))


def test_verify_exit_code_and_report(tmp_path):
    out = tmp_path / "out"
    rc = main(["verify", "main-a", "--input", str(CONFIGS / "p2_o1.toml"), "--truncation", "6", "--out", str(out)])
    assert rc == EXIT_PASS
    rep = json.loads((out / "main-a.json").read_text())
    assert rep["verdict"] == "equal" and rep["seed"] == 0
    assert rep["details"]["per_r"][1]["lhs"] == "1"


def test_failing_verdict_exits_2(tmp_path):
    # f2 C0+f with the flag point on C0: hypotheses fail, which is a verdict failure
    p = write(tmp_path, '[variety]\nkind = "hirzebruch"\ne = 2\n[divisor]\nc0 = 1\nf = 1\n[flag]\nkind = "torus"\norder = [0, 1]\n[experiment]\ntruncation = 6\n')
    assert main(["verify", "theorem-b", "--input", str(p), "--out", str(tmp_path / "o")]) == EXIT_FAIL
    rep = json.loads((tmp_path / "o" / "theorem-b.json").read_text())
    assert rep["details"]["failing_checks"] == ["point_outside_B"]


def test_slice_command(tmp_path, capsys):
    rc = main(["slice", "--input", str(CONFIGS / "p1xp1.toml"), "--a", "1/2"])
    assert rc == EXIT_PASS
    rep = json.loads(capsys.readouterr().out)
    assert rep["details"]["segment"] == ["0", "2"]


def test_csv_format(tmp_path):
    rc = main(["restricted-volume", "--input", str(CONFIGS / "f2_c0_f.toml"), "--format", "csv", "--out", str(tmp_path)])
    assert rc == EXIT_PASS
    lines = (tmp_path / "restricted-volume.csv").read_text().splitlines()
    assert lines[0] == "sequence,index,value"
    assert "ranks,4,3" in lines


def test_semigroup_and_base_locus_commands(tmp_path):
    assert main(["semigroup", "--input", str(CONFIGS / "p2_o2_half.toml"), "--out", str(tmp_path)]) == EXIT_PASS
    rep = json.loads((tmp_path / "semigroup.json").read_text())
    assert rep["sequences"]["counts"]["1"] == 0 and rep["sequences"]["counts"]["2"] == 4
    assert main(["base-locus", "--input", str(CONFIGS / "f2_c0_f.toml"), "--out", str(tmp_path)]) == EXIT_PASS
    rep = json.loads((tmp_path / "base-locus.json").read_text())
    assert rep["details"]["base_locus"]["divisorial"][0]["component"] == "D1"


def test_lemma_semigroup_r0_is_tautological():
    cfg = load_config(CONFIGS / "p2_o1.toml")
    cfg.a = ()
    assert verify_lemma_semigroup(cfg).verdict == "equal"


def test_report_runs_listed_verifications(tmp_path):
    rc = main(["report", "--input", str(CONFIGS / "p2_o2_half.toml"), "--out", str(tmp_path)])
    assert rc == EXIT_PASS
    assert sorted(p.name for p in tmp_path.iterdir()) == ["lemma-semigroup.json", "main-a.json"]
