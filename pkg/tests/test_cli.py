import json

import pytest

from proclone.cli import main
from proclone.errors import ConfigError
from proclone.report import load_config, run_suites

FAST = ["signatures", "beta-eta", "fixed-point", "substitution-lemma"]


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_missing_config_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/proclone.toml")


def test_missing_alphabet_file_has_location(tmp_path):
    cfg = _write(tmp_path, "c.toml", 'alphabet_files = ["nowhere.json"]\n')
    with pytest.raises(ConfigError) as exc:
        load_config(str(cfg))
    assert exc.value.location == "alphabet_files[0]"


def test_unknown_key_is_rejected(tmp_path):
    cfg = _write(tmp_path, "c.toml", "[church]\nmax_sise = 3\n")
    with pytest.raises(ConfigError) as exc:
        load_config(str(cfg))
    assert exc.value.location == "church.max_sise"


def test_alphabet_file_is_loaded(tmp_path):
    _write(tmp_path, "a.json", "[2, 0]")
    cfg = _write(tmp_path, "c.toml", 'alphabet_files = ["a.json"]\n')
    assert load_config(str(cfg))["alphabets"][-1] == [2, 0]


def test_reports_are_byte_identical_across_jobs():
    cfg = load_config()
    a = run_suites(cfg, FAST, jobs=1).to_json()
    b = run_suites(cfg, FAST, jobs=4).to_json()
    assert a == b
    data = json.loads(a)
    assert data["verdict"] == "pass"
    assert "time" not in a


def test_mutation_corpus_fails_with_named_counterexamples(tmp_path):
    cfg = load_config(str(_write(tmp_path, "c.toml", """
suites = ["clone-laws"]
alphabets = [[0, 1]]
[clone_laws]
tree_size = 3
free_arity = 2
samples = 100
[mutations]
as_subjects = true
""")))
    report = run_suites(cfg)
    assert report.verdict == "fail"
    failed = [r for r in report.records if r.verdict == "fail"]
    assert {r.name for r in failed} == {"laws Endo(2)!swap-subst", "laws Endo(2)!reverse-vars",
                                        "laws Endo(2)!collapse-constants"}
    assert all(r.witness for r in failed)


def test_check_exit_code_and_out(tmp_path, capsys):
    cfg = _write(tmp_path, "c.toml", 'suites = ["beta-eta"]\n')
    out = tmp_path / "r.json"
    assert main(["check", "semantics", "--config", str(cfg), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["verdict"] == "pass"
    assert "verdict: pass" in capsys.readouterr().out


def test_config_error_exit_code(capsys):
    assert main(["check", "all", "--config", "/nonexistent.toml"]) == 2
    assert "config file not found" in capsys.readouterr().err


def test_church_encode_decode(capsys):
    assert main(["church", "encode", "--arities", "0,1", "--vars", "1", "--tree", "(a2 (a2 x1))"]) == 0
    term = json.loads(capsys.readouterr().out)["term"]
    assert main(["church", "decode", "--arities", "0,1", "--vars", "1", "--term", term]) == 0
    assert json.loads(capsys.readouterr().out)["tree"] == "(a2 (a2 x1))"


def test_church_alphabet_file(tmp_path, capsys):
    a = _write(tmp_path, "a.json", "[1, 1]")
    assert main(["church", "encode", "--alphabet", str(a), "--vars", "1", "--tree", "(a2 (a1 x1))"]) == 0
    assert "x0.2 (x0.1 x1)" in json.loads(capsys.readouterr().out)["term"]


def test_profinite_verbs(capsys):
    base = ["--arities", "1", "--vars", "1"]
    assert main(["profinite", "family-of-tree", *base, "--tree", "(a1 (a1 x1))", "--roster", "endo2"]) == 0
    assert json.loads(capsys.readouterr().out)["tables"] == {"Endo(2)": [0, 1, 1, 3]}
    assert main(["profinite", "search-def", *base, "--tree", "(a1 (a1 x1))", "--bound", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["tree"] == "(a1 (a1 x1))"
    assert main(["profinite", "check-natural", *base, "--tree", "(a1 x1)"]) == 0
    capsys.readouterr()
    assert main(["profinite", "restrict", *base, "--tree", "(a1 x1)", "--roster", "endo2"]) == 0
    assert json.loads(capsys.readouterr().out)["components"]["2"]["index"] == 27
    term = "\\s:((o -> o) *). \\x:o. s.1 (s.1 x)"
    assert main(["profinite", "lift", *base, "--term", term, "--roster", "endo2"]) == 0
    assert json.loads(capsys.readouterr().out)["tables"] == {"Endo(2)": [0, 1, 1, 3]}
    assert main(["profinite", "check-parametric", *base, "--tree", "(a1 x1)"]) == 0
    assert json.loads(capsys.readouterr().out)["tree"] == "(a1 x1)"
    assert main(["profinite", "check-fixed-point", "--arities", "0,1", "--tree", "(a2 a1)", "--q", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "pass"


def test_search_def_inconclusive_exit_code(capsys):
    deep = "(a1 " * 7 + "x1" + ")" * 7
    code = main(["profinite", "search-def", "--arities", "1", "--tree", deep, "--bound", "2"])
    assert code == 3
    assert json.loads(capsys.readouterr().out)["verdict"] == "inconclusive"
