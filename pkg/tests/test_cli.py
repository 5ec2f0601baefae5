import json
import subprocess
import sys

import pytest

from impactlab import corpus
from impactlab.cli import build_parser, default_workers, main

from conftest import OVERRIDE_FIELD_DIR

BUDGET = ["--step-budget", "20000"]


def usage_exit(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    return exc.value.code


def test_graph_dot_has_field_node(capsys):
    assert main(["graph", str(OVERRIDE_FIELD_DIR), "--variant", "f", "--format", "dot"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("digraph") and "C#bar" in out


def test_graph_json_to_file(tmp_path):
    out = tmp_path / "g.json"
    assert main(["graph", str(OVERRIDE_FIELD_DIR), "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["variant"] == "B"


def test_graph_empty_dir(tmp_path, capsys):
    assert main(["graph", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_graph_missing_dir(tmp_path):
    assert main(["graph", str(tmp_path / "missing")]) == 1


def test_bad_variant():
    assert usage_exit(["graph", str(OVERRIDE_FIELD_DIR), "--variant", "x"]) == 2


def test_bad_operator():
    assert usage_exit(["mutate", str(OVERRIDE_FIELD_DIR), "--op", "XYZ"]) == 2


def test_bad_cap():
    assert usage_exit(["mutate", str(OVERRIDE_FIELD_DIR), "--op", "AOR", "--cap", "0"]) == 2


def test_bad_timing_reps():
    assert usage_exit(["evaluate", str(OVERRIDE_FIELD_DIR), "--timing-reps", "2"]) == 2


def test_mutate_single_addition(tmp_path, capsys):
    (tmp_path / "a.moo").write_text(
        "class K { int f(int a, int b) { return a + b; } }\n"
        "class KTest { test void t() { K k = new K(); assert(k.f(2, 3) == 5); } }\n"
    )
    assert main(["mutate", str(tmp_path), "--op", "AOR", "--workers", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["mutants"]) == 6
    assert {m["viability"] for m in doc["mutants"]} == {"killed"}


def test_mutate_reproducible(tmp_path):
    src = str(corpus.project("bank").source_dir)
    outs = []
    for i in range(2):
        out = tmp_path / f"m{i}.json"
        assert main(["mutate", src, "--op", "ROR", "--cap", "3", "--seed", "1", "--workers", "1", *BUDGET, "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert len(json.loads(outs[0])["mutants"]) == 3


@pytest.fixture(scope="module")
def evaluated(tmp_path_factory):
    out = tmp_path_factory.mktemp("eval")
    src = str(corpus.project(corpus.REFLECTION_PROJECT).source_dir)
    code = main(["evaluate", src, "--variant", "b", "--workers", "1", "--out-dir", str(out), "--timing-reps", "3", *BUDGET])
    return code, out, src


def test_evaluate_writes_outputs(evaluated):
    code, out, _ = evaluated
    assert code == 0
    rows = (out / "report.csv").read_text().splitlines()
    assert len(rows) == 1 + 5
    assert len(list(out.glob("calc-*-B.jsonl"))) == 5
    assert len((out / "timing.csv").read_text().splitlines()) == 2


def test_evaluate_idempotent(evaluated, tmp_path):
    _, out, src = evaluated
    assert main(["evaluate", src, "--variant", "b", "--workers", "1", "--out-dir", str(tmp_path), "--timing-reps", "0", *BUDGET]) == 0
    assert (tmp_path / "report.csv").read_bytes() == (out / "report.csv").read_bytes()
    for ledger in out.glob("*.jsonl"):
        assert (tmp_path / ledger.name).read_bytes() == ledger.read_bytes()


def test_evaluate_missing_project(tmp_path):
    assert main(["evaluate", str(tmp_path / "missing"), "--out-dir", str(tmp_path)]) == 1


def mul_mutant_id(ledger):
    for line in ledger.read_text().splitlines():
        doc = json.loads(line)
        if doc["method"] == "Calc.mul(int,int)" and doc["category"] == "D":
            return doc["mutant"]
    raise AssertionError("no mutant in Calc.mul")


def test_viz(evaluated, capsys):
    _, out, src = evaluated
    ledger = out / "calc-AOR-B.jsonl"
    assert main(["viz", src, "--ledger", str(ledger), "--mutant", mul_mutant_id(ledger)]) == 0
    dot = capsys.readouterr().out
    for cls in ("mutated", "tp", "fp", "fn", "app"):
        assert f'class="{cls}"' in dot


def test_viz_unknown_mutant(evaluated):
    _, out, src = evaluated
    assert main(["viz", src, "--ledger", str(out / "calc-AOR-B.jsonl"), "--mutant", "AOR-00000000-0"]) == 1


def test_viz_variant_mismatch(evaluated):
    _, out, src = evaluated
    ledger = out / "calc-AOR-B.jsonl"
    assert main(["viz", src, "--ledger", str(ledger), "--mutant", mul_mutant_id(ledger), "--variant", "h"]) == 1


def test_verify_corpus(capsys):
    assert main(["verify-corpus", *BUDGET]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == len(corpus.project_names()) and all(l.endswith(": ok") for l in lines)


def test_workers_env(monkeypatch):
    monkeypatch.setenv("IMPACTLAB_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("IMPACTLAB_WORKERS", "zero")
    with pytest.raises(Exception):
        default_workers()


@pytest.mark.parametrize("command", ["graph", "mutate", "evaluate", "viz", "verify-corpus"])
def test_help_documents_flags(command):
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices[command]
    text = sub.format_help()
    for action in sub._actions:
        for flag in action.option_strings:
            assert flag in text
        if action.default not in (None, False) and action.option_strings and action.dest != "help":
            assert "default:" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "impactlab", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "verify-corpus" in proc.stdout
