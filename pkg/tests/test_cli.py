import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from regraft.cli import main

SMALL_DIR = Path(__file__).resolve().parents[1] / \
    "src/regraft/reeng/assets/corpora/small"
GOLDEN = SMALL_DIR / "golden.gm"


@pytest.fixture
def runner():
    return CliRunner()


def _transform_small(runner, tmp_path, seed=42, extra=()):
    out = tmp_path / "out.gm"
    trace = tmp_path / "trace.txt"
    report = tmp_path / "report.json"
    result = runner.invoke(main, [
        "transform", "--java", str(SMALL_DIR), "--seed", str(seed),
        "--out", str(out), "--trace", str(trace), "--report", str(report),
        *extra,
    ])
    return result, out, trace, report


def test_transform_small_corpus_golden_bytes(runner, tmp_path):
    result, out, trace, report = _transform_small(runner, tmp_path)
    assert result.exit_code == 0, result.output
    assert out.read_bytes() == GOLDEN.read_bytes()
    body = json.loads(report.read_text())
    assert body["success"] is True
    # report counts equal trace-log line counts
    lines = trace.read_text().splitlines()
    for rule, count in body["rule_counts"].items():
        assert sum(1 for l in lines if l.startswith(f"apply {rule} ")) == count
    assert len(lines) == sum(body["rule_counts"].values())


def test_transform_is_deterministic_per_seed(runner, tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    r1, out1, trace1, _ = _transform_small(runner, tmp_path / "a")
    r2, out2, trace2, _ = _transform_small(runner, tmp_path / "b")
    assert r1.exit_code == 0 and r2.exit_code == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert trace1.read_bytes() == trace2.read_bytes()


def test_seed_sweep_does_not_change_the_machine(runner, tmp_path):
    outputs = set()
    for seed in range(5):
        (tmp_path / str(seed)).mkdir()
        _result, out, _trace, _report = _transform_small(
            runner, tmp_path / str(seed), seed=seed)
        outputs.add(out.read_bytes())
    assert len(outputs) == 1


def test_missing_state_class_exits_3(runner, tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    (src / "A.java").write_text("class A { }")
    result = runner.invoke(main, ["transform", "--java", str(src)])
    assert result.exit_code == 3


def test_java_parse_error_exits_2(runner, tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    (src / "A.java").write_text("class {")
    result = runner.invoke(main, ["transform", "--java", str(src)])
    assert result.exit_code == 2


def test_step_limit_exits_4(runner, tmp_path):
    result = runner.invoke(main, [
        "transform", "--java", str(SMALL_DIR), "--step-limit", "5",
        "--out", str(tmp_path / "x.gm")])
    assert result.exit_code == 4


def test_model_and_java_are_mutually_exclusive(runner, tmp_path):
    result = runner.invoke(main, ["transform"])
    assert result.exit_code == 2


def test_diff_exit_codes(runner, tmp_path):
    result = runner.invoke(main, ["diff", str(GOLDEN), str(GOLDEN)])
    assert result.exit_code == 0
    assert "match" in result.output
    tweaked = tmp_path / "tweaked.gm"
    tweaked.write_text(GOLDEN.read_text().replace('"warmup"', '"nope"'))
    result = runner.invoke(main, ["diff", str(GOLDEN), str(tweaked)])
    assert result.exit_code == 1
    assert "transition only in" in result.output
    broken = tmp_path / "broken.gm"
    broken.write_text("node 1 : Nope\n")
    result = runner.invoke(main, ["diff", str(GOLDEN), str(broken)])
    assert result.exit_code == 2


def test_oracle_command_agrees_with_transform(runner, tmp_path):
    result, out, _trace, _report = _transform_small(runner, tmp_path)
    oracle_out = tmp_path / "oracle.gm"
    result = runner.invoke(main, ["oracle", "--java", str(SMALL_DIR),
                                  "--out", str(oracle_out)])
    assert result.exit_code == 0
    assert oracle_out.read_bytes() == out.read_bytes()
    result = runner.invoke(main, ["diff", str(out), str(oracle_out)])
    assert result.exit_code == 0


def test_generate_then_transform_and_diff_against_oracle(runner, tmp_path):
    corpus = tmp_path / "corpus"
    result = runner.invoke(main, ["generate", "--states", "6", "--methods",
                                  "2", "--nesting", "2", "--seed", "7",
                                  "--out", str(corpus)])
    assert result.exit_code == 0
    # same seed twice: byte-identical sources
    corpus2 = tmp_path / "corpus2"
    runner.invoke(main, ["generate", "--states", "6", "--methods", "2",
                         "--nesting", "2", "--seed", "7", "--out",
                         str(corpus2)])
    for f in corpus.glob("*.java"):
        assert (corpus2 / f.name).read_bytes() == f.read_bytes()
    out = tmp_path / "machine.gm"
    oracle_out = tmp_path / "oracle.gm"
    assert runner.invoke(main, ["transform", "--java", str(corpus),
                                "--out", str(out)]).exit_code == 0
    assert runner.invoke(main, ["oracle", "--java", str(corpus),
                                "--out", str(oracle_out)]).exit_code == 0
    result = runner.invoke(main, ["diff", str(out), str(oracle_out)])
    assert result.exit_code == 0


def test_bench_smoke(runner):
    result = runner.invoke(main, ["bench", "--states", "3", "--methods", "1",
                                  "--nesting", "1", "--seed", "3"])
    assert result.exit_code == 0
    assert "total" in result.output


def test_transform_with_explicit_tfm_outputs_whole_graph(runner, tmp_path):
    mm = tmp_path / "tiny.mm"
    mm.write_text("metamodel tiny\ntype Thing {\n  attr name : string\n}\n")
    tfm = tmp_path / "t.tfm"
    tfm.write_text("transformation t\nimport tiny\nmain mk\n"
                   "rule mk(out x) {\n  node n : Thing <<create>> bind x\n"
                   '  assign n.name = "made"\n}\n')
    model = tmp_path / "in.gm"
    model.write_text("")
    out = tmp_path / "out.gm"
    result = runner.invoke(main, ["transform", "--metamodel", str(mm),
                                  "--tfm", str(tfm), "--model", str(model),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert out.read_text() == 'node 1 : Thing\n  attr name = "made"\n'
