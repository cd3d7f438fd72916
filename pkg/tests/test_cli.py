"""Command-line subcommands, reports and exit codes."""

import json
import logging
import subprocess
import sys
import time

import pytest

from proofsynth import cli
from proofsynth import datasetgen as dg
from proofsynth.calculus import Imp, PVar, parse_prop, parse_term, size
from proofsynth.estimator import NeuralEstimator, load
from proofsynth.search import SearchInvariantError, verify


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """gen -> quads -> split on the size <= 4 corpus."""
    d = tmp_path_factory.mktemp("pipe")
    assert run("gen", "--small", 4, "--out", d / "corpus.jsonl", "-q") == 0
    assert run("quads", "--corpus", d / "corpus.jsonl", "--out", d / "quads.jsonl", "-q") == 0
    assert run("split", "--quads", d / "quads.jsonl", "--ratio", 0.9, "--seed", 0,
               "--train-out", d / "train.jsonl", "--validation-out", d / "val.jsonl", "-q") == 0
    return d


# ---------------------------------------------------------------------------
# gen / quads / split


def test_gen_small_two(tmp_path):
    out = tmp_path / "c.jsonl"
    assert run("gen", "--small", 2, "--out", out) == 0
    [pair] = dg.read_corpus(out)
    assert pair.proposition == Imp(PVar("a"), PVar("a"))
    lines = (tmp_path / "c.jsonl.summary.jsonl").read_text().splitlines()
    summary = [json.loads(x) for x in lines]
    assert summary == [{"proofs": 1, "size": "1-10"}]


def test_gen_small_one_is_empty_with_a_warning(tmp_path, caplog):
    out = tmp_path / "c.jsonl"
    with caplog.at_level(logging.WARNING, logger="proofsynth"):
        assert run("gen", "--small", 1, "--out", out) == 0
    assert out.read_text() == ""
    assert any("empty" in r.getMessage() for r in caplog.records if r.levelno == logging.WARNING)


def test_gen_large_is_reproducible(tmp_path):
    for name in ("a", "b"):
        assert run("gen", "--large", 10, 30, "--count", 5, "--seed", 7,
                   "--out", tmp_path / f"{name}.jsonl", "-q") == 0
    a = (tmp_path / "a.jsonl").read_bytes()
    assert a == (tmp_path / "b.jsonl").read_bytes()
    pairs = dg.read_corpus(tmp_path / "a.jsonl")
    assert len(pairs) == 5 and all(10 <= size(p.proof) <= 30 for p in pairs)


def test_gen_lower_upper_spelling(tmp_path):
    run("gen", "--large", 6, 9, "--count", 3, "--out", tmp_path / "a.jsonl", "-q")
    run("gen", "--lower", 6, "--upper", 9, "--count", 3, "--out", tmp_path / "b.jsonl", "-q")
    run("gen", "--max-size", 3, "--out", tmp_path / "c.jsonl", "-q")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert len(dg.read_corpus(tmp_path / "c.jsonl")) == 7


@pytest.mark.parametrize("argv", [
    ["gen", "--out", "x"],
    ["gen", "--small", "2", "--large", "3", "4", "--out", "x"],
    ["gen", "--lower", "3", "--out", "x"],
    ["gen", "--small", "two", "--out", "x"],
    ["gen", "--small", "2"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_one(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as e:
        code = cli.main(argv)
        raise SystemExit(code)
    assert e.value.code == 1


def test_quads_and_split(pipeline):
    pairs = dg.read_corpus(pipeline / "corpus.jsonl")
    quads = dg.read_quadruples(pipeline / "quads.jsonl")
    assert len(quads) == sum(size(p.proof) for p in pairs)
    train = dg.read_quadruples(pipeline / "train.jsonl")
    val = dg.read_quadruples(pipeline / "val.jsonl")
    assert len(train) == int(0.9 * len(quads)) and len(train) + len(val) == len(quads)


def test_missing_input_file_exits_one(tmp_path):
    assert run("quads", "--corpus", tmp_path / "nope.jsonl", "--out", tmp_path / "q") == 1


# ---------------------------------------------------------------------------
# train / eval


@pytest.fixture(scope="module")
def toy(tmp_path_factory):
    """Eight quadruples and a model trained to fit them."""
    d = tmp_path_factory.mktemp("toy")
    pairs = [p for p in dg.small_proof_gen(3)][:4]
    quads = dg.extract_quadruples(pairs)[:8]
    assert len(quads) == 8
    dg.write_quadruples(quads, d / "toy.jsonl")
    assert run("train", "--train", d / "toy.jsonl", "--validation", d / "toy.jsonl",
               "--epochs", 150, "--batch-size", 8, "--lr", 0.01, "--seed", 0,
               "--out", d / "model.npz", "-q") == 0
    return d


def test_train_fits_a_toy_file(toy):
    lines = (toy / "model.npz.log").read_text().splitlines()
    assert len(lines) == 150
    first, last = (float(x.split()[3]) for x in (lines[0], lines[-1]))
    assert first > 1.0 and last < 0.01
    assert last == pytest.approx(0.0, abs=0.01)


def test_eval_on_training_file_after_overfit(toy, capsys):
    assert run("eval", "--quads", toy / "toy.jsonl", "--checkpoint", toy / "model.npz",
               "--report", toy / "report.txt") == 0
    recs = [json.loads(x) for x in (toy / "report.txt.jsonl").read_text().splitlines()]
    total = [r for r in recs if r["rule"] == "total" and r["depth"] == "all"][0]
    assert total["count"] == 8 and total["accuracy"] >= 0.99
    assert "total" in capsys.readouterr().out


def test_training_is_reproducible(toy, tmp_path):
    run("train", "--train", toy / "toy.jsonl", "--epochs", 150, "--batch-size", 8,
        "--lr", 0.01, "--seed", 0, "--out", tmp_path / "again.npz", "-q")
    assert (tmp_path / "again.npz").read_bytes() == (toy / "model.npz").read_bytes()


def test_obligation_free_checkpoint_ignores_obligations(toy, tmp_path):
    out = tmp_path / "free.npz"
    assert run("train", "--train", toy / "toy.jsonl", "--epochs", 3, "--batch-size", 4,
               "--obligation-free", "--out", out, "-q") == 0
    store = load(out)
    assert store.config.obligation_free
    est = NeuralEstimator(store)
    goal = parse_prop("(imp (var a) (imp (var b) (var a)))")
    outs = {tuple(est.rule_distribution(goal, (), q)) for q in
            (None, PVar("a"), parse_prop("(prod (var b) (var c))"))}
    assert len(outs) == 1


def test_eval_uniform_reports_first_rule_frequency(pipeline):
    val = dg.read_quadruples(pipeline / "val.jsonl")
    report = pipeline / "uniform.txt"
    assert run("eval", "--quads", pipeline / "val.jsonl", "--uniform", "--report", report,
               "-q") == 0
    recs = [json.loads(x) for x in (pipeline / "uniform.txt.jsonl").read_text().splitlines()]
    total = [r for r in recs if r["rule"] == "total" and r["depth"] == "all"][0]
    share_of_var = sum(q.rule.name == "Var" for q in val) / len(val)
    assert total["accuracy"] == pytest.approx(share_of_var)


def test_eval_depth_columns(pipeline):
    quads = dg.read_quadruples(pipeline / "quads.jsonl")
    depths = {len(q.path) for q in quads}
    run("eval", "--quads", pipeline / "quads.jsonl", "--uniform", "--report",
        pipeline / "d.txt", "-q")
    header = (pipeline / "d.txt").read_text().splitlines()[0].split()
    assert header == ["rule"] + [str(d) for d in sorted(depths)] + ["all"]
    body = (pipeline / "d.txt").read_text().splitlines()[2:]
    assert [row.split()[0] for row in body] == [
        "Var", "Abs", "App", "Pair", "CasePair", "Left", "Right", "CaseSum", "total"]


@pytest.mark.parametrize("depth,bucket", [(0, "0"), (1, "1"), (15, "15"), (16, "16-20"),
                                          (20, "16-20"), (21, "21+"), (40, "21+")])
def test_depth_buckets(depth, bucket):
    assert cli.depth_bucket(depth) == bucket


# ---------------------------------------------------------------------------
# prove / check / bench


def test_prove_then_check(capsys):
    assert run("prove", "(imp (var a) (var a))", "--uniform", "-q") == 0
    proof = capsys.readouterr().out.strip()
    assert verify(parse_prop("(imp (var a) (var a))"), parse_term(proof))
    assert run("check", "(imp (var a) (var a))", proof, "-q") == 0
    assert capsys.readouterr().out.strip() == "true"


def test_check_false_exits_two(capsys):
    assert run("check", "(imp (var a) (var b))", "(lam x (var x))", "-q") == 2
    assert capsys.readouterr().out.strip() == "false"


def test_check_unparsable_exits_one():
    assert run("check", "(imp (var a)", "(lam x (var x))", "-q") == 1
    assert run("check", "(imp (var a) (var a))", "(lam x", "-q") == 1


def test_prove_not_found_exits_two(capsys):
    t = time.monotonic()
    assert run("prove", "(var a)", "--timeout", 1, "-q") == 2
    assert time.monotonic() - t < 2.0
    assert capsys.readouterr().out.startswith("NOT_FOUND")


def test_prove_with_trace(tmp_path, capsys):
    trace = tmp_path / "trace.txt"
    assert run("prove", "(imp (var a) (imp (var b) (var a)))", "--trace", trace, "-q") == 0
    lines = trace.read_text().splitlines()
    assert lines and lines[0].startswith("(hole 0) @ 1.0 | hole root | ")


def test_prove_with_checkpoint(toy, capsys):
    assert run("prove", "(imp (var a) (var a))", "--checkpoint", toy / "model.npz", "-q") == 0
    proof = capsys.readouterr().out.strip()
    assert verify(parse_prop("(imp (var a) (var a))"), parse_term(proof))


def test_internal_errors_exit_three(monkeypatch):
    def broken(*args, **kwargs):
        raise SearchInvariantError("accepted non-proof")

    monkeypatch.setattr(cli, "proof_synthesize", broken)
    assert run("prove", "(imp (var a) (var a))", "-q") == 3


def test_bench_report(tmp_path, capsys):
    props = tmp_path / "props.txt"
    props.write_text("(imp (var a) (var a))\n(var a)\n(imp (var a) (imp (var b) (var a)))\n")
    report = tmp_path / "bench.txt"
    assert run("bench", "--props", props, "--timeout", 0.5, "--report", report, "-q") == 0
    out = capsys.readouterr().out
    assert "uniform" in out and "2/3" in out
    recs = [json.loads(x) for x in (tmp_path / "bench.txt.jsonl").read_text().splitlines()]
    assert [r["found"] for r in recs] == [True, False, True]
    for r in recs:
        if r["found"]:
            assert verify(parse_prop(r["proposition"]), parse_term(r["proof"]))


def test_bench_from_quads_with_both_estimators(toy, pipeline, tmp_path, capsys):
    assert run("bench", "--from-quads", pipeline / "val.jsonl", "--count", 5, "--seed", 1,
               "--checkpoint", toy / "model.npz", "--uniform", "--timeout", 5,
               "--report", tmp_path / "b.txt", "-q") == 0
    recs = [json.loads(x) for x in (tmp_path / "b.txt.jsonl").read_text().splitlines()]
    assert [r["estimator"] for r in recs] == ["neural"] * 5 + ["uniform"] * 5
    assert [r["proposition"] for r in recs[:5]] == [r["proposition"] for r in recs[5:]]


# ---------------------------------------------------------------------------
# Configuration files


def test_config_file_values_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"small": 3, "out": str(tmp_path / "c.jsonl")}))
    assert run("--config", cfg, "gen", "-q") == 0
    assert len(dg.read_corpus(tmp_path / "c.jsonl")) == 7
    assert run("gen", "--config", cfg, "--small", 2, "-q") == 0
    assert len(dg.read_corpus(tmp_path / "c.jsonl")) == 1


def test_effective_config_is_logged(tmp_path, caplog):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max-size": 2}))
    with caplog.at_level(logging.INFO, logger="proofsynth"):
        run("--config", cfg, "gen", "--out", tmp_path / "c.jsonl")
    [line] = [r.getMessage() for r in caplog.records if "effective config" in r.getMessage()]
    effective = json.loads(line.split(": ", 1)[1])
    assert effective["small"] == 2 and effective["command"] == "gen"


@pytest.mark.parametrize("content", ['{"bogus": 1}', "[1, 2]", "not json"])
def test_bad_config_files_exit_one(tmp_path, content):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    with pytest.raises(SystemExit) as e:
        run("--config", cfg, "gen", "--small", 2, "--out", tmp_path / "c")
    assert e.value.code == 1


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "proofsynth", "check",
                          "(imp (var a) (var a))", "(lam x (var x))"],
                         capture_output=True, text=True, timeout=60)
    assert out.returncode == 0 and out.stdout.strip() == "true"
    assert "effective config" in out.stderr
