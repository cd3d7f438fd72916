"""Command-line interface: ``proofsynth <subcommand> ...``.

Subcommands: gen, quads, split, train, eval, prove, check, bench.  Options
may also come from a JSON file given with ``--config`` (keys are option
names with dashes or underscores); options on the command line win.

Exit codes: 0 success, 1 usage error, 2 proof not found (single ``prove``)
or a rejected ``check``, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

import numpy as np

from . import datasetgen as dg
from .calculus import (CalculusError, ParseError, Rule, parse_prop, parse_term,
                       prop_to_sexpr, term_to_sexpr)
from .estimator import (Hyper, ModelConfig, NeuralEstimator, QueryEncoder,
                        UniformEstimator, init, load, predict_proba, save, train)
from .search import SearchBudget, SearchInvariantError, proof_synthesize, verify

log = logging.getLogger("proofsynth")

EXIT_OK, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_INTERNAL = 0, 1, 2, 3
DEPTH_BUCKETS = [str(d) for d in range(0, 16)] + ["16-20", "21+"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def depth_bucket(depth: int) -> str:
    if depth <= 15:
        return str(depth)
    return "16-20" if depth <= 20 else "21+"


def format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    fmt = lambda r: "  ".join(str(c).rjust(w) for c, w in zip(r, widths))
    return "\n".join([fmt(header), "  ".join("-" * w for w in widths)] + [fmt(r) for r in rows])


def write_jsonl(records, filename) -> None:
    with open(filename, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")


def _parse_prop_arg(text: str):
    try:
        return parse_prop(text)
    except ParseError as e:
        raise UsageError(f"cannot parse proposition {text!r}: {e}") from e


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen(a) -> int:
    if (a.lower is None) != (a.upper is None):
        raise UsageError("--lower and --upper go together")
    if a.lower is not None:
        if a.large is not None:
            raise UsageError("give --large L U or --lower/--upper, not both")
        a.large = (a.lower, a.upper)
    if (a.small is None) == (a.large is None):
        raise UsageError("give exactly one of --small S or --large L U")
    if a.small is not None:
        pairs = dg.small_proof_gen(a.small)
    else:
        lo, hi = a.large
        pairs = dg.random_large_proof_gen(lo, hi, a.seed, a.count, workers=a.workers)
    if not pairs:
        log.warning("no proofs generated; the corpus is empty")
    dg.write_corpus(pairs, a.out)
    hist = dg.size_histogram(pairs)
    print(format_table(["size", "proofs"], [[k, str(v)] for k, v in hist.items()]
                       + [["total", str(len(pairs))]]))
    write_jsonl([{"size": k, "proofs": v} for k, v in hist.items()], f"{a.out}.summary.jsonl")
    return EXIT_OK


def cmd_quads(a) -> int:
    pairs = dg.read_corpus(a.corpus)
    for pair in pairs:
        dg.check_pair(pair)
    quads = dg.extract_quadruples(pairs)
    dg.write_quadruples(quads, a.out)
    print(f"{len(quads)} quadruples from {len(pairs)} proofs")
    return EXIT_OK


def cmd_split(a) -> int:
    quads = dg.read_quadruples(a.quads)
    sp = dg.split(quads, a.ratio, a.seed)
    dg.write_quadruples(sp.train, a.train_out)
    dg.write_quadruples(sp.validation, a.validation_out)
    print(f"train {len(sp.train)}  validation {len(sp.validation)}")
    return EXIT_OK


def _model_config(a) -> ModelConfig:
    if a.full_scale:
        return ModelConfig.full_scale(a.obligation_free)
    return ModelConfig(obligation_free=a.obligation_free)


def cmd_train(a) -> int:
    tr = dg.read_quadruples(a.train)
    va = dg.read_quadruples(a.validation) if a.validation else []
    store = init(_model_config(a), a.seed)
    lines = []

    def emit(line):
        lines.append(line)
        print(line, flush=True)

    train(store, tr, va, epochs=a.epochs, batch_size=a.batch_size, seed=a.seed,
          hyper=Hyper(alpha=a.lr, weight_decay=a.weight_decay), log=emit,
          deterministic=a.deterministic)
    save(store, a.out)
    Path(f"{a.out}.log").write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return EXIT_OK


def _estimator(a):
    if getattr(a, "uniform", False) or not a.checkpoint:
        return None
    return load(a.checkpoint)


def rule_predictions(store, quads) -> np.ndarray:
    """Most likely rule per quadruple; ties go to the first rule in rule order."""
    if store is None:
        return np.zeros(len(quads), dtype=np.int64)
    enc = QueryEncoder(store.vocab)
    return predict_proba(store, enc.encode_quadruples(quads)).argmax(axis=1)


def accuracy_report(quads, pred) -> tuple[str, list[dict]]:
    cells: dict = {}
    for q, p in zip(quads, pred):
        for key in ((q.rule.name, depth_bucket(len(q.path))), (q.rule.name, "all"),
                    ("total", depth_bucket(len(q.path))), ("total", "all")):
            c = cells.setdefault(key, [0, 0])
            c[0] += int(p == int(q.rule))
            c[1] += 1
    cols = [b for b in DEPTH_BUCKETS if ("total", b) in cells] + ["all"]
    rows, records = [], []
    for name in [r.name for r in Rule] + ["total"]:
        row = [name]
        for b in cols:
            c = cells.get((name, b))
            row.append(f"{100.0 * c[0] / c[1]:.2f}" if c else "-")
            if c:
                records.append({"rule": name, "depth": b, "correct": c[0], "count": c[1],
                                "accuracy": c[0] / c[1]})
        rows.append(row)
    return format_table(["rule"] + cols, rows), records


def cmd_eval(a) -> int:
    quads = dg.read_quadruples(a.quads)
    store = _estimator(a)
    pred = rule_predictions(store, quads)
    table, records = accuracy_report(quads, pred)
    print(table)
    if a.report:
        Path(a.report).write_text(table + "\n", encoding="utf-8")
        write_jsonl(records, f"{a.report}.jsonl")
    return EXIT_OK


def _search(a, p, est):
    budget = SearchBudget(a.max_expansions, a.timeout)
    return proof_synthesize(p, est, budget, normal_only=a.normal_only, memo=a.memo)


def cmd_prove(a) -> int:
    store = _estimator(a)
    est = NeuralEstimator(store) if store else UniformEstimator()
    trace_file = open(a.trace, "w", encoding="utf-8") if a.trace else None
    try:
        p = _parse_prop_arg(a.proposition)
        budget = SearchBudget(a.max_expansions, a.timeout)
        trace = (lambda line: trace_file.write(line + "\n")) if trace_file else None
        r = proof_synthesize(p, est, budget, normal_only=a.normal_only, memo=a.memo, trace=trace)
    finally:
        if trace_file:
            trace_file.close()
    if not r.found:
        print(f"NOT_FOUND ({r.reason} after {r.expansions} expansions, {r.elapsed:.2f}s)")
        return EXIT_NOT_FOUND
    print(term_to_sexpr(r.proof))
    log.info("found after %d expansions in %.3fs", r.expansions, r.elapsed)
    return EXIT_OK


def cmd_check(a) -> int:
    p = _parse_prop_arg(a.proposition)
    try:
        m = parse_term(a.proof)
    except ParseError as e:
        raise UsageError(f"cannot parse proof {a.proof!r}: {e}") from e
    ok = verify(p, m)
    print("true" if ok else "false")
    return EXIT_OK if ok else EXIT_NOT_FOUND


def _bench_props(a) -> list:
    if a.props:
        lines = Path(a.props).read_text(encoding="utf-8").splitlines()
        return [_parse_prop_arg(line) for line in lines if line.strip()]
    if a.from_quads:
        goals = sorted({prop_to_sexpr(q.goal) for q in dg.read_quadruples(a.from_quads)})
        chosen = random.Random(a.seed).sample(goals, min(a.count, len(goals)))
        return [parse_prop(g) for g in chosen]
    raise UsageError("give --props FILE or --from-quads FILE")


def cmd_bench(a) -> int:
    props = _bench_props(a)
    estimators = []
    if a.checkpoint:
        estimators.append(("neural", NeuralEstimator(load(a.checkpoint))))
    if a.uniform or not a.checkpoint:
        estimators.append(("uniform", UniformEstimator()))
    rows, records = [], []
    for name, est in estimators:
        ok, secs = 0, 0.0
        for p in props:
            r = _search(a, p, est)
            if r.found:
                ok += 1
                secs += r.elapsed
            records.append({"estimator": name, "proposition": prop_to_sexpr(p),
                            "found": r.found, "seconds": r.elapsed, "expansions": r.expansions,
                            "proof": term_to_sexpr(r.proof) if r.found else None})
        rows.append([name, f"{ok}/{len(props)}", f"{secs / ok:.3f}" if ok else "-"])
    table = format_table(["estimator", "successes", "mean seconds"], rows)
    print(table)
    if a.report:
        Path(a.report).write_text(table + "\n", encoding="utf-8")
        write_jsonl(records, f"{a.report}.jsonl")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_search_flags(sp) -> None:
    sp.add_argument("--checkpoint", help="trained model (default: uniform estimator)")
    sp.add_argument("--uniform", action="store_true", help="use the uniform estimator")
    sp.add_argument("--timeout", type=float, default=180.0, help="seconds per proposition")
    sp.add_argument("--max-expansions", type=int, default=1_000_000)
    sp.add_argument("--normal-only", action="store_true",
                    help="prune partial proofs that can only complete to non-normal ones")
    sp.add_argument("--memo", action="store_true",
                    help="skip partial proofs already queued (up to renaming)")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = _Parser(prog="proofsynth", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of option defaults")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    # The global options are accepted after the subcommand as well.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS,
                        help=argparse.SUPPRESS)
    subs = {}

    sp = subs["gen"] = sub.add_parser("gen", parents=[common],
                                      help="generate a proposition/proof corpus")
    sp.add_argument("--small", "--max-size", dest="small", type=int, metavar="S",
                    help="all normal proofs up to size S")
    sp.add_argument("--large", type=int, nargs=2, metavar=("L", "U"),
                    help="random normal proofs with sizes in [L, U]")
    sp.add_argument("--lower", type=int, help="same as the L of --large")
    sp.add_argument("--upper", type=int, help="same as the U of --large")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = subs["quads"] = sub.add_parser("quads", parents=[common],
                                        help="extract training quadruples")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_quads)

    sp = subs["split"] = sub.add_parser("split", parents=[common],
                                        help="seeded train/validation split")
    sp.add_argument("--quads", required=True)
    sp.add_argument("--ratio", type=float, default=0.9)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--train-out", required=True)
    sp.add_argument("--validation-out", required=True)
    sp.set_defaults(func=cmd_split)

    sp = subs["train"] = sub.add_parser("train", parents=[common],
                                        help="train the rule classifier")
    sp.add_argument("--train", required=True)
    sp.add_argument("--validation")
    sp.add_argument("--epochs", type=int, default=10)
    sp.add_argument("--batch-size", type=int, default=100)
    sp.add_argument("--lr", type=float, default=0.001)
    sp.add_argument("--weight-decay", type=float, default=0.0001)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--obligation-free", action="store_true")
    sp.add_argument("--full-scale", action="store_true", help="published layer widths")
    sp.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True,
                    help="single-threaded linear algebra (bit-reproducible)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_train)

    sp = subs["eval"] = sub.add_parser("eval", parents=[common],
                                       help="per-rule, per-depth accuracy")
    sp.add_argument("--quads", required=True)
    sp.add_argument("--checkpoint")
    sp.add_argument("--uniform", action="store_true")
    sp.add_argument("--report", help="write the table here and records to REPORT.jsonl")
    sp.set_defaults(func=cmd_eval)

    sp = subs["prove"] = sub.add_parser("prove", parents=[common],
                                        help="synthesise a proof of one proposition")
    sp.add_argument("proposition")
    _add_search_flags(sp)
    sp.add_argument("--trace", help="write one line per expansion to this file")
    sp.set_defaults(func=cmd_prove)

    sp = subs["check"] = sub.add_parser("check", parents=[common],
                                        help="check a proof of a proposition")
    sp.add_argument("proposition")
    sp.add_argument("proof")
    sp.set_defaults(func=cmd_check)

    sp = subs["bench"] = sub.add_parser("bench", parents=[common],
                                        help="synthesis benchmark")
    sp.add_argument("--props", help="file with one proposition per line")
    sp.add_argument("--from-quads", help="sample goals from a quadruple file")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    _add_search_flags(sp)
    sp.set_defaults(timeout=10.0)
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_bench)
    return parser, subs


def _read_config(filename: str) -> dict:
    try:
        raw = json.loads(Path(filename).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot read config {filename}: {e}") from e
    if not isinstance(raw, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in raw.items()}


def parse_args(argv=None) -> argparse.Namespace:
    """Parse flags; values from ``--config`` become defaults that flags override."""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((tok for tok in argv if tok in subs), None)
    if known.config and command:
        try:
            defaults = _read_config(known.config)
        except UsageError as e:
            parser.error(str(e))
        # Keys may name a destination or any long option spelling.
        actions = {}
        for act in subs[command]._actions:
            actions[act.dest] = act
            for opt in act.option_strings:
                if opt.startswith("--"):
                    actions[opt[2:].replace("-", "_")] = act
        unknown = sorted(set(defaults) - set(actions) - {"config", "quiet"})
        if unknown:
            parser.error(f"unknown config keys for {command}: {', '.join(unknown)}")
        resolved = {}
        for key, value in defaults.items():
            if key in actions:
                actions[key].required = False
                resolved[actions[key].dest] = value
        subs[command].set_defaults(**resolved)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    effective = {k: v for k, v in vars(args).items() if k != "func"}
    log.info("effective config: %s", json.dumps(effective, sort_keys=True, default=str))
    try:
        return args.func(args)
    except UsageError as e:
        print(f"proofsynth: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"proofsynth: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (SearchInvariantError, AssertionError, CalculusError) as e:
        print(f"proofsynth: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
