"""Command-line driver: `clls check|run|repl|corpus`.

Exit codes: 0 success, 1 check failure, 2 I/O failure, 3 runtime failure
(deadlock, exhausted step budget or arithmetic fault).
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from clls.checker import check_entry, check_program
from clls.diagnostics import CllsError
from clls.expectations import judge_one, judge_sweep, parse_expected
from clls.parser import parse_program
from clls.program import Program
from clls.repl import Repl
from clls.runtime import run_program

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_IO = 2
EXIT_RUNTIME = 3


def _default_seed() -> int:
    env = os.environ.get("CLLS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            pass
    return 0


def _load(path: Path) -> tuple[Program | None, int]:
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: cannot read {path}: {e}", file=sys.stderr)
        return None, EXIT_IO
    try:
        decls = parse_program(source, str(path))
    except CllsError as e:
        print(e.diagnostic.render(), file=sys.stderr)
        return None, EXIT_CHECK
    prog, diags = check_program(decls)
    if diags:
        for d in diags:
            print(d.render(), file=sys.stderr)
        return None, EXIT_CHECK
    return prog, EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    status = EXIT_OK
    for name in args.files:
        prog, code = _load(Path(name))
        if code == EXIT_IO:
            return EXIT_IO
        if code != EXIT_OK:
            status = code
    return status


def _parse_cli_args(tokens: list[str]) -> list[object]:
    return [int(tok) if re.fullmatch(r"-?\d+", tok) else tok
            for tok in tokens]


def cmd_run(args: argparse.Namespace) -> int:
    prog, code = _load(Path(args.file))
    if prog is None:
        return code
    exp_args = _parse_cli_args(args.args)
    try:
        sig = check_entry(prog, args.entry, exp_args)
    except CllsError as e:
        print(e.diagnostic.render(), file=sys.stderr)
        return EXIT_CHECK
    result = run_program(prog, sig, exp_args, seed=args.seed,
                         step_budget=args.steps, trace=args.trace,
                         preemptive=args.parallel)
    sys.stdout.write(result.transcript)
    sys.stdout.flush()
    if args.trace and result.trace_text:
        print(result.trace_text, file=sys.stderr)
    if not result.ok:
        print(f"error: {result.error.render()}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_repl(args: argparse.Namespace) -> int:
    repl = Repl(seed=args.seed, step_budget=args.steps)
    repl.loop()
    return EXIT_OK


def builtin_corpus_dir() -> Path:
    return Path(__file__).parent / "corpus"


def cmd_corpus(args: argparse.Namespace) -> int:
    directory = Path(args.dir) if args.dir else builtin_corpus_dir()
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return EXIT_IO
    sources = sorted(directory.glob("*.clls"))
    failures = 0
    checked = 0
    for source in sources:
        expected = source.with_suffix(".expected")
        if not expected.exists():
            continue
        prog, code = _load(source)
        if prog is None:
            print(f"FAIL {source.name}: does not check")
            failures += 1
            continue
        try:
            scenarios = parse_expected(expected.read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            print(f"FAIL {source.name}: bad expected file: {e}")
            failures += 1
            continue
        for scn in scenarios:
            checked += 1
            seeds = args.seeds if args.seeds is not None else scn.seeds
            try:
                sig = check_entry(prog, scn.entry, scn.args)
            except CllsError as e:
                print(f"FAIL {source.name}[{scn.name}]: {e.diagnostic.render()}")
                failures += 1
                continue
            results = [(seed, run_program(prog, sig, scn.args, seed=seed,
                                          step_budget=scn.budget))
                       for seed in range(seeds)]
            verdict = judge_sweep(scn, results)
            if verdict is None:
                print(f"PASS {source.name}[{scn.name}] "
                      f"({seeds} seed(s), leak audit clean)")
            else:
                print(f"FAIL {source.name}[{scn.name}]: {verdict}")
                failures += 1
    print(f"{checked - failures}/{checked} scenario(s) passed")
    return EXIT_OK if failures == 0 else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clls",
        description="Check, run and explore session-typed programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="type-check source files")
    p_check.add_argument("files", nargs="+")
    p_check.set_defaults(func=cmd_check)

    p_run = sub.add_parser("run", help="check and run one file")
    p_run.add_argument("file")
    p_run.add_argument("--entry", default="main")
    p_run.add_argument("--seed", type=int, default=_default_seed())
    p_run.add_argument("--steps", type=int, default=10_000_000)
    p_run.add_argument("--trace", action="store_true")
    p_run.add_argument("--parallel", action="store_true",
                       help="preemptive interleaving (safety only; "
                            "transcripts are not reproducible contracts)")
    p_run.add_argument("args", nargs="*",
                       help="exponential arguments for the entry process")
    p_run.set_defaults(func=cmd_run)

    p_repl = sub.add_parser("repl", help="interactive top level")
    p_repl.add_argument("--seed", type=int, default=_default_seed())
    p_repl.add_argument("--steps", type=int, default=10_000_000)
    p_repl.set_defaults(func=cmd_repl)

    p_corpus = sub.add_parser(
        "corpus", help="run a directory of (.clls, .expected) pairs")
    p_corpus.add_argument("dir", nargs="?", default=None,
                          help="defaults to the packaged tutorial corpus")
    p_corpus.add_argument("--seeds", type=int, default=None,
                          help="override the per-scenario seed sweep")
    p_corpus.set_defaults(func=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    tokens = list(sys.argv[1:] if argv is None else argv)
    extra: list[str] = []
    if "--" in tokens:
        split = tokens.index("--")
        extra = tokens[split + 1:]
        tokens = tokens[:split]
    parser = build_parser()
    args = parser.parse_args(tokens)
    if extra:
        if not hasattr(args, "args"):
            parser.error("trailing arguments are only valid for `run`")
        args.args = list(args.args) + extra
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
