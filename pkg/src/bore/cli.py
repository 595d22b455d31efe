"""Command-line front end.

Exit codes: 0 success, 1 validation or verification failure, 2 parse, IO or
usage error. Reports go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import fixture_text
from .decision import automation_metrics, decide_all, format_decisions
from .model import InvalidModelError, ModelError, ProcessModel, validate_model
from .render import process_to_dot, usecase_to_dot
from .simulate import (
    ScriptError,
    SimulationError,
    check_termination,
    enumerate_outcomes,
    format_log,
    parse_events,
    run_script,
)
from .textfmt import ParseError, parse_annotations, parse_model, parse_packages, serialize_model
from .transform import derive_tobe, diff_models, extract_use_cases

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bore", description="As-Is/To-Be process modeling pipeline")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("validate", help="check a model against every structural rule")
    c.add_argument("model")

    c = sub.add_parser("decide", help="print the A/S/M decision for every task")
    c.add_argument("model")
    c.add_argument("annot")
    c.add_argument("--check-golden", nargs="?", const="", metavar="FILE",
                   help="compare against expected decisions (default: bundled table1.golden)")

    c = sub.add_parser("tobe", help="write the To-Be model derived from decisions")
    c.add_argument("model")
    c.add_argument("annot")
    c.add_argument("-o", "--output")

    c = sub.add_parser("diff", help="list changes between two models with their perspective level")
    c.add_argument("a")
    c.add_argument("b")

    c = sub.add_parser("metrics", help="label counts and automation degree")
    c.add_argument("model")
    c.add_argument("annot")
    c.add_argument("--format", choices=("text", "kv"), default="kv")

    c = sub.add_parser("usecases", help="use-case associations per actor and package")
    c.add_argument("model")
    c.add_argument("--packages", required=True)
    c.add_argument("--actors", help="comma-separated role ids (default: all roles)")
    c.add_argument("--dot", action="store_true", help="emit a DOT use-case diagram instead")

    c = sub.add_parser("simulate", help="run an event script against a To-Be model")
    c.add_argument("model")
    c.add_argument("--script", required=True)
    c.add_argument("--max-revisions", type=int, default=1)

    c = sub.add_parser("enumerate", help="count paths to each end node and check termination")
    c.add_argument("model")
    c.add_argument("--max-revisions", type=int, default=1)

    c = sub.add_parser("render", help="DOT diagram of a model")
    c.add_argument("model")
    c.add_argument("-o", "--output")
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise _UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _load_model(path: str) -> ProcessModel:
    text = _read(path)
    try:
        return parse_model(text)
    except ParseError as exc:
        raise _UsageError(f"{path}:{exc.span}: {exc.code}: {exc.message}") from None


def _load_annotations(path: str):
    text = _read(path)
    try:
        return parse_annotations(text)
    except ParseError as exc:
        raise _UsageError(f"{path}:{exc.span}: {exc.code}: {exc.message}") from None


def _cmd_validate(args, out, err) -> int:
    report = validate_model(_load_model(args.model))
    for v in report.violations:
        out.write(f"{v}\n")
    if report.ok:
        out.write("ok\n")
        return EXIT_OK
    return EXIT_FAIL


def _golden(path: str) -> dict[str, str]:
    text = fixture_text("table1.golden") if path == "" else _read(path)
    expected = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        if len(parts) != 2:
            raise _UsageError(f"golden file line {lineno}: expected '<task> <label>'")
        expected[parts[0]] = parts[1]
    return expected


def _cmd_decide(args, out, err) -> int:
    decisions = decide_all(_load_model(args.model), _load_annotations(args.annot))
    out.write(format_decisions(decisions))
    if args.check_golden is None:
        return EXIT_OK
    expected = _golden(args.check_golden)
    got = {d.task: d.label.value for d in decisions}
    bad = 0
    for tid in sorted(set(expected) | set(got)):
        if expected.get(tid) != got.get(tid):
            err.write(f"golden mismatch {tid}: expected {expected.get(tid, '-')}, got {got.get(tid, '-')}\n")
            bad += 1
    if bad:
        return EXIT_FAIL
    err.write(f"golden: {len(expected)}/{len(expected)} decisions match\n")
    return EXIT_OK


def _cmd_tobe(args, out, err) -> int:
    asis = _load_model(args.model)
    tobe = derive_tobe(asis, decide_all(asis, _load_annotations(args.annot)))
    text = serialize_model(tobe)
    if args.output:
        _write(args.output, text)
    else:
        out.write(text)
    return EXIT_OK


def _cmd_diff(args, out, err) -> int:
    out.write(diff_models(_load_model(args.a), _load_model(args.b)).report())
    return EXIT_OK


def _cmd_metrics(args, out, err) -> int:
    metrics = automation_metrics(decide_all(_load_model(args.model), _load_annotations(args.annot)))
    out.write(metrics.as_kv() if args.format == "kv" else metrics.as_report())
    return EXIT_OK


def _cmd_usecases(args, out, err) -> int:
    model = _load_model(args.model)
    try:
        packages = parse_packages(_read(args.packages))
    except ParseError as exc:
        raise _UsageError(f"{args.packages}:{exc.span}: {exc.code}: {exc.message}") from None
    if args.actors is None:
        actors = [r.id for r in model.roles]
    else:
        actors = [a.strip() for a in args.actors.split(",") if a.strip()]
    ucm = extract_use_cases(model, packages, actors)
    if args.dot:
        out.write(usecase_to_dot(ucm))
        return EXIT_OK
    for pkg in ucm.packages:
        out.write(f"package \"{pkg.name}\" {' '.join(pkg.use_cases)}\n")
    for actor, count in ucm.association_counts().items():
        tasks = [t for a, t in ucm.sorted_associations() if a == actor]
        out.write(f"actor {actor} {count} {' '.join(tasks)}".rstrip() + "\n")
    return EXIT_OK


def _cmd_simulate(args, out, err) -> int:
    model = _load_model(args.model)
    try:
        events = parse_events(_read(args.script))
    except ScriptError as exc:
        raise _UsageError(f"{args.script}: {exc}") from None
    state = run_script(model, events, args.max_revisions)
    out.write(format_log(state.log))
    out.write(f"# final {state.current} {state.pending}\n")
    return EXIT_OK


def _cmd_enumerate(args, out, err) -> int:
    model = _load_model(args.model)
    if validate_model(model).ok:
        for end, count in enumerate_outcomes(model, args.max_revisions).items():
            out.write(f"{end} {count}\n")
    report = check_termination(model, args.max_revisions)
    out.write(f"terminates={'true' if report.terminates else 'false'} "
              f"max_steps={report.max_steps} bound={report.bound}\n")
    return EXIT_OK if report.terminates else EXIT_FAIL


def _cmd_render(args, out, err) -> int:
    text = process_to_dot(_load_model(args.model))
    if args.output:
        _write(args.output, text)
    else:
        out.write(text)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "decide": _cmd_decide,
    "tobe": _cmd_tobe,
    "diff": _cmd_diff,
    "metrics": _cmd_metrics,
    "usecases": _cmd_usecases,
    "simulate": _cmd_simulate,
    "enumerate": _cmd_enumerate,
    "render": _cmd_render,
}


def run_command(argv: Sequence[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            try:
                args = parser.parse_args(list(argv))
            except SystemExit as exc:  # --help
                return EXIT_OK if not exc.code else EXIT_USAGE
        return _COMMANDS[args.command](args, out, err)
    except _UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except InvalidModelError as exc:
        err.write(f"{exc}\n")
        return EXIT_FAIL
    except (ModelError, SimulationError, ValueError) as exc:
        err.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
