"""Command-line surface: a line-oriented session interpreter.

Usage: ``retegraph [script]`` — commands are read from the script file (or
stdin), one per line, and executed against a single in-process session:

    load <graph.json>
    register <name> <query-file | inline query text>
    apply <deltas.jsonl> [--batch]
    results <name>
    explain <name> --stage gra|nra|fra

Blank lines and ``#`` comments are skipped.  The interpreter stops at the
first failing command; exit status 0 on success, 1 on user errors, 2 on
internal inconsistencies.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys

from .errors import InternalError, RetegraphError, UserError
from .graph import delta_from_json
from .session import Session


class _CommandError(Exception):
    def __init__(self, message, code=1):
        super().__init__(message)
        self.code = code


def _print_table(session, header, rows):
    print("\t".join(header))
    for row in rows:
        print(session.format_row(row))


def _print_delta_report(session, report):
    for name, changeset in report.items():
        if changeset.is_empty():
            continue
        print(f"== {name}")
        negatives = sorted(changeset.negative.items(),
                           key=lambda item: session.format_row(item[0]))
        positives = sorted(changeset.positive.items(),
                           key=lambda item: session.format_row(item[0]))
        for row, count in negatives:
            for _ in range(count):
                print(f"- {session.format_row(row)}")
        for row, count in positives:
            for _ in range(count):
                print(f"+ {session.format_row(row)}")


def _read_deltas(path):
    deltas = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise _CommandError(f"cannot read delta script: {exc}")
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
            deltas.append((lineno, delta_from_json(obj)))
        except (json.JSONDecodeError, RetegraphError) as exc:
            raise _CommandError(f"line {lineno}: {exc}")
    return deltas


def cmd_load(session, args):
    if len(args) != 1:
        raise _CommandError("usage: load <graph-file>")
    try:
        with open(args[0], encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise _CommandError(f"cannot read graph file: {exc}")
    except json.JSONDecodeError as exc:
        raise _CommandError(f"graph file is not valid JSON: {exc}")
    n_vertices, n_edges = session.load(doc)
    print(f"|V|={n_vertices} |E|={n_edges}")


def cmd_register(session, name, source):
    if not name or not source:
        raise _CommandError("usage: register <name> <query-file | query text>")
    text = source
    if os.path.isfile(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    query = session.register(name, text)
    header, rows = session.results(query.name)
    _print_table(session, header, rows)


def cmd_apply(session, args):
    batch = "--batch" in args
    paths = [a for a in args if a != "--batch"]
    if len(paths) != 1:
        raise _CommandError("usage: apply <delta-script> [--batch]")
    deltas = _read_deltas(paths[0])
    if batch:
        report, error = _apply_batch(session, deltas)
        _print_delta_report(session, report)
        if error is not None:
            lineno, exc = error
            raise _CommandError(f"line {lineno}: {exc}",
                                code=2 if isinstance(exc, InternalError) else 1)
        return
    for lineno, delta in deltas:
        try:
            report = session.apply_delta(delta)
        except RetegraphError as exc:
            raise _CommandError(f"line {lineno}: {exc}",
                                code=2 if isinstance(exc, InternalError) else 1)
        _print_delta_report(session, report)


def _apply_batch(session, deltas):
    """Apply all deltas storewise, then propagate once per query.  On a bad
    delta the earlier ones stay applied; accumulated change sets still
    propagate so the networks remain consistent with the store."""
    per_query = {name: [] for name in session.queries}
    error = None
    for lineno, delta in deltas:
        try:
            notifications = session.store.apply_delta(delta)
        except RetegraphError as exc:
            error = (lineno, exc)
            break
        for name, query in session.queries.items():
            per_query[name].extend(query.network.route(notifications))
    report = {}
    for name, query in session.queries.items():
        sink = query.network.propagate(per_query[name])
        report[name] = query.slice_changeset(sink)
    return report, error


def cmd_results(session, args):
    if len(args) != 1:
        raise _CommandError("usage: results <name>")
    header, rows = session.results(args[0])
    _print_table(session, header, rows)


def cmd_explain(session, args):
    stage = None
    rest = []
    i = 0
    while i < len(args):
        if args[i] == "--stage":
            if i + 1 >= len(args):
                raise _CommandError("--stage expects gra|nra|fra")
            stage = args[i + 1]
            i += 2
        else:
            rest.append(args[i])
            i += 1
    if len(rest) == 2 and stage is None:
        rest, stage = rest[:1], rest[1]
    if len(rest) != 1 or stage not in ("gra", "nra", "fra"):
        raise _CommandError("usage: explain <name> --stage gra|nra|fra")
    print(session.explain(rest[0], stage))


def run_line(session, line) -> None:
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return
    if stripped.split(None, 1)[0] == "register":
        parts = stripped.split(None, 2)
        if len(parts) < 3:
            raise _CommandError("usage: register <name> <query-file | query text>")
        source = parts[2].strip()
        if len(source) >= 2 and source[0] == source[-1] and source[0] in "'\"":
            source = source[1:-1]
        cmd_register(session, parts[1], source)
        return
    args = shlex.split(stripped)
    command, args = args[0], args[1:]
    if command == "load":
        cmd_load(session, args)
    elif command == "apply":
        cmd_apply(session, args)
    elif command == "results":
        cmd_results(session, args)
    elif command == "explain":
        cmd_explain(session, args)
    else:
        raise _CommandError(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="retegraph",
        description="Incremental property-graph query session interpreter.")
    parser.add_argument("script", nargs="?",
                        help="command script (defaults to stdin)")
    opts = parser.parse_args(argv)
    if opts.script:
        try:
            with open(opts.script, encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        lines = sys.stdin.readlines()
    session = Session()
    for line in lines:
        try:
            run_line(session, line)
        except _CommandError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return exc.code
        except UserError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        except InternalError as exc:
            print(f"internal error: {exc}", file=sys.stderr)
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
