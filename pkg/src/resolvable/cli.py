"""Command-line interface: ``resolvable check | parse | analyze``.

Every command builds a list of plain records first and renders text from
them, so ``--format=json`` output re-renders to exactly the text output
(see ``render_records``).
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .dynamic_analysis import (
    PreconditionViolation,
    line_col,
    render_record,
    resolve_word,
    site_of_verdict,
    verdict_record,
)
from .forest_parser import LexError, NoParse, ParseError
from .grammar_def import check_balanced, check_unit_cycles, validate
from .static_analysis import RESOLVABLE, UNKNOWN, check_static, classify
from .syncon_dsl import DslError, load_grammar

EXIT_CLEAN, EXIT_AMBIGUOUS, EXIT_UNRESOLVABLE = 0, 1, 2
COUNT_KINDS = ("clean", "resolvable", "unresolvable", "inconclusive", "error")


# -- records -------------------------------------------------------------------


def diagnostic_record(severity: str, code: str, message: str, location=None) -> dict:
    return {"kind": "diagnostic", "severity": severity, "code": code,
            "message": message, "location": location}


def static_record(v) -> dict:
    rec = {"kind": "static", "outcome": v.outcome, "subclass": v.subclass,
           "message": v.message}
    if v.contained is not None:
        rec["contained"] = str(v.contained)
        rec["container"] = str(v.container)
        rec["encodings"] = list(v.encodings)
    return rec


def render_records(records) -> str:
    """Human text of a record list; the text format prints exactly this."""
    return "".join(render_one(r) + "\n" for r in records)


def render_one(rec: dict) -> str:
    kind = rec["kind"]
    if kind == "diagnostic":
        where = f"{rec['location']}: " if rec.get("location") else ""
        return f"{where}{rec['severity']}: {rec['message']} [{rec['code']}]"
    if kind == "static":
        head = f"{rec['message']} ({rec['subclass']})"
        if "contained" not in rec:
            return head
        return "\n".join([
            head,
            f"  tree:      {rec['contained']}",
            f"  also:      {rec['container']}",
            f"  encodings: {rec['encodings'][0]} vs {rec['encodings'][1]}",
        ])
    if kind == "analysis":
        return _render_analysis(rec)
    return render_record(rec)


def _render_analysis(rec: dict) -> str:
    lines = [f"files: {rec['files']}"]
    lines += [f"  {k}: {rec['counts'][k]}" for k in COUNT_KINDS]
    lines.append(f"ambiguity sites: {len(rec['sites'])}")
    for s in rec["sites"]:
        n = len(s["files"])
        lines.append(f"  {' / '.join(s['key'])}  ({n} file{'s' if n != 1 else ''}, {s['verdict']})")
        lines.append(f"    files: {', '.join(s['files'])}")
        for sug in s["suggestions"]:
            lines.append(f"    suggest: {sug}")
    for e in rec["errors"]:
        lines.append(f"error: {e}")
    return "\n".join(lines)


def emit(records, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(records, indent=2, ensure_ascii=False))
    else:
        click.echo(render_records(records), nl=False)


# -- shared helpers ------------------------------------------------------------


def _load(paths):
    """Grammar or an error record."""
    try:
        return load_grammar(paths), None
    except DslError as e:
        return None, diagnostic_record("error", "grammar", e.bare,
                                       str(e.loc) if e.loc else None)
    except OSError as e:
        return None, diagnostic_record("error", "io", str(e))


def _error_record(filename: str, text: str, err: Exception) -> dict:
    offset = None
    if isinstance(err, LexError):
        offset = err.offset
    elif isinstance(err, NoParse):
        offset = err.token.start if err.token is not None else len(text)
    where = filename
    if offset is not None:
        line, col = line_col(text, offset)
        where = f"{filename}:{line}:{col}"
    code = "lex" if isinstance(err, LexError) else "parse"
    if isinstance(err, PreconditionViolation):
        code = "grammar"
    return diagnostic_record("error", code, str(err), where)


def parse_program(defn, text: str, filename: str, budget_ms=None):
    """``(record, verdict_or_None)`` for one program."""
    try:
        v = resolve_word(defn, text, budget_ms)
    except (ParseError, PreconditionViolation) as e:
        return _error_record(filename, text, e), None
    return verdict_record(v, filename, text), v


def parse_exit(kind: str) -> int:
    if kind == "unambiguous":
        return EXIT_CLEAN
    if kind == "unresolvable":
        return EXIT_UNRESOLVABLE
    return EXIT_AMBIGUOUS


# -- commands ------------------------------------------------------------------


FORMAT = click.option("--format", "fmt", type=click.Choice(["text", "json"]),
                      default="text", show_default=True, help="Output format.")
BUDGET = click.option("--budget", type=float, default=None, metavar="MS",
                      help="Time budget for the per-word analysis, in milliseconds.")
GRAMMARS = click.option("-g", "--grammar", "grammars", multiple=True, required=True,
                        type=click.Path(exists=True, dir_okay=False),
                        help="Grammar file (.syn); repeat to compose.")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Detect and explain resolvable ambiguity in composed grammars."""


@main.command()
@click.argument("grammars", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--allow-unknown", is_flag=True,
              help="Exit 0 when the static check cannot decide.")
@FORMAT
def check(grammars, allow_unknown, fmt):
    """Validate a grammar and decide statically whether it is resolvable."""
    records, code = run_check(grammars, allow_unknown)
    emit(records, fmt)
    sys.exit(code)


def run_check(grammars, allow_unknown=False):
    defn, err = _load(grammars)
    if err:
        return [err], 1
    records = []
    for d in validate(defn):
        records.append(diagnostic_record(d.severity, d.code, d.message,
                                         str(d.loc) if d.loc else None))
    failed = any(r["severity"] == "error" for r in records)
    if not check_balanced(defn):
        records.append(diagnostic_record(
            "error", "unbalanced", "some production admits unbalanced grouping parentheses"))
        failed = True
    cycles = check_unit_cycles(defn)
    if cycles:
        records.append(diagnostic_record(
            "error", "unit-cycle",
            "infinitely ambiguous (unit cycle through " + ", ".join(sorted(cycles)) + ")"))
        return records, 1
    if failed:
        return records, 1
    records.append(diagnostic_record("info", "class", f"grammar class: {classify(defn)}"))
    verdict = check_static(defn)
    records.append(static_record(verdict))
    ok = verdict.outcome == RESOLVABLE or (verdict.outcome == UNKNOWN and allow_unknown)
    return records, 0 if ok else 1


@main.command()
@GRAMMARS
@click.argument("program", type=click.Path(exists=True, dir_okay=False))
@BUDGET
@FORMAT
def parse(grammars, program, budget, fmt):
    """Parse PROGRAM and explain any ambiguity."""
    records, code = run_parse(grammars, program, budget)
    emit(records, fmt)
    sys.exit(code)


def run_parse(grammars, program, budget=None):
    defn, err = _load(grammars)
    if err:
        return [err], 1
    text = Path(program).read_text()
    rec, v = parse_program(defn, text, os.path.basename(program), budget)
    if v is None:
        return [rec], 1
    return [rec], parse_exit(v.kind)


@main.command()
@GRAMMARS
@click.argument("corpus", type=click.Path(exists=True, file_okay=False))
@click.option("--jobs", type=int, default=4, show_default=True,
              help="Files parsed concurrently.")
@BUDGET
@FORMAT
def analyze(grammars, corpus, jobs, budget, fmt):
    """Parse every file under CORPUS and summarize the ambiguities."""
    records, code = run_analyze(grammars, corpus, budget, jobs)
    emit(records, fmt)
    sys.exit(code)


def run_analyze(grammars, corpus, budget=None, jobs=4):
    defn, err = _load(grammars)
    if err:
        return [err], 1
    root = Path(corpus)
    files = sorted(p for p in root.rglob("*") if p.is_file())

    def one(path):
        name = path.relative_to(root).as_posix()
        try:
            text = path.read_text()
        except (OSError, UnicodeDecodeError) as e:
            return name, diagnostic_record("error", "io", str(e), name), None
        try:
            rec, v = parse_program(defn, text, name, budget)
        except Exception as e:  # one bad file must not abort the run
            return name, diagnostic_record("error", "internal", repr(e), name), None
        return name, rec, v

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(one, files))
    return [analysis_record(defn, results)], analysis_exit(results)


def _count_kind(rec) -> str:
    if rec["kind"] == "diagnostic":
        return "error"
    return "clean" if rec["kind"] == "unambiguous" else rec["kind"]


def analysis_record(defn, results) -> dict:
    counts = {k: 0 for k in COUNT_KINDS}
    sites = {}
    errors = []
    for name, rec, v in results:
        kind = _count_kind(rec)
        counts[kind] += 1
        if kind == "error":
            errors.append(render_one(rec))
            continue
        if kind == "clean":
            continue
        s = site_of_verdict(defn, v)
        key = tuple(s["key"])
        entry = sites.setdefault(key, {"key": list(key), "files": [], "verdict": kind,
                                       "suggestions": set()})
        entry["files"].append(name)
        if _worse(kind, entry["verdict"]):
            entry["verdict"] = kind
        entry["suggestions"].update(s["suggestions"])
    out = []
    for key in sorted(sites):
        e = sites[key]
        e["suggestions"] = sorted(e["suggestions"])
        out.append(e)
    return {"kind": "analysis", "files": len(results), "counts": counts,
            "sites": out, "errors": errors}


_RANK = {"clean": 0, "resolvable": 1, "inconclusive": 1, "error": 1, "unresolvable": 2}


def _worse(a: str, b: str) -> bool:
    return _RANK[a] > _RANK[b]


def analysis_exit(results) -> int:
    """Worst verdict over the corpus: 0 all clean, 2 any unresolvable, else 1."""
    return max((_RANK[_count_kind(rec)] for _, rec, _ in results), default=0)


if __name__ == "__main__":
    main()
