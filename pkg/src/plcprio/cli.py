"""Command-line workflow: model, instrument, run, diff, impact, prioritize."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .changes.diff import ChangeSet, diff
from .changes.impact import ModificationSet, impact
from .changes.mapping import MappedModifications, map_to_old_trace_points
from .core.builder import build_dependency_model
from .errors import (
    ModelProjectMismatch, PlcPrioError, RuntimeFault, SaveWithoutReset,
    TraceDbMismatch, VersionMismatch,
)
from .frontend.project import load_project, read_sources
from .instrument import InstrumentedProject, TracePointDb, instrument, read_marker
from .prioritize import STRATEGIES, prioritize
from .runner import TestReport, load_suite, read_traces, run_suite, write_traces
from .runtime.overhead import measure_overhead

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_VERSION = 3
EXIT_RUNTIME = 4
EXIT_DIFFERENTIAL = 5


class UsageError(Exception):
    pass


class DifferentialFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_json(path: str | Path, data: dict):
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise PlcPrioError(f"{path}: invalid JSON: {exc}") from None


# -- commands --------------------------------------------------------------------

def cmd_build_model(args) -> int:
    model = build_dependency_model(load_project(args.project))
    write_json(args.output, model.to_json())
    kinds: dict[str, int] = {}
    for n in model.nodes:
        kinds[n.kind] = kinds.get(n.kind, 0) + 1
    print(f"model {model.version_id}: {len(model.nodes)} nodes, {len(model.edges)} edges")
    for k in sorted(kinds):
        print(f"  {k}: {kinds[k]}")
    return EXIT_OK


def cmd_instrument(args) -> int:
    project = load_project(args.project)
    model = build_dependency_model(project)
    instr, db = instrument(project, model)
    instr.write(args.output)
    write_json(args.db, db.to_json())
    print(f"instrumented {model.version_id}: {len(db)} trace points -> {args.output}")
    return EXIT_OK


def load_instrumented(directory: str | Path) -> InstrumentedProject:
    marker = read_marker(directory)
    if marker is None:
        raise ModelProjectMismatch(f"{directory} is not an instrumented project "
                                   "(no instrumented.json)")
    return InstrumentedProject(read_sources(directory), marker["version_id"],
                               int(marker["points"]))


def cmd_run(args) -> int:
    instr = load_instrumented(args.instrumented)
    db = TracePointDb.from_json(read_json(args.db)) if args.db else None
    suite = load_suite(args.suite)
    report, traces = run_suite(instr, db, suite)
    data = report.to_json()
    if args.compare_original:
        original = load_project(args.compare_original)
        version = build_dependency_model(original).version_id
        if version != instr.original_version:
            raise VersionMismatch(f"{args.compare_original} is revision {version}, "
                                  f"instrumented code derives from {instr.original_version}")
        overhead = measure_overhead(original, instr.project, suite)
        data["overhead"] = overhead.to_json()
    write_json(args.output, data)
    if args.traces:
        write_traces(traces, args.traces)
    totals = report.totals()
    for r in report.results:
        extra = f" (step {r.failed_step}: {r.message})" if r.failed_step is not None else ""
        print(f"  {r.id:>6}  {r.verdict:6}  {r.duration_ms / 1000:g}s{extra}")
    print(f"{totals['passed']}/{totals['tests']} passed, "
          f"{totals['duration_ms'] / 1000:g}s simulated")
    if args.compare_original:
        print(f"overhead: {overhead.summary()}")
        if not overhead.outputs_equal:
            test, cycle = overhead.first_divergence
            raise DifferentialFailure(f"instrumented outputs diverge in test {test} "
                                      f"at cycle {cycle}")
        if not overhead.bound_holds:
            raise DifferentialFailure("instrumentation injected more than 3 statements "
                                      "per entered block")
    return EXIT_OK


def cmd_diff(args) -> int:
    old = build_dependency_model(load_project(args.old))
    new = build_dependency_model(load_project(args.new))
    cs = diff(old, new)
    write_json(args.output, cs.to_json())
    if cs.is_empty():
        print("no changes")
    for label, d in (("added", cs.added), ("removed", cs.removed),
                     ("modified", cs.modified)):
        for cat in sorted(d):
            for q in d[cat]:
                print(f"  {label:8} {cat:10} {q}")
    for b in cs.bodies:
        note = " (structural fallback)" if b.structural_fallback else ""
        print(f"  body {b.owner}: {b.status}, changed blocks {b.changed_blocks}{note}")
    return EXIT_OK


def cmd_impact(args) -> int:
    model = build_dependency_model(load_project(args.project))
    changes = ChangeSet.from_json(read_json(args.changes))
    db = TracePointDb.from_json(read_json(args.old_db))
    mods = impact(model, changes, max_depth=args.max_depth)
    mapped = map_to_old_trace_points(mods, changes, db)
    data = mods.to_json()
    data["mapped"] = mapped.to_json()
    write_json(args.output, data)
    print(f"{len(mods.blocks)} modified blocks, {len(mods.variables)} modified variables")
    for b in mods.blocks:
        print(f"  {b}  [{mods.marks['block:' + b].rule}]")
    print(f"old trace points: {mapped.tp_ids}")
    if mapped.untestable:
        print(f"not covered by the old suite: {mapped.untestable}")
    return EXIT_OK


def cmd_prioritize(args) -> int:
    data = read_json(args.mods)
    if "mapped" not in data:
        raise PlcPrioError(f"{args.mods} has no mapped trace points; run 'impact'")
    mapped = MappedModifications.from_json(data["mapped"])
    ModificationSet.from_json(data)          # validates the document
    report = TestReport.from_json(read_json(args.report))
    if report.version_id != mapped.old_version:
        raise VersionMismatch(f"report is for revision {report.version_id}, "
                              f"modifications map onto {mapped.old_version}")
    traces = read_traces(args.traces)
    for t in traces.values():
        if t.version_id != report.version_id:
            raise VersionMismatch(f"trace {t.test_id} is for revision {t.version_id}")
    plan = prioritize(args.strategy, traces, report, mapped.tp_ids)
    write_json(args.output, plan.to_json())
    print(plan.table())
    return EXIT_OK


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plcprio",
                     description="Regression-test prioritization for PLC control code.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-model", help="export the dependency model")
    p.add_argument("project")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_build_model)

    p = sub.add_parser("instrument", help="insert trace points")
    p.add_argument("project")
    p.add_argument("-o", "--output", required=True, help="directory for instrumented sources")
    p.add_argument("--db", required=True, help="trace-point database to write")
    p.set_defaults(func=cmd_instrument)

    p = sub.add_parser("run", help="execute a test suite on an instrumented project")
    p.add_argument("instrumented")
    p.add_argument("--suite", required=True)
    p.add_argument("-o", "--output", required=True, help="test report to write")
    p.add_argument("--traces", help="directory for per-test execution traces")
    p.add_argument("--db", help="trace-point database to check against")
    p.add_argument("--compare-original", metavar="PROJECT",
                   help="also run the original project and compare outputs and cost")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diff", help="compare two project revisions")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("impact", help="propagate changes and map them to old trace points")
    p.add_argument("project", help="new project revision")
    p.add_argument("changes")
    p.add_argument("--old-db", required=True)
    p.add_argument("--max-depth", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_impact)

    p = sub.add_parser("prioritize", help="order tests for the new revision")
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("mods")
    p.add_argument("report")
    p.add_argument("--traces", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_prioritize)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VersionMismatch, ModelProjectMismatch, TraceDbMismatch) as exc:
        print(f"version mismatch: {exc}", file=sys.stderr)
        return EXIT_VERSION
    except (RuntimeFault, SaveWithoutReset) as exc:
        print(f"runtime fault: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except DifferentialFailure as exc:
        print(f"differential check failed: {exc}", file=sys.stderr)
        return EXIT_DIFFERENTIAL
    except PlcPrioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
