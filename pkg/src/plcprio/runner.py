"""Execution of system-test suites against the scan-cycle machine."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import StepError, TraceIOError, VersionMismatch
from .frontend.lexer import parse_time_literal
from .instrument import InstrumentedProject, TracePointDb
from .runtime.machine import (
    CompiledProject, CycleMetrics, ExecutionTrace, Machine, compile_project,
)

STEP_OPS = ("set_input", "wait_cycles", "wait_ms", "expect", "manual")


@dataclass
class TestCase:
    __test__ = False

    id: str
    name: str
    steps: list[dict]


@dataclass
class TestResult:
    __test__ = False

    id: str
    verdict: str                     # passed | failed
    duration_ms: int
    failed_step: int | None = None
    message: str | None = None


@dataclass
class TestReport:
    __test__ = False

    version_id: str | None
    results: list[TestResult]

    @property
    def durations(self) -> dict[str, int]:
        return {r.id: r.duration_ms for r in self.results}

    def totals(self) -> dict:
        passed = sum(r.verdict == "passed" for r in self.results)
        return {"tests": len(self.results), "passed": passed,
                "failed": len(self.results) - passed,
                "duration_ms": sum(r.duration_ms for r in self.results)}

    def to_json(self) -> dict:
        return {"version_id": self.version_id,
                "tests": [{"id": r.id, "verdict": r.verdict,
                           "duration_ms": r.duration_ms, "failed_step": r.failed_step}
                          for r in self.results],
                "totals": self.totals()}

    @classmethod
    def from_json(cls, data: dict) -> "TestReport":
        return cls(data.get("version_id"),
                   [TestResult(str(t["id"]), t["verdict"], int(t["duration_ms"]),
                               t.get("failed_step")) for t in data["tests"]])


@dataclass
class TestRun:
    """Everything observed while running one test."""
    __test__ = False

    result: TestResult
    trace: ExecutionTrace | None
    metrics: list[CycleMetrics] = field(default_factory=list)
    outputs: list[dict] = field(default_factory=list)
    internal_counts: list[int] = field(default_factory=list)
    internal_first: list[int | None] = field(default_factory=list)


def _require(step: dict, *keys: str, where: str):
    for k in keys:
        if k not in step:
            raise StepError(f"{where}: step {step.get('op')!r} needs {k!r}")


def parse_suite(data: dict) -> list[TestCase]:
    if not isinstance(data, dict) or not isinstance(data.get("tests"), list):
        raise StepError("suite must be an object with a 'tests' list")
    tests = []
    seen = set()
    for t in data["tests"]:
        tid = str(t["id"])
        if tid in seen:
            raise StepError(f"duplicate test id {tid!r}")
        seen.add(tid)
        steps = list(t.get("steps", []))
        for i, s in enumerate(steps):
            where = f"test {tid} step {i}"
            op = s.get("op")
            if op not in STEP_OPS:
                raise StepError(f"{where}: unknown op {op!r}")
            if op in ("set_input", "expect"):
                _require(s, "name", "value", where=where)
            elif op == "wait_cycles":
                _require(s, "n", where=where)
            elif op == "wait_ms":
                _require(s, "ms", where=where)
            else:
                _require(s, "effects", where=where)
        tests.append(TestCase(tid, t.get("name", tid), steps))
    return tests


def load_suite(path: str | Path) -> list[TestCase]:
    return parse_suite(json.loads(Path(path).read_text()))


def _check_names(machine: Machine, test: TestCase):
    for i, s in enumerate(test.steps):
        names = []
        if s["op"] == "expect":
            try:
                machine.read(s["name"])
            except StepError as exc:
                raise StepError(f"test {test.id} step {i}: {exc}") from None
        elif s["op"] == "set_input":
            names.append(s["name"])
        elif s["op"] == "manual":
            names += [e["name"] for e in s["effects"]]
        for n in names:
            if n not in machine.inputs:
                raise StepError(f"test {test.id} step {i}: {n!r} is not an input")


def _matches(actual, expected) -> bool:
    if isinstance(actual, float) or isinstance(expected, float):
        return math.isclose(float(actual), float(expected), rel_tol=1e-9, abs_tol=1e-9)
    if isinstance(actual, bool) or isinstance(expected, bool):
        return bool(actual) == bool(expected) and type(expected) in (bool, int)
    return actual == expected


def run_test(compiled: CompiledProject, test: TestCase, version_id: str | None = None,
             record: bool = False, save: bool = True) -> TestRun:
    m = Machine(compiled, version_id=version_id)
    _check_names(m, test)
    metrics: list[CycleMetrics] = []
    outputs: list[dict] = []

    def cycles(n: int):
        for _ in range(n):
            out, met = m.run_cycle()
            if record:
                metrics.append(met)
                outputs.append(out)

    m.reset()
    failed = None
    message = None
    for i, s in enumerate(test.steps):
        op = s["op"]
        if op == "set_input":
            m.set_input(s["name"], s["value"])
        elif op == "wait_cycles":
            cycles(int(s["n"]))
        elif op == "wait_ms":
            cycles(math.ceil(int(s["ms"]) / m.cycle_ms))
        elif op == "manual":
            cycles(math.ceil(int(s.get("ack_delay_ms", 0)) / m.cycle_ms))
            for e in s["effects"]:
                m.set_input(e["name"], e["value"])
        elif op == "expect":
            cycles(1)
            actual = m.read(s["name"])
            expected = s["value"]
            if isinstance(expected, str):
                expected = parse_time_literal(expected)
            if not _matches(actual, expected):
                failed = i
                message = f"{s['name']} = {actual!r}, expected {expected!r}"
                break
    trace = m.save(test.id) if save else None
    result = TestResult(test.id, "failed" if failed is not None else "passed",
                        m.test_clock_ms, failed, message)
    return TestRun(result, trace, metrics, outputs, m.internal_counts(),
                   m.internal_first_visits())


def run_suite(instr: InstrumentedProject, db: TracePointDb | None, suite: list[TestCase],
              record: bool = False) -> tuple[TestReport, list[ExecutionTrace]]:
    """Run every test on a fresh machine; return the report and one trace per test."""
    if db is not None and db.version_id != instr.original_version:
        raise VersionMismatch(f"trace-point db is for version {db.version_id}, "
                              f"instrumented project is {instr.original_version}")
    if db is not None and len(db) != instr.point_count:
        raise VersionMismatch("trace-point db and instrumented project disagree "
                              "on the number of points")
    compiled = compile_project(instr.project)
    runs = [run_test(compiled, t, instr.original_version, record=record) for t in suite]
    report = TestReport(instr.original_version, [r.result for r in runs])
    return report, [r.trace for r in runs]


def write_traces(traces: list[ExecutionTrace], directory: str | Path):
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for t in traces:
            (out / f"{t.test_id}.json").write_text(
                json.dumps(t.to_json(), sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        raise TraceIOError(f"cannot write traces to {out}: {exc}") from None


def read_traces(directory: str | Path) -> dict[str, ExecutionTrace]:
    path = Path(directory)
    if not path.is_dir():
        raise TraceIOError(f"trace directory not found: {path}")
    traces = {}
    for f in sorted(path.glob("*.json")):
        try:
            data = json.loads(f.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise TraceIOError(f"{f}: {exc}") from None
        t = ExecutionTrace.from_json(data)
        traces[t.test_id] = t
    return traces
