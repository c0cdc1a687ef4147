"""Deterministic scan-cycle machine with simulated time."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import RuntimeFault, SaveWithoutReset, StepError, TraceIOError
from ..frontend.ast import ProjectAst
from ..frontend.lexer import parse_time_literal
from ..frontend.semantics import Semantics, analyze
from .codegen import generate

DEFAULT_LOOP_CAP = 10_000


@dataclass(frozen=True)
class CycleMetrics:
    statements: int
    expressions: int
    block_entries: int

    @property
    def instructions(self) -> int:
        return self.statements + self.block_entries


@dataclass(frozen=True)
class PointRecord:
    tp: int
    visited: bool
    count: int
    first_visit_ms: int | None


@dataclass
class ExecutionTrace:
    test_id: str
    duration_ms: int
    version_id: str | None
    points: list[PointRecord]

    def to_json(self) -> dict:
        return {"test_id": self.test_id, "duration_ms": self.duration_ms,
                "version_id": self.version_id,
                "points": [{"tp": p.tp, "visited": p.visited, "count": p.count,
                            "first_visit_ms": p.first_visit_ms} for p in self.points]}

    @classmethod
    def from_json(cls, data: dict) -> "ExecutionTrace":
        try:
            points = [PointRecord(p["tp"], bool(p["visited"]), int(p["count"]),
                                  p["first_visit_ms"]) for p in data["points"]]
            return cls(str(data["test_id"]), int(data["duration_ms"]),
                       data.get("version_id"), points)
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceIOError(f"malformed trace: {exc}") from None


# -- runtime helpers injected into the generated module -----------------------

def _i16(v):
    return ((int(v) + 0x8000) & 0xFFFF) - 0x8000


def _i32(v):
    return ((int(v) + 0x80000000) & 0xFFFFFFFF) - 0x80000000


def _idiv(a, b):
    if b == 0:
        raise RuntimeFault("integer division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _fdiv(a, b):
    if b == 0:
        raise RuntimeFault("division by zero")
    return a / b


def _mod(a, b):
    if b == 0:
        raise RuntimeFault("MOD by zero")
    return a - _idiv(a, b) * b


def _round(x):
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def _helpers() -> dict:
    ns = {
        "_i16": _i16, "_i32": _i32, "_idiv": _idiv, "_fdiv": _fdiv, "_mod": _mod,
        "_abs": abs, "_min": min, "_max": max,
        "_limit": lambda mn, v, mx: min(max(v, mn), mx),
        "_sel": lambda g, a, b: b if g else a,
        "_trunc": lambda x: _i32(math.trunc(x)),
        "RuntimeFault": RuntimeFault,
        "_new_TON": lambda: {"IN": False, "PT": 0, "Q": False, "ET": 0,
                             "_start": 0, "_prev": False},
    }
    to_int = {"INT": _i16, "DINT": _i32, "TIME": int}
    for src in ("BOOL", "INT", "DINT", "REAL", "TIME"):
        for dst in ("BOOL", "INT", "DINT", "REAL", "TIME"):
            if src == dst:
                continue
            if dst == "BOOL":
                fn = (lambda x: x != 0)
            elif dst == "REAL":
                fn = float
            elif src == "REAL":
                fn = (lambda x, w=to_int[dst]: w(_round(x)))
            else:
                fn = (lambda x, w=to_int[dst]: w(int(x)))
            ns[f"_conv_{src}_{dst}"] = fn
    return ns


def _coerce(type_name: str, value, name: str):
    if type_name == "BOOL":
        if isinstance(value, bool):
            return value
        if value in (0, 1):
            return bool(value)
    elif type_name in ("INT", "DINT"):
        if isinstance(value, int) and not isinstance(value, bool):
            wrapped = _i16(value) if type_name == "INT" else _i32(value)
            if wrapped == value:
                return value
    elif type_name == "REAL":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif type_name == "TIME":
        if isinstance(value, str):
            try:
                return parse_time_literal(value)
            except (ValueError, IndexError):
                pass
        elif isinstance(value, int) and not isinstance(value, bool):
            return value
    raise StepError(f"value {value!r} does not fit {name} : {type_name}")


@dataclass
class CompiledProject:
    project: ProjectAst
    sem: Semantics
    source: str
    code: object
    block_count: int


def compile_project(project: ProjectAst, sem: Semantics | None = None) -> CompiledProject:
    sem = sem or analyze(project)
    source, count = generate(sem)
    return CompiledProject(project, sem, source, compile(source, "<plc>", "exec"), count)


class Machine:
    """One power-on instance of a project."""

    def __init__(self, project: ProjectAst | CompiledProject,
                 version_id: str | None = None, loop_cap: int = DEFAULT_LOOP_CAP):
        compiled = project if isinstance(project, CompiledProject) \
            else compile_project(project)
        self.project = compiled.project
        self.sem = compiled.sem
        self.version_id = version_id
        self.source, self.block_count = compiled.source, compiled.block_count
        self.ns = _helpers()
        self.ns["LOOP_CAP"] = loop_cap
        exec(compiled.code, self.ns)
        self.tasks = list(self.project.tasks)
        self.cycle_ms = self.tasks[0].cycle_ms
        self.clock_ms = 0            # since power-on
        self.cycles = 0
        self._setup_state()
        self._index_io()
        self.held: dict[tuple[str, str], object] = {}
        self.was_reset = False

    # -- state -----------------------------------------------------------------

    def _setup_state(self):
        ns = self.ns
        G = {}
        for v in self.project.globals:
            G[v.name] = self._initial(v)
        P = {p.name: ns[f"_new_{p.name}"]() for p in self.project.pous
             if p.kind == "Program"}
        BC = [0] * self.block_count
        BT = [-1] * self.block_count
        CLK = [0]
        NOWP = [0]
        M = [0, 0, 0]

        def _blk(k, stmts, exprs):
            BC[k] += 1
            if BT[k] < 0:
                BT[k] = CLK[0]
            M[0] += stmts
            M[1] += exprs
            M[2] += 1

        def _ton(inst):
            now = NOWP[0]
            if inst["IN"] and not inst["_prev"]:
                inst["_start"] = now
            inst["_prev"] = inst["IN"]
            if inst["IN"]:
                elapsed = now - inst["_start"]
                inst["Q"] = elapsed >= inst["PT"]
                inst["ET"] = min(elapsed, inst["PT"])
            else:
                inst["Q"] = False
                inst["ET"] = 0

        ns.update(G=G, P=P, BC=BC, BT=BT, CLK=CLK, NOWP=NOWP, M=M,
                  _blk=_blk, _ton=_ton)
        self.G, self.P, self.BC, self.BT = G, P, BC, BT
        self.CLK, self.NOWP, self.M = CLK, NOWP, M

    def _initial(self, v):
        if v.type in ("BOOL", "INT", "DINT", "REAL", "TIME"):
            if v.init is None:
                return {"BOOL": False, "REAL": 0.0}.get(v.type, 0)
            return _coerce(v.type, v.init.value if v.type != "REAL"
                           else float(v.init.value), v.name)
        return self.ns[f"_new_{v.type}"]()

    def _index_io(self):
        roots = []
        for t in self.tasks:
            if t.program not in roots:
                roots.append(t.program)
        self.roots = roots
        self.inputs: dict[str, tuple[str, str, str]] = {}
        self.outputs_decl: list[tuple[str, str, str]] = []
        bare: dict[str, list] = {}
        for prog in roots:
            pou = self.sem.pou_by_name[prog]
            for v in pou.vars:
                if v.section == "input":
                    self.inputs[f"{prog}.{v.name}"] = (prog, v.name, v.type)
                    bare.setdefault(v.name, []).append((prog, v.name, v.type))
                elif v.section == "output":
                    self.outputs_decl.append((prog, v.name, v.type))
        for name, hits in bare.items():
            if len(hits) == 1 and name not in self.inputs:
                self.inputs[name] = hits[0]
        counts: dict[str, int] = {}
        for _, name, _ in self.outputs_decl:
            counts[name] = counts.get(name, 0) + 1
        self.output_names = [name if counts[name] == 1 else f"{prog}.{name}"
                             for prog, name, _ in self.outputs_decl]

    # -- I/O -------------------------------------------------------------------

    def set_input(self, name: str, value):
        if name not in self.inputs:
            raise StepError(f"{name!r} is not an input of a task root program")
        prog, var, typ = self.inputs[name]
        self.held[(prog, var)] = _coerce(typ, value, name)

    def outputs(self) -> dict:
        return {label: self.P[prog][name]
                for label, (prog, name, _) in zip(self.output_names, self.outputs_decl)}

    def read(self, name: str):
        """Current value of an input, output, global or dotted instance path."""
        if name in self.inputs:
            prog, var, _ = self.inputs[name]
            return self.P[prog][var]
        for label, (prog, var, _) in zip(self.output_names, self.outputs_decl):
            if label == name:
                return self.P[prog][var]
        parts = name.split(".")
        if parts[0] in self.G:
            cur, rest = self.G[parts[0]], parts[1:]
        elif parts[0] in self.P and len(parts) > 1:
            cur, rest = self.P[parts[0]], parts[1:]
        else:
            raise StepError(f"unknown variable {name!r}")
        for p in rest:
            if not isinstance(cur, dict) or p not in cur or p.startswith("_"):
                raise StepError(f"unknown variable {name!r}")
            cur = cur[p]
        if isinstance(cur, dict):
            raise StepError(f"{name!r} is not an elementary variable")
        return cur

    def var_type(self, name: str) -> str | None:
        if name in self.inputs:
            return self.inputs[name][2]
        return None

    # -- execution -------------------------------------------------------------

    def run_cycle(self, inputs: dict | None = None) -> tuple[dict, CycleMetrics]:
        for name, value in (inputs or {}).items():
            self.set_input(name, value)
        for (prog, var), value in self.held.items():
            self.P[prog][var] = value
        M = self.M
        M[0] = M[1] = M[2] = 0
        ns = self.ns
        try:
            for t in self.tasks:
                ns[f"_pou_{t.program}"](self.P[t.program])
        except RecursionError:
            raise RuntimeFault("call nesting too deep") from None
        out = self.outputs()
        metrics = CycleMetrics(M[0], M[1], M[2])
        self.clock_ms += self.cycle_ms
        self.NOWP[0] = self.clock_ms
        self.CLK[0] += self.cycle_ms
        self.cycles += 1
        return out, metrics

    # -- trace builtins --------------------------------------------------------

    @property
    def test_clock_ms(self) -> int:
        return self.CLK[0]

    def has_trace_structure(self) -> bool:
        return isinstance(self.G.get("tp"), dict)

    def reset(self):
        if self.has_trace_structure():
            tp = self.G["tp"]
            for k in tp:
                tp[k] = False if k[0] == "x" else 0
        self.CLK[0] = 0
        for i in range(self.block_count):
            self.BC[i] = 0
            self.BT[i] = -1
        self.was_reset = True

    def save(self, test_id: str) -> ExecutionTrace:
        if not self.was_reset:
            raise SaveWithoutReset("save called before any reset")
        if not self.has_trace_structure():
            raise TraceIOError("project is not instrumented: no trace structure")
        tp = self.G["tp"]
        n = sum(1 for k in tp if k[0] == "x")
        points = [PointRecord(i, bool(tp[f"x{i}"]), int(tp[f"c{i}"]),
                              int(tp[f"t{i}"]) if tp[f"x{i}"] else None)
                  for i in range(n)]
        return ExecutionTrace(str(test_id), self.CLK[0], self.version_id, points)

    def internal_counts(self) -> list[int]:
        return list(self.BC)

    def internal_first_visits(self) -> list[int | None]:
        return [t if t >= 0 else None for t in self.BT]


def run_cycle(machine: Machine, inputs: dict | None = None):
    """Functional-style wrapper: ``(machine, outputs, metrics)``."""
    out, metrics = machine.run_cycle(inputs)
    return machine, out, metrics
