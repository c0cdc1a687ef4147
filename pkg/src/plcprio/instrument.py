"""Source-to-source insertion of trace points in front of every basic block."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core.checksum import project_checksum
from .core.model import DependencyModel
from .errors import ModelProjectMismatch, TraceIOError
from .frontend.ast import ProjectAst
from .frontend.project import GLOBALS_FILE, project_from_sources
from .frontend.semantics import Semantics

TRACE_VAR = "tp"
TRACE_TYPE = "__TracePoints"
MARKER_FILE = "instrumented.json"
STATEMENTS_PER_POINT = 3


def trace_code(n: int) -> str:
    # branch-free first-visit guard: SEL keeps the old time once xN is set
    return (f" tp.t{n} := SEL(tp.x{n}, __NOW(), tp.t{n});"
            f" tp.x{n} := TRUE; tp.c{n} := tp.c{n} + 1; ")


def trace_declaration(count: int) -> str:
    fields = "\n".join(f"    x{i} : BOOL; c{i} : DINT; t{i} : TIME;"
                       for i in range(count))
    return (f"\nTYPE {TRACE_TYPE} :\nSTRUCT\n{fields}\nEND_STRUCT\nEND_TYPE\n"
            f"VAR_GLOBAL\n    {TRACE_VAR} : {TRACE_TYPE};\nEND_VAR\n")


@dataclass(frozen=True)
class TracePoint:
    tp: int
    pou: str                 # owning POU, or POU.Action for SFC actions
    block_index: int
    file: str | None
    start: int
    end: int

    @property
    def block(self) -> str:
        return f"{self.pou}.BB{self.block_index}"


@dataclass
class TracePointDb:
    version_id: str
    points: list[TracePoint]

    def __len__(self) -> int:
        return len(self.points)

    def by_block(self) -> dict[str, int]:
        return {p.block: p.tp for p in self.points}

    def of_owner(self, owner: str) -> list[int]:
        return [p.tp for p in self.points if p.pou == owner]

    def to_json(self) -> dict:
        return {"version_id": self.version_id,
                "points": [{"tp": p.tp, "pou": p.pou, "block_index": p.block_index,
                            "file": p.file, "start": p.start, "end": p.end}
                           for p in self.points]}

    @classmethod
    def from_json(cls, data: dict) -> "TracePointDb":
        try:
            points = [TracePoint(p["tp"], p["pou"], p["block_index"], p["file"],
                                 p["start"], p["end"]) for p in data["points"]]
            db = cls(data["version_id"], points)
        except (KeyError, TypeError) as exc:
            raise TraceIOError(f"malformed trace-point database: {exc}") from None
        if [p.tp for p in points] != list(range(len(points))):
            raise TraceIOError("trace-point ids must be dense and ordered")
        return db


@dataclass
class Insertion:
    file: str
    offset: int
    text: str
    order: tuple = ()


@dataclass
class InstrumentedProject:
    sources: dict[str, str]
    original_version: str
    point_count: int
    insertions: list[Insertion] = field(default_factory=list)
    _project: ProjectAst | None = field(default=None, repr=False)

    @property
    def project(self) -> ProjectAst:
        if self._project is None:
            self._project = project_from_sources(self.sources)
        return self._project

    def write(self, out_dir: str | Path):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(self.sources.items()):
            path = out / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, "utf-8")
        marker = {"version_id": self.original_version, "points": self.point_count}
        (out / MARKER_FILE).write_text(json.dumps(marker, sort_keys=True, indent=2) + "\n")


def read_marker(directory: str | Path) -> dict | None:
    path = Path(directory) / MARKER_FILE
    if not path.exists():
        return None
    return json.loads(path.read_text())


def _check_fresh(project: ProjectAst):
    if any(v.name == TRACE_VAR for v in project.globals) or \
            any(t.name == TRACE_TYPE for t in project.types):
        raise ModelProjectMismatch("project already declares the trace structure "
                                   f"{TRACE_VAR!r}; it is instrumented already")
    for p in project.pous:
        if p.var(TRACE_VAR) is not None:
            raise ModelProjectMismatch(f"{p.file}: local {TRACE_VAR!r} would "
                                       "shadow the trace structure")


def plan_points(sem: Semantics) -> list[tuple[int, object, object]]:
    """``(tp, body, block)`` for every block, in instrumentation order."""
    out = []
    n = 0
    for body in sem.bodies:
        for block in sorted(body.cfg.blocks, key=lambda b: (b.site, b.index)):
            out.append((n, body, block))
            n += 1
    return out


def instrument(project: ProjectAst, model: DependencyModel
               ) -> tuple[InstrumentedProject, TracePointDb]:
    version = project_checksum(project.sources)
    if model.version_id != version:
        raise ModelProjectMismatch("dependency model was built from a different "
                                   f"project text ({model.version_id} != {version})")
    _check_fresh(project)
    sem = model.semantics
    if sem is None:
        from .frontend.semantics import analyze
        sem = analyze(project)

    insertions: list[Insertion] = []
    points: list[TracePoint] = []
    for n, body, block in plan_points(sem):
        pou = sem.pou_by_name[body.pou]
        code = trace_code(n)
        if block.implicit_else:
            insertions.append(Insertion(pou.file, block.site, f" ELSE{code}",
                                        (block.site, 0, block.index)))
        else:
            insertions.append(Insertion(pou.file, block.site, code,
                                        (block.site, 0, block.index)))
        if block.back_site is not None:
            insertions.append(Insertion(pou.file, block.back_site, code,
                                        (block.back_site, 1, block.index)))
        if block.stmts:
            start, end = block.stmts[0].span[0], block.stmts[-1].span[1]
        else:
            start = end = block.site
        points.append(TracePoint(n, body.owner, block.index, pou.file, start, end))

    sources = dict(project.sources)
    by_file: dict[str, list[Insertion]] = {}
    for ins in insertions:
        by_file.setdefault(ins.file, []).append(ins)
    for name, items in by_file.items():
        text = sources[name]
        # apply back to front so earlier offsets stay valid
        for ins in sorted(items, key=lambda i: i.order, reverse=True):
            text = text[:ins.offset] + ins.text + text[ins.offset:]
        sources[name] = text
    sources[GLOBALS_FILE] = sources.get(GLOBALS_FILE, "") + trace_declaration(len(points))

    db = TracePointDb(version, points)
    return InstrumentedProject(sources, version, len(points), insertions), db
