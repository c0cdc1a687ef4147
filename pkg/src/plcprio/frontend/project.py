"""Loading a project directory: POU files, ``globals.st`` and ``tasks.cfg``."""

from __future__ import annotations

from pathlib import Path

from ..errors import MissingTasksConfig, StSyntaxError, UnknownType
from .ast import ELEMENTARY_TYPES, GlobalsAst, ProjectAst, TaskDecl
from .parser import parse_globals, parse_st

GLOBALS_FILE = "globals.st"
TASKS_FILE = "tasks.cfg"
BUILTIN_FBS = ("TON",)


def parse_tasks(text: str, file: str = TASKS_FILE) -> list[TaskDecl]:
    tasks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        if (len(words) != 6 or words[0] != "task" or words[2] != "program"
                or words[4] != "cycle_ms"):
            raise StSyntaxError("expected 'task <name> program <qname> "
                                "cycle_ms <int>'", file, lineno, 1)
        try:
            cycle = int(words[5])
        except ValueError:
            raise StSyntaxError(f"bad cycle time {words[5]!r}", file, lineno, 1) from None
        if cycle <= 0:
            raise StSyntaxError("cycle time must be positive", file, lineno, 1)
        tasks.append(TaskDecl(words[1], words[3], cycle))
    return tasks


def read_sources(root: str | Path) -> dict[str, str]:
    """All project files under ``root`` keyed by relative posix path."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"project directory not found: {root}")
    sources = {}
    for path in sorted(root.rglob("*")):
        if path.is_file() and (path.suffix == ".st" or path.name == TASKS_FILE):
            sources[path.relative_to(root).as_posix()] = path.read_text("utf-8")
    return sources


def project_from_sources(sources: dict[str, str], root: str | None = None) -> ProjectAst:
    if TASKS_FILE not in sources:
        raise MissingTasksConfig(f"{root or 'project'}: no {TASKS_FILE}")
    globals_ast = GlobalsAst([], [])
    pous = []
    for name in sorted(sources):
        if name == TASKS_FILE:
            continue
        if name == GLOBALS_FILE:
            globals_ast = parse_globals(sources[name], name)
        else:
            pous.append(parse_st(sources[name], name))
    tasks = parse_tasks(sources[TASKS_FILE])
    project = ProjectAst(pous, globals_ast.vars, globals_ast.types, tasks,
                         dict(sources), root)
    check_types(project)
    return project


def load_project(root: str | Path) -> ProjectAst:
    return project_from_sources(read_sources(root), str(root))


def check_types(project: ProjectAst):
    known = set(ELEMENTARY_TYPES) | set(BUILTIN_FBS)
    known |= {t.name for t in project.types}
    known |= {p.name for p in project.pous if p.kind == "FunctionBlock"}

    def check(type_name: str, where: str):
        if type_name not in known:
            raise UnknownType(f"{where}: unknown type {type_name!r}")

    for t in project.types:
        for f in t.fields:
            check(f.type, f"type {t.name}.{f.name}")
    for v in project.globals:
        check(v.type, f"global {v.name}")
    for p in project.pous:
        if p.return_type is not None and p.return_type not in ELEMENTARY_TYPES:
            raise UnknownType(f"{p.file}: function {p.name} must return an "
                              f"elementary type, not {p.return_type!r}")
        for v in p.vars:
            check(v.type, f"{p.file}: {p.name}.{v.name}")
