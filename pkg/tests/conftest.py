from __future__ import annotations

import functools
from pathlib import Path

import pytest

from plcprio.core.builder import build_dependency_model
from plcprio.frontend.project import load_project, project_from_sources, read_sources
from plcprio.instrument import instrument
from plcprio.runner import load_suite, run_suite
from plcprio.runtime.machine import compile_project

FIXTURES = Path(__file__).parent / "fixtures"
PROJECTS = FIXTURES / "projects"
DEPAL_SUITE = FIXTURES / "depal_suite.json"

# fixture programs used for randomized differential runs
RANDOM_FIXTURES = ("depal_v1", "traffic_sfc", "mixer", "conveyor", "minimal", "fanout_v1")

TASKS = "task Cyclic program P cycle_ms 10\n"


def project_of(**files: str):
    """Project from inline sources; ``tasks.cfg`` defaults to one task for P."""
    sources = {name.replace("__", "."): text for name, text in files.items()}
    sources.setdefault("tasks.cfg", TASKS)
    return project_from_sources(sources)


def program(body: str, decls: str = "") -> str:
    return f"PROGRAM P\n{decls}\n{body}\nEND_PROGRAM\n"


@functools.lru_cache(maxsize=None)
def fixture_sources(name: str) -> dict[str, str]:
    return read_sources(PROJECTS / name)


@functools.lru_cache(maxsize=None)
def fixture_project(name: str):
    return load_project(PROJECTS / name)


@functools.lru_cache(maxsize=None)
def fixture_pipeline(name: str):
    """(project, model, instrumented, db, compiled original, compiled instrumented)."""
    project = fixture_project(name)
    model = build_dependency_model(project)
    instr, db = instrument(project, model)
    return (project, model, instr, db, compile_project(project),
            compile_project(instr.project))


@functools.lru_cache(maxsize=None)
def depal_results():
    """Report and traces of the 14-test depalletizer suite on revision 1."""
    _, _, instr, db, _, _ = fixture_pipeline("depal_v1")
    suite = load_suite(DEPAL_SUITE)
    report, traces = run_suite(instr, db, suite)
    return suite, report, {t.test_id: t for t in traces}


@pytest.fixture
def depal():
    return depal_results()
