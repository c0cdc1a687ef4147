"""Instruction-count overhead of instrumented versus original programs."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend.ast import ProjectAst
from .machine import CompiledProject, CycleMetrics, compile_project

INJECTED_PER_BLOCK = 3


@dataclass
class CycleOverhead:
    original: int            # instructions = statements + block entries
    instrumented: int
    block_entries: int

    @property
    def ratio(self) -> float:
        return (self.instrumented - self.original) / self.original

    @property
    def within_bound(self) -> bool:
        return self.instrumented - self.original <= INJECTED_PER_BLOCK * self.block_entries


@dataclass
class OverheadReport:
    cycles: int
    avg_ratio: float
    max_ratio: float
    avg_original: float
    avg_instrumented: float
    max_original: int
    max_instrumented: int
    outputs_equal: bool
    bound_holds: bool
    first_divergence: tuple[str, int] | None = None
    per_cycle: list[CycleOverhead] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"cycles": self.cycles,
                "avg_ratio": round(self.avg_ratio, 6), "max_ratio": round(self.max_ratio, 6),
                "avg_original": round(self.avg_original, 3),
                "avg_instrumented": round(self.avg_instrumented, 3),
                "max_original": self.max_original, "max_instrumented": self.max_instrumented,
                "outputs_equal": self.outputs_equal, "bound_holds": self.bound_holds,
                "first_divergence": list(self.first_divergence)
                if self.first_divergence else None}

    def summary(self) -> str:
        return (f"cycles={self.cycles} avg overhead={self.avg_ratio:.1%} "
                f"max overhead={self.max_ratio:.1%} "
                f"avg instr/cycle {self.avg_original:.1f} -> {self.avg_instrumented:.1f}, "
                f"max {self.max_original} -> {self.max_instrumented}")


def _compiled(p: ProjectAst | CompiledProject) -> CompiledProject:
    return p if isinstance(p, CompiledProject) else compile_project(p)


def measure_overhead(original: ProjectAst | CompiledProject,
                     instrumented: ProjectAst | CompiledProject,
                     script) -> OverheadReport:
    """Run each test of ``script`` on both programs and compare per cycle.

    ``script`` is a TestCase or a list of them.  Outputs must agree cycle by
    cycle; the trace structure is not part of the outputs.
    """
    from ..runner import TestCase, run_test

    tests = [script] if isinstance(script, TestCase) else list(script)
    orig, instr = _compiled(original), _compiled(instrumented)
    per_cycle: list[CycleOverhead] = []
    equal = True
    divergence = None
    for test in tests:
        a = run_test(orig, test, record=True, save=False)
        b = run_test(instr, test, record=True, save=False)
        if equal and (a.outputs != b.outputs or a.result != b.result):
            equal = False
            cycle = next((i for i, (x, y) in enumerate(zip(a.outputs, b.outputs)) if x != y),
                         min(len(a.outputs), len(b.outputs)))
            divergence = (test.id, cycle)
        for ma, mb in zip(a.metrics, b.metrics):
            per_cycle.append(_cycle(ma, mb))
    if not per_cycle:
        return OverheadReport(0, 0.0, 0.0, 0.0, 0.0, 0, 0, equal, True, divergence)
    ratios = [c.ratio for c in per_cycle]
    n = len(per_cycle)
    return OverheadReport(
        cycles=n,
        avg_ratio=sum(ratios) / n,
        max_ratio=max(ratios),
        avg_original=sum(c.original for c in per_cycle) / n,
        avg_instrumented=sum(c.instrumented for c in per_cycle) / n,
        max_original=max(c.original for c in per_cycle),
        max_instrumented=max(c.instrumented for c in per_cycle),
        outputs_equal=equal,
        bound_holds=all(c.within_bound for c in per_cycle),
        first_divergence=divergence,
        per_cycle=per_cycle)


def _cycle(orig: CycleMetrics, instr: CycleMetrics) -> CycleOverhead:
    return CycleOverhead(orig.instructions, instr.instructions, orig.block_entries)
