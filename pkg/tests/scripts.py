"""Random scan-cycle input scripts and lockstep comparison of two machines."""

from __future__ import annotations

import random

from plcprio.runtime.machine import Machine

INT_RANGE = (-50, 300)
REAL_RANGE = (-1e3, 1e3)
TIME_RANGE = (0, 5000)


def random_value(rng: random.Random, typ: str):
    if typ == "BOOL":
        return rng.random() < 0.5
    if typ == "REAL":
        return round(rng.uniform(*REAL_RANGE), 3)
    if typ == "TIME":
        return rng.randint(*TIME_RANGE)
    return rng.randint(*INT_RANGE)


def random_script(rng: random.Random, inputs: dict, max_phases: int = 8,
                  max_cycles: int = 40) -> list[tuple[dict, int]]:
    """Phases of (input changes, cycles to run) over the machine's inputs."""
    names = sorted(n for n in inputs if "." not in n) or sorted(inputs)
    script = []
    for _ in range(rng.randint(1, max_phases)):
        picked = [n for n in names if rng.random() < 0.4]
        script.append(({n: random_value(rng, inputs[n][2]) for n in picked},
                       rng.randint(1, max_cycles)))
    return script


def run_script(machine: Machine, script) -> list[dict]:
    snapshots = []
    for changes, cycles in script:
        for name, value in changes.items():
            machine.set_input(name, value)
        for _ in range(cycles):
            snapshots.append(machine.run_cycle()[0])
    return snapshots


def lockstep(original: Machine, instrumented: Machine, script) -> int | None:
    """First cycle whose outputs differ, or None when every snapshot matches."""
    cycle = 0
    for changes, cycles in script:
        for name, value in changes.items():
            original.set_input(name, value)
            instrumented.set_input(name, value)
        for _ in range(cycles):
            if original.run_cycle()[0] != instrumented.run_cycle()[0]:
                return cycle
            cycle += 1
    return None


def trace_matches_internal_counters(machine: Machine) -> bool:
    """The injected counters agree with the interpreter's own block counters."""
    trace = machine.save("probe")
    counts = machine.internal_counts()
    firsts = machine.internal_first_visits()
    return all(p.count == counts[p.tp] and p.first_visit_ms == firsts[p.tp]
               and p.visited == (counts[p.tp] > 0) for p in trace.points)
