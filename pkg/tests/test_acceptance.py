"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line.  Run ``pytest tests/test_acceptance.py -s``
to see them inline, or ``python tests/test_acceptance.py`` for the summary only.
"""

from __future__ import annotations

import random
import sys
import time
from pathlib import Path

from plcprio.changes.diff import diff
from plcprio.changes.impact import impact
from plcprio.changes.mapping import map_to_old_trace_points
from plcprio.core.builder import build_dependency_model
from plcprio.frontend.project import project_from_sources
from plcprio.prioritize import cover_time, fastest_mttc, prioritize, profiles
from plcprio.runner import run_test
from plcprio.runtime.machine import Machine
from plcprio.runtime.overhead import measure_overhead

sys.path.insert(0, str(Path(__file__).parent))

from conftest import RANDOM_FIXTURES, depal_results, fixture_pipeline, fixture_sources  # noqa: E402
from oracles import brute_force_mttc, synthetic  # noqa: E402
from scripts import lockstep, random_script, trace_matches_internal_counters  # noqa: E402

GRIPPER_BLOCKS = ["FB_Gripper.BB1", "FB_Gripper.BB7", "FB_Gripper.BB8", "FB_Gripper.BB9"]
TRAY_TESTS = ["11", "12", "13"]


def verdict(number: int, title: str, ok: bool, detail: str):
    print(f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {title}: {detail}")
    assert ok, detail


def _gripper_change():
    _, old, _, db, _, _ = fixture_pipeline("depal_v1")
    _, new, _, _, _, _ = fixture_pipeline("depal_v2")
    cs = diff(old, new)
    mods = impact(new, cs)
    return mods, map_to_old_trace_points(mods, cs, db), db


def _mod_tps() -> list[int]:
    return _gripper_change()[1].tp_ids


def test_criterion_01_intensity_reproduction():
    _, report, traces = depal_results()
    start = time.perf_counter()
    plan = prioritize("intensity", traces, report, _mod_tps())
    elapsed = time.perf_counter() - start
    scores = {e.id: e.p_it for e in plan.order}
    expected = {"11": 0.25, "12": 0.28, "13": 0.65}
    visits = {p.id: p.visits for p in profiles(traces, report, _mod_tps())}
    ok = (all(abs(scores[t] - v) <= 0.005 for t, v in expected.items())
          and plan.ids[:3] == ["13", "12", "11"]
          and len(plan.ids[3:]) == 11
          and [visits[t] for t in TRAY_TESTS] == [10, 26, 384]
          and [report.durations[t] for t in TRAY_TESTS] == [40_000, 93_000, 587_000]
          and elapsed < 1.0)
    verdict(1, "intensity", ok,
            f"p_it 11={scores['11']} 12={scores['12']} 13={scores['13']}, "
            f"order {plan.ids[:3]} + {len(plan.ids) - 3}, {elapsed * 1000:.1f} ms")


def test_criterion_02_mttc_reproduction():
    _, report, traces = depal_results()
    start = time.perf_counter()
    plan = prioritize("mttc", traces, report, _mod_tps())
    elapsed = time.perf_counter() - start
    times = {tuple(c.tests): c.cover_time_ms for c in plan.candidates}
    ok = (times.get(("11", "12")) == 65_000
          and times.get(("11", "13")) == 64_000
          and times.get(("12",)) == 52_000
          and times.get(("13", "11"), 0) > 600_000
          and times.get(("13", "12"), 0) > 600_000
          and plan.mttcs[0].tests == ["12"]
          and elapsed < 1.0)
    verdict(2, "MTTC", ok,
            f"candidates {sorted(times.items(), key=lambda kv: kv[1])}, "
            f"first {plan.mttcs[0].tests}, {elapsed * 1000:.1f} ms")


def test_criterion_03_impact_golden():
    mods, mapped, db = _gripper_change()
    expected = sorted(p.tp for p in db.points if p.block in GRIPPER_BLOCKS)
    ok = mods.blocks == GRIPPER_BLOCKS and mapped.tp_ids == expected and len(expected) == 4
    verdict(3, "impact golden", ok, f"blocks {mods.blocks} -> tps {mapped.tp_ids}")


def test_criterion_04_simple_grouping():
    _, report, traces = depal_results()
    plan = prioritize("simple", traces, report, _mod_tps())
    high = {e.id for e in plan.order if e.group == "high"}
    low = {e.id for e in plan.order if e.group == "low"}
    ok = high == set(TRAY_TESTS) and low == {str(i) for i in range(1, 11)} | {"14"}
    verdict(4, "simple grouping", ok, f"high {sorted(high, key=int)}, {len(low)} low")


def test_criterion_05_semantics_preservation():
    rng = random.Random(20241015)
    machines = {name: fixture_pipeline(name)[4:] for name in RANDOM_FIXTURES}
    start = time.perf_counter()
    scripts = cycles = 0
    failures = []
    for k in range(1000):
        name = RANDOM_FIXTURES[k % len(RANDOM_FIXTURES)]
        original, instrumented = (Machine(c) for c in machines[name])
        script = random_script(rng, original.inputs)
        instrumented.reset()
        bad = lockstep(original, instrumented, script)
        if bad is not None:
            failures.append((name, k, bad))
        scripts += 1
        cycles += sum(n for _, n in script)
    elapsed = time.perf_counter() - start
    ok = not failures and scripts >= 1000 and len(RANDOM_FIXTURES) >= 5 and elapsed < 60
    verdict(5, "semantics preservation", ok,
            f"{scripts} scripts, {cycles} cycles, {len(RANDOM_FIXTURES)} programs, "
            f"{len(failures)} divergences, {elapsed:.1f} s")


def test_criterion_06_trace_soundness():
    suite, _, _ = depal_results()
    _, model, _, _, _, compiled = fixture_pipeline("depal_v1")
    runs = mismatches = 0
    for test in suite:
        run = run_test(compiled, test, model.version_id)
        runs += 1
        if [p.count for p in run.trace.points] != run.internal_counts or \
                [p.first_visit_ms for p in run.trace.points] != run.internal_first:
            mismatches += 1
    rng = random.Random(6)
    for name in RANDOM_FIXTURES:
        for _ in range(50):
            m = Machine(fixture_pipeline(name)[5])
            m.reset()
            for changes, n in random_script(rng, m.inputs):
                for var, value in changes.items():
                    m.set_input(var, value)
                for _ in range(n):
                    m.run_cycle()
            runs += 1
            mismatches += not trace_matches_internal_counters(m)
    verdict(6, "trace soundness", mismatches == 0,
            f"{runs} runs, {mismatches} counter mismatches")


def test_criterion_07_mttc_oracle():
    rng = random.Random(7)
    start = time.perf_counter()
    checked = mismatches = 0
    while checked < 200:
        n_mods = rng.randint(1, 5)
        tests = {}
        for i in range(rng.randint(1, 6)):
            duration = rng.randint(1, 600) * 10
            visits = {m: (rng.randint(1, 40), rng.randrange(0, duration, 10))
                      for m in range(n_mods) if rng.random() < 0.5}
            tests[f"t{i}"] = (duration, visits or {rng.randrange(n_mods): (1, 0)})
        traces, report = synthetic(tests)
        profs = profiles(traces, report, range(n_mods))
        chosen = fastest_mttc(profs)
        plan = prioritize("mttc", traces, report, list(range(n_mods)))
        best = brute_force_mttc(profs)
        checked += 1
        if cover_time(chosen) != best[0] or plan.mttcs[0].cover_time_ms != best[0]:
            mismatches += 1
    elapsed = time.perf_counter() - start
    verdict(7, "MTTC oracle", mismatches == 0 and elapsed < 30,
            f"{checked} instances, {mismatches} mismatches, {elapsed:.2f} s")


def _gripper_variant(old: str, new: str):
    sources = dict(fixture_sources("depal_v1"))
    assert old in sources["fb_gripper.st"]
    sources["fb_gripper.st"] = sources["fb_gripper.st"].replace(old, new, 1)
    _, before, _, _, _, _ = fixture_pipeline("depal_v1")
    after = build_dependency_model(project_from_sources(sources))
    return diff(before, after).body("FB_Gripper"), after


def test_criterion_08_diff_fallback():
    inserted, model = _gripper_variant(
        "CASE iState OF", "IF xStart AND _SnsUp THEN\n    xDone := FALSE;\nEND_IF;\nCASE iState OF")
    blocks = len(model.blocks_of("FB_Gripper"))
    fallback_ok = inserted.structural_fallback and \
        sorted(inserted.changed_blocks) == list(range(blocks))
    edited, _ = _gripper_variant("iState := 1;", "iState := 3;")
    literal_ok = not edited.structural_fallback and len(edited.changed_blocks) == 1
    verdict(8, "diff fallback", fallback_ok and literal_ok,
            f"new IF: fallback={inserted.structural_fallback}, "
            f"{len(inserted.changed_blocks)}/{blocks} blocks; "
            f"literal edit: blocks {edited.changed_blocks}")


def test_criterion_09_overhead_reporting():
    suite, _, _ = depal_results()
    project, _, instr, _, _, _ = fixture_pipeline("depal_v1")
    rep = measure_overhead(project, instr.project, [t for t in suite if t.id in TRAY_TESTS])
    data = rep.to_json()
    ok = rep.bound_holds and rep.outputs_equal and \
        {"avg_ratio", "max_ratio"} <= set(data) and rep.cycles > 0
    verdict(9, "overhead reporting", ok,
            rep.summary())


def test_criterion_10_no_change_identity():
    suite, report, traces = depal_results()
    _, model, _, db, _, _ = fixture_pipeline("depal_v1")
    cs = diff(model, model)
    mapped = map_to_old_trace_points(impact(model, cs), cs, db)
    original = [t.id for t in suite]
    orders = {s: prioritize(s, traces, report, mapped.tp_ids).ids
              for s in ("simple", "intensity", "mttc")}
    ok = cs.is_empty() and mapped.tp_ids == [] and \
        all(o == original for o in orders.values())
    verdict(10, "no-change identity", ok,
            f"{len(mapped.tp_ids)} mapped points, orders unchanged: "
            f"{[s for s, o in orders.items() if o == original]}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
