"""Independent reference implementations used as test oracles."""

from __future__ import annotations

import itertools

from plcprio.runner import TestReport, TestResult
from plcprio.runtime.machine import ExecutionTrace, PointRecord

POINTS = 8


def synthetic(tests: dict[str, tuple[int, dict[int, tuple[int, int]]]], points=POINTS):
    """``{id: (duration_ms, {tp: (count, first_ms)})}`` to (traces, report)."""
    traces, results = {}, []
    for tid, (duration, visits) in tests.items():
        recs = [PointRecord(tp, tp in visits, visits.get(tp, (0, 0))[0],
                            visits[tp][1] if tp in visits else None)
                for tp in range(points)]
        traces[tid] = ExecutionTrace(tid, duration, "v1", recs)
        results.append(TestResult(tid, "passed", duration))
    return traces, TestReport("v1", results)


def brute_force_mttc(profs) -> tuple | None:
    """Minimum (cover time, length, indices) over every ordered subset of tests."""
    universe = set().union(*(p.covers for p in profs))
    best = None
    for k in range(1, len(profs) + 1):
        for seq in itertools.permutations(profs, k):
            covered: set[int] = set()
            spent = 0
            valid = True
            finish = None
            for pos, p in enumerate(seq):
                new = p.covers - covered
                if not new or covered >= universe:
                    valid = False
                    break
                covered |= new
                if pos < k - 1:
                    spent += p.duration_ms
                else:
                    finish = spent + max(p.first[m] for m in new)
            if not valid or covered != universe:
                continue
            key = (finish, k, tuple(p.index for p in seq))
            if best is None or key < best:
                best = key
    return best
