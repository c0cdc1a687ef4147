"""Test prioritization by modification traversal: simple grouping, traversal
intensity, and fastest modification-traversing test combinations (MTTCs)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import TraceDbMismatch, ZeroDuration
from .runner import TestReport
from .runtime.machine import ExecutionTrace

STRATEGIES = ("simple", "intensity", "mttc")
MAX_EXACT_TESTS = 12
MAX_EXACT_MODS = 16
CANDIDATE_LISTING_LIMIT = 6


@dataclass
class PlanEntry:
    id: str
    group: str                               # high | low
    p_it: float | None = None
    mttc_index: int | None = None
    cover_time_ms: int | None = None

    def to_json(self) -> dict:
        d: dict = {"id": self.id, "group": self.group}
        if self.p_it is not None:
            d["p_it"] = self.p_it
        if self.mttc_index is not None:
            d["mttc_index"] = self.mttc_index
            d["cover_time_ms"] = self.cover_time_ms
        return d


@dataclass
class Mttc:
    tests: list[str]
    covered: list[int]
    cover_time_ms: int

    def to_json(self) -> dict:
        return {"tests": self.tests, "covered": self.covered,
                "cover_time_ms": self.cover_time_ms}


@dataclass
class PrioritizedPlan:
    strategy: str
    order: list[PlanEntry]
    mttcs: list[Mttc] = field(default_factory=list)
    candidates: list[Mttc] = field(default_factory=list)   # first MTTC round
    heuristic: bool = False
    version_id: str | None = None
    mod_tps: list[int] = field(default_factory=list)

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.order]

    def to_json(self) -> dict:
        d = {"strategy": self.strategy, "version_id": self.version_id,
             "mod_tps": self.mod_tps, "heuristic": self.heuristic,
             "order": [e.to_json() for e in self.order]}
        if self.strategy == "mttc":
            d["mttcs"] = [m.to_json() for m in self.mttcs]
            d["candidates"] = [m.to_json() for m in self.candidates]
        return d

    def table(self) -> str:
        rows = [("#", "test", "group", "p_it", "mttc", "cover time")]
        for pos, e in enumerate(self.order, 1):
            rows.append((str(pos), e.id, e.group,
                         "" if e.p_it is None else f"{e.p_it:.2f}",
                         "" if e.mttc_index is None else str(e.mttc_index),
                         "" if e.cover_time_ms is None else _fmt_ms(e.cover_time_ms)))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        title = f"strategy: {self.strategy}" + (" (heuristic)" if self.heuristic else "")
        return "\n".join([title] + lines)


def _fmt_ms(ms: int) -> str:
    minutes, rest = divmod(ms, 60_000)
    seconds = rest / 1000
    return f"{minutes}m {seconds:g}s" if minutes else f"{seconds:g}s"


# -- shared input handling ------------------------------------------------------

@dataclass(frozen=True)
class TestProfile:
    """What one test did to the modified trace points."""
    __test__ = False

    id: str
    index: int                               # position in the original suite
    duration_ms: int
    counts: dict[int, int]                   # mod tp -> visits (> 0 only)
    first: dict[int, int]                    # mod tp -> first visit ms

    @property
    def visits(self) -> int:
        return sum(self.counts.values())

    @property
    def covers(self) -> frozenset[int]:
        return frozenset(self.counts)


def _as_dict(traces) -> dict[str, ExecutionTrace]:
    if isinstance(traces, dict):
        return traces
    return {t.test_id: t for t in traces}


def profiles(traces, report: TestReport, mod_tps, point_count: int | None = None
             ) -> list[TestProfile]:
    """One profile per report row, in suite order."""
    traces = _as_dict(traces)
    mods = sorted(set(mod_tps))
    out = []
    sizes = set()
    for index, r in enumerate(report.results):
        t = traces.get(r.id)
        if t is None:
            raise TraceDbMismatch(f"no execution trace for test {r.id!r}")
        if [p.tp for p in t.points] != list(range(len(t.points))):
            raise TraceDbMismatch(f"trace of test {r.id!r} is not dense")
        sizes.add(len(t.points))
        if mods and mods[-1] >= len(t.points) or mods and mods[0] < 0:
            raise TraceDbMismatch(f"modified trace point {mods[-1]} outside the "
                                  f"{len(t.points)} points of test {r.id!r}")
        counts = {m: t.points[m].count for m in mods if t.points[m].count > 0}
        first = {m: t.points[m].first_visit_ms for m in counts}
        out.append(TestProfile(r.id, index, r.duration_ms, counts, first))
    if len(sizes) > 1 or (point_count is not None and sizes and sizes != {point_count}):
        raise TraceDbMismatch(f"traces cover different trace-point ranges: {sorted(sizes)}")
    return out


def _require_durations(profs: list[TestProfile]):
    for p in profs:
        if p.duration_ms <= 0:
            raise ZeroDuration(f"test {p.id!r} has no recorded execution time")


# -- strategy I: grouping --------------------------------------------------------

def prioritize_simple(traces, report: TestReport, mod_tps,
                      point_count: int | None = None) -> PrioritizedPlan:
    profs = profiles(traces, report, mod_tps, point_count)
    high = [PlanEntry(p.id, "high") for p in profs if p.visits > 0]
    low = [PlanEntry(p.id, "low") for p in profs if p.visits == 0]
    return PrioritizedPlan("simple", high + low, version_id=report.version_id,
                           mod_tps=sorted(set(mod_tps)))


# -- strategy II: intensity ------------------------------------------------------

def intensity(p: TestProfile) -> Fraction:
    """Modified-block traversals per second of previous execution time."""
    return Fraction(p.visits) / Fraction(p.duration_ms, 1000)


def prioritize_intensity(traces, report: TestReport, mod_tps,
                         point_count: int | None = None) -> PrioritizedPlan:
    profs = profiles(traces, report, mod_tps, point_count)
    _require_durations(profs)
    scored = [(intensity(p), p) for p in profs]
    high = sorted((x for x in scored if x[0] > 0),
                  key=lambda x: (-x[0], x[1].duration_ms, x[1].index))
    low = [x for x in scored if x[0] == 0]
    order = [PlanEntry(p.id, "high", round(float(v), 4)) for v, p in high]
    order += [PlanEntry(p.id, "low", 0.0) for _, p in low]
    return PrioritizedPlan("intensity", order, version_id=report.version_id,
                           mod_tps=sorted(set(mod_tps)))


# -- strategy III: MTTC ----------------------------------------------------------

def cover_time(seq: list[TestProfile]) -> int:
    """Full durations of all but the last test, plus the time the last test
    needs to reach the latest of the modifications it adds."""
    covered: set[int] = set()
    for p in seq[:-1]:
        covered |= p.covers
    last = seq[-1]
    new = last.covers - covered
    return sum(p.duration_ms for p in seq[:-1]) + max(last.first[m] for m in new)


def enumerate_mttcs(profs: list[TestProfile], universe: frozenset[int] | None = None
                    ) -> list[list[TestProfile]]:
    """Every valid ordered combination: each test adds coverage, and the
    sequence stops exactly when ``universe`` is covered."""
    universe = universe if universe is not None else \
        frozenset().union(*(p.covers for p in profs))
    out: list[list[TestProfile]] = []

    def extend(seq, covered):
        if covered >= universe:
            out.append(list(seq))
            return
        for p in profs:
            if p in seq or not (p.covers - covered):
                continue
            seq.append(p)
            extend(seq, covered | p.covers)
            seq.pop()

    if universe:
        extend([], frozenset())
    return out


def _key(seq: list[TestProfile]) -> tuple:
    return cover_time(seq), len(seq), tuple(p.index for p in seq)


def fastest_mttc(profs: list[TestProfile]) -> list[TestProfile]:
    """Exact minimum of (cover time, length, original indices) over all
    valid combinations, by dynamic programming over covered sets."""
    universe = frozenset().union(*(p.covers for p in profs))
    bits = {m: 1 << i for i, m in enumerate(sorted(universe))}
    masks = [sum(bits[m] for m in p.covers) for p in profs]
    full = (1 << len(bits)) - 1

    def finish_time(p: TestProfile, covered: int) -> int:
        return max(p.first[m] for m in p.covers if not covered & bits[m])

    @lru_cache(maxsize=None)
    def best(covered: int) -> tuple:
        result = None
        for i, p in enumerate(profs):
            if not masks[i] & ~covered:
                continue
            after = covered | masks[i]
            if after == full:
                cand = (finish_time(p, covered), 1, (p.index,))
            else:
                sub = best(after)
                cand = (p.duration_ms + sub[0], 1 + sub[1], (p.index,) + sub[2])
            if result is None or cand < result:
                result = cand
        return result

    by_index = {p.index: p for p in profs}
    return [by_index[i] for i in best(0)[2]]


def greedy_mttc(profs: list[TestProfile]) -> list[TestProfile]:
    """Heuristic: repeatedly add the test with the best new coverage per time."""
    universe = frozenset().union(*(p.covers for p in profs))
    seq: list[TestProfile] = []
    covered: frozenset[int] = frozenset()
    while covered != universe:
        best = None
        for p in profs:
            new = p.covers - covered
            if p in seq or not new:
                continue
            if covered | new == universe:
                cost = max(p.first[m] for m in new)
            else:
                cost = p.duration_ms
            score = (-Fraction(len(new), max(cost, 1)), p.index)
            if best is None or score < best[0]:
                best = (score, p)
        seq.append(best[1])
        covered |= best[1].covers
    return seq


def prioritize_mttc(traces, report: TestReport, mod_tps,
                    point_count: int | None = None) -> PrioritizedPlan:
    profs = profiles(traces, report, mod_tps, point_count)
    _require_durations(profs)
    remaining = [p for p in profs if p.visits > 0]
    plan = PrioritizedPlan("mttc", [], version_id=report.version_id,
                           mod_tps=sorted(set(mod_tps)))
    if 0 < len(remaining) <= CANDIDATE_LISTING_LIMIT:
        plan.candidates = [Mttc([p.id for p in seq], sorted(set().union(*(p.covers for p in seq))),
                                cover_time(seq))
                           for seq in sorted(enumerate_mttcs(remaining), key=_key)]
    n_mods = len(frozenset().union(*(p.covers for p in remaining))) if remaining else 0
    heuristic = len(remaining) > MAX_EXACT_TESTS or n_mods > MAX_EXACT_MODS
    while remaining:
        # each round covers everything the remaining tests can still reach
        seq = greedy_mttc(remaining) if heuristic else fastest_mttc(remaining)
        mttc = Mttc([p.id for p in seq], sorted(set().union(*(p.covers for p in seq))),
                    cover_time(seq))
        plan.mttcs.append(mttc)
        k = len(plan.mttcs) - 1
        for p in seq:
            plan.order.append(PlanEntry(p.id, "high", mttc_index=k,
                                        cover_time_ms=mttc.cover_time_ms))
        chosen = {p.id for p in seq}
        remaining = [p for p in remaining if p.id not in chosen]
    plan.order += [PlanEntry(p.id, "low") for p in profs if p.visits == 0]
    plan.heuristic = heuristic
    return plan


def prioritize(strategy: str, traces, report: TestReport, mod_tps,
               point_count: int | None = None) -> PrioritizedPlan:
    fn = {"simple": prioritize_simple, "intensity": prioritize_intensity,
          "mttc": prioritize_mttc}.get(strategy)
    if fn is None:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    return fn(traces, report, mod_tps, point_count)
