"""Worklist propagation of changes to every basic block they may influence.

Marked items are namespaced strings: ``stmt:<sid>``, ``block:<qname>``,
``var:<key>`` and ``inst:<key>``.  Each item is marked once and remembers the
rule and the item that caused it, so every item has a provenance chain ending
at a direct change.
"""

from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field

from ..core.model import DependencyModel
from ..errors import VersionMismatch
from ..frontend.semantics import Semantics, StmtInfo
from .diff import ChangeSet

log = logging.getLogger(__name__)

RULES = ("direct", "assignment", "call", "decision", "depth_limit")


@dataclass(frozen=True)
class Mark:
    rule: str
    via: str | None
    depth: int


@dataclass
class ModificationSet:
    version_id: str                 # new revision
    old_version: str
    marks: dict[str, Mark] = field(default_factory=dict)
    removed_blocks: list[str] = field(default_factory=list)   # old-revision qnames
    added_blocks: list[str] = field(default_factory=list)     # no old counterpart
    depth_limited: bool = False

    def _items(self, prefix: str) -> list[str]:
        n = len(prefix)
        return sorted(k[n:] for k in self.marks if k.startswith(prefix))

    @property
    def blocks(self) -> list[str]:
        return self._items("block:")

    @property
    def variables(self) -> list[str]:
        return self._items("var:")

    @property
    def instances(self) -> list[str]:
        return self._items("inst:")

    @property
    def statements(self) -> list[str]:
        return self._items("stmt:")

    def chain(self, item: str) -> list[tuple[str, str]]:
        """``[(item, rule), ...]`` from ``item`` back to its direct change."""
        out = []
        cur: str | None = item
        while cur is not None:
            m = self.marks[cur]
            out.append((cur, m.rule))
            cur = m.via
        return out

    def to_json(self) -> dict:
        return {"version_id": self.version_id, "old_version": self.old_version,
                "modified_basic_blocks": self.blocks,
                "modified_variables": self.variables,
                "modified_pou_instances": self.instances,
                "modified_statements": self.statements,
                "removed_blocks": self.removed_blocks,
                "added_blocks": self.added_blocks,
                "depth_limited": self.depth_limited,
                "provenance": {k: {"rule": m.rule, "via": m.via, "depth": m.depth}
                               for k, m in sorted(self.marks.items())}}

    @classmethod
    def from_json(cls, d: dict) -> "ModificationSet":
        marks = {k: Mark(v["rule"], v["via"], v["depth"])
                 for k, v in d["provenance"].items()}
        return cls(d["version_id"], d["old_version"], marks,
                   list(d["removed_blocks"]), list(d["added_blocks"]),
                   bool(d["depth_limited"]))


def _related(a: str, b: str) -> bool:
    """Keys overlap when equal or when one is a member path of the other."""
    return a == b or a.startswith(b + ".") or b.startswith(a + ".")


class _Propagator:
    def __init__(self, sem: Semantics, max_depth: int | None, rng: random.Random | None):
        self.sem = sem
        self.max_depth = max_depth
        self.rng = rng
        self.marks: dict[str, Mark] = {}
        self.queue: deque[str] = deque()
        self.depth_limited = False
        self.stmts = {s.sid: s for s in sem.stmts}
        self.readers: dict[str, list[StmtInfo]] = {}
        self.reader_roots: dict[str, list[str]] = {}
        for s in sem.stmts:
            for k in s.reads:
                self.readers.setdefault(k, []).append(s)
        for k in self.readers:
            self.reader_roots.setdefault(k.split(".")[0], []).append(k)
        self.output_calls: dict[str, list[tuple[StmtInfo, object]]] = {}
        for s in sem.stmts:
            for c in s.calls:
                key = c.instance or c.callee
                if c.outputs:
                    self.output_calls.setdefault(key, []).append((s, c))
        self.bodies = {b.owner: b for b in sem.bodies}

    # -- marking ----------------------------------------------------------------

    def mark(self, item: str, rule: str, via: str | None):
        if item in self.marks:
            return
        depth = 0 if via is None else self.marks[via].depth + 1
        if item.startswith("stmt:") and self.max_depth is not None \
                and depth > self.max_depth:
            s = self.stmts[item[5:]]
            log.warning("impact depth limit %d reached at %s; marking all blocks "
                        "of %s", self.max_depth, s.sid, s.pou)
            self.depth_limited = True
            for body in self.sem.bodies_of(s.pou):
                for b in body.cfg.blocks:
                    q = f"block:{body.block_qname(b.index)}"
                    if q not in self.marks:
                        self.marks[q] = Mark("depth_limit", via, depth)
            return
        self.marks[item] = Mark(rule, via, depth)
        self.queue.append(item)

    def mark_block(self, qname: str, rule: str, via: str | None):
        self.mark(f"block:{qname}", rule, via)

    # -- rules ------------------------------------------------------------------

    def run(self):
        while self.queue:
            if self.rng is not None:
                i = self.rng.randrange(len(self.queue))
                self.queue.rotate(-i)
            item = self.queue.popleft()
            kind, _, name = item.partition(":")
            if kind == "stmt":
                self.statement(item, self.stmts[name])
            elif kind == "var":
                self.variable(item, name)
            elif kind == "inst":
                self.instance(item, name)

    def statement(self, item: str, s: StmtInfo):
        rule = self.marks[item].rule
        if s.block is not None:
            self.mark_block(s.block, rule, item)
        # (a) assignment: every written variable is modified
        for w in sorted(s.writes):
            self.mark(f"var:{w}", "assignment", item)
        # (c) decision: predecessor and all successor blocks
        if s.kind == "decision":
            owner, _, idx = s.block.rpartition(".BB")
            body = self.bodies[owner]
            for succ in body.cfg.successors(int(idx)):
                self.mark_block(body.block_qname(succ), "decision", item)
        elif s.kind == "transition":
            self.transition(item, s)
        # (b) call: a directly changed call passes changed values everywhere
        if rule == "direct":
            for c in s.calls:
                for formal, _ in c.params:
                    self.mark(f"var:{formal}", "call", item)
                self.mark(f"inst:{c.instance or c.callee}", "call", item)

    def transition(self, item: str, s: StmtInfo):
        pou = self.sem.pou_by_name[s.pou]
        t = s.node
        steps = {st.name: st for st in pou.body.steps}
        actions: set[str] = set()
        for name in list(t.sources) + list(t.targets):
            actions.update(steps[name].actions)
        for body in self.sem.bodies_of(s.pou):
            if body.action in actions:
                for b in body.cfg.blocks:
                    self.mark_block(body.block_qname(b.index), "decision", item)

    def variable(self, item: str, key: str):
        for k in self.reader_roots.get(key.split(".")[0], ()):
            if not _related(k, key):
                continue
            for s in self.readers[k]:
                sitem = f"stmt:{s.sid}"
                self.mark(sitem, "assignment", item)
                if sitem not in self.marks:
                    continue          # cut off by the depth limit
                # (b) call: parameters whose value reads the modified variable
                for c in s.calls:
                    hit = False
                    for formal, reads in c.params:
                        if any(_related(r, key) for r in reads):
                            self.mark(f"var:{formal}", "call", sitem)
                            hit = True
                    if hit:
                        self.mark(f"inst:{c.instance or c.callee}", "call", sitem)
        if key in self.sem.fb_instances:
            self.mark(f"inst:{key}", "call", item)

    def instance(self, item: str, key: str):
        fb_type = self.sem.fb_instances.get(key)
        if fb_type == "TON":
            outputs = [f"{key}.Q", f"{key}.ET"]
        elif fb_type is not None:
            pou = self.sem.pou_by_name[fb_type]
            outputs = [f"{fb_type}.{v.name}" for v in pou.vars if v.section == "output"]
        else:
            outputs = [f"{key}.{key}"]        # function result
        for o in outputs:
            self.mark(f"var:{o}", "call", item)
        for s, c in self.output_calls.get(key, ()):
            for _, dest in c.outputs:
                self.mark(f"var:{dest}", "call", item)


def impact(model: DependencyModel, changes: ChangeSet, max_depth: int | None = None,
           seed: int | None = None) -> ModificationSet:
    """Fixpoint of the assignment, call and decision rules over the new revision.

    ``seed`` shuffles the worklist order; the resulting marked sets do not
    depend on it (provenance may).
    """
    if changes.new_version != model.version_id:
        raise VersionMismatch(f"change set is for revision {changes.new_version}, "
                              f"model is {model.version_id}")
    if model.semantics is None:
        raise ValueError("impact analysis needs a model built from a parsed project")
    sem = model.semantics
    prop = _Propagator(sem, max_depth, random.Random(seed) if seed is not None else None)
    removed: list[str] = []
    added: list[str] = []
    for body in changes.bodies:
        if body.status == "removed":
            removed += [f"{body.owner}.BB{i}" for i in body.removed_blocks]
            continue
        for i in body.changed_blocks:
            prop.mark_block(f"{body.owner}.BB{i}", "direct", None)
        for sid in body.changed_statements:
            prop.mark(f"stmt:{sid}", "direct", None)
        if body.status == "added":
            added += [f"{body.owner}.BB{i}" for i in body.changed_blocks]
        else:
            removed += [f"{body.owner}.BB{i}" for i in body.removed_blocks]
    for q in changes.seed_blocks:
        prop.mark_block(q, "direct", None)
    for v in changes.seed_variables:
        prop.mark(f"var:{v}", "direct", None)
    for i in changes.seed_instances:
        prop.mark(f"inst:{i}", "direct", None)
    prop.run()
    return ModificationSet(model.version_id, changes.old_version, prop.marks,
                           sorted(removed), sorted(added), prop.depth_limited)
