"""Coarse (project-level) and fine (control-flow level) change identification."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core.builder import block_text, build_dependency_model
from ..core.checksum import digest
from ..core.model import DependencyModel
from ..frontend.ast import ProjectAst
from ..frontend.semantics import BodyInfo, Semantics, StmtInfo

# node kind -> change-set category
CATEGORIES = {
    "Program": "pou", "FunctionBlock": "pou", "Function": "pou",
    "GlobalVariable": "global", "LocalVariable": "variable", "FbInstance": "variable",
    "SfcStep": "step", "SfcTransition": "transition", "Action": "action",
    "Task": "task",
}
CATEGORY_ORDER = ("pou", "global", "variable", "type", "task", "step", "transition",
                  "action")


def lcs_pairs(a: list[str], b: list[str]) -> list[tuple[int, int]]:
    """Index pairs of one longest common subsequence of ``a`` and ``b``.

    Ties prefer matching earlier elements of ``a``, which keeps the result
    deterministic.
    """
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = table[i], table[i + 1]
        for j in range(m - 1, -1, -1):
            row[j] = below[j + 1] + 1 if a[i] == b[j] else max(below[j], row[j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


@dataclass
class BodyChange:
    owner: str                          # POU, or POU.Action for SFC actions
    status: str                         # modified | added | removed
    pairs: list[tuple[int, int]] = field(default_factory=list)     # (old, new)
    changed_blocks: list[int] = field(default_factory=list)        # new indices
    removed_blocks: list[int] = field(default_factory=list)        # old indices
    changed_decisions: list[tuple[int, int]] = field(default_factory=list)
    changed_statements: list[str] = field(default_factory=list)    # new sids
    structural_fallback: bool = False

    def to_json(self) -> dict:
        return {"owner": self.owner, "status": self.status,
                "pairs": [list(p) for p in self.pairs],
                "changed_blocks": self.changed_blocks,
                "removed_blocks": self.removed_blocks,
                "changed_decisions": [list(p) for p in self.changed_decisions],
                "changed_statements": self.changed_statements,
                "structural_fallback": self.structural_fallback}

    @classmethod
    def from_json(cls, d: dict) -> "BodyChange":
        return cls(d["owner"], d["status"], [tuple(p) for p in d["pairs"]],
                   list(d["changed_blocks"]), list(d["removed_blocks"]),
                   [tuple(p) for p in d["changed_decisions"]],
                   list(d["changed_statements"]), bool(d["structural_fallback"]))


@dataclass
class ChangeSet:
    old_version: str
    new_version: str
    added: dict[str, list[str]] = field(default_factory=dict)
    removed: dict[str, list[str]] = field(default_factory=dict)
    modified: dict[str, list[str]] = field(default_factory=dict)
    bodies: list[BodyChange] = field(default_factory=list)
    # impact seeds that do not come from a changed statement of the new revision
    seed_variables: list[str] = field(default_factory=list)
    seed_instances: list[str] = field(default_factory=list)
    seed_blocks: list[str] = field(default_factory=list)

    def body(self, owner: str) -> BodyChange | None:
        for b in self.bodies:
            if b.owner == owner:
                return b
        return None

    def is_empty(self) -> bool:
        return not any(self.added.values()) and not any(self.removed.values()) \
            and not any(self.modified.values()) and not self.bodies

    def to_json(self) -> dict:
        return {"old_version": self.old_version, "new_version": self.new_version,
                "added": {k: self.added.get(k, []) for k in CATEGORY_ORDER},
                "removed": {k: self.removed.get(k, []) for k in CATEGORY_ORDER},
                "modified": {k: self.modified.get(k, []) for k in CATEGORY_ORDER},
                "bodies": [b.to_json() for b in self.bodies],
                "seed_variables": self.seed_variables,
                "seed_instances": self.seed_instances,
                "seed_blocks": self.seed_blocks}

    @classmethod
    def from_json(cls, d: dict) -> "ChangeSet":
        return cls(d["old_version"], d["new_version"],
                   {k: list(v) for k, v in d["added"].items()},
                   {k: list(v) for k, v in d["removed"].items()},
                   {k: list(v) for k, v in d["modified"].items()},
                   [BodyChange.from_json(b) for b in d["bodies"]],
                   list(d.get("seed_variables", [])), list(d.get("seed_instances", [])),
                   list(d.get("seed_blocks", [])))


# -- coarse ---------------------------------------------------------------------

def _struct_digest(t) -> str:
    return digest("; ".join(f"{f.name} : {f.type}" for f in t.fields))


def diff_coarse(old: DependencyModel, new: DependencyModel) -> ChangeSet:
    """Match nodes by qualified name; differing checksums mean 'modified'."""
    cs = ChangeSet(old.version_id, new.version_id)
    old_nodes = {str(n.qname): n for n in old.nodes if n.kind in CATEGORIES}
    new_nodes = {str(n.qname): n for n in new.nodes if n.kind in CATEGORIES}
    for q, n in new_nodes.items():
        cat = CATEGORIES[n.kind]
        o = old_nodes.get(q)
        if o is None or CATEGORIES[o.kind] != cat:
            cs.added.setdefault(cat, []).append(q)
        elif o.checksum != n.checksum or o.kind != n.kind:
            cs.modified.setdefault(cat, []).append(q)
    for q, o in old_nodes.items():
        n = new_nodes.get(q)
        if n is None or CATEGORIES[n.kind] != CATEGORIES[o.kind]:
            cs.removed.setdefault(CATEGORIES[o.kind], []).append(q)
    if old.semantics is not None and new.semantics is not None:
        old_types = {t.name: _struct_digest(t) for t in old.semantics.project.types}
        new_types = {t.name: _struct_digest(t) for t in new.semantics.project.types}
        for name in new_types:
            if name not in old_types:
                cs.added.setdefault("type", []).append(name)
            elif old_types[name] != new_types[name]:
                cs.modified.setdefault("type", []).append(name)
        for name in old_types:
            if name not in new_types:
                cs.removed.setdefault("type", []).append(name)
    for d in (cs.added, cs.removed, cs.modified):
        for k in d:
            d[k].sort()
    return cs


# -- fine -----------------------------------------------------------------------

class _BodyView:
    """Statement facts of one body, grouped per block."""

    def __init__(self, sem: Semantics, body: BodyInfo):
        self.body = body
        self.cfg = body.cfg
        self.simple: dict[int, list[StmtInfo]] = {b.index: [] for b in body.cfg.blocks}
        self.decision: dict[int, StmtInfo] = {}
        prefix = f"{body.owner}.BB"
        for s in sem.stmts:
            if s.block is None or not s.block.startswith(prefix):
                continue
            idx = int(s.block[len(prefix):])
            if s.sid.endswith("#D"):
                self.decision[idx] = s
            else:
                self.simple[idx].append(s)

    def block_text(self, i: int) -> str:
        return block_text(self.cfg.blocks[i])

    def decision_key(self, i: int) -> tuple | None:
        d = self.decision.get(i)
        if d is None:
            return None
        labels = tuple(e.label for e in self.cfg.edges if e.src == i)
        return d.text, labels

    def flat(self) -> list[tuple[str, StmtInfo]]:
        out = []
        for b in self.cfg.blocks:
            out += [(s.text, s) for s in self.simple[b.index]]
            if b.index in self.decision:
                d = self.decision[b.index]
                out.append(("DECIDE " + d.text + repr(self.decision_key(b.index)[1]), d))
        return out


def _removed_effects(stmts: list[StmtInfo], seeds: "_Seeds"):
    for s in stmts:
        seeds.variables.update(s.writes)
        for c in s.calls:
            if c.instance is not None:
                seeds.instances.add(c.instance)


@dataclass
class _Seeds:
    variables: set[str] = field(default_factory=set)
    instances: set[str] = field(default_factory=set)
    blocks: set[str] = field(default_factory=set)


def diff_body(old: _BodyView, new: _BodyView, seeds: _Seeds) -> BodyChange | None:
    """Compare two bodies of the same owner; None when they are identical."""
    owner = new.body.owner
    old_texts = [old.block_text(i) for i in range(len(old.cfg.blocks))]
    new_texts = [new.block_text(i) for i in range(len(new.cfg.blocks))]
    if old.cfg.shape() == new.cfg.shape():
        # shapes agree with source-order numbering: pair blocks by index
        change = BodyChange(owner, "modified",
                            pairs=[(i, i) for i in range(len(new_texts))])
        changed: set[int] = set()
        for i in range(len(new_texts)):
            if old.decision_key(i) != new.decision_key(i):
                change.changed_decisions.append((i, i))
                changed.add(i)
                changed.update(new.cfg.successors(i))
                change.changed_statements.append(new.decision[i].sid)
            if old_texts[i] != new_texts[i]:
                changed.add(i)
                a = [s.text for s in old.simple[i]]
                b = [s.text for s in new.simple[i]]
                kept = lcs_pairs(a, b)
                kept_old = {p[0] for p in kept}
                kept_new = {p[1] for p in kept}
                change.changed_statements += [s.sid for j, s in enumerate(new.simple[i])
                                              if j not in kept_new]
                _removed_effects([s for j, s in enumerate(old.simple[i])
                                  if j not in kept_old], seeds)
        if not changed:
            return None
        change.changed_blocks = sorted(changed)
        return change

    change = BodyChange(owner, "modified", structural_fallback=True)
    change.pairs = lcs_pairs(old_texts, new_texts)
    change.changed_blocks = list(range(len(new_texts)))
    change.removed_blocks = list(range(len(old_texts)))
    old_flat, new_flat = old.flat(), new.flat()
    kept = lcs_pairs([t for t, _ in old_flat], [t for t, _ in new_flat])
    kept_old = {p[0] for p in kept}
    kept_new = {p[1] for p in kept}
    change.changed_statements = [s.sid for j, (_, s) in enumerate(new_flat)
                                 if j not in kept_new]
    _removed_effects([s for j, (_, s) in enumerate(old_flat) if j not in kept_old], seeds)
    return change


def _whole_body(sem: Semantics, body: BodyInfo, status: str, seeds: _Seeds) -> BodyChange:
    n = len(body.cfg.blocks)
    change = BodyChange(body.owner, status)
    if status == "added":
        change.changed_blocks = list(range(n))
        change.changed_statements = [s.sid for _, s in _BodyView(sem, body).flat()]
    else:
        change.removed_blocks = list(range(n))
        _removed_effects([s for _, s in _BodyView(sem, body).flat()], seeds)
    return change


def _action_blocks(sem: Semantics, pou: str, actions) -> list[str]:
    out = []
    for body in sem.bodies_of(pou):
        if body.action in actions:
            out += [body.block_qname(b.index) for b in body.cfg.blocks]
    return out


def _sfc_seeds(old_sem: Semantics, new_sem: Semantics, pou: str, cs: ChangeSet,
               seeds: _Seeds):
    """Steps matched by name, then transitions; mark actions next to changes."""
    old_p, new_p = old_sem.pou_by_name[pou], new_sem.pou_by_name[pou]
    new_steps = {s.name: s for s in new_p.body.steps}
    old_steps = {s.name: s for s in old_p.body.steps}

    def step_actions(names) -> set[str]:
        acts: set[str] = set()
        for n in names:
            if n in new_steps:
                acts.update(new_steps[n].actions)
        return acts

    touched: set[str] = set()
    for cat in ("added", "modified"):
        for q in getattr(cs, cat).get("step", []):
            if q.startswith(pou + "."):
                touched.add(q[len(pou) + 1:])
    for q in cs.removed.get("step", []):
        if q.startswith(pou + "."):
            name = q[len(pou) + 1:]
            for t in old_p.body.transitions:
                if name in t.sources or name in t.targets:
                    touched.update(t.sources + t.targets)
    old_trans = {t.name: t for t in old_p.body.transitions}
    for q in cs.removed.get("transition", []):
        if q.startswith(pou + "."):
            t = old_trans[q[len(pou) + 1:]]
            touched.update(t.sources + t.targets)
    old_initial = {s.name for s in old_steps.values() if s.initial}
    new_initial = {s.name for s in new_steps.values() if s.initial}
    if old_initial != new_initial:
        touched.update(old_initial | new_initial)
    seeds.blocks.update(_action_blocks(new_sem, pou, step_actions(touched)))


def diff_fine(old_sem: Semantics, new_sem: Semantics, pou: str,
              cs: ChangeSet | None = None, seeds: _Seeds | None = None
              ) -> list[BodyChange]:
    """Per-body change detail for a POU present in both revisions."""
    seeds = seeds if seeds is not None else _Seeds()
    old_p, new_p = old_sem.pou_by_name[pou], new_sem.pou_by_name[pou]
    old_bodies = {b.owner: b for b in old_sem.bodies_of(pou)}
    new_bodies = {b.owner: b for b in new_sem.bodies_of(pou)}
    out: list[BodyChange] = []
    if old_p.is_sfc != new_p.is_sfc:
        out += [_whole_body(old_sem, b, "removed", seeds) for b in old_bodies.values()]
        out += [_whole_body(new_sem, b, "added", seeds) for b in new_bodies.values()]
        return out
    for owner, nb in new_bodies.items():
        ob = old_bodies.get(owner)
        if ob is None:
            out.append(_whole_body(new_sem, nb, "added", seeds))
            continue
        change = diff_body(_BodyView(old_sem, ob), _BodyView(new_sem, nb), seeds)
        if change is not None:
            out.append(change)
    for owner, ob in old_bodies.items():
        if owner not in new_bodies:
            out.append(_whole_body(old_sem, ob, "removed", seeds))
    if new_p.is_sfc and cs is not None:
        _sfc_seeds(old_sem, new_sem, pou, cs, seeds)
    return out


def diff(old: DependencyModel, new: DependencyModel) -> ChangeSet:
    """Coarse comparison followed by fine comparison of every modified POU."""
    if old.semantics is None or new.semantics is None:
        raise ValueError("fine-grained diff needs models built from parsed projects")
    cs = diff_coarse(old, new)
    seeds = _Seeds()
    old_sem, new_sem = old.semantics, new.semantics
    for pou in cs.modified.get("pou", []):
        cs.bodies += diff_fine(old_sem, new_sem, pou, cs, seeds)
    for pou in cs.added.get("pou", []):
        cs.bodies += [_whole_body(new_sem, b, "added", seeds) for b in new_sem.bodies_of(pou)]
    for pou in cs.removed.get("pou", []):
        cs.bodies += [_whole_body(old_sem, b, "removed", seeds)
                      for b in old_sem.bodies_of(pou)]

    new_names = {str(n.qname) for n in new.nodes}
    for q in cs.modified.get("global", []) + cs.modified.get("variable", []):
        seeds.variables.add(q)
    changed_types = set(cs.modified.get("type", []))
    if changed_types:
        for v in new_sem.project.globals:
            if v.type in changed_types:
                seeds.variables.add(v.name)
        for p in new_sem.project.pous:
            for v in p.vars:
                if v.type in changed_types:
                    seeds.variables.add(f"{p.name}.{v.name}")
    for q in sorted(seeds.variables):
        if q in new_sem.fb_instances:
            seeds.instances.add(q)
    # only names that still exist can propagate in the new revision
    cs.seed_variables = sorted(v for v in seeds.variables
                               if _prefix_declared(v, new_names))
    cs.seed_instances = sorted(i for i in seeds.instances if i in new_sem.fb_instances)
    cs.seed_blocks = sorted(seeds.blocks)
    cs.bodies.sort(key=lambda b: b.owner)
    return cs


def _prefix_declared(key: str, names: set[str]) -> bool:
    parts = key.split(".")
    return any(".".join(parts[:n]) in names for n in range(1, len(parts) + 1))


def diff_projects(old: ProjectAst, new: ProjectAst) -> ChangeSet:
    return diff(build_dependency_model(old), build_dependency_model(new))
