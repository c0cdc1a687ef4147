"""Translate new-revision modifications into trace points of the old revision."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import VersionMismatch
from ..instrument import TracePointDb
from .diff import ChangeSet
from .impact import ModificationSet


@dataclass
class MappedModifications:
    old_version: str
    new_version: str
    tp_ids: list[int]
    old_blocks: list[str]
    untestable: list[str] = field(default_factory=list)   # new blocks without old tps

    def to_json(self) -> dict:
        return {"old_version": self.old_version, "new_version": self.new_version,
                "tp_ids": self.tp_ids, "old_blocks": self.old_blocks,
                "untestable": self.untestable}

    @classmethod
    def from_json(cls, d: dict) -> "MappedModifications":
        return cls(d["old_version"], d["new_version"], list(d["tp_ids"]),
                   list(d["old_blocks"]), list(d.get("untestable", [])))


def _split(qname: str) -> tuple[str, int]:
    owner, _, idx = qname.rpartition(".BB")
    return owner, int(idx)


def map_to_old_trace_points(mods: ModificationSet, changes: ChangeSet,
                            old_db: TracePointDb) -> MappedModifications:
    if old_db.version_id != changes.old_version:
        raise VersionMismatch(f"trace-point db is for revision {old_db.version_id}, "
                              f"change set starts from {changes.old_version}")
    if mods.old_version != changes.old_version or mods.version_id != changes.new_version:
        raise VersionMismatch("modification set and change set describe different "
                              "revision pairs")
    by_block = old_db.by_block()
    bodies = {b.owner: b for b in changes.bodies}
    old_blocks: set[str] = set()
    untestable: list[str] = []
    for q in mods.blocks:
        owner, idx = _split(q)
        body = bodies.get(owner)
        if body is None:
            old_blocks.add(q)                       # body unchanged: same numbering
        elif body.status == "added":
            untestable.append(q)
        elif body.structural_fallback:
            old_blocks.update(p.block for p in old_db.points if p.pou == owner)
        else:
            old_idx = next((o for o, n in body.pairs if n == idx), None)
            if old_idx is None:
                untestable.append(q)
            else:
                old_blocks.add(f"{owner}.BB{old_idx}")
    old_blocks.update(mods.removed_blocks)
    missing = sorted(b for b in old_blocks if b not in by_block)
    if missing:
        raise VersionMismatch(f"blocks {missing[:3]} are not in the trace-point db")
    return MappedModifications(changes.old_version, changes.new_version,
                               sorted(by_block[b] for b in old_blocks),
                               sorted(old_blocks), sorted(untestable))
