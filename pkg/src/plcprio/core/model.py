"""Dependency-model graph types and JSON export."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

NODE_KINDS = ("Task", "Program", "FunctionBlock", "Function", "Action",
              "SfcStep", "SfcTransition", "BasicBlock", "GlobalVariable",
              "LocalVariable", "FbInstance")
EDGE_KINDS = ("Calls", "Reads", "Writes", "JumpsTo", "SfcTransitionEdge",
              "Contains")
POU_KINDS = ("Program", "FunctionBlock", "Function")
BLOCK_PARENTS = POU_KINDS + ("Action",)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class QualifiedName:
    segments: tuple[str, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("qualified name needs at least one segment")
        for s in self.segments:
            if not _IDENT.match(s):
                raise ValueError(f"bad qualified-name segment {s!r}")

    @classmethod
    def parse(cls, text: str) -> "QualifiedName":
        return cls(tuple(text.split(".")))

    def child(self, name: str) -> "QualifiedName":
        return QualifiedName(self.segments + (name,))

    def __str__(self) -> str:
        return ".".join(self.segments)


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    qname: QualifiedName
    checksum: str
    span: tuple[str | None, int, int] | None = None
    attrs: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Edge:
    kind: str
    source: int
    target: int
    label: str | None = None


@dataclass
class DependencyModel:
    nodes: list[Node]
    edges: list[Edge]
    entry_points: dict[str, dict]           # task -> {program, cycle_ms}
    version_id: str
    semantics: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self._by_qname = {str(n.qname): n for n in self.nodes}

    def node(self, qname: str) -> Node:
        return self._by_qname[qname]

    def find(self, qname: str) -> Node | None:
        return self._by_qname.get(qname)

    def nodes_of(self, *kinds: str) -> list[Node]:
        return [n for n in self.nodes if n.kind in kinds]

    def edges_of(self, kind: str) -> list[Edge]:
        return [e for e in self.edges if e.kind == kind]

    def out_edges(self, node_id: int, kind: str | None = None) -> list[Edge]:
        return [e for e in self.edges if e.source == node_id
                and (kind is None or e.kind == kind)]

    def in_edges(self, node_id: int, kind: str | None = None) -> list[Edge]:
        return [e for e in self.edges if e.target == node_id
                and (kind is None or e.kind == kind)]

    def parent(self, node: Node) -> Node | None:
        for e in self.in_edges(node.id, "Contains"):
            return self.nodes[e.source]
        return None

    def blocks_of(self, owner: str) -> list[Node]:
        """Basic blocks of one POU or action, in block-index order."""
        owner_node = self.node(owner)
        blocks = [self.nodes[e.target] for e in self.out_edges(owner_node.id, "Contains")
                  if self.nodes[e.target].kind == "BasicBlock"]
        return sorted(blocks, key=lambda n: n.attrs["index"])

    def to_json(self) -> dict:
        qn = {n.id: str(n.qname) for n in self.nodes}
        nodes = sorted(self.nodes, key=lambda n: str(n.qname))
        edges = sorted(self.edges, key=lambda e: (qn[e.source], e.kind, qn[e.target],
                                                  e.label or ""))
        return {
            "version_id": self.version_id,
            "entry_points": self.entry_points,
            "nodes": [{
                "qname": str(n.qname),
                "kind": n.kind,
                "checksum": n.checksum,
                "span": list(n.span) if n.span else None,
                "attrs": n.attrs,
            } for n in nodes],
            "edges": [{
                "kind": e.kind,
                "source": qn[e.source],
                "target": qn[e.target],
                "label": e.label,
            } for e in edges],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DependencyModel":
        nodes = []
        ids = {}
        for i, n in enumerate(data["nodes"]):
            span = tuple(n["span"]) if n.get("span") else None
            nodes.append(Node(i, n["kind"], QualifiedName.parse(n["qname"]),
                              n["checksum"], span, dict(n.get("attrs") or {})))
            ids[n["qname"]] = i
        edges = [Edge(e["kind"], ids[e["source"]], ids[e["target"]], e.get("label"))
                 for e in data["edges"]]
        return cls(nodes, edges, dict(data["entry_points"]), data["version_id"])
