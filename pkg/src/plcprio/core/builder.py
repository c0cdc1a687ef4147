"""Construction of the dependency model from a parsed project."""

from __future__ import annotations

from ..errors import DuplicateName
from ..frontend.ast import ProjectAst
from ..frontend.cfg import Block
from ..frontend.printer import expr_text, print_pou, stmt_text, stmts_text
from ..frontend.semantics import Semantics, analyze
from .checksum import checksum, digest, project_checksum
from .model import DependencyModel, Edge, Node, QualifiedName


def block_text(block: Block) -> str:
    lines = [stmt_text(s) for s in block.stmts]
    if block.decision is not None:
        lines.append("DECIDE " + stmt_text(block.decision))
    return "\n".join(lines)


def decl_text(v) -> str:
    init = "" if v.init is None else f" := {expr_text(v.init)}"
    return f"{v.name} : {v.type}{init}"


class _Graph:
    def __init__(self):
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []
        self.index: dict[str, int] = {}
        self._edge_set: set[Edge] = set()

    def add(self, kind: str, qname: str, check: str, span=None, **attrs) -> int:
        if qname in self.index:
            raise DuplicateName(f"two entities share the name {qname!r}")
        nid = len(self.nodes)
        self.nodes.append(Node(nid, kind, QualifiedName.parse(qname), check,
                               span, attrs))
        self.index[qname] = nid
        return nid

    def link(self, kind: str, src: int, dst: int, label: str | None = None):
        e = Edge(kind, src, dst, label)
        if e not in self._edge_set:
            self._edge_set.add(e)
            self.edges.append(e)


def _var_node(graph: _Graph, key: str) -> int | None:
    """Node standing for a dataflow key: the longest declared prefix."""
    parts = key.split(".")
    for n in range(len(parts), 0, -1):
        nid = graph.index.get(".".join(parts[:n]))
        if nid is not None and graph.nodes[nid].kind in (
                "GlobalVariable", "LocalVariable", "FbInstance"):
            return nid
    return None


def build_dependency_model(project: ProjectAst,
                           sem: Semantics | None = None) -> DependencyModel:
    sem = sem or analyze(project)
    g = _Graph()
    entry_points = {}

    for t in project.tasks:
        g.add("Task", t.name, digest(f"{t.program} {t.cycle_ms}"),
              program=t.program, cycle_ms=t.cycle_ms)
        entry_points[t.name] = {"program": t.program, "cycle_ms": t.cycle_ms}
    for v in project.globals:
        g.add("GlobalVariable", v.name, digest(decl_text(v)), ("globals.st", *v.span),
              type=v.type, init=None if v.init is None else expr_text(v.init))

    for p in project.pous:
        source = project.sources.get(p.file) if p.file else None
        text = source[p.span[0]:p.span[1]] if source and p.span else print_pou(p)
        pid = g.add(p.kind, p.name, checksum(text),
                    (p.file, *p.span) if p.span else None,
                    sfc=p.is_sfc)
        for v in p.vars:
            kind = "FbInstance" if sem.fb_instances.get(f"{p.name}.{v.name}") else "LocalVariable"
            vid = g.add(kind, f"{p.name}.{v.name}", digest(decl_text(v)),
                        (p.file, *v.span) if v.span else None,
                        type=v.type, section=v.section,
                        init=None if v.init is None else expr_text(v.init))
            g.link("Contains", pid, vid)
        if p.kind == "Function":
            vid = g.add("LocalVariable", f"{p.name}.{p.name}", digest(p.return_type),
                        None, type=p.return_type, section="result", init=None)
            g.link("Contains", pid, vid)
        if p.is_sfc:
            sfc = p.body
            for st in sfc.steps:
                sid = g.add("SfcStep", f"{p.name}.{st.name}",
                            digest(f"{st.initial} {st.actions}"),
                            (p.file, *st.span) if st.span else None,
                            initial=st.initial, actions=list(st.actions))
                g.link("Contains", pid, sid)
            for a in sfc.actions:
                aid = g.add("Action", f"{p.name}.{a.name}",
                            digest(stmts_text(a.body)),
                            (p.file, *a.span) if a.span else None)
                g.link("Contains", pid, aid)
            for t in sfc.transitions:
                cond = expr_text(t.cond)
                tid = g.add("SfcTransition", f"{p.name}.{t.name}",
                            digest(f"{t.sources} -> {t.targets} {cond}"),
                            (p.file, *t.span) if t.span else None,
                            sources=list(t.sources), targets=list(t.targets))
                g.link("Contains", pid, tid)
            for st in sfc.steps:
                for a in st.actions:
                    g.link("Calls", g.index[f"{p.name}.{st.name}"],
                           g.index[f"{p.name}.{a}"])
            for t in sfc.transitions:
                tid = g.index[f"{p.name}.{t.name}"]
                cond = expr_text(t.cond)
                for s in t.sources:
                    g.link("SfcTransitionEdge", g.index[f"{p.name}.{s}"], tid, cond)
                for s in t.targets:
                    g.link("SfcTransitionEdge", tid, g.index[f"{p.name}.{s}"])

        for body in sem.bodies_of(p.name):
            owner = g.index[body.owner]
            for b in body.cfg.blocks:
                if b.stmts:
                    span = (p.file, b.stmts[0].span[0], b.stmts[-1].span[1])
                else:
                    span = (p.file, b.site, b.site)
                bid = g.add("BasicBlock", body.block_qname(b.index),
                            digest(block_text(b)), span, index=b.index,
                            role=b.role, statements=len(b.stmts))
                g.link("Contains", owner, bid)
            for e in body.cfg.edges:
                g.link("JumpsTo", g.index[body.block_qname(e.src)],
                       g.index[body.block_qname(e.dst)], e.label)

    for inst_key, fb_type in sem.fb_instances.items():
        if fb_type in g.index:
            g.link("Calls", g.index[inst_key], g.index[fb_type])

    for t in project.tasks:
        g.link("Calls", g.index[t.name], g.index[t.program])

    for s in sem.stmts:
        src = g.index[s.block] if s.block else g.index[s.sid]
        for k in sorted(s.reads):
            nid = _var_node(g, k)
            if nid is not None:
                g.link("Reads", src, nid)
        for k in sorted(s.writes):
            nid = _var_node(g, k)
            if nid is not None:
                g.link("Writes", src, nid)
        for c in s.calls:
            if c.instance is not None:
                g.link("Calls", src, g.index[c.instance])
            elif c.callee in g.index:
                g.link("Calls", src, g.index[c.callee])

    return DependencyModel(g.nodes, g.edges, entry_points,
                           project_checksum(project.sources), sem)

