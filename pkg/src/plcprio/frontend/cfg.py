"""Basic-block control-flow graphs.

Blocks are numbered in source order.  Each block records the text offset where
code reaching the block can be injected (``site``); loop headers additionally
have ``back_site`` just before the closing keyword, which is where the back
edge re-enters the header.  Bookkeeping maps are keyed by ``id()`` of the
syntax node so the interpreter and the instrumenter share one numbering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    Case, For, If, Pou, Return, SIMPLE_STMTS, StmtList, While,
)
from .printer import expr_text


@dataclass
class Block:
    index: int
    role: str                        # entry | branch | else | join | header
    stmts: list = field(default_factory=list)
    site: int | None = None
    back_site: int | None = None
    implicit_else: bool = False
    decision: object = None          # compound statement ending this block

    @property
    def is_empty(self) -> bool:
        return not self.stmts


@dataclass(frozen=True)
class CfgEdge:
    src: int
    dst: int
    label: str | None = None


@dataclass
class Cfg:
    blocks: list[Block] = field(default_factory=list)
    edges: list[CfgEdge] = field(default_factory=list)
    entry_of: dict[int, Block] = field(default_factory=dict)
    join_of: dict[int, Block] = field(default_factory=dict)
    header_of: dict[int, Block] = field(default_factory=dict)
    else_of: dict[int, Block] = field(default_factory=dict)
    block_of: dict[int, Block] = field(default_factory=dict)

    @property
    def entry(self) -> Block:
        return self.blocks[0]

    def successors(self, index: int) -> list[int]:
        return [e.dst for e in self.edges if e.src == index]

    def predecessors(self, index: int) -> list[int]:
        return [e.src for e in self.edges if e.dst == index]

    def shape(self) -> tuple:
        """Graph shape ignoring condition text: blocks, edges and decision kinds."""
        kinds = tuple(type(b.decision).__name__ if b.decision is not None else ""
                      for b in self.blocks)
        edges = tuple(sorted((e.src, e.dst) for e in self.edges))
        return len(self.blocks), edges, kinds


class _Builder:
    def __init__(self):
        self.cfg = Cfg()

    def new_block(self, role: str, site: int | None) -> Block:
        b = Block(len(self.cfg.blocks), role, site=site)
        self.cfg.blocks.append(b)
        return b

    def edge(self, src: Block, dst: Block, label: str | None = None):
        self.cfg.edges.append(CfgEdge(src.index, dst.index, label))

    def open_list(self, body: StmtList, role: str) -> Block:
        b = self.new_block(role, body.start)
        self.cfg.entry_of[id(body)] = b
        return b

    def walk(self, body: StmtList, cur: Block) -> Block | None:
        """Lay out ``body`` starting in ``cur``; return the fall-through block,
        or None when control cannot fall off the end (RETURN)."""
        for s in body.stmts:
            if cur is None:
                break
            if isinstance(s, SIMPLE_STMTS):
                cur.stmts.append(s)
                self.cfg.block_of[id(s)] = cur
                if isinstance(s, Return):
                    cur = None
            elif isinstance(s, If):
                cur = self._if(s, cur)
            elif isinstance(s, Case):
                cur = self._case(s, cur)
            else:
                cur = self._loop(s, cur)
        return cur

    def _close(self, ends: list[Block | None], stmt) -> Block:
        join = self.new_block("join", stmt.span[1] if stmt.span else None)
        self.cfg.join_of[id(stmt)] = join
        for end in ends:
            if end is not None:
                self.edge(end, join)
        return join

    def _if(self, s: If, cur: Block) -> Block:
        cur.decision = s
        self.cfg.block_of[id(s)] = cur
        ends = []
        for br in s.branches:
            arm = self.open_list(br.body, "branch")
            self.edge(cur, arm, expr_text(br.cond))
            ends.append(self.walk(br.body, arm))
        pending_else = None
        if s.else_body is not None:
            arm = self.open_list(s.else_body, "else")
            self.edge(cur, arm, "ELSE")
            ends.append(self.walk(s.else_body, arm))
        else:
            pending_else = cur
        join = self._close(ends, s)
        if pending_else is not None:
            self.edge(pending_else, join, "ELSE")
        return join

    def _case(self, s: Case, cur: Block) -> Block:
        cur.decision = s
        self.cfg.block_of[id(s)] = cur
        ends = []
        for arm_ast in s.arms:
            arm = self.open_list(arm_ast.body, "branch")
            label = ", ".join(str(lo) if lo == hi else f"{lo}..{hi}"
                              for lo, hi in arm_ast.labels)
            self.edge(cur, arm, label)
            ends.append(self.walk(arm_ast.body, arm))
        if s.else_body is not None:
            arm = self.open_list(s.else_body, "else")
            ends.append(self.walk(s.else_body, arm))
        else:
            arm = self.new_block("else", s.end_kw)
            arm.implicit_else = True
            self.cfg.else_of[id(s)] = arm
            ends.append(arm)
        self.edge(cur, arm, "ELSE")
        return self._close(ends, s)

    def _loop(self, s: While | For, cur: Block) -> Block:
        header = self.new_block("header", s.span[0] if s.span else None)
        header.decision = s
        self.cfg.header_of[id(s)] = header
        self.cfg.block_of[id(s)] = header
        self.edge(cur, header)
        body = self.open_list(s.body, "branch")
        if isinstance(s, While):
            cond = expr_text(s.cond)
        else:
            cond = f"{s.var} in range"
        self.edge(header, body, cond)
        end = self.walk(s.body, body)
        if end is not None:
            header.back_site = s.end_kw
            self.edge(end, header)
        join = self._close([], s)
        self.edge(header, join, f"NOT ({cond})")
        return join


def build_cfg(body: StmtList) -> Cfg:
    b = _Builder()
    entry = b.open_list(body, "entry")
    b.walk(body, entry)
    return b.cfg


def pou_cfgs(pou: Pou) -> list[tuple[str | None, Cfg]]:
    """``(action name or None, cfg)`` for every instrumentable body of ``pou``."""
    if pou.is_sfc:
        return [(a.name, build_cfg(a.body)) for a in pou.body.actions]
    return [(None, build_cfg(pou.body))]
