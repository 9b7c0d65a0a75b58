"""Where each pragma-block sits: visible declarations, enclosing statements,
and a conservative may-read-after scan used for liveness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..frontend.ast import (
    Assign, Block, DeclStmt, For, If, Index, PragmaBlock, Program, Stmt, Var, VarDecl,
    While, children, walk,
)


@dataclass
class Frame:
    owner: Optional[Stmt]  # statement whose child sequence this is (None for main)
    seq: list
    index: int


@dataclass
class BlockContext:
    block: PragmaBlock
    scope: dict[str, VarDecl]
    frames: list[Frame]
    global_names: frozenset
    main_top: frozenset  # ids of declarations at main's top level
    enclosing_loop: bool = False


@dataclass
class VarTable:
    """Every declaration in textual order; the index is the variable id."""

    decls: list[VarDecl] = field(default_factory=list)

    def add(self, d: VarDecl):
        self.decls.append(d)

    def id_of(self, d: VarDecl) -> int:
        for i, x in enumerate(self.decls):
            if x is d:
                return i
        raise KeyError(d.name)


def _child_seqs(s: Stmt) -> list[list]:
    if isinstance(s, Block):
        return [s.stmts]
    if isinstance(s, If):
        out = [[s.then]]
        if s.orelse is not None:
            out.append([s.orelse])
        return out
    if isinstance(s, (For, While)):
        return [[s.body]]
    if isinstance(s, PragmaBlock):
        return [[s.loop.body]]
    return []


def build_contexts(program: Program) -> tuple[list[BlockContext], VarTable]:
    table = VarTable()
    for g in program.globals:
        table.add(g)
    global_names = frozenset(g.name for g in program.globals)
    main = program.main.body
    main_top = frozenset(id(d) for s in main.stmts if isinstance(s, DeclStmt) for d in s.decls)
    contexts: list[BlockContext] = []
    scopes: list[dict] = [{g.name: g for g in program.globals}]

    def visible() -> dict:
        merged = {}
        for sc in scopes:
            merged.update(sc)
        return merged

    def visit_seq(owner, seq, frames, in_loop):
        opened = owner is None or isinstance(owner, Block)
        if opened and owner is not None:
            scopes.append({})
        for idx, s in enumerate(seq):
            here = frames + [Frame(owner, seq, idx)]
            visit(s, here, in_loop)
        if opened and owner is not None:
            scopes.pop()

    def visit(s, frames, in_loop):
        if isinstance(s, DeclStmt):
            for d in s.decls:
                table.add(d)
                scopes[-1][d.name] = d
        elif isinstance(s, PragmaBlock):
            contexts.append(
                BlockContext(s, visible(), frames, global_names, main_top, enclosing_loop=in_loop)
            )
            scopes.append({})
            if isinstance(s.loop.init, DeclStmt):
                for d in s.loop.init.decls:
                    table.add(d)
                    scopes[-1][d.name] = d
            visit_seq(s, [s.loop.body], frames, True)
            scopes.pop()
        elif isinstance(s, For):
            scopes.append({})
            if isinstance(s.init, DeclStmt):
                for d in s.init.decls:
                    table.add(d)
                    scopes[-1][d.name] = d
            visit_seq(s, [s.body], frames, True)
            scopes.pop()
        elif isinstance(s, While):
            visit_seq(s, [s.body], frames, True)
        elif isinstance(s, If):
            visit_seq(s, [s.then], frames, in_loop)
            if s.orelse is not None:
                visit_seq(s, [s.orelse], frames, in_loop)
        elif isinstance(s, Block):
            visit_seq(s, s.stmts, frames, in_loop)

    visit_seq(None, main.stmts, [], False)
    return contexts, table


# ---------------------------------------------------------------------------
# may-read-after scan


def _reads(node, name: str) -> bool:
    """Does ``node`` contain a read of ``name``?  Matching is by name, so a
    shadowing inner declaration counts as a read (the safe direction)."""
    if isinstance(node, Assign):
        tgt = node.target
        if isinstance(tgt, Index) and any(_reads(i, name) for i in tgt.indices):
            return True
        if node.op != "=" and tgt.name == name:
            return True
        return node.value is not None and _reads(node.value, name)
    if isinstance(node, Var):
        return node.name == name
    if isinstance(node, Index):
        return node.name == name or any(_reads(i, name) for i in node.indices)
    if isinstance(node, VarDecl):
        return node.init is not None and _reads(node.init, name)
    return any(_reads(c, name) for c in children(node))


def _kills(s, decl: VarDecl) -> bool:
    return (
        not decl.is_array
        and isinstance(s, Assign)
        and s.op == "="
        and isinstance(s.target, Var)
        and s.target.name == decl.name
        and not _reads(s.value, decl.name)
    )


def _declares(s, decl: VarDecl) -> bool:
    if isinstance(s, DeclStmt):
        return any(d is decl for d in s.decls)
    if isinstance(s, (For,)) and isinstance(s.init, DeclStmt):
        return any(d is decl for d in s.init.decls)
    return False


def live_after(ctx: BlockContext, decl: VarDecl) -> bool:
    """Conservatively decide whether ``decl`` may be read after the block.

    Globals and main's top-level locals count as read at program exit.
    """
    name = decl.name
    for frame in reversed(ctx.frames):
        for s in frame.seq[frame.index + 1:]:
            if _reads(s, name):
                return True
            if _kills(s, decl):
                return False
        owner = frame.owner
        if isinstance(owner, (For, While)):
            loop_parts = [owner.body, owner.cond] + ([owner.step] if isinstance(owner, For) else [])
            if any(part is not None and _reads(part, name) for part in loop_parts):
                return True
            if isinstance(owner, For) and _declares(owner, decl):
                return False
        elif isinstance(owner, PragmaBlock):
            return True
        if any(_declares(s, decl) for s in frame.seq) and owner is not None:
            return False
    return True
