"""Translation of program trees into Python functions.

Both executors run compiled code rather than walking the tree: every C
variable becomes a Python local (renamed so block scoping survives), loops
become ``while`` loops, and each message-passing receive becomes a
``yield`` so the simulator can interleave ranks.  Integers wrap to 64 bits
on every store and before any operation whose result depends on the
representation (division, remainder, comparison, conversion to double).
Subscripts are always bounds checked.

Every loop iteration bumps a counter ``_c``.  It bounds runaway programs
and gives the simulator a cost measure for computation between messages.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..analysis.loops import loop_iterator_name
from ..codegen.ir import (
    AnySource, AnyTag, Buf, Comment, CommRank, CommSize, MpiFinalize, MpiInit, MpiRecv, MpiSend,
    OmpPragma, ProtocolFail, StatusDecl, StatusField, TagRef,
)
from ..errors import BudgetExceeded, ExecError, ProtocolError
from ..frontend.ast import (
    CMP_OPS, Assign, Binary, Block, Call, CallStmt, Const, DeclStmt, Empty, Expr, FloatLit, For, If,
    Index, IntLit, PragmaBlock, Return, Stmt, StringLit, Unary, Var, VarDecl, While, const_int,
    is_int_kind, walk,
)
from . import values as V

HELPER_PREFIX = "_omp2dm_"
_W = "9223372036854775808"
_M = "18446744073709551615"
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$|^\d+$")


# -- helpers visible to compiled code ---------------------------------------


def _oob(name):
    raise ExecError(f"out-of-bounds subscript on '{name}'")


def _over():
    raise BudgetExceeded("operation budget exhausted (runaway loop?)")


def _fail(tag):
    raise ProtocolError(f"worker received unexpected tag {tag}")


def _slice(arr, off, count, name):
    if count < 0 or off < 0 or off + count > len(arr):
        raise ExecError(f"message buffer [{off}, {off + count}) overruns '{name}' of {len(arr)} elements")
    return arr[off:off + count]


def _put(arr, off, msg, count, name, is_int):
    n = len(msg)
    if n > count:
        raise ExecError(f"message of {n} elements truncated by receive count {count} into '{name}'")
    if off < 0 or off + n > len(arr):
        raise ExecError(f"received message [{off}, {off + n}) overruns '{name}' of {len(arr)} elements")
    arr[off:off + n] = [V.convert("long", x) for x in msg] if is_int else [float(x) for x in msg]


def _one(msg, old, count, base, name):
    if len(msg) > count:
        raise ExecError(f"message of {len(msg)} elements truncated by receive count {count} into '{name}'")
    return V.convert(base, msg[0]) if msg else old


RUNTIME_NAMESPACE = {
    "_idiv": V.idiv, "_imod": V.imod, "_f2i": V.f2i, "_sqrt": V.c_sqrt, "_fabs": V.c_fabs,
    "_conv": V.convert, "_flat": V.flat_input, "_oob": _oob, "_over": _over, "_fail": _fail,
    "_slice": _slice, "_put": _put, "_one": _one,
}


# -- compiler ----------------------------------------------------------------


@dataclass
class Slot:
    pyname: str
    decl: VarDecl

    @property
    def kind(self) -> str:
        return "int" if is_int_kind(self.decl.base) else "double"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.decl.shape

    @property
    def size(self) -> int:
        n = 1
        for d in self.shape:
            n *= d
        return n


@dataclass
class CompiledProgram:
    """A compiled ``main``: call ``fn(rt, inputs)`` (a generator for MPI code)."""

    source: str
    fn: object
    state_slots: dict[str, Slot]
    global_slots: dict[str, Slot]
    slots: dict[str, Slot] = field(default_factory=dict)  # every pyname


def _wrapped(t) -> str:
    code, kind, ok = t
    if kind != "int" or ok:
        return code
    return f"((({code}) + {_W} & {_M}) - {_W})"


class Compiler:
    def __init__(self, globals_: list[VarDecl], body: Block, *, mpi: bool = False, trace: bool = False,
                 privatize: bool = True):
        self.globals = globals_
        self.body = body
        self.mpi = mpi
        self.trace = trace
        self.privatize = privatize
        self.lines: list[str] = []
        self.level = 1
        self.scopes: list[dict[str, Slot]] = []
        self.slots: dict[str, Slot] = {}
        self.counter = 0

    # -- bookkeeping -------------------------------------------------------
    def emit(self, text: str):
        self.lines.append("    " * self.level + text)

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"_t{self.counter}" if stem == "" else f"v{self.counter}_{stem}"

    def declare(self, d: VarDecl) -> Slot:
        slot = Slot(self.fresh(d.name), d)
        self.scopes[-1][d.name] = slot
        self.slots[slot.pyname] = slot
        return slot

    def lookup(self, name: str) -> Slot:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise ExecError(f"unknown variable '{name}'")

    def suite(self, fn):
        """Run ``fn`` one level deeper and make sure the suite is not empty."""
        start = len(self.lines)
        self.level += 1
        fn()
        if len(self.lines) == start:
            self.emit("pass")
        self.level -= 1

    # -- expressions -------------------------------------------------------
    def expr(self, e: Expr):
        return getattr(self, "e_" + type(e).__name__)(e)

    def e_IntLit(self, e):
        v = V.wrap64(e.value)
        return (f"({v})" if v < 0 else str(v)), "int", True

    def e_FloatLit(self, e):
        return f"({e.value!r})", "double", True

    def e_Const(self, e):
        if isinstance(e.value, int):
            return self.e_IntLit(IntLit(e.value))
        return self.e_FloatLit(FloatLit(float(e.value)))

    def e_Var(self, e):
        s = self.lookup(e.name)
        return s.pyname, s.kind, True

    def e_AnySource(self, e):
        return "(-1)", "int", True

    e_AnyTag = e_AnySource

    def e_TagRef(self, e):
        return str(e.value), "int", True

    def e_StatusField(self, e):
        return ("_st_src" if e.name == "MPI_SOURCE" else "_st_tag"), "int", True

    def index_parts(self, slot: Slot, indices: list[Expr]):
        """Bounds check clauses and the flat offset expression."""
        shape = slot.shape
        checks, terms = [], []
        for ix, ext in zip(indices, shape):
            code = _wrapped(self.expr(ix))
            if re.fullmatch(r"\d+", code) and int(code) < ext:
                terms.append(code)
                continue
            if _IDENT.match(code):
                checks.append(f"0 <= {code} < {ext}")
                terms.append(code)
            else:
                t = self.fresh("")
                checks.append(f"0 <= ({t} := {code}) < {ext}")
                terms.append(t)
        flat = terms[0]
        for t, ext in zip(terms[1:], shape[1:]):
            flat = f"({flat}) * {ext} + {t}"
        return checks, flat

    def e_Index(self, e):
        slot = self.lookup(e.name)
        checks, flat = self.index_parts(slot, e.indices)
        if not checks:
            return f"{slot.pyname}[{flat}]", slot.kind, True
        return f"({slot.pyname}[{flat}] if {' and '.join(checks)} else _oob({e.name!r}))", slot.kind, True

    def e_Unary(self, e):
        code, kind, ok = self.expr(e.operand)
        if e.op == "-":
            return f"(-{code})", kind, kind != "int"
        if e.op == "+":
            return code, kind, ok
        return f"(0 if {code} else 1)", "int", True

    def binop(self, op: str, left, right):
        lk, rk = left[1], right[1]
        kind = "double" if "double" in (lk, rk) else "int"
        if op in CMP_OPS:
            return f"(1 if {self.compare(op, left, right)} else 0)", "int", True
        if op in ("&&", "||"):
            word = "and" if op == "&&" else "or"
            return f"(1 if ({left[0]}) {word} ({right[0]}) else 0)", "int", True
        lw, rw = _wrapped(left), _wrapped(right)
        if kind == "int":
            if op == "/":
                return f"_idiv({lw}, {rw})", "int", True
            if op == "%":
                return f"_imod({lw}, {rw})", "int", True
            return f"({left[0]} {op} {right[0]})", "int", False
        if op == "%":
            raise ExecError("% applied to a floating operand")
        return f"({lw} {op} {rw})", "double", True

    def compare(self, op: str, left, right) -> str:
        lw, rw = _wrapped(left), _wrapped(right)
        if left[1] != right[1]:
            lw = lw if left[1] == "double" else f"float({lw})"
            rw = rw if right[1] == "double" else f"float({rw})"
        return f"({lw} {op} {rw})"

    def e_Binary(self, e):
        if e.op in ("&&", "||"):
            return f"(1 if {self.cond(e)} else 0)", "int", True
        return self.binop(e.op, self.expr(e.left), self.expr(e.right))

    def e_Call(self, e):
        args = [self.expr(a) for a in e.args]
        if e.name == "sqrt":
            return f"_sqrt({_wrapped(args[0])})", "double", True
        if e.name == "fabs":
            return f"_fabs({_wrapped(args[0])})", "double", True
        if e.name in ("min", "max"):
            kind = "double" if any(a[1] == "double" for a in args) else "int"
            codes = [_wrapped(a) if a[1] == kind else f"float({_wrapped(a)})" for a in args]
            return f"{e.name}({', '.join(codes)})", kind, True
        raise ExecError(f"call to unsupported function '{e.name}'")

    def cond(self, e: Expr) -> str:
        """Code for ``e`` used as a truth value."""
        if isinstance(e, Binary):
            if e.op in CMP_OPS:
                return self.compare(e.op, self.expr(e.left), self.expr(e.right))
            if e.op in ("&&", "||"):
                word = "and" if e.op == "&&" else "or"
                return f"({self.cond(e.left)} {word} {self.cond(e.right)})"
        if isinstance(e, Unary) and e.op == "!":
            return f"(not {self.cond(e.operand)})"
        return f"({_wrapped(self.expr(e))} != 0)"

    # -- stores ------------------------------------------------------------
    def store_value(self, kind: str, value) -> str:
        code, vkind, ok = value
        if kind == "int":
            return _wrapped(value) if vkind == "int" else f"_f2i({code})"
        return f"float({_wrapped(value)})" if vkind == "int" else code

    def target(self, t: Expr):
        """Emit bounds checks for a store target; return (slot, lvalue code)."""
        slot = self.lookup(t.name)
        if isinstance(t, Var):
            return slot, slot.pyname
        checks, flat = self.index_parts(slot, t.indices)
        if checks:
            self.emit(f"if not ({' and '.join(checks)}): _oob({t.name!r})")
        if not _IDENT.match(flat):
            k = self.fresh("")
            self.emit(f"{k} = {flat}")
            flat = k
        return slot, f"{slot.pyname}[{flat}]"

    # -- tracing -----------------------------------------------------------
    def names_in(self, *exprs) -> tuple[str, ...]:
        out = []
        for e in exprs:
            if e is None:
                continue
            for n in walk(e):
                if isinstance(n, (Var, Index)):
                    p = self.lookup(n.name).pyname
                    if p not in out:
                        out.append(p)
        return tuple(out)

    def touch(self, reads: tuple, writes: tuple = ()):
        if self.trace and (reads or writes):
            self.emit(f"_T.append(({reads!r}, {writes!r}))")

    # -- statements --------------------------------------------------------
    def stmt(self, s: Stmt):
        getattr(self, "s_" + type(s).__name__)(s)

    def s_Block(self, s):
        self.scopes.append({})
        for c in s.stmts:
            self.stmt(c)
        self.scopes.pop()

    def init_value(self, slot: Slot, init: Optional[Expr]) -> str:
        if slot.shape:
            zero = "0" if slot.kind == "int" else "0.0"
            return f"[{zero}] * {slot.size}"
        if init is None:
            return "0" if slot.kind == "int" else "0.0"
        return self.store_value(slot.kind, self.expr(init))

    def s_DeclStmt(self, s):
        for d in s.decls:
            # The initialiser sees the enclosing scope, then the name is bound.
            reads = self.names_in(d.init)
            value = self.init_value(Slot("", d), d.init)
            slot = self.declare(d)
            self.touch(reads, (slot.pyname,))
            self.emit(f"{slot.pyname} = {value}")

    def s_Assign(self, s):
        t = s.target
        extra = [t] if s.op != "=" else []
        idx = t.indices if isinstance(t, Index) else []
        self.touch(self.names_in(s.value, *idx, *extra), (self.lookup(t.name).pyname,))
        slot, lv = self.target(t)
        if s.op == "=":
            value = self.expr(s.value)
        else:
            cur = (lv, slot.kind, True)
            if s.op in ("++", "--"):
                value = self.binop(s.op[0], cur, ("1", "int", True))
            else:
                value = self.binop(s.op[:-1], cur, self.expr(s.value))
        self.emit(f"{lv} = {self.store_value(slot.kind, value)}")

    def s_If(self, s):
        self.touch(self.names_in(s.cond))
        self.emit(f"if {self.cond(s.cond)}:")
        self.suite(lambda: self.stmt(s.then))
        if s.orelse is not None:
            self.emit("else:")
            self.suite(lambda: self.stmt(s.orelse))

    def tick(self):
        self.emit("_c += 1")
        self.emit("if _c > _B: _over()")

    def loop(self, cond: Optional[Expr], body: Stmt, step: Optional[Stmt]):
        if cond is None:
            self.emit("while True:")
        elif self.trace:
            self.emit("while True:")
        else:
            self.emit(f"while {self.cond(cond)}:")

        def inner():
            if self.trace and cond is not None:
                self.touch(self.names_in(cond))
                self.emit(f"if not {self.cond(cond)}: break")
            self.tick()
            self.stmt(body)
            if step is not None:
                self.stmt(step)

        self.suite(inner)

    def s_For(self, s):
        self.scopes.append({})
        if s.init is not None:
            self.stmt(s.init)
        self.loop(s.cond, s.body, s.step)
        self.scopes.pop()

    def s_While(self, s):
        self.loop(s.cond, s.body, None)

    def s_CallStmt(self, s):
        if s.name != "printf":
            raise ExecError(f"call to unsupported function '{s.name}'")
        args = []
        for a in s.args[1:]:
            args.append(repr(a.value) if isinstance(a, StringLit) else _wrapped(self.expr(a)))
        self.touch(self.names_in(*[a for a in s.args if not isinstance(a, StringLit)]))
        fmt = s.args[0].value if s.args and isinstance(s.args[0], StringLit) else ""
        self.emit(f"_printf({fmt!r}, ({', '.join(args)}{',' if len(args) == 1 else ''}))")

    def s_Return(self, s):
        self.touch(self.names_in(s.value))
        self.emit(f"return {self.state_expr()}, _c")

    def s_Empty(self, s):
        pass

    def s_PragmaBlock(self, s):
        if self.mpi:
            raise ExecError("untransformed pragma-block in a message-passing program")
        self.scopes.append({})
        if self.privatize:
            # OpenMP semantics on one thread: the iterator and private-list
            # variables get fresh copies; reductions update the original.
            names = []
            it = loop_iterator_name(s.loop)
            init = s.loop.init
            if it is not None and not (isinstance(init, DeclStmt) and init.decls[0].name == it):
                names.append(it)
            names += [n for n in s.directive.private if n not in names]
            for n in names:
                outer = self.lookup(n)
                slot = self.declare(VarDecl(n, outer.decl.base, list(outer.decl.dims)))
                self.emit(f"{slot.pyname} = {self.init_value(slot, None)}")
        if self.trace:
            self.emit(f"_T.append(('enter', {s.block_id}))")
        self.s_For(s.loop)
        if self.trace:
            self.emit(f"_T.append(('exit', {s.block_id}))")
        self.scopes.pop()

    # -- message passing ---------------------------------------------------
    def s_Comment(self, s):
        pass

    s_OmpPragma = s_Comment
    s_StatusDecl = s_Comment

    def s_MpiInit(self, s):
        self.emit("_mpi.init(_c)")

    def s_MpiFinalize(self, s):
        self.emit("_mpi.finalize(_c)")

    def s_CommRank(self, s):
        self.emit(f"{self.lookup(s.target).pyname} = _mpi.rank")

    def s_CommSize(self, s):
        self.emit(f"{self.lookup(s.target).pyname} = _mpi.size")

    def s_ProtocolFail(self, s):
        self.emit(f"_fail({_wrapped(self.expr(s.tag))})")

    def buf_offset(self, b: Buf) -> tuple[Slot, str]:
        slot = self.lookup(b.name)
        if not slot.shape or not b.indices:
            return slot, "0"
        checks, flat = self.index_parts(slot, b.indices)
        if checks:
            self.emit(f"if not ({' and '.join(checks)}): _oob({b.name!r})")
        return slot, flat

    def s_MpiSend(self, s):
        slot, off = self.buf_offset(s.buf)
        count = _wrapped(self.expr(s.count))
        if slot.shape:
            payload = f"_slice({slot.pyname}, {off}, {count}, {s.buf.name!r})"
        else:
            payload = f"[{slot.pyname}][:{count}]"
        dest = _wrapped(self.expr(s.dest))
        tag = _wrapped(self.expr(s.tag))
        self.emit(f"_mpi.send({dest}, {tag}, {payload}, _c)")

    def s_MpiRecv(self, s):
        src = _wrapped(self.expr(s.source))
        tag = _wrapped(self.expr(s.tag))
        self.emit(f"_m, _st_src, _st_tag = yield ({src}, {tag}, _c)")
        slot, off = self.buf_offset(s.buf)
        count = _wrapped(self.expr(s.count))
        if slot.shape:
            is_int = slot.kind == "int"
            self.emit(f"_put({slot.pyname}, {off}, _m, {count}, {s.buf.name!r}, {is_int})")
        else:
            self.emit(f"{slot.pyname} = _one(_m, {slot.pyname}, {count}, {slot.decl.base!r}, {s.buf.name!r})")

    # -- whole function ----------------------------------------------------
    def state_expr(self) -> str:
        items = ", ".join(f"{n!r}: {s.pyname}" for n, s in self.state.items())
        return "{" + items + "}"

    def compile(self) -> CompiledProgram:
        self.scopes.append({})
        gslots = {}
        for g in self.globals:
            slot = self.declare(g)
            gslots[g.name] = slot
            if slot.shape:
                default = self.init_value(slot, None)
                self.emit(f"{slot.pyname} = _flat({g.base!r}, {slot.shape!r}, _in[{g.name!r}]) "
                          f"if {g.name!r} in _in else {default}")
            else:
                default = self.init_value(slot, g.init)
                self.emit(f"{slot.pyname} = _conv({g.base!r}, _in[{g.name!r}]) if {g.name!r} in _in else {default}")
        # Top-level locals of main are part of the final state; they start at
        # zero so an early return still has a value for each of them.
        self.scopes.append({})
        self.state = dict(gslots)
        top = {}
        for st in self.body.stmts:
            if isinstance(st, DeclStmt):
                for d in st.decls:
                    if not d.name.startswith(HELPER_PREFIX):
                        top[d.name] = d
        pre = {}
        for name, d in top.items():
            slot = Slot(self.fresh(name), d)
            pre[name] = slot
            self.slots[slot.pyname] = slot
            self.state[name] = slot
            self.emit(f"{slot.pyname} = {self.init_value(slot, None)}")
        self.emit("_m = None")
        self.emit("_st_src = _st_tag = 0")
        if self.mpi:
            self.emit("if False: yield None")
        self._pre = pre
        for st in self.body.stmts:
            if isinstance(st, DeclStmt):
                for d in st.decls:
                    if d.name in pre:
                        slot = pre[d.name]
                        reads = self.names_in(d.init)
                        value = self.init_value(slot, d.init)
                        self.scopes[-1][d.name] = slot
                        self.touch(reads, (slot.pyname,))
                        self.emit(f"{slot.pyname} = {value}")
                    else:
                        self.s_DeclStmt(DeclStmt([d]))
            else:
                self.stmt(st)
        self.emit(f"return {self.state_expr()}, _c")
        header = [
            "def _main(_rt, _in):",
            "    _mpi = _rt.mpi",
            "    _printf = _rt.printf",
            "    _T = _rt.events",
            "    _B = _rt.budget",
            "    _c = 0",
        ]
        source = "\n".join(header + self.lines) + "\n"
        namespace = dict(RUNTIME_NAMESPACE)
        exec(compile(source, "<omp2dm-compiled>", "exec"), namespace)
        return CompiledProgram(source, namespace["_main"], self.state, gslots, self.slots)


def compile_main(globals_: list[VarDecl], body: Block, *, mpi=False, trace=False, privatize=True) -> CompiledProgram:
    return Compiler(globals_, body, mpi=mpi, trace=trace, privatize=privatize).compile()
