"""Pretty printer from AST back to C text.

The printer dispatches on node class name (``expr_<Name>`` /
``stmt_<Name>``), which lets the code generator subclass it for the MPI
statement nodes.
"""

from __future__ import annotations

from .ast import Binary, Block, DeclStmt, Expr, Program, Stmt, Unary, VarDecl
from .pragma import format_directive

_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7


def format_number(v) -> str:
    if isinstance(v, float):
        text = repr(v)
        if "e" not in text and "." not in text and "inf" not in text and "nan" not in text:
            text += ".0"
        return text
    return str(v)


class CPrinter:
    indent_unit = "    "

    # -- expressions -----------------------------------------------------
    def expr(self, e: Expr) -> str:
        return getattr(self, "expr_" + type(e).__name__)(e)

    def _prec(self, e: Expr) -> int:
        if isinstance(e, Binary):
            return _PREC[e.op]
        if isinstance(e, Unary):
            return _UNARY_PREC
        return 99

    def expr_IntLit(self, e):
        return str(e.value)

    def expr_FloatLit(self, e):
        return e.text if e.text else format_number(e.value)

    def expr_StringLit(self, e):
        return f'"{e.value}"'

    def expr_Const(self, e):
        return e.name

    def expr_Var(self, e):
        return e.name

    def expr_Index(self, e):
        return e.name + "".join(f"[{self.expr(i)}]" for i in e.indices)

    def expr_Unary(self, e):
        inner = self.expr(e.operand)
        if self._prec(e.operand) < _UNARY_PREC or (isinstance(e.operand, Unary)) or inner.startswith("-"):
            inner = f"({inner})"
        return f"{e.op}{inner}"

    def expr_Binary(self, e):
        p = _PREC[e.op]
        left = self.expr(e.left)
        if self._prec(e.left) < p:
            left = f"({left})"
        right = self.expr(e.right)
        if self._prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"

    def expr_Call(self, e):
        return f"{e.name}({', '.join(self.expr(a) for a in e.args)})"

    # -- declarations ----------------------------------------------------
    def declarator(self, d: VarDecl) -> str:
        text = d.name + "".join(f"[{self.expr(x)}]" for x in d.dims)
        if d.init is not None:
            text += f" = {self.expr(d.init)}"
        return text

    def decl_line(self, decls: list[VarDecl]) -> str:
        return f"{decls[0].base} {', '.join(self.declarator(d) for d in decls)};"

    # -- statements ------------------------------------------------------
    def stmt(self, s: Stmt, level: int) -> list[str]:
        return getattr(self, "stmt_" + type(s).__name__)(s, level)

    def pad(self, level: int) -> str:
        return self.indent_unit * level

    def simple(self, s) -> str:
        """Render an assignment-like statement without indentation or ';'."""
        if s.op in ("++", "--"):
            return f"{self.expr(s.target)}{s.op}"
        return f"{self.expr(s.target)} {s.op} {self.expr(s.value)}"

    def body(self, s: Stmt, level: int) -> list[str]:
        """Lines for a nested statement; only blocks get braces."""
        if isinstance(s, Block):
            lines = [" {"]
            for c in s.stmts:
                lines.extend(self.stmt(c, level + 1))
            lines.append(self.pad(level) + "}")
            return lines
        return [""] + self.stmt(s, level + 1)

    def _attach(self, head: str, tail: list[str]) -> list[str]:
        if tail[0] == "":
            return [head] + tail[1:]
        return [head + tail[0]] + tail[1:]

    def stmt_DeclStmt(self, s, level):
        return [self.pad(level) + self.decl_line(s.decls)]

    def stmt_Assign(self, s, level):
        return [self.pad(level) + self.simple(s) + ";"]

    def stmt_If(self, s, level):
        then = s.then
        if s.orelse is not None and _ends_in_open_if(then):
            then = Block([then])  # keep the else bound to this if
        lines = self._attach(f"{self.pad(level)}if ({self.expr(s.cond)})", self.body(then, level))
        if s.orelse is None:
            return lines
        braced = lines[-1].endswith("}")
        if type(s.orelse).__name__ == "If":
            nested = self.stmt(s.orelse, level)
            head = nested[0].lstrip()
            if braced:
                lines[-1] += " else " + head
            else:
                lines.append(self.pad(level) + "else " + head)
            lines.extend(nested[1:])
        else:
            tail = self.body(s.orelse, level)
            if braced:
                lines[-1] += " else" + tail[0]
            else:
                lines.append(self.pad(level) + "else" + tail[0])
            lines.extend(tail[1:])
        return lines

    def for_header(self, s) -> str:
        if s.init is None:
            init = ""
        elif isinstance(s.init, DeclStmt):
            init = self.decl_line(s.init.decls)[:-1]
        else:
            init = self.simple(s.init)
        cond = "" if s.cond is None else self.expr(s.cond)
        step = "" if s.step is None else self.simple(s.step)
        return f"for ({init}; {cond}; {step})"

    def stmt_For(self, s, level):
        return self._attach(self.pad(level) + self.for_header(s), self.body(s.body, level))

    def stmt_While(self, s, level):
        return self._attach(f"{self.pad(level)}while ({self.expr(s.cond)})", self.body(s.body, level))

    def stmt_Block(self, s, level):
        lines = [self.pad(level) + "{"]
        for c in s.stmts:
            lines.extend(self.stmt(c, level + 1))
        lines.append(self.pad(level) + "}")
        return lines

    def stmt_CallStmt(self, s, level):
        return [f"{self.pad(level)}{s.name}({', '.join(self.expr(a) for a in s.args)});"]

    def stmt_Return(self, s, level):
        if s.value is None:
            return [self.pad(level) + "return;"]
        return [f"{self.pad(level)}return {self.expr(s.value)};"]

    def stmt_Empty(self, s, level):
        return [self.pad(level) + ";"]

    def stmt_PragmaBlock(self, s, level):
        return ["#pragma " + format_directive(s.directive)] + self.stmt_For(s.loop, level)

    # -- whole program ---------------------------------------------------
    def defines(self, program: Program) -> list[str]:
        return [f"#define {k} {format_number(v)}" for k, v in program.defines.items()]

    def program(self, program: Program) -> str:
        lines = self.defines(program)
        if lines:
            lines.append("")
        for g in program.globals:
            lines.append(self.decl_line([g]))
        if program.globals:
            lines.append("")
        for f in program.functions:
            params = "void"
            lines.extend(self._attach(f"{f.ret} {f.name}({params})", self.body(f.body, 0)))
        return "\n".join(lines) + "\n"


def _ends_in_open_if(s) -> bool:
    while True:
        name = type(s).__name__
        if name == "If":
            if s.orelse is None:
                return True
            s = s.orelse
        elif name in ("For", "While"):
            s = s.body
        elif name == "PragmaBlock":
            s = s.loop.body
        else:
            return False


def print_program(program: Program) -> str:
    return CPrinter().program(program)
