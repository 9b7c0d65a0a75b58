"""Recursive-descent parser for the supported C subset."""

from __future__ import annotations

import re
from dataclasses import replace

from ..errors import ParseError, PragmaError, UnsupportedConstruct
from .ast import (
    ARITH_OPS, CMP_OPS, INTRINSICS, SCALAR_KINDS,
    Assign, Binary, Block, Call, CallStmt, Const, DeclStmt, Empty, Expr, FloatLit,
    For, FunctionDef, If, Index, IntLit, PragmaBlock, Program, Return, Stmt,
    StringLit, Unary, Var, VarDecl, While, const_value, is_int_kind, walk,
)
from .lexer import Token, tokenize
from .pragma import parse_omp_pragma

TYPE_KWS = ("int", "long", "float", "double", "void")
UNSUPPORTED_KWS = {
    "goto": "goto", "switch": "switch", "case": "switch", "default": "switch",
    "struct": "struct", "union": "union", "typedef": "typedef", "do": "do-while",
    "break": "break", "continue": "continue", "sizeof": "sizeof", "char": "char type",
    "unsigned": "unsigned type", "signed": "signed type", "short": "short type",
    "const": "const qualifier", "static": "storage class", "extern": "storage class",
    "enum": "enum", "auto": "storage class", "register": "storage class",
    "volatile": "volatile qualifier",
}
UNSUPPORTED_OPS = {
    "&": "address-of or bitwise and", "|": "bitwise or", "^": "bitwise xor", "~": "bitwise not",
    "<<": "shift", ">>": "shift", "?": "conditional operator", ":": "conditional operator",
    "->": "member access", "...": "variadic function", "&=": "bitwise assignment",
    "|=": "bitwise assignment", "^=": "bitwise assignment", "<<=": "shift assignment",
    ">>=": "shift assignment",
}
ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=")
_BINARY_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}


def _int_value(text: str) -> int:
    body = text.rstrip("uUlL")
    return int(body, 16) if body[:2].lower() == "0x" else int(body, 10)


class Parser:
    def __init__(self, tokens: list[Token], file: str = "<input>"):
        self.toks = tokens
        self.pos = 0
        self.file = file
        self.defines: dict[str, object] = {}

    # -- token helpers ---------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind, text=None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_punct(self, text) -> bool:
        return self.tok.kind in ("punct", "op", "semi") and self.tok.text == text

    def expect(self, text, what=None) -> Token:
        if not self.at_punct(text) and not (self.tok.kind == "kw" and self.tok.text == text):
            self._unexpected(what or repr(text))
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self._unexpected("identifier")
        return self.advance()

    def _unexpected(self, expected: str):
        t = self.tok
        if t.kind == "kw" and t.text in UNSUPPORTED_KWS:
            raise UnsupportedConstruct(t.span, UNSUPPORTED_KWS[t.text])
        if t.kind == "op" and t.text in UNSUPPORTED_OPS:
            raise UnsupportedConstruct(t.span, UNSUPPORTED_OPS[t.text])
        raise ParseError(t.span, expected, t.text or "end of input")

    # -- preprocessing ---------------------------------------------------
    def preprocess(self):
        """Fold ``#define`` constants; identifiers naming one become ``const`` tokens."""
        out = []
        for t in self.toks:
            if t.kind == "define":
                self._define(t)
            elif t.kind == "ident" and t.text in self.defines:
                out.append(replace(t, kind="const"))
            else:
                out.append(t)
        self.toks = out
        self.pos = 0

    def _define(self, t: Token):
        text = t.text
        m = re.match(r"([A-Za-z_]\w*)(\(?)", text)
        if not m:
            raise ParseError(t.span, "macro name", text)
        if m.group(2):
            raise UnsupportedConstruct(t.span, "function-like macro")
        name = m.group(1)
        body = text[len(name):].strip()
        if not body:
            return
        sub = Parser(tokenize(body, self.file), self.file)
        sub.defines = self.defines
        sub.preprocess()
        try:
            e = sub.parse_expr()
        except ParseError as exc:
            raise UnsupportedConstruct(t.span, f"non-constant #define {name}") from exc
        val = const_value(e)
        if val is None or not sub.at("eof"):
            raise UnsupportedConstruct(t.span, f"non-constant #define {name}")
        self.defines[name] = val

    # -- top level -------------------------------------------------------
    def parse_translation_unit(self) -> Program:
        self.preprocess()
        globals_: list[VarDecl] = []
        functions: list[FunctionDef] = []
        while not self.at("eof"):
            if self.tok.kind == "pragma":
                raise ParseError(self.tok.span, "declaration or function", "#pragma " + self.tok.text)
            base, span = self.parse_type(allow_void=True)
            name_tok = self.tok
            if self.at("ident") and self.peek().text == "(":
                functions.append(self.parse_function(base, span))
                continue
            if base == "void":
                raise ParseError(name_tok.span, "function definition", name_tok.text)
            globals_.extend(self.parse_declarators(base))
        if not any(f.name == "main" for f in functions):
            raise ParseError(self.tok.span, "an entry function 'main'", "end of input")
        return Program(dict(self.defines), globals_, functions, file=self.file,
                       span=self.toks[0].span)

    def parse_type(self, allow_void=False) -> tuple[str, object]:
        t = self.tok
        if t.kind == "kw" and t.text in TYPE_KWS:
            if t.text == "void" and not allow_void:
                self._unexpected("type")
            self.advance()
            if t.text == "long" and self.at("kw", "int"):
                self.advance()
            if t.text == "long" and self.at("kw", "long"):
                raise UnsupportedConstruct(self.tok.span, "long long type")
            return t.text, t.span
        self._unexpected("type name")

    def parse_function(self, ret: str, span) -> FunctionDef:
        name = self.expect_ident()
        if name.text != "main":
            raise UnsupportedConstruct(name.span, f"function definition '{name.text}' (only main is supported)")
        self.expect("(")
        if self.at("kw", "void"):
            self.advance()
        if not self.at_punct(")"):
            raise UnsupportedConstruct(self.tok.span, "function parameters")
        self.expect(")")
        if ret not in ("int", "void"):
            raise ParseError(span, "int or void return type for main", ret)
        body = self.parse_block()
        return FunctionDef("main", ret, body, span=name.span)

    def parse_declarators(self, base: str) -> list[VarDecl]:
        decls = [self.parse_declarator(base)]
        while self.at_punct(","):
            self.advance()
            decls.append(self.parse_declarator(base))
        self.expect(";", "';'")
        return decls

    def parse_declarator(self, base: str) -> VarDecl:
        if self.at_punct("*"):
            raise UnsupportedConstruct(self.tok.span, "pointer declarator")
        name = self.expect_ident()
        dims: list[Expr] = []
        while self.at_punct("["):
            lb = self.advance()
            if self.at_punct("]"):
                raise UnsupportedConstruct(lb.span, "array without constant extent")
            e = self.parse_expr()
            v = const_value(e)
            if not isinstance(v, int):
                raise UnsupportedConstruct(e.span or lb.span, "array extent that is not an integer constant")
            if v <= 0:
                raise ParseError(e.span or lb.span, "positive array extent", str(v))
            dims.append(e)
            self.expect("]")
        if len(dims) > 2:
            raise UnsupportedConstruct(name.span, "array with more than two dimensions")
        init = None
        if self.at_punct("="):
            self.advance()
            if self.at_punct("{"):
                raise UnsupportedConstruct(self.tok.span, "array initializer")
            if dims:
                raise UnsupportedConstruct(self.tok.span, "array initializer")
            init = self.parse_expr()
        return VarDecl(name.text, base, dims, init, span=name.span)

    # -- statements ------------------------------------------------------
    def parse_block(self) -> Block:
        lb = self.expect("{")
        stmts = []
        while not self.at_punct("}"):
            if self.at("eof"):
                self._unexpected("'}'")
            stmts.append(self.parse_stmt())
        self.advance()
        return Block(stmts, span=lb.span)

    def parse_stmt(self) -> Stmt:
        t = self.tok
        if t.kind == "pragma":
            return self.parse_pragma_block()
        if self.at_punct("{"):
            return self.parse_block()
        if self.at_punct(";"):
            self.advance()
            return Empty(span=t.span)
        if t.kind == "kw":
            if t.text in TYPE_KWS and t.text != "void":
                base, _ = self.parse_type()
                return DeclStmt(self.parse_declarators(base), span=t.span)
            if t.text == "if":
                self.advance()
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                then = self.parse_stmt()
                orelse = None
                if self.at("kw", "else"):
                    self.advance()
                    orelse = self.parse_stmt()
                return If(cond, then, orelse, span=t.span)
            if t.text == "for":
                return self.parse_for()
            if t.text == "while":
                self.advance()
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                return While(cond, self.parse_stmt(), span=t.span)
            if t.text == "return":
                self.advance()
                val = None if self.at_punct(";") else self.parse_expr()
                self.expect(";", "';'")
                return Return(val, span=t.span)
            self._unexpected("statement")
        if t.kind == "ident" and self.peek().text == ":" and self.peek().kind == "op":
            raise UnsupportedConstruct(t.span, "label")
        if t.kind == "ident" and self.peek().text == "(":
            call = self.parse_call(statement=True)
            self.expect(";", "';'")
            return CallStmt(call.name, call.args, span=t.span)
        s = self.parse_simple()
        self.expect(";", "';'")
        return s

    def parse_simple(self) -> Assign:
        """Assignment, compound assignment or increment without the trailing ';'."""
        t = self.tok
        if self.at_punct("++") or self.at_punct("--"):
            op = self.advance().text
            target = self.parse_lvalue()
            return Assign(target, op, None, span=t.span)
        target = self.parse_lvalue()
        if self.at_punct("++") or self.at_punct("--"):
            return Assign(target, self.advance().text, None, span=t.span)
        if self.tok.kind == "op" and self.tok.text in ASSIGN_OPS:
            op = self.advance().text
            return Assign(target, op, self.parse_expr(), span=t.span)
        self._unexpected("assignment operator")

    def parse_lvalue(self) -> Expr:
        t = self.tok
        if t.kind == "const":
            raise ParseError(t.span, "assignable variable", t.text)
        if self.at_punct("*"):
            raise UnsupportedConstruct(t.span, "pointer dereference")
        name = self.expect_ident()
        if self.at_punct("["):
            return Index(name.text, self.parse_subscripts(), span=name.span)
        if self.at_punct(".") or self.at_punct("->"):
            raise UnsupportedConstruct(self.tok.span, "member access")
        return Var(name.text, span=name.span)

    def parse_subscripts(self) -> list[Expr]:
        idx = []
        while self.at_punct("["):
            self.advance()
            idx.append(self.parse_expr())
            self.expect("]")
        return idx

    def parse_for(self) -> For:
        t = self.advance()
        self.expect("(")
        init: Stmt | None = None
        if self.tok.kind == "kw" and self.tok.text in TYPE_KWS:
            base, span = self.parse_type()
            d = self.parse_declarator(base)
            if self.at_punct(","):
                raise UnsupportedConstruct(self.tok.span, "multiple declarators in for-init")
            init = DeclStmt([d], span=span)
        elif not self.at_punct(";"):
            init = self.parse_simple()
        if self.at_punct(","):
            raise UnsupportedConstruct(self.tok.span, "comma operator")
        self.expect(";", "';'")
        cond = None if self.at_punct(";") else self.parse_expr()
        self.expect(";", "';'")
        step = None if self.at_punct(")") else self.parse_simple()
        if self.at_punct(","):
            raise UnsupportedConstruct(self.tok.span, "comma operator")
        self.expect(")")
        body = self.parse_stmt()
        return For(init, cond, step, body, span=t.span)

    def parse_pragma_block(self) -> PragmaBlock:
        t = self.advance()
        directive = parse_omp_pragma(t.text, t.span)
        if not self.at("kw", "for"):
            raise PragmaError("'#pragma omp parallel for' must be followed by a for statement", t.span)
        loop = self.parse_for()
        return PragmaBlock(directive, loop, span=t.span)

    # -- expressions -----------------------------------------------------
    def parse_expr(self, min_prec=1) -> Expr:
        left = self.parse_unary()
        while True:
            t = self.tok
            if t.kind == "op" and t.text in UNSUPPORTED_OPS:
                raise UnsupportedConstruct(t.span, UNSUPPORTED_OPS[t.text])
            if t.kind == "op" and t.text in ("=",) + ASSIGN_OPS[1:]:
                raise UnsupportedConstruct(t.span, "assignment inside expression")
            prec = _BINARY_PREC.get(t.text) if t.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.parse_expr(prec + 1)
            left = Binary(t.text, left, right, span=t.span)

    def parse_unary(self) -> Expr:
        t = self.tok
        if t.kind == "op" and t.text in ("-", "+", "!"):
            self.advance()
            return Unary(t.text, self.parse_unary(), span=t.span)
        if t.kind == "op" and t.text in ("++", "--"):
            raise UnsupportedConstruct(t.span, "increment inside expression")
        if t.kind == "op" and t.text in ("&", "*"):
            raise UnsupportedConstruct(t.span, "address-of" if t.text == "&" else "pointer dereference")
        if t.kind == "op" and t.text in UNSUPPORTED_OPS:
            raise UnsupportedConstruct(t.span, UNSUPPORTED_OPS[t.text])
        e = self.parse_primary()
        if self.at_punct("++") or self.at_punct("--"):
            raise UnsupportedConstruct(self.tok.span, "increment inside expression")
        return e

    def parse_primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(_int_value(t.text), span=t.span)
        if t.kind == "float":
            self.advance()
            return FloatLit(float(t.text.rstrip("fFlL")), t.text, span=t.span)
        if t.kind == "const":
            self.advance()
            return Const(t.text, self.defines[t.text], span=t.span)
        if t.kind == "string":
            raise UnsupportedConstruct(t.span, "string literal outside printf")
        if t.kind == "ident":
            if self.peek().text == "(":
                return self.parse_call(statement=False)
            self.advance()
            if self.at_punct("["):
                return Index(t.text, self.parse_subscripts(), span=t.span)
            if self.at_punct(".") or self.at_punct("->"):
                raise UnsupportedConstruct(self.tok.span, "member access")
            return Var(t.text, span=t.span)
        if self.at_punct("("):
            self.advance()
            if self.tok.kind == "kw" and self.tok.text in TYPE_KWS:
                raise UnsupportedConstruct(self.tok.span, "cast")
            e = self.parse_expr()
            self.expect(")")
            return e
        self._unexpected("expression")

    def parse_call(self, statement: bool) -> Call:
        name = self.advance()
        allowed = INTRINSICS + (("printf",) if statement else ())
        if name.text not in allowed:
            raise UnsupportedConstruct(name.span, f"call to '{name.text}'")
        self.expect("(")
        args: list[Expr] = []
        if name.text == "printf":
            if self.tok.kind != "string":
                self._unexpected("format string")
            s = self.advance()
            args.append(StringLit(s.text, span=s.span))
            while self.at_punct(","):
                self.advance()
                args.append(self.parse_expr())
        elif not self.at_punct(")"):
            args.append(self.parse_expr())
            while self.at_punct(","):
                self.advance()
                args.append(self.parse_expr())
        self.expect(")")
        arity = {"sqrt": 1, "fabs": 1, "min": 2, "max": 2}.get(name.text)
        if arity is not None and len(args) != arity:
            raise ParseError(name.span, f"{arity} argument(s) to {name.text}", str(len(args)))
        return Call(name.text, args, span=name.span)


# ---------------------------------------------------------------------------
# name resolution and light type checking


class _Scopes:
    def __init__(self):
        self.stack: list[dict[str, VarDecl]] = [{}]

    def push(self):
        self.stack.append({})

    def pop(self):
        self.stack.pop()

    def declare(self, d: VarDecl):
        if d.name in self.stack[-1]:
            raise ParseError(d.span, "unique declaration", f"redeclaration of {d.name}")
        self.stack[-1][d.name] = d

    def lookup(self, name: str, span) -> VarDecl:
        for scope in reversed(self.stack):
            if name in scope:
                return scope[name]
        raise ParseError(span, "declared identifier", name)


def expr_kind(e: Expr, lookup) -> str:
    """Return 'int' or 'double' for an expression (the numeric model has two kinds)."""
    if isinstance(e, IntLit):
        return "int"
    if isinstance(e, FloatLit):
        return "double"
    if isinstance(e, Const):
        return "int" if isinstance(e.value, int) else "double"
    if isinstance(e, (Var, Index)):
        return "int" if is_int_kind(lookup(e).base) else "double"
    if isinstance(e, Unary):
        return "int" if e.op == "!" else expr_kind(e.operand, lookup)
    if isinstance(e, Binary):
        if e.op in CMP_OPS or e.op in ("&&", "||"):
            return "int"
        kinds = {expr_kind(e.left, lookup), expr_kind(e.right, lookup)}
        return "double" if "double" in kinds else "int"
    if isinstance(e, Call):
        if e.name in ("sqrt", "fabs"):
            return "double"
        kinds = {expr_kind(a, lookup) for a in e.args}
        return "double" if "double" in kinds else "int"
    raise TypeError(f"no kind for {e!r}")


class Resolver:
    """Checks that every use resolves and subscripts match declared ranks."""

    def __init__(self, program: Program):
        self.program = program
        self.scopes = _Scopes()
        self.next_block = 0

    def run(self):
        for g in self.program.globals:
            if g.init is not None:
                if const_value(g.init) is None:
                    raise UnsupportedConstruct(g.init.span or g.span, "non-constant global initializer")
            self.scopes.declare(g)
        for f in self.program.functions:
            self.scopes.push()
            self.stmt(f.body, new_scope=False)
            self.scopes.pop()

    def lookup(self, e) -> VarDecl:
        return self.scopes.lookup(e.name, e.span)

    def expr(self, e: Expr):
        if isinstance(e, Var):
            d = self.lookup(e)
            if d.is_array:
                raise UnsupportedConstruct(e.span, f"array '{e.name}' used as a value")
        elif isinstance(e, Index):
            d = self.lookup(e)
            if len(e.indices) != len(d.dims):
                raise ParseError(e.span, f"{len(d.dims)} subscript(s) for '{e.name}'", str(len(e.indices)))
            for i in e.indices:
                self.expr(i)
                if expr_kind(i, self.lookup) != "int":
                    raise ParseError(i.span or e.span, "integer subscript", "floating expression")
        elif isinstance(e, Binary):
            self.expr(e.left)
            self.expr(e.right)
            if e.op == "%" and expr_kind(e, self.lookup) != "int":
                raise ParseError(e.span, "integer operands to %", "floating operand")
        elif isinstance(e, Unary):
            self.expr(e.operand)
        elif isinstance(e, Call):
            for a in e.args:
                self.expr(a)

    def stmt(self, s: Stmt, new_scope=True):
        if isinstance(s, Block):
            if new_scope:
                self.scopes.push()
            for c in s.stmts:
                self.stmt(c)
            if new_scope:
                self.scopes.pop()
        elif isinstance(s, DeclStmt):
            for d in s.decls:
                if d.init is not None:
                    self.expr(d.init)
                self.scopes.declare(d)
        elif isinstance(s, Assign):
            self.expr(s.target)
            if s.value is not None:
                self.expr(s.value)
            if s.op == "%=" and expr_kind(s.target, self.lookup) != "int":
                raise ParseError(s.span, "integer target for %=", "floating variable")
        elif isinstance(s, If):
            self.expr(s.cond)
            self.stmt(s.then)
            if s.orelse is not None:
                self.stmt(s.orelse)
        elif isinstance(s, For):
            self.scopes.push()
            if s.init is not None:
                self.stmt(s.init)
            if s.cond is not None:
                self.expr(s.cond)
            if s.step is not None:
                self.stmt(s.step)
            self.stmt(s.body)
            self.scopes.pop()
        elif isinstance(s, While):
            self.expr(s.cond)
            self.stmt(s.body)
        elif isinstance(s, CallStmt):
            for a in s.args:
                if not isinstance(a, StringLit):
                    self.expr(a)
        elif isinstance(s, Return):
            if s.value is not None:
                self.expr(s.value)
        elif isinstance(s, PragmaBlock):
            s.block_id = self.next_block
            self.next_block += 1
            d = s.directive
            for name in d.reduction_vars:
                decl = self.scopes.lookup(name, d.span)
                if decl.is_array:
                    raise PragmaError(f"reduction variable '{name}' must be a scalar", d.span)
            for name in d.private + d.shared:
                self.scopes.lookup(name, d.span)
            self.stmt(s.loop)


def parse_translation_unit(tokens: list[Token], file: str | None = None) -> Program:
    """Parse a token list into a resolved :class:`Program`."""
    if file is None:
        file = tokens[0].span.file if tokens else "<input>"
    program = Parser(tokens, file).parse_translation_unit()
    Resolver(program).run()
    return program


def parse_source(text: str, file: str = "<input>") -> Program:
    return parse_translation_unit(tokenize(text, file), file)
