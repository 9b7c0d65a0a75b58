"""C text for lowered programs."""

from __future__ import annotations

from ..frontend.printer import CPrinter, format_number
from .ir import MpiProgram

PRELUDE = [
    "#include <mpi.h>",
    "#include <stdio.h>",
    "#include <math.h>",
    "",
    "#ifndef min",
    "#define min(a, b) ((a) < (b) ? (a) : (b))",
    "#endif",
    "#ifndef max",
    "#define max(a, b) ((a) > (b) ? (a) : (b))",
    "#endif",
]


class MpiPrinter(CPrinter):
    """Adds the message-passing nodes to the plain C printer."""

    def __init__(self, status: str = "_omp2dm_status"):
        self.status = status

    def expr_AnySource(self, e):
        return "MPI_ANY_SOURCE"

    def expr_AnyTag(self, e):
        return "MPI_ANY_TAG"

    def expr_TagRef(self, e):
        return e.macro

    def expr_StatusField(self, e):
        return f"{self.status}.{e.name}"

    def expr_Buf(self, e):
        if not e.indices:
            return f"&{e.name}"
        return f"&{e.name}" + "".join(f"[{self.expr(i)}]" for i in e.indices)

    def _line(self, level, text):
        return [self.pad(level) + text]

    def stmt_MpiInit(self, s, level):
        return self._line(level, "MPI_Init(NULL, NULL);")

    def stmt_MpiFinalize(self, s, level):
        return self._line(level, "MPI_Finalize();")

    def stmt_CommRank(self, s, level):
        return self._line(level, f"MPI_Comm_rank(MPI_COMM_WORLD, &{s.target});")

    def stmt_CommSize(self, s, level):
        return self._line(level, f"MPI_Comm_size(MPI_COMM_WORLD, &{s.target});")

    def stmt_MpiSend(self, s, level):
        args = [self.expr(s.buf), self.expr(s.count), s.dtype, self.expr(s.dest), self.expr(s.tag)]
        return self._line(level, f"MPI_Send({', '.join(args)}, MPI_COMM_WORLD);")

    def stmt_MpiRecv(self, s, level):
        args = [self.expr(s.buf), self.expr(s.count), s.dtype, self.expr(s.source), self.expr(s.tag)]
        return self._line(level, f"MPI_Recv({', '.join(args)}, MPI_COMM_WORLD, &{self.status});")

    def stmt_StatusDecl(self, s, level):
        return self._line(level, f"MPI_Status {s.name};")

    def stmt_Comment(self, s, level):
        return self._line(level, f"/* omp2dm: {s.text} */")

    def stmt_ProtocolFail(self, s, level):
        return [
            self.pad(level) + f'printf("omp2dm: unexpected tag %d\\n", (int)({self.expr(s.tag)}));',
            self.pad(level) + "MPI_Finalize();",
            self.pad(level) + "return 1;",
        ]

    def stmt_OmpPragma(self, s, level):
        return ["#pragma " + s.text]

    def mpi_program(self, prog: MpiProgram) -> str:
        lines = list(PRELUDE) + [""]
        lines += [f"#define {k} {format_number(v)}" for k, v in prog.defines.items()]
        if prog.tags:
            lines += [""] + [f"#define {macro} {value}" for macro, value in prog.tags.items()]
        lines.append("")
        for g in prog.globals:
            lines.append(self.decl_line([g]))
        if prog.globals:
            lines.append("")
        lines += self._attach("int main(void)", self.body(prog.main_body(), 0))
        return "\n".join(lines) + "\n"


def print_c(prog: MpiProgram) -> str:
    """The complete translation unit for an MPI program."""
    return MpiPrinter().mpi_program(prog)
