import pytest

from omp2dm import corpus
from omp2dm.errors import LexError, ParseError, PragmaError, UnsupportedConstruct
from omp2dm.frontend.ast import Assign, For, Index, PragmaBlock, Return, Var
from omp2dm.frontend.lexer import tokenize
from omp2dm.frontend.parser import parse_source
from omp2dm.frontend.pragma import format_directive, parse_omp_pragma
from omp2dm.frontend.printer import CPrinter


def kinds(text):
    return [(t.kind, t.text) for t in tokenize(text)]


def test_tokenize_declaration():
    assert kinds("int x = 0;") == [("kw", "int"), ("ident", "x"), ("op", "="), ("int", "0"), ("semi", ";"), ("eof", "")]


def test_tokenize_pragma_before_loop():
    toks = kinds("#pragma omp parallel for\nfor(i=0;i<N;i++)")
    assert toks[0] == ("pragma", "omp parallel for")
    assert toks[1] == ("kw", "for")


def test_tokenize_illegal_character_column():
    with pytest.raises(LexError) as ei:
        tokenize("0x@")
    assert ei.value.span.column == 3


def test_unterminated_string():
    with pytest.raises(LexError):
        tokenize('printf("abc);')


def test_array_then_sum_shape_has_two_blocks():
    prog = corpus.load("array_then_sum")
    blocks = prog.pragma_blocks()
    assert len(blocks) == 2
    assert [b.block_id for b in blocks] == [0, 1]
    assert blocks[1].directive.reduction_op == "+"
    assert blocks[0].directive.target_device == "mpi"


def test_empty_program():
    prog = parse_source("int main(){return 0;}")
    assert len(prog.main.body.stmts) == 1
    assert isinstance(prog.main.body.stmts[0], Return)


@pytest.mark.parametrize("src, construct", [
    ("int main(){goto L;}", "goto"),
    ("int main(){switch(1){}}", "switch"),
    ("int *p; int main(){return 0;}", "pointer declarator"),
])
def test_unsupported_constructs(src, construct):
    with pytest.raises(UnsupportedConstruct) as ei:
        parse_source(src)
    assert ei.value.construct == construct


def test_undeclared_identifier():
    with pytest.raises(ParseError):
        parse_source("int main(){ x = 1; return 0; }")


def test_pragma_schedule():
    d = parse_omp_pragma("omp parallel for schedule(dynamic)")
    assert (d.kind, d.schedule) == ("parallel_for", "dynamic")


def test_pragma_reduction():
    d = parse_omp_pragma("omp parallel for reduction(+:sum)")
    assert (d.reduction_op, d.reduction_vars) == ("+", ["sum"])


def test_pragma_defaults():
    d = parse_omp_pragma("omp parallel for")
    assert d.schedule == "unspecified" and d.reduction_op is None and d.chunk is None


def test_pragma_full_clause_set():
    d = parse_omp_pragma("omp parallel for schedule(guided, 4) private(j, k) shared(A) target device(mpi)")
    assert (d.schedule, d.chunk, d.private, d.shared, d.target_device) == ("guided", 4, ["j", "k"], ["A"], "mpi")


@pytest.mark.parametrize("raw", [
    "omp parallel for schedule(dynamic) schedule(static)",
    "omp parallel for reduction(%:s)",
    "omp parallel for schedule(",
])
def test_pragma_errors(raw):
    with pytest.raises(PragmaError):
        parse_omp_pragma(raw)


def test_format_directive_round_trip():
    raw = "omp parallel for schedule(static) reduction(*:p) private(j)"
    d = parse_omp_pragma(raw)
    assert parse_omp_pragma(format_directive(d)) == d


def test_loop_structure():
    prog = parse_source("int a[8];\nint main(){int i;\n#pragma omp parallel for\nfor(i=0;i<8;i++) a[i]=i;\nreturn 0;}")
    (blk,) = prog.pragma_blocks()
    assert isinstance(blk, PragmaBlock) and isinstance(blk.loop, For)
    body = blk.loop.body
    stmt = body.stmts[0] if hasattr(body, "stmts") else body
    assert isinstance(stmt, Assign) and isinstance(stmt.target, Index)
    assert isinstance(stmt.value, Var) and stmt.value.name == "i"


def test_defines_are_folded():
    prog = parse_source("#define N 10\nint a[N];\nint main(){return 0;}")
    assert prog.globals[0].shape == (10,)


@pytest.mark.parametrize("name", corpus.KERNELS + corpus.EXTRA)
def test_print_parse_round_trip(name):
    prog = corpus.load(name)
    text = CPrinter().program(prog)
    again = parse_source(text, f"{name}.c")
    assert again == prog
    assert CPrinter().program(again) == text
