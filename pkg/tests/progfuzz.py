"""Random programs in the supported subset, for the classification oracle.

Each program has one pragma-block (optionally inside a time loop) whose body
mixes array updates, private temporaries, guarded writes, reductions and
shared-scalar writes, followed by code that reads a random subset of the
variables.  Programs need not be transformable: classification is defined
for every block.
"""

import random

N, M = 8, 4
SCALARS = ["s", "t", "x", "y"]


def _expr(rng, depth=0):
    leaves = ["i", "x", "y", "t", "a[i]", "c[i]", "b[i][0]", "a[N - 1 - i]", "3", "1.5"]
    if depth > 1 or rng.random() < 0.4:
        return rng.choice(leaves)
    op = rng.choice(["+", "-", "*"])
    return f"({_expr(rng, depth + 1)} {op} {_expr(rng, depth + 1)})"


def _body(rng, red):
    stmts = []
    needs_j = False
    for _ in range(rng.randint(1, 4)):
        r = rng.random()
        if r < 0.25:
            stmts.append(f"a[i] = {_expr(rng)};")
        elif r < 0.4:
            needs_j = True
            stmts.append(f"for (j = 0; j < M; j++) b[i][j] = {_expr(rng)} + j;")
        elif r < 0.5:
            stmts.append(f"c[i] = c[i] + {_expr(rng)};")
        elif r < 0.6:
            stmts.append(f"{{ int tmp; tmp = {_expr(rng)}; a[i] = tmp; }}")
        elif r < 0.7:
            stmts.append(f"if (a[i] > 3) c[i] = {_expr(rng)};")
        elif r < 0.8 and red:
            stmts.append(f"{red[1]} {red[0]}= {_expr(rng)};")
        elif r < 0.9:
            stmts.append(f"{rng.choice(['t', 'y'])} = {_expr(rng)};")
        else:
            stmts.append(f"d = d + c[i];")
    return stmts, needs_j


def _after(rng):
    out = []
    for name in ["s", "t", "x", "y", "d", "a[2]", "b[1][1]", "c[3]"]:
        if rng.random() < 0.4:
            out.append(f"u = u + {name};")
    if rng.random() < 0.3:
        out.append(f"{rng.choice(['t', 'a[0]'])} = 7;")
    return out


def program(seed: int) -> str:
    rng = random.Random(seed)
    red = None
    if rng.random() < 0.4:
        red = (rng.choice(["+", "-", "*"]), rng.choice(["s", "d"]))
    body, needs_j = _body(rng, red)
    clauses = []
    if needs_j:
        clauses.append("private(j)")
    if red:
        clauses.append(f"reduction({red[0]}:{red[1]})")
    clauses.append(rng.choice(["", "schedule(static)", "schedule(dynamic)"]))
    pragma = "#pragma omp parallel for " + " ".join(c for c in clauses if c)
    loop = f"{pragma}\n    for (i = 0; i < N; i++) {{\n        " + "\n        ".join(body) + "\n    }"
    if rng.random() < 0.3:
        loop = f"for (k = 0; k < 2; k++) {{\n    {loop}\n    }}"
    pre = []
    for v in ("x", "y", "t", "s"):
        if rng.random() < 0.7:
            pre.append(f"{v} = {rng.randint(0, 5)};")
    lines = [
        f"#define N {N}", f"#define M {M}",
        "int a[N]; int b[N][M]; double c[N];",
        "double d;",
        "long s; long t; long x; long y;",
        "int main() {",
        "    int i, j, k;",
        "    double u;",
        "    u = 0.0;",
        "    d = 1.0;",
        "    for (i = 0; i < N; i++) { a[i] = i % 5; c[i] = i * 0.5; for (j = 0; j < M; j++) b[i][j] = i + j; }",
        *("    " + p for p in pre),
        "    " + loop,
        *("    " + p for p in _after(rng)),
        "    return 0;",
        "}",
    ]
    return "\n".join(lines) + "\n"
