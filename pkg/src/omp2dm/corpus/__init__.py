"""Bundled benchmark kernels (desk-scale analogues of common stencil and
linear-algebra codes) and the sample programs used by the tests."""

from __future__ import annotations

from importlib import resources

KERNELS = ("gemm", "2mm", "conv2d", "jacobi2d", "syrk", "syr2k", "seidel2d")
EXTRA = ("skewed", "array_then_sum", "scalar_sum", "scalar_classes")

# Kernels whose annotated loops are all expected to be distributed; the
# others keep at least one block sequential.
EXPECTED_FALLBACKS = {"seidel2d": {0: "ConcurrentSharedWrite"}}


def source(name: str) -> str:
    if name not in KERNELS + EXTRA:
        raise KeyError(f"no bundled program named {name!r}")
    return resources.files(__package__).joinpath(f"{name}.c").read_text()


def path(name: str) -> str:
    return str(resources.files(__package__).joinpath(f"{name}.c"))


def load(name: str):
    from ..frontend.parser import parse_source

    return parse_source(source(name), f"{name}.c")
