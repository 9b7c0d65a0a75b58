"""Numeric model shared by the interpreter and the simulator.

Integers are 64-bit two's complement whatever their declared C kind;
floating values are IEEE doubles.  Arrays live in flat row-major lists.
"""

from __future__ import annotations

import math
import re

import numpy as np

from ..errors import ExecError

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1
_BIAS = 1 << 63
_MASK = (1 << 64) - 1


def wrap64(v: int) -> int:
    return ((v + _BIAS) & _MASK) - _BIAS


def idiv(a: int, b: int) -> int:
    """C division on integers: truncates toward zero."""
    if b == 0:
        raise ExecError("integer division by zero")
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap64(q)


def imod(a: int, b: int) -> int:
    if b == 0:
        raise ExecError("integer remainder by zero")
    return wrap64(a - b * idiv(a, b))


def f2i(v: float) -> int:
    """Conversion from double to an integer variable (truncation)."""
    if math.isnan(v) or math.isinf(v):
        raise ExecError(f"cannot convert {v} to an integer")
    return wrap64(int(v))


def c_sqrt(v) -> float:
    v = float(v)
    return math.sqrt(v) if v >= 0 else math.nan


def c_fabs(v) -> float:
    return abs(float(v))


def zero_of(base: str):
    return 0 if base in ("int", "long") else 0.0


def convert(base: str, v):
    """Store conversion into a variable of kind ``base``."""
    if base in ("int", "long"):
        return f2i(v) if isinstance(v, float) else wrap64(int(v))
    return float(v)


def flat_input(base: str, shape: tuple[int, ...], value) -> list:
    """Turn a user-supplied array into the flat storage list, checking its shape."""
    arr = np.asarray(value)
    if arr.shape != shape:
        raise ValueError(f"input shape {arr.shape} does not match declared {shape}")
    if base in ("int", "long"):
        return [wrap64(int(x)) for x in arr.ravel().tolist()]
    return [float(x) for x in arr.ravel().tolist()]


def as_array(base: str, shape: tuple[int, ...], flat: list) -> np.ndarray:
    dtype = np.int64 if base in ("int", "long") else np.float64
    return np.array(flat, dtype=dtype).reshape(shape)


_CONV = re.compile(r"%(?:[-+ #0]*\d*(?:\.\d+)?)(?:hh|h|ll|l|L)?([diouxXeEfFgGcs%])")


def format_printf(fmt: str, values: tuple) -> str:
    """Render a printf call the way C would for the supported conversions."""
    text = fmt.encode().decode("unicode_escape")
    out, pos, k = [], 0, 0
    for m in _CONV.finditer(text):
        out.append(text[pos:m.start()])
        pos = m.end()
        conv = m.group(1)
        if conv == "%":
            out.append("%")
            continue
        spec = re.sub(r"(hh|h|ll|l|L)", "", m.group(0))
        v = values[k] if k < len(values) else 0
        k += 1
        if conv in "diouxXc":
            v = int(v)
        elif conv in "eEfFgG":
            v = float(v)
        out.append(spec % v)
    out.append(text[pos:])
    return "".join(out)
