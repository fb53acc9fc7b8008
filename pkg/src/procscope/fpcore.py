"""Bit-exact floating-point primitives.

This module holds the pieces every other module leans on:

* :class:`BitPattern` and :func:`to_bits` / :func:`from_bits` for exact
  interchange encodings (NaN payloads and signed zeros included),
* the four π literals used by the sine probes,
* :class:`EvalOrder`, a compiled expression whose evaluation order and
  rounding points are pinned, and :func:`eval_ordered` to run it,
* the :class:`Backend` interface plus the two native backends.

A backend is the arithmetic engine a probe runs on.  Native backends use the
host FPU (CPython floats, numpy float32 scalars); emulated backends live in
:mod:`procscope.emul`.
"""

from __future__ import annotations

import ast
import math
import re
import struct
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from .errors import EncodingError, SpecificationError

_HEX_RE = re.compile(r"[0-9a-f]+")
_PATTERN_RE = re.compile(r"b(\d+):([0-9a-f]+)")


@dataclass(frozen=True)
class BitPattern:
    """Exact encoding of one floating-point datum.

    ``hex`` is big-endian, lowercase and zero padded to ``ceil(width / 4)``
    digits (exactly ``width / 4`` for the interchange widths 32 and 64).
    """

    width: int
    hex: str

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise EncodingError(f"bad width {self.width}")
        if len(self.hex) != (self.width + 3) // 4 or not _HEX_RE.fullmatch(self.hex):
            raise EncodingError(f"bad hex {self.hex!r} for width {self.width}")
        if int(self.hex, 16) >> self.width:
            raise EncodingError(f"hex {self.hex!r} exceeds {self.width} bits")

    @classmethod
    def from_int(cls, value: int, width: int) -> BitPattern:
        if value < 0 or value >> width:
            raise EncodingError(f"{value:#x} does not fit in {width} bits")
        return cls(width, format(value, f"0{(width + 3) // 4}x"))

    @classmethod
    def parse(cls, text: str) -> BitPattern:
        """Inverse of ``str()``: ``b64:3ff0000000000000``."""
        m = _PATTERN_RE.fullmatch(text)
        if not m:
            raise EncodingError(f"malformed bit pattern {text!r}")
        return cls(int(m.group(1)), m.group(2))

    @property
    def value(self) -> int:
        return int(self.hex, 16)

    def low32(self) -> int:
        return self.value & 0xFFFFFFFF

    def __str__(self) -> str:
        return f"b{self.width}:{self.hex}"


def to_bits(x: Any) -> BitPattern:
    """Interchange encoding of a binary64 (Python float) or binary32 (numpy) value."""
    if isinstance(x, np.float32):
        return BitPattern.from_int(int(np.array(x, dtype=np.float32).view(np.uint32)), 32)
    if isinstance(x, float):
        return BitPattern(64, struct.pack(">d", x).hex())
    raise EncodingError(f"cannot encode {type(x).__name__}")


def from_bits(p: BitPattern) -> float | np.float32:
    """Decode a 32- or 64-bit pattern; bit-for-bit inverse of :func:`to_bits`."""
    if p.width == 64:
        return struct.unpack(">d", bytes.fromhex(p.hex))[0]
    if p.width == 32:
        return np.array(p.value, dtype=np.uint32).view(np.float32)[()]
    raise EncodingError(f"no native type for width {p.width}")


class PiConstant(str, Enum):
    PI1 = "PI1"
    PI2 = "PI2"
    PI3 = "PI3"
    PI4 = "PI4"

    @property
    def literal(self) -> str:
        return PI_LITERALS[self]


PI_LITERALS = {
    PiConstant.PI1: "3.141592653",
    PiConstant.PI2: "3.141592653589",
    PiConstant.PI3: "3.141592653589793",
    PiConstant.PI4: "3.1415926535897932385",
}


def pi_value(pi: PiConstant) -> float:
    # CPython's float() parser is correctly rounded (nearest-even).
    return float(PI_LITERALS[PiConstant(pi)])


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


class Backend:
    """Arithmetic engine interface.

    Every binary operation rounds exactly once to the backend's working
    precision.  Invalid operations and overflow return IEEE default results,
    never raise.
    """

    name: str = "abstract"
    fma_enabled: bool = False

    def const(self, text: str) -> Any:
        """Correctly rounded value of a decimal literal."""
        raise NotImplementedError

    def from_int(self, n: int) -> Any:
        return self.const(str(n))

    def add(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def sub(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def mul(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def div(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def fma(self, a: Any, b: Any, c: Any) -> Any:
        raise NotImplementedError(f"{self.name} has no fused multiply-add")

    def neg(self, a: Any) -> Any:
        raise NotImplementedError

    def sqrt(self, a: Any) -> Any:
        raise NotImplementedError

    def sin(self, a: Any) -> Any:
        raise NotImplementedError

    def eq(self, a: Any, b: Any) -> bool:
        """IEEE equality: NaN never equal, +0 == -0."""
        raise NotImplementedError

    def bits(self, a: Any) -> BitPattern:
        raise NotImplementedError

    def to_fraction(self, a: Any) -> Fraction | None:
        """Exact value, or None for infinities and NaN."""
        raise NotImplementedError

    def to_float(self, a: Any) -> float:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<backend {self.name}>"


class NativeBinary64(Backend):
    """CPython floats: the host's binary64 unit, one rounding per operation."""

    name = "native-binary64"

    def const(self, text: str) -> float:
        return float(text)

    def from_int(self, n: int) -> float:
        return float(n)

    def add(self, a: float, b: float) -> float:
        return a + b

    def sub(self, a: float, b: float) -> float:
        return a - b

    def mul(self, a: float, b: float) -> float:
        return a * b

    def div(self, a: float, b: float) -> float:
        try:
            return a / b
        except ZeroDivisionError:
            if a == 0.0 or math.isnan(a):
                return math.nan
            return math.copysign(math.inf, math.copysign(1.0, a) * math.copysign(1.0, b))

    def neg(self, a: float) -> float:
        return -a

    def sqrt(self, a: float) -> float:
        try:
            return math.sqrt(a)
        except ValueError:
            return math.nan

    def sin(self, a: float) -> float:
        try:
            return math.sin(a)
        except ValueError:
            return math.nan

    def eq(self, a: float, b: float) -> bool:
        return a == b

    def bits(self, a: float) -> BitPattern:
        return to_bits(float(a))

    def to_fraction(self, a: float) -> Fraction | None:
        return Fraction(a) if math.isfinite(a) else None

    def to_float(self, a: float) -> float:
        return float(a)


_FLT_MAX = np.finfo(np.float32).max


def _nearest_float32(text: str) -> np.float32:
    # np.float32(str) goes through binary64 first; fix any double rounding.
    exact = Fraction(text)
    with np.errstate(over="ignore"):
        guess = np.float32(float(text))
    if not np.isfinite(guess):
        # Below the midpoint between FLT_MAX and 2**128 still rounds to FLT_MAX.
        if abs(exact) < 2**128 - 2**103:
            return np.float32(-_FLT_MAX if exact < 0 else _FLT_MAX)
        return guess
    with np.errstate(over="ignore"):
        candidates = [np.nextafter(guess, np.float32(-np.inf)), guess,
                      np.nextafter(guess, np.float32(np.inf))]

    def key(c: np.float32) -> tuple[Fraction, int]:
        if not np.isfinite(c):
            return (Fraction(10) ** 400, 1)
        odd = int(np.array(c, dtype=np.float32).view(np.uint32)) & 1
        return (abs(Fraction(float(c)) - exact), odd)

    return min(candidates, key=key)


class NativeBinary32(Backend):
    """Single precision on the host FPU via numpy float32 scalars."""

    name = "native-binary32"

    def const(self, text: str) -> np.float32:
        low = text.strip().lower()
        if low in ("inf", "+inf", "-inf", "nan"):
            return np.float32(low)
        return _nearest_float32(text)

    def _op(self, fn, *args) -> np.float32:
        with np.errstate(all="ignore"):
            return np.float32(fn(*args))

    def add(self, a, b):
        return self._op(np.add, a, b)

    def sub(self, a, b):
        return self._op(np.subtract, a, b)

    def mul(self, a, b):
        return self._op(np.multiply, a, b)

    def div(self, a, b):
        return self._op(np.divide, a, b)

    def neg(self, a):
        return np.float32(-a)

    def sqrt(self, a):
        return self._op(np.sqrt, a)

    def sin(self, a):
        return self._op(np.sin, a)

    def eq(self, a, b) -> bool:
        return bool(a == b)

    def bits(self, a) -> BitPattern:
        return to_bits(np.float32(a))

    def to_fraction(self, a) -> Fraction | None:
        return Fraction(float(a)) if np.isfinite(a) else None

    def to_float(self, a) -> float:
        return float(a)


NATIVE64 = NativeBinary64()


# ---------------------------------------------------------------------------
# Ordered evaluation
# ---------------------------------------------------------------------------

# Operand references inside a compiled expression.
Operand = tuple[str, Any]  # ("input", name) | ("const", literal) | ("step", index)

_BINOPS = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Div: "div"}
_CALLS = {"sqrt", "sin"}


@dataclass(frozen=True)
class Step:
    op: str
    args: tuple[Operand, ...]


@dataclass(frozen=True)
class EvalOrder:
    """An expression flattened into single-rounding steps.

    Build one with :meth:`compile`.  Operands are evaluated left before
    right; ``X**k`` (integer ``k``) becomes ``X*X``, ``(X*X)*X``, ... and
    numeric literals are kept as text so each backend rounds them itself.
    """

    steps: tuple[Step, ...]
    inputs: frozenset[str]
    source: str = ""

    @classmethod
    def compile(cls, source: str) -> EvalOrder:
        try:
            tree = ast.parse(source.strip(), mode="eval")
        except SyntaxError as exc:
            raise SpecificationError(f"cannot parse expression {source!r}: {exc.msg}") from None
        text = source.strip()
        steps: list[Step] = []
        names: set[str] = set()

        def emit(op: str, *args: Operand) -> Operand:
            steps.append(Step(op, tuple(args)))
            return ("step", len(steps) - 1)

        def walk(node: ast.AST) -> Operand:
            if isinstance(node, ast.Name):
                names.add(node.id)
                return ("input", node.id)
            if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                    and not isinstance(node.value, bool):
                return ("const", ast.get_source_segment(text, node))
            if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
                return emit("neg", walk(node.operand))
            if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.UAdd):
                return walk(node.operand)
            if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
                k = node.right
                if not (isinstance(k, ast.Constant) and type(k.value) is int and k.value >= 0):
                    raise SpecificationError("powers need a non-negative integer literal exponent")
                base = walk(node.left)
                if k.value == 0:
                    return ("const", "1")
                acc = base
                for _ in range(k.value - 1):
                    acc = emit("mul", acc, base)
                return acc
            if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
                left = walk(node.left)
                right = walk(node.right)
                return emit(_BINOPS[type(node.op)], left, right)
            if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                    and node.func.id in _CALLS and len(node.args) == 1 and not node.keywords:
                return emit(node.func.id, walk(node.args[0]))
            raise SpecificationError(f"unsupported construct {ast.dump(node)[:60]}")

        result = walk(tree.body)
        if result[0] != "step" or result[1] != len(steps) - 1:
            emit("pos", result)
        return cls(tuple(steps), frozenset(names), text)

    def fusion_plan(self) -> dict[int, int]:
        """Map add/sub step index -> operand position of a single-use product.

        Used only when a backend enables fused multiply-add; mirrors what a
        compiler does under floating-point contraction.  The right operand
        is preferred when both qualify.
        """
        uses: dict[int, int] = {}
        for step in self.steps:
            for kind, ref in step.args:
                if kind == "step":
                    uses[ref] = uses.get(ref, 0) + 1
        plan: dict[int, int] = {}
        for i, step in enumerate(self.steps):
            if step.op not in ("add", "sub"):
                continue
            for pos in (1, 0):
                kind, ref = step.args[pos]
                if kind == "step" and self.steps[ref].op == "mul" and uses[ref] == 1:
                    plan[i] = pos
                    break
        return plan


def eval_ordered(expr: EvalOrder | str, inputs: Mapping[str, Any], backend: Backend) -> Any:
    """Evaluate ``expr`` step by step on ``backend``.

    ``inputs`` maps names to backend values; a ``str`` value is treated as a
    decimal literal and rounded by the backend.
    """
    if isinstance(expr, str):
        expr = EvalOrder.compile(expr)
    missing = expr.inputs - set(inputs)
    if missing:
        raise SpecificationError(f"unbound operand(s): {', '.join(sorted(missing))}")
    bound = {k: backend.const(v) if isinstance(v, str) else v for k, v in inputs.items()}
    plan = expr.fusion_plan() if backend.fma_enabled else {}
    values: list[Any] = []
    consts: dict[str, Any] = {}

    def fetch(operand: Operand) -> Any:
        kind, ref = operand
        if kind == "step":
            return values[ref]
        if kind == "input":
            return bound[ref]
        if ref not in consts:
            consts[ref] = backend.const(ref)
        return consts[ref]

    for i, step in enumerate(expr.steps):
        op = step.op
        if i in plan:
            pos = plan[i]
            prod = expr.steps[step.args[pos][1]]
            a, b = fetch(prod.args[0]), fetch(prod.args[1])
            other = fetch(step.args[1 - pos])
            if op == "add":
                values.append(backend.fma(a, b, other))
            elif pos == 1:  # other - a*b
                values.append(backend.fma(backend.neg(a), b, other))
            else:  # a*b - other
                values.append(backend.fma(a, b, backend.neg(other)))
            continue
        args = [fetch(a) for a in step.args]
        if op == "pos":
            values.append(args[0])
        else:
            values.append(getattr(backend, op)(*args))
    return values[-1]
