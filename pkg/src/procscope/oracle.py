"""Reference backends that share no code with the emulator.

``ExactBackend`` does rational arithmetic with :class:`fractions.Fraction`
(no rounding at all); ``MpBackend`` rounds every step to a chosen binary
precision with mpmath.  Both are used to pin expected values for the
cancellation probes and to cross-check the emulator.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .fpcore import Backend, BitPattern
from .errors import DomainError

_MP_ROUNDING = {
    "nearest-even": "n",
    "toward-zero": "d",
    "toward-positive": "c",
    "toward-negative": "f",
}


class ExactBackend(Backend):
    """Unrounded rational arithmetic; sqrt/sin are refused."""

    name = "exact-rational"

    def const(self, text: str) -> Fraction:
        return Fraction(text)

    def from_int(self, n: int) -> Fraction:
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        if b == 0:
            raise DomainError("division by zero in exact arithmetic")
        return a / b

    def fma(self, a, b, c):
        return a * b + c

    def neg(self, a):
        return -a

    def sqrt(self, a):
        raise DomainError("sqrt is not rational")

    def sin(self, a):
        raise DomainError("sin is not rational")

    def eq(self, a, b) -> bool:
        return a == b

    def to_fraction(self, a) -> Fraction:
        return a

    def to_float(self, a) -> float:
        return float(a)


class MpBackend(Backend):
    """Binary floating point at ``prec`` bits with an unbounded exponent (mpmath).

    The four basic operations honour ``rounding``; sqrt and sin always
    round to nearest.
    """

    def __init__(self, prec: int = 256, rounding: str = "nearest-even"):
        self.prec = prec
        self.rnd = _MP_ROUNDING[rounding]
        self.ctx = mpmath.MPContext()
        self.ctx.prec = prec
        self.name = f"mp{prec}"

    def const(self, text: str):
        return self.ctx.mpf(text)

    def add(self, a, b):
        return self.ctx.fadd(a, b, rounding=self.rnd)

    def sub(self, a, b):
        return self.ctx.fsub(a, b, rounding=self.rnd)

    def mul(self, a, b):
        return self.ctx.fmul(a, b, rounding=self.rnd)

    def div(self, a, b):
        return self.ctx.fdiv(a, b, rounding=self.rnd)

    def fma(self, a, b, c):
        exact = self.ctx.fmul(a, b, exact=True)
        return self.ctx.fadd(exact, c, rounding=self.rnd)

    def neg(self, a):
        return -a

    def sqrt(self, a):
        return self.ctx.sqrt(a)

    def sin(self, a):
        return self.ctx.sin(a)

    def eq(self, a, b) -> bool:
        return bool(a == b)

    def bits(self, a) -> BitPattern:
        raise NotImplementedError("arbitrary-precision values have no interchange encoding")

    def to_fraction(self, a) -> Fraction | None:
        if not self.ctx.isfinite(a):
            return None
        sign, man, exp, _ = a._mpf_
        v = Fraction(int(man)) * Fraction(2) ** int(exp)
        return -v if sign else v

    def to_float(self, a) -> float:
        return float(a)
