"""Test-side oracles that share no arithmetic code with the emulator."""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

from procscope.fpcore import BitPattern, to_bits
from procscope.oracle import MpBackend


class MpInterchange(MpBackend):
    """mpmath at 24 or 53 bits, with bit patterns taken from numpy/CPython floats.

    The exponent range is unbounded, so this agrees with binary32/binary64
    only while results stay in the normal range; callers keep to that.
    """

    def __init__(self, width: int):
        super().__init__(prec={32: 24, 64: 53}[width])
        self.width = width
        self.name = f"mp-binary{width}"

    def bits(self, a) -> BitPattern:
        f = float(a)  # exact: a already has at most 53 bits
        if self.width == 64:
            return to_bits(f)
        return to_bits(np.float32(f))


def mp_sin_rounded(x: Fraction, prec: int) -> Fraction:
    """sin(x) rounded to nearest at ``prec`` bits, from a 600-bit evaluation."""
    ctx = mpmath.MPContext()
    ctx.prec = 600
    v = ctx.sin(ctx.mpf(x.numerator) / x.denominator)
    ctx.prec = prec
    r = +v
    sign, man, exp, _ = r._mpf_
    out = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -out if sign else out


def libmp_fraction(t) -> Fraction | None:
    """Exact value of a raw mpmath tuple (None for specials)."""
    sign, man, exp, bc = t
    if not man:
        if exp or bc:
            return None
        return Fraction(0)
    out = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -out if sign else out
