"""Integer fixed-point kernels for the emulator's transcendental functions.

All routines work on Python ints scaled by ``2**F`` and return an error
bound in the same units, so callers can run a Ziv-style rounding test.
"""

from __future__ import annotations

_GUARD = 64
_pi_cache: tuple[int, int] = (0, 0)  # (bits, floor(pi * 2**bits))


def _arctan_inv(x: int, bits: int) -> int:
    """arctan(1/x) * 2**bits, truncated per term (error <= number of terms)."""
    power = (1 << bits) // x
    total = power
    x2 = x * x
    n = 1
    sign = -1
    while power:
        power //= x2
        n += 2
        total += sign * (power // n)
        sign = -sign
    return total


def pi_fixed(bits: int) -> int:
    """floor(pi * 2**bits) up to one unit: |result - pi * 2**bits| <= 1."""
    global _pi_cache
    have, value = _pi_cache
    if have >= bits:
        return value >> (have - bits)
    work = max(bits, 2 * have, 256) + _GUARD
    # Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    full = 16 * _arctan_inv(5, work) - 4 * _arctan_inv(239, work)
    _pi_cache = (work - _GUARD, full >> _GUARD)
    return _pi_cache[1] >> (_pi_cache[0] - bits)


def sin_cos_fixed(r: int, frac_bits: int) -> tuple[int, int, int]:
    """Return (sin, cos, err) of ``r / 2**frac_bits`` for |r| <= 1 in the same units.

    ``err`` bounds the absolute error of both results in units of
    ``2**-frac_bits`` (truncation only; ``r`` itself is taken as exact).
    """
    one = 1 << frac_bits
    r2 = (r * r) >> frac_bits
    s = 0
    term = r
    n = 1
    terms = 0
    while term:
        s += term
        term = -((term * r2) >> frac_bits) // ((n + 1) * (n + 2))
        n += 2
        terms += 1
    c = 0
    term = one
    n = 0
    while term:
        c += term
        term = -((term * r2) >> frac_bits) // ((n + 1) * (n + 2))
        n += 2
        terms += 1
    return s, c, 4 * (terms + 4)
