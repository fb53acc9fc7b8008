"""Parametric software floating point.

Values are held as exact integers (sign, significand, exponent) and every
operation is carried out in integer arithmetic followed by one rounding to
the target :class:`FpConfig`.  No host floating point participates in an
emulated result, which is what lets the emulator act as an oracle for the
native backends.

The sine function has three selectable strategies (see :class:`SinStrategy`)
so that the divergence seen between real libm implementations can be
reproduced on purpose.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from math import isqrt
from typing import NamedTuple

from . import _fixedpoint
from .errors import ConfigurationError, EncodingError
from .fpcore import Backend, BitPattern, NativeBinary32, NativeBinary64

log = logging.getLogger(__name__)


class Rounding(str, Enum):
    NEAREST_EVEN = "nearest-even"
    TOWARD_ZERO = "toward-zero"
    TOWARD_POSITIVE = "toward-positive"
    TOWARD_NEGATIVE = "toward-negative"


ROUNDING_TAGS = {
    "ne": Rounding.NEAREST_EVEN,
    "tz": Rounding.TOWARD_ZERO,
    "tp": Rounding.TOWARD_POSITIVE,
    "tn": Rounding.TOWARD_NEGATIVE,
}
_TAG_OF = {v: k for k, v in ROUNDING_TAGS.items()}


class SinStrategy(str, Enum):
    PAYNE_HANEK = "payne-hanek"
    NAIVE_MOD_2PI = "naive-mod-2pi"
    TAYLOR = "taylor-after-naive-reduction"


SIN_TAGS = {"ph": SinStrategy.PAYNE_HANEK, "naive": SinStrategy.NAIVE_MOD_2PI, "taylor": SinStrategy.TAYLOR}
_SIN_TAG_OF = {v: k for k, v in SIN_TAGS.items()}

_NAME_RE = re.compile(r"sig(\d+)exp(\d+)-(ne|tz|tp|tn)((?:-(?:fma|ph|naive|taylor))*)")


@dataclass(frozen=True)
class FpConfig:
    """Arithmetic description: precision (implicit bit included), exponent
    width, rounding direction, contraction and sine strategy."""

    significand_bits: int
    exponent_bits: int
    rounding: Rounding = Rounding.NEAREST_EVEN
    fma_enabled: bool = False
    sin_strategy: SinStrategy = SinStrategy.PAYNE_HANEK

    def __post_init__(self) -> None:
        if not 8 <= self.significand_bits <= 64:
            raise ConfigurationError(f"significand_bits {self.significand_bits} outside 8..64")
        if not 5 <= self.exponent_bits <= 15:
            raise ConfigurationError(f"exponent_bits {self.exponent_bits} outside 5..15")
        object.__setattr__(self, "rounding", Rounding(self.rounding))
        object.__setattr__(self, "sin_strategy", SinStrategy(self.sin_strategy))

    @property
    def bias(self) -> int:
        return (1 << (self.exponent_bits - 1)) - 1

    @property
    def emax(self) -> int:
        return self.bias

    @property
    def emin(self) -> int:
        return 1 - self.bias

    @property
    def width(self) -> int:
        """Bits in the interchange-style encoding (hidden bit not stored)."""
        return self.exponent_bits + self.significand_bits

    @property
    def name(self) -> str:
        text = f"sig{self.significand_bits}exp{self.exponent_bits}-{_TAG_OF[self.rounding]}"
        if self.fma_enabled:
            text += "-fma"
        if self.sin_strategy is not SinStrategy.PAYNE_HANEK:
            text += "-" + _SIN_TAG_OF[self.sin_strategy]
        return text

    @property
    def label(self) -> str:
        """Preset alias (e.g. ``BINARY32``) when one exists, else :attr:`name`."""
        for alias, cfg in PRESETS.items():
            if cfg == self:
                return alias
        return self.name

    @classmethod
    def from_name(cls, name: str) -> FpConfig:
        """Accepts preset aliases (case-insensitive) and ``sigNexpM-<rnd>[-fma][-naive|-taylor]``."""
        key = name.strip()
        if key.upper() in PRESETS:
            return PRESETS[key.upper()]
        m = _NAME_RE.fullmatch(key.lower())
        if not m:
            raise ConfigurationError(f"unknown arithmetic configuration {name!r}")
        flags = [f for f in m.group(4).split("-") if f]
        strategy = SinStrategy.PAYNE_HANEK
        for f in flags:
            if f in SIN_TAGS:
                strategy = SIN_TAGS[f]
        return cls(int(m.group(1)), int(m.group(2)), ROUNDING_TAGS[m.group(3)], "fma" in flags, strategy)


BINARY32 = FpConfig(24, 8)
BINARY64 = FpConfig(53, 11)
SIG64 = FpConfig(64, 15)

PRESETS: dict[str, FpConfig] = {
    "BINARY32": BINARY32,
    "BINARY64": BINARY64,
    "SIG64": SIG64,
    "HALF": FpConfig(11, 5),
    "BINARY32-TZ": FpConfig(24, 8, Rounding.TOWARD_ZERO),
    "BINARY64-FMA": FpConfig(53, 11, fma_enabled=True),
    "BINARY64-NAIVE-SIN": FpConfig(53, 11, sin_strategy=SinStrategy.NAIVE_MOD_2PI),
    "BINARY64-TAYLOR-SIN": FpConfig(53, 11, sin_strategy=SinStrategy.TAYLOR),
}


class FpClass(str, Enum):
    ZERO = "zero"
    SUBNORMAL = "subnormal"
    NORMAL = "normal"
    INF = "inf"
    NAN = "nan"


ZERO, SUBNORMAL, NORMAL, INF, NAN = FpClass


class EmuValue(NamedTuple):
    """An emulated datum.

    Finite values equal ``sign * significand * 2**exponent`` where
    ``exponent`` is the weight of the last significand bit.  For NaN the
    significand carries the stored payload (fraction field).
    """

    sign: int
    significand: int
    exponent: int
    kind: FpClass

    @property
    def negative(self) -> bool:
        return self.sign < 0


def _zero(neg: bool) -> EmuValue:
    return EmuValue(-1 if neg else 1, 0, 0, ZERO)


def _inf(neg: bool) -> EmuValue:
    return EmuValue(-1 if neg else 1, 0, 0, INF)


def default_nan(cfg: FpConfig) -> EmuValue:
    """Positive quiet NaN with an otherwise empty payload."""
    return EmuValue(1, 1 << (cfg.significand_bits - 2), 0, NAN)


def _quiet(a: EmuValue, cfg: FpConfig) -> EmuValue:
    return a._replace(significand=a.significand | (1 << (cfg.significand_bits - 2)))


def _max_finite(neg: bool, cfg: FpConfig) -> EmuValue:
    p = cfg.significand_bits
    return EmuValue(-1 if neg else 1, (1 << p) - 1, cfg.emax - p + 1, NORMAL)


def _overflow(neg: bool, cfg: FpConfig) -> EmuValue:
    rnd = cfg.rounding
    if rnd is Rounding.NEAREST_EVEN:
        return _inf(neg)
    if rnd is Rounding.TOWARD_ZERO:
        return _max_finite(neg, cfg)
    if rnd is Rounding.TOWARD_POSITIVE:
        return _max_finite(neg, cfg) if neg else _inf(False)
    return _inf(True) if neg else _max_finite(False, cfg)


def round_pack(neg: bool, m: int, e: int, sticky: bool, cfg: FpConfig) -> EmuValue:
    """Round ``(m + sticky*tiny) * 2**e`` (m > 0) to ``cfg``.

    ``sticky`` means the true magnitude lies strictly between ``m`` and
    ``m + 1`` units; callers that set it provide at least two bits beyond
    the target precision.
    """
    p = cfg.significand_bits
    top = m.bit_length() - 1 + e
    q = (top if top >= cfg.emin else cfg.emin) - (p - 1)
    shift = q - e
    up = False
    if shift > 0:
        kept = m >> shift
        rem = m & ((1 << shift) - 1)
        inexact = sticky or rem != 0
        if inexact:
            rnd = cfg.rounding
            if rnd is Rounding.NEAREST_EVEN:
                half = 1 << (shift - 1)
                up = rem > half or (rem == half and (sticky or bool(kept & 1)))
            elif rnd is Rounding.TOWARD_POSITIVE:
                up = not neg
            elif rnd is Rounding.TOWARD_NEGATIVE:
                up = neg
    else:
        kept = m << -shift
        if sticky and cfg.rounding is not Rounding.NEAREST_EVEN:
            up = (cfg.rounding is Rounding.TOWARD_POSITIVE and not neg) or \
                 (cfg.rounding is Rounding.TOWARD_NEGATIVE and neg)
    if up:
        kept += 1
        if kept >> p:
            kept >>= 1
            q += 1
    if kept == 0:
        return _zero(neg)
    if q + p - 1 > cfg.emax:
        return _overflow(neg, cfg)
    return EmuValue(-1 if neg else 1, kept, q, NORMAL if kept >> (p - 1) else SUBNORMAL)


def round_ratio(neg: bool, num: int, den: int, e: int, cfg: FpConfig) -> EmuValue:
    """Round ``num / den * 2**e`` (num, den > 0) to ``cfg``."""
    k = cfg.significand_bits + 3 + den.bit_length() - num.bit_length()
    if k >= 0:
        q, r = divmod(num << k, den)
    else:
        q, r = divmod(num, den << -k)
    return round_pack(neg, q, e - k, r != 0, cfg)


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------


def emu_from_fraction(x: Fraction | int, cfg: FpConfig) -> EmuValue:
    x = Fraction(x)
    if x == 0:
        return _zero(False)
    return round_ratio(x < 0, abs(x.numerator), x.denominator, 0, cfg)


def emu_from_decimal(text: str, cfg: FpConfig) -> EmuValue:
    """Correctly rounded conversion of a decimal literal (``inf``/``nan`` accepted)."""
    low = text.strip().lower()
    if low in ("inf", "+inf", "infinity"):
        return _inf(False)
    if low in ("-inf", "-infinity"):
        return _inf(True)
    if low in ("nan", "+nan"):
        return default_nan(cfg)
    try:
        x = Fraction(low)
    except ValueError:
        raise EncodingError(f"bad decimal literal {text!r}") from None
    if x == 0:
        return _zero(low.startswith("-"))
    return emu_from_fraction(x, cfg)


def emu_to_fraction(a: EmuValue) -> Fraction | None:
    if a.kind in (INF, NAN):
        return None
    if a.kind is ZERO:
        return Fraction(0)
    v = Fraction(a.significand) * (Fraction(2) ** a.exponent)
    return -v if a.sign < 0 else v


def emu_to_float(a: EmuValue) -> float:
    """Nearest binary64 of ``a`` (for reports only)."""
    if a.kind is NAN:
        return float("nan")
    if a.kind is INF:
        return float("-inf") if a.sign < 0 else float("inf")
    if a.kind is ZERO:
        return -0.0 if a.sign < 0 else 0.0
    try:
        return float(emu_to_fraction(a))
    except OverflowError:
        return float("-inf") if a.sign < 0 else float("inf")


def encode(a: EmuValue, cfg: FpConfig) -> BitPattern:
    """Interchange-style encoding: sign | biased exponent | stored fraction."""
    p, w = cfg.significand_bits, cfg.exponent_bits
    frac_bits = p - 1
    sign = 1 if a.sign < 0 else 0
    top_exp = (1 << w) - 1
    if a.kind is ZERO:
        biased, frac = 0, 0
    elif a.kind is INF:
        biased, frac = top_exp, 0
    elif a.kind is NAN:
        biased, frac = top_exp, a.significand
    elif a.kind is SUBNORMAL:
        biased, frac = 0, a.significand
    else:
        biased = a.exponent + frac_bits + cfg.bias
        frac = a.significand - (1 << frac_bits)
    word = (sign << (w + frac_bits)) | (biased << frac_bits) | frac
    return BitPattern.from_int(word, cfg.width)


def decode(pattern: BitPattern | int, cfg: FpConfig) -> EmuValue:
    word = pattern.value if isinstance(pattern, BitPattern) else pattern
    if isinstance(pattern, BitPattern) and pattern.width != cfg.width:
        raise EncodingError(f"width {pattern.width} does not match {cfg.name} ({cfg.width})")
    p, w = cfg.significand_bits, cfg.exponent_bits
    frac_bits = p - 1
    sign = -1 if (word >> (w + frac_bits)) & 1 else 1
    biased = (word >> frac_bits) & ((1 << w) - 1)
    frac = word & ((1 << frac_bits) - 1)
    if biased == (1 << w) - 1:
        return EmuValue(sign, frac, 0, NAN) if frac else EmuValue(sign, 0, 0, INF)
    if biased == 0:
        if frac == 0:
            return EmuValue(sign, 0, 0, ZERO)
        return EmuValue(sign, frac, cfg.emin - frac_bits, SUBNORMAL)
    return EmuValue(sign, frac | (1 << frac_bits), biased - cfg.bias - frac_bits, NORMAL)


# ---------------------------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------------------------


def _signed(a: EmuValue) -> int:
    return -a.significand if a.sign < 0 else a.significand


def _exact_zero(cfg: FpConfig) -> EmuValue:
    return _zero(cfg.rounding is Rounding.TOWARD_NEGATIVE)


def emu_neg(a: EmuValue) -> EmuValue:
    return a._replace(sign=-a.sign)


def emu_add(a: EmuValue, b: EmuValue, cfg: FpConfig) -> EmuValue:
    ka, kb = a.kind, b.kind
    if ka is NAN:
        return _quiet(a, cfg)
    if kb is NAN:
        return _quiet(b, cfg)
    if ka is INF:
        if kb is INF and a.sign != b.sign:
            return default_nan(cfg)
        return a
    if kb is INF:
        return b
    if ka is ZERO:
        if kb is ZERO:
            return a if a.sign == b.sign else _exact_zero(cfg)
        return b
    if kb is ZERO:
        return a
    ea, eb = a.exponent, b.exponent
    if ea >= eb:
        s = (_signed(a) << (ea - eb)) + _signed(b)
        e = eb
    else:
        s = _signed(a) + (_signed(b) << (eb - ea))
        e = ea
    if s == 0:
        return _exact_zero(cfg)
    return round_pack(s < 0, abs(s), e, False, cfg)


def emu_sub(a: EmuValue, b: EmuValue, cfg: FpConfig) -> EmuValue:
    if b.kind is NAN and a.kind is not NAN:
        return _quiet(b, cfg)
    return emu_add(a, emu_neg(b), cfg)


def emu_mul(a: EmuValue, b: EmuValue, cfg: FpConfig) -> EmuValue:
    ka, kb = a.kind, b.kind
    if ka is NAN:
        return _quiet(a, cfg)
    if kb is NAN:
        return _quiet(b, cfg)
    neg = a.sign != b.sign
    if ka is INF or kb is INF:
        if ka is ZERO or kb is ZERO:
            return default_nan(cfg)
        return _inf(neg)
    if ka is ZERO or kb is ZERO:
        return _zero(neg)
    return round_pack(neg, a.significand * b.significand, a.exponent + b.exponent, False, cfg)


def emu_div(a: EmuValue, b: EmuValue, cfg: FpConfig) -> EmuValue:
    ka, kb = a.kind, b.kind
    if ka is NAN:
        return _quiet(a, cfg)
    if kb is NAN:
        return _quiet(b, cfg)
    neg = a.sign != b.sign
    if ka is INF:
        return default_nan(cfg) if kb is INF else _inf(neg)
    if kb is INF:
        return _zero(neg)
    if kb is ZERO:
        return default_nan(cfg) if ka is ZERO else _inf(neg)
    if ka is ZERO:
        return _zero(neg)
    return round_ratio(neg, a.significand, b.significand, a.exponent - b.exponent, cfg)


def emu_fma(a: EmuValue, b: EmuValue, c: EmuValue, cfg: FpConfig) -> EmuValue:
    """a*b + c with a single rounding."""
    for v in (a, b, c):
        if v.kind is NAN:
            return _quiet(v, cfg)
    pneg = a.sign != b.sign
    if a.kind is INF or b.kind is INF:
        if a.kind is ZERO or b.kind is ZERO:
            return default_nan(cfg)
        if c.kind is INF and c.sign != (-1 if pneg else 1):
            return default_nan(cfg)
        return _inf(pneg)
    if c.kind is INF:
        return c
    if a.kind is ZERO or b.kind is ZERO:
        if c.kind is ZERO:
            if c.negative == pneg:
                return c
            return _exact_zero(cfg)
        return c
    prod = a.significand * b.significand
    if pneg:
        prod = -prod
    ep = a.exponent + b.exponent
    if c.kind is ZERO:
        return round_pack(prod < 0, abs(prod), ep, False, cfg)
    ec = c.exponent
    if ep >= ec:
        s, e = (prod << (ep - ec)) + _signed(c), ec
    else:
        s, e = prod + (_signed(c) << (ec - ep)), ep
    if s == 0:
        return _exact_zero(cfg)
    return round_pack(s < 0, abs(s), e, False, cfg)


def emu_sqrt(a: EmuValue, cfg: FpConfig) -> EmuValue:
    if a.kind is NAN:
        return _quiet(a, cfg)
    if a.kind is ZERO:
        return a
    if a.sign < 0:
        return default_nan(cfg)
    if a.kind is INF:
        return a
    m, e = a.significand, a.exponent
    want = 2 * (cfg.significand_bits + 3) + 2
    s = max(0, want - m.bit_length())
    if (e - s) & 1:
        s += 1
    big = m << s
    r = isqrt(big)
    return round_pack(False, r, (e - s) // 2, r * r != big, cfg)


def emu_fmod(a: EmuValue, b: EmuValue, cfg: FpConfig) -> EmuValue:
    """IEEE fmod: exact remainder with the sign of ``a``."""
    if a.kind is NAN:
        return _quiet(a, cfg)
    if b.kind is NAN:
        return _quiet(b, cfg)
    if a.kind is INF or b.kind is ZERO:
        return default_nan(cfg)
    if a.kind is ZERO or b.kind is INF:
        return a
    e = min(a.exponent, b.exponent)
    am = a.significand << (a.exponent - e)
    bm = b.significand << (b.exponent - e)
    r = am % bm
    if r == 0:
        return _zero(a.sign < 0)
    return round_pack(a.sign < 0, r, e, False, cfg)


def emu_eq(a: EmuValue, b: EmuValue) -> bool:
    if a.kind is NAN or b.kind is NAN:
        return False
    if a.kind is ZERO and b.kind is ZERO:
        return True
    return a == b


def emu_lt(a: EmuValue, b: EmuValue) -> bool:
    if a.kind is NAN or b.kind is NAN:
        return False
    if a.kind is INF or b.kind is INF:
        if a.kind is INF and b.kind is INF:
            return a.sign < b.sign
        return (a.kind is INF and a.sign < 0) or (b.kind is INF and b.sign > 0)
    return emu_to_fraction(a) < emu_to_fraction(b)


# ---------------------------------------------------------------------------
# Sine
# ---------------------------------------------------------------------------


def sin_correctly_rounded(x: EmuValue, cfg: FpConfig) -> EmuValue:
    """sin of the exact value of finite nonzero ``x``, rounded once to ``cfg``.

    Argument reduction multiplies against as many bits of pi as the exponent
    of ``x`` requires (the large-argument reduction idea), then evaluates
    the series in fixed point; precision doubles until the error interval
    rounds to a single result.
    """
    neg = x.sign < 0
    m, e = x.significand, x.exponent
    top = m.bit_length() + e
    work = cfg.significand_bits + 40
    while True:
        frac = work + max(0, -top) + 8
        guard = max(0, top) + 8
        sh = e + frac
        xf = m << sh if sh >= 0 else m >> -sh
        xg = xf << guard
        half_pi = _fixedpoint.pi_fixed(frac + guard - 1)  # pi/2 at frac+guard bits
        k = (xg + (half_pi >> 1)) // half_pi
        r = (xg - k * half_pi) >> guard
        s, c, err = _fixedpoint.sin_cos_fixed(r, frac)
        err += 4
        quadrant = k & 3
        y = (s, c, -s, -c)[quadrant]
        if neg:
            y = -y
        lo = _round_fixed(y - err, frac, cfg)
        hi = _round_fixed(y + err, frac, cfg)
        if lo == hi:
            return lo
        work *= 2


def _round_fixed(v: int, frac: int, cfg: FpConfig) -> EmuValue:
    if v == 0:
        return _zero(False)
    return round_pack(v < 0, abs(v), -frac, False, cfg)


def two_pi(cfg: FpConfig) -> EmuValue:
    """2*pi rounded once to ``cfg``."""
    bits = cfg.significand_bits + 16
    while True:
        approx = _fixedpoint.pi_fixed(bits) << 1  # within 2 units of 2*pi*2**bits
        lo = round_pack(False, approx - 2, -bits, False, cfg)
        hi = round_pack(False, approx + 2, -bits, False, cfg)
        if lo == hi:
            return lo
        bits *= 2


def _taylor_sin(r: EmuValue, cfg: FpConfig) -> EmuValue:
    """Truncated Taylor series evaluated in ``cfg`` arithmetic, one rounding per op."""
    r2 = emu_mul(r, r, cfg)
    s = r
    term = r
    for k in range(1, 64):
        denom = emu_from_fraction((2 * k) * (2 * k + 1), cfg)
        term = emu_neg(emu_div(emu_mul(term, r2, cfg), denom, cfg))
        nxt = emu_add(s, term, cfg)
        if emu_eq(nxt, s):
            break
        s = nxt
    return s


def emu_sin(a: EmuValue, cfg: FpConfig) -> EmuValue:
    if a.kind is NAN:
        return _quiet(a, cfg)
    if a.kind is INF:
        return default_nan(cfg)
    if a.kind is ZERO:
        return a
    strategy = cfg.sin_strategy
    if strategy is SinStrategy.PAYNE_HANEK:
        return sin_correctly_rounded(a, cfg)
    r = emu_fmod(a, two_pi(cfg), cfg)
    if r.kind is ZERO:
        return r
    if strategy is SinStrategy.NAIVE_MOD_2PI:
        return sin_correctly_rounded(r, cfg)
    return _taylor_sin(r, cfg)


# ---------------------------------------------------------------------------
# Backend adapter
# ---------------------------------------------------------------------------


class EmulatedBackend(Backend):
    """Backend running every operation through the emulator under ``cfg``."""

    def __init__(self, cfg: FpConfig):
        self.cfg = cfg
        self.name = cfg.name
        self.fma_enabled = cfg.fma_enabled
        self._consts: dict[str, EmuValue] = {}

    def const(self, text: str) -> EmuValue:
        v = self._consts.get(text)
        if v is None:
            v = self._consts[text] = emu_from_decimal(text, self.cfg)
        return v

    def from_int(self, n: int) -> EmuValue:
        return self.const(str(n))

    def add(self, a, b):
        return emu_add(a, b, self.cfg)

    def sub(self, a, b):
        return emu_sub(a, b, self.cfg)

    def mul(self, a, b):
        return emu_mul(a, b, self.cfg)

    def div(self, a, b):
        return emu_div(a, b, self.cfg)

    def fma(self, a, b, c):
        return emu_fma(a, b, c, self.cfg)

    def neg(self, a):
        return emu_neg(a)

    def sqrt(self, a):
        return emu_sqrt(a, self.cfg)

    def sin(self, a):
        return emu_sin(a, self.cfg)

    def eq(self, a, b) -> bool:
        return emu_eq(a, b)

    def bits(self, a) -> BitPattern:
        return encode(a, self.cfg)

    def to_fraction(self, a) -> Fraction | None:
        return emu_to_fraction(a)

    def to_float(self, a) -> float:
        return emu_to_float(a)


def with_rounding(cfg: FpConfig, rounding: Rounding) -> FpConfig:
    return replace(cfg, rounding=rounding)


_NATIVE_ALIASES = {
    "native": "native-binary64",
    "native64": "native-binary64",
    "native-binary64": "native-binary64",
    "native32": "native-binary32",
    "native-binary32": "native-binary32",
}


def get_backend(name: str) -> Backend:
    """Resolve a backend selector: native aliases, preset names, or ``sigNexpM-...``."""
    key = name.strip().lower()
    native = _NATIVE_ALIASES.get(key)
    if native == "native-binary64":
        return NativeBinary64()
    if native == "native-binary32":
        try:
            import numpy  # noqa: F401
        except ImportError:  # pragma: no cover - numpy is a declared dependency
            log.warning("single precision unavailable natively; using emulated BINARY32")
            return EmulatedBackend(BINARY32)
        return NativeBinary32()
    return EmulatedBackend(FpConfig.from_name(name))


def run_probe_under(probe_id: str, cfg: FpConfig):
    """Run one registered probe entirely in emulated arithmetic."""
    from .probes import run_probe

    return run_probe(probe_id, EmulatedBackend(cfg))
