"""The probe battery.

Each probe is a small numerical experiment whose exact outcome depends on
the arithmetic it runs on.  Probes take a :class:`~procscope.fpcore.Backend`
and produce a typed payload; :func:`run_battery` runs the whole registry in
its canonical order and wraps the payloads in :class:`ProbeResult` objects.

Evaluation orders are pinned (see :class:`~procscope.fpcore.EvalOrder`), so
the same backend always yields the same bits.
"""

from __future__ import annotations

import logging
import math
import random
import statistics
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, ClassVar

from .errors import DomainError, EncodingError, UnknownProbeError
from .fpcore import NATIVE64, Backend, BitPattern, EvalOrder, NativeBinary32, NativeBinary64, \
    PiConstant, eval_ordered

log = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Payloads
# ---------------------------------------------------------------------------


def _bool_text(b: bool) -> str:
    return "true" if b else "false"


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise EncodingError(f"expected true/false, got {text!r}")


class Payload:
    kind: ClassVar[str] = ""

    def encode(self) -> str:
        raise NotImplementedError

    @classmethod
    def decode(cls, text: str) -> Payload:
        raise NotImplementedError

    def fields(self) -> dict[str, str]:
        """Named sub-values addressable from target predicates."""
        return {"value": self.encode()}


@dataclass(frozen=True)
class BoolPayload(Payload):
    kind: ClassVar[str] = "bool"
    value: bool

    def encode(self) -> str:
        return _bool_text(self.value)

    @classmethod
    def decode(cls, text: str) -> BoolPayload:
        return cls(_parse_bool(text))


@dataclass(frozen=True)
class BoolsPayload(Payload):
    kind: ClassVar[str] = "bools"
    values: tuple[bool, ...]

    def encode(self) -> str:
        return ",".join(_bool_text(v) for v in self.values)

    @classmethod
    def decode(cls, text: str) -> BoolsPayload:
        return cls(tuple(_parse_bool(t) for t in text.split(",")))

    def fields(self) -> dict[str, str]:
        out = {"value": self.encode()}
        out.update({str(i): _bool_text(v) for i, v in enumerate(self.values)})
        return out


@dataclass(frozen=True)
class PairPayload(Payload):
    """Gentleman result; ``capped`` marks a loop that hit its iteration cap."""

    kind: ClassVar[str] = "pair"
    mantissa_bits: int
    base: int
    capped: bool = False

    def encode(self) -> str:
        text = f"{self.mantissa_bits},{self.base}"
        return text + ",capped" if self.capped else text

    @classmethod
    def decode(cls, text: str) -> PairPayload:
        parts = text.split(",")
        try:
            if len(parts) == 2:
                return cls(int(parts[0]), int(parts[1]))
            if len(parts) == 3 and parts[2] == "capped":
                return cls(int(parts[0]), int(parts[1]), True)
        except ValueError:
            pass
        raise EncodingError(f"malformed integer pair {text!r}")

    def fields(self) -> dict[str, str]:
        return {
            "value": self.encode(),
            "mantissa_bits": str(self.mantissa_bits),
            "base": str(self.base),
            "capped": _bool_text(self.capped),
        }


@dataclass(frozen=True)
class SinPayload(Payload):
    """Full bit pattern plus a three-digit truncated decimal for reports."""

    kind: ClassVar[str] = "sin"
    bits: BitPattern
    dec: str

    def encode(self) -> str:
        return f"{self.bits};dec:{self.dec}"

    @classmethod
    def decode(cls, text: str) -> SinPayload:
        bits, sep, dec = text.partition(";dec:")
        if not sep or not dec or " " in dec:
            raise EncodingError(f"malformed sin payload {text!r}")
        return cls(BitPattern.parse(bits), dec)

    def fields(self) -> dict[str, str]:
        return {"value": self.encode(), "bits": str(self.bits), "hex": self.bits.hex, "dec": self.dec}


@dataclass(frozen=True)
class ResidualEntry:
    bits: BitPattern
    approx: str  # repr() of the nearest binary64, for humans
    exact: bool  # result equals the mathematically exact answer

    @property
    def value(self) -> float:
        return float(self.approx)

    def encode(self) -> str:
        return f"{self.bits},{self.approx},{_bool_text(self.exact)}"

    @classmethod
    def decode(cls, text: str) -> ResidualEntry:
        parts = text.split(",")
        if len(parts) != 3:
            raise EncodingError(f"malformed residual entry {text!r}")
        try:
            float(parts[1])
        except ValueError:
            raise EncodingError(f"bad residual value {parts[1]!r}") from None
        return cls(BitPattern.parse(parts[0]), parts[1], _parse_bool(parts[2]))


@dataclass(frozen=True)
class ResidualPayload(Payload):
    kind: ClassVar[str] = "residual"
    entries: tuple[ResidualEntry, ...]

    def encode(self) -> str:
        return ";".join(e.encode() for e in self.entries)

    @classmethod
    def decode(cls, text: str) -> ResidualPayload:
        return cls(tuple(ResidualEntry.decode(t) for t in text.split(";")))

    def fields(self) -> dict[str, str]:
        out = {"value": self.encode()}
        for i, e in enumerate(self.entries):
            prefix = "" if i == 0 else f"entry{i}."
            out[prefix + "bits"] = str(e.bits)
            out[prefix + "approx"] = e.approx
            out[prefix + "exact"] = _bool_text(e.exact)
        return out


@dataclass(frozen=True)
class BitsPayload(Payload):
    kind: ClassVar[str] = "bits"
    bits: BitPattern

    def encode(self) -> str:
        return str(self.bits)

    @classmethod
    def decode(cls, text: str) -> BitsPayload:
        return cls(BitPattern.parse(text))

    def fields(self) -> dict[str, str]:
        return {"value": self.encode(), "bits": str(self.bits), "hex": self.bits.hex}


_TIMING_KEYS = ("n", "sw_median", "sw_iqr", "hw_median", "hw_iqr", "ratio", "checksum")


@dataclass(frozen=True)
class TimingPayload(Payload):
    """Median and interquartile range (seconds) of software vs built-in popcount."""

    kind: ClassVar[str] = "timing"
    iterations: int
    sw_median: float
    sw_iqr: float
    hw_median: float
    hw_iqr: float
    ratio: float
    checksum: int
    supported: bool = True

    @classmethod
    def unsupported(cls, iterations: int) -> TimingPayload:
        return cls(iterations, math.nan, math.nan, math.nan, math.nan, math.nan, 0, False)

    def encode(self) -> str:
        if not self.supported:
            return f"unsupported,n={self.iterations}"
        vals = (self.iterations, repr(self.sw_median), repr(self.sw_iqr), repr(self.hw_median),
                repr(self.hw_iqr), repr(self.ratio), self.checksum)
        return ",".join(f"{k}={v}" for k, v in zip(_TIMING_KEYS, vals))

    @classmethod
    def decode(cls, text: str) -> TimingPayload:
        try:
            if text.startswith("unsupported,n="):
                return cls.unsupported(int(text.split("=", 1)[1]))
            items = dict(part.split("=", 1) for part in text.split(","))
            if tuple(items) != _TIMING_KEYS:
                raise ValueError
            return cls(int(items["n"]), float(items["sw_median"]), float(items["sw_iqr"]),
                       float(items["hw_median"]), float(items["hw_iqr"]), float(items["ratio"]),
                       int(items["checksum"]))
        except ValueError:
            raise EncodingError(f"malformed timing payload {text!r}") from None

    def __eq__(self, other: object) -> bool:
        # NaN fields in unsupported payloads must still compare equal.
        return isinstance(other, TimingPayload) and self.encode() == other.encode()

    def __hash__(self) -> int:
        return hash(self.encode())


@dataclass(frozen=True)
class ErrorPayload(Payload):
    """Recorded when a probe raised; the battery carries on."""

    kind: ClassVar[str] = "error"
    message: str

    def encode(self) -> str:
        return " ".join(self.message.split())

    @classmethod
    def decode(cls, text: str) -> ErrorPayload:
        return cls(text)


PAYLOAD_TYPES: dict[str, type[Payload]] = {
    cls.kind: cls
    for cls in (BoolPayload, BoolsPayload, PairPayload, SinPayload, ResidualPayload,
                BitsPayload, TimingPayload, ErrorPayload)
}


def decode_payload(kind: str, text: str) -> Payload:
    try:
        cls = PAYLOAD_TYPES[kind]
    except KeyError:
        raise EncodingError(f"unknown payload kind {kind!r}") from None
    return cls.decode(text)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _floor_log10(a: Fraction) -> int:
    k = math.floor(math.log10(a.numerator) - math.log10(a.denominator))
    while Fraction(10) ** k > a:
        k -= 1
    while Fraction(10) ** (k + 1) <= a:
        k += 1
    return k


def render_decimal(x: Fraction | None, special: str = "nan", digits: int = 3) -> str:
    """Leading ``digits`` significant digits of ``x``, truncated (``0.375``, ``-2.23e-06``)."""
    if x is None:
        return special
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    a = abs(x)
    k = _floor_log10(a)
    exp = k - digits + 1
    mant = math.floor(a / Fraction(10) ** exp)
    d = str(mant)
    if -4 <= k < 0:
        return f"{sign}0.{'0' * (-k - 1)}{d}"
    if 0 <= k < digits:
        return f"{sign}{d[:k + 1]}.{d[k + 1:]}".rstrip(".")
    return f"{sign}{d[0]}.{d[1:]}e{k:+03d}"


def _special_text(backend: Backend, v: Any) -> str:
    f = backend.to_float(v)
    return "nan" if math.isnan(f) else ("-inf" if f < 0 else "inf")


def leading_digits(backend: Backend, v: Any) -> str:
    return render_decimal(backend.to_fraction(v), _special_text(backend, v))


def _literal(x: Any) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, Fraction)):
        return str(x)
    return repr(float(x))


def _finite_fraction(x: Any, what: str) -> Fraction:
    text = _literal(x)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"{what} must be a finite number, got {text!r}") from None


def power_of_ten(k: int, backend: Backend, mode: str = "literal") -> Any:
    """10**k in ``backend``.

    ``literal`` (used by the battery) rounds the exact integer once, as a
    compiler does for ``1e37``; ``iterated`` multiplies 10 by itself k-1
    times, rounding at each step.
    """
    if mode == "literal":
        return backend.const(f"1e{k}")
    if mode == "iterated":
        ten = backend.const("10")
        acc = ten
        for _ in range(k - 1):
            acc = backend.mul(acc, ten)
        return acc
    raise ValueError(f"unknown power mode {mode!r}")


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


def probe_sqrt_identity(a: Any = "2.0", backend: Backend = NATIVE64) -> bool:
    """sqrt(a) * sqrt(a) == a with exactly two roundings."""
    if _finite_fraction(a, "sqrt-identity input") < 0:
        raise DomainError("sqrt-identity input must be non-negative")
    x = backend.const(_literal(a))
    r = backend.sqrt(x)
    return backend.eq(backend.mul(r, r), x)


@dataclass(frozen=True)
class GentlemanResult:
    mantissa_bits: int
    base: int
    capped: bool = False


GENTLEMAN_CAP_A = 128
GENTLEMAN_CAP_B = 64


def probe_gentleman(backend: Backend = NATIVE64) -> GentlemanResult:
    """Significand width and radix from the two Gentleman loops.

    Loop one doubles A while ((A+1)-A)-1 is zero; the exponent of A at exit
    is the significand width.  Loop two then steps B up from 1 until
    ((A+B)-A)-B is zero again; that B is the radix.
    """
    one = backend.const("1")
    two = backend.const("2")
    zero = backend.const("0")
    add, sub, eq = backend.add, backend.sub, backend.eq
    a = one
    doublings = 0
    capped = False
    while eq(sub(sub(add(a, one), a), one), zero):
        if doublings == GENTLEMAN_CAP_A:
            capped = True
            break
        a = backend.mul(two, a)
        doublings += 1
    b = one
    steps = 0
    while not eq(sub(sub(add(a, b), a), b), zero):
        if steps == GENTLEMAN_CAP_B:
            capped = True
            break
        b = add(b, one)
        steps += 1
    base = backend.to_float(b)
    return GentlemanResult(doublings, int(base) if math.isfinite(base) else -1, capped)


EASY_CHECKS = (
    ("1.2 - 0.8", "0.4"),
    ("0.1 + 0.1", "0.2"),
    ("0.1 + 0.1 + 0.1", "0.3"),
    (" + ".join(["0.1"] * 10), "1.0"),
)
_EASY_EXPRS = tuple((EvalOrder.compile(lhs), rhs) for lhs, rhs in EASY_CHECKS)


def probe_easy_computations(backend: Backend = NATIVE64) -> tuple[bool, bool, bool, bool]:
    """The four "easy" equalities, left folds, IEEE ``==``."""
    return tuple(backend.eq(eval_ordered(expr, {}, backend), backend.const(rhs))
                 for expr, rhs in _EASY_EXPRS)


SIN_EXPONENTS = (10, 17, 37)


def sin_value(k: int, pi: PiConstant | str, backend: Backend = NATIVE64) -> Any:
    pi = PiConstant(pi)
    arg = backend.mul(power_of_ten(k, backend), backend.const(pi.literal))
    return backend.sin(arg)


def probe_sin(k: int, pi: PiConstant | str, backend: Backend = NATIVE64) -> SinPayload:
    """sin(10**k * pi): 10**k rounded once, product rounded once, backend sine."""
    v = sin_value(k, pi, backend)
    return SinPayload(backend.bits(v), leading_digits(backend, v))


RUMP_F = EvalOrder.compile("(1682*X*Y**4 + 3*X**3 + 29*X*Y**2 - 2*X**5 + 832) / 107751")
RUMP_F_INPUTS = {"X": "192119201", "Y": "35675640"}
RUMP_F_EXACT = 1783

RUMP_P = EvalOrder.compile("8118*X**4 - 11482*X**3 + X**2 + 5741*X - 2030")
RUMP_P_X_SQRT = EvalOrder.compile("sqrt(0.5)")
RUMP_P_X_DEC = "0.707"


def rump_f_value(backend: Backend = NATIVE64) -> Any:
    return eval_ordered(RUMP_F, RUMP_F_INPUTS, backend)


def rump_p_values(backend: Backend = NATIVE64) -> tuple[Any, Any]:
    """P at X = sqrt(0.5) (computed in the backend) and at X = 0.707."""
    x_sqrt = eval_ordered(RUMP_P_X_SQRT, {}, backend)
    return (eval_ordered(RUMP_P, {"X": x_sqrt}, backend),
            eval_ordered(RUMP_P, {"X": RUMP_P_X_DEC}, backend))


def _entry(backend: Backend, v: Any, target: Any) -> ResidualEntry:
    return ResidualEntry(backend.bits(v), repr(backend.to_float(v)), backend.eq(v, target))


def probe_rump_f(backend: Backend = NATIVE64) -> ResidualPayload:
    v = rump_f_value(backend)
    return ResidualPayload((_entry(backend, v, backend.from_int(RUMP_F_EXACT)),))


def probe_rump_p(backend: Backend = NATIVE64) -> ResidualPayload:
    zero = backend.const("0")
    return ResidualPayload(tuple(_entry(backend, v, zero) for v in rump_p_values(backend)))


SUM_SIZES = (10, 21, 22, 25, 30, 100)
_SUM_TAIL = EvalOrder.compile("S - N*T")


def sum_residual_value(n: int, backend: Backend = NATIVE64) -> Any:
    """s - n*t where t = 10**n and s is the left fold of n copies of t."""
    if not isinstance(n, int) or not 1 <= n <= 308:
        raise DomainError(f"sum-residual size must be in 1..308, got {n!r}")
    t = power_of_ten(n, backend)
    s = t
    for _ in range(n - 1):
        s = backend.add(s, t)
    return eval_ordered(_SUM_TAIL, {"S": s, "N": backend.from_int(n), "T": t}, backend)


def probe_sum_residual(n: int, backend: Backend = NATIVE64) -> ResidualPayload:
    v = sum_residual_value(n, backend)
    return ResidualPayload((_entry(backend, v, backend.const("0")),))


LOGISTIC_DEFAULTS = ("3.999", "0.5", 1000)


def logistic_value(r: Any = "3.999", x0: Any = "0.5", n_iter: int = 1000,
                   backend: Backend = NATIVE64) -> Any:
    if not 0 <= _finite_fraction(r, "r") <= 4:
        raise DomainError("r must lie in [0, 4]")
    if not 0 <= _finite_fraction(x0, "x0") <= 1:
        raise DomainError("x0 must lie in [0, 1]")
    if not isinstance(n_iter, int) or n_iter < 1:
        raise DomainError("n_iter must be a positive integer")
    rv = backend.const(_literal(r))
    x = backend.const(_literal(x0))
    one = backend.const("1")
    mul, sub = backend.mul, backend.sub
    for _ in range(n_iter):
        x = mul(mul(rv, x), sub(one, x))
    return x


def probe_logistic(r: Any = "3.999", x0: Any = "0.5", n_iter: int = 1000,
                   backend: Backend = NATIVE64) -> BitPattern:
    """Bit pattern of x_n for x <- (r*x)*(1-x)."""
    return backend.bits(logistic_value(r, x0, n_iter, backend))


_M1 = 0x5555555555555555
_M2 = 0x3333333333333333
_M4 = 0x0F0F0F0F0F0F0F0F
_H01 = 0x0101010101010101
_MASK64 = (1 << 64) - 1


def popcount_software(x: int) -> int:
    """Shift-and-mask population count of a 64-bit word."""
    x = x - ((x >> 1) & _M1)
    x = (x & _M2) + ((x >> 2) & _M2)
    x = (x + (x >> 4)) & _M4
    return ((x * _H01) & _MASK64) >> 56


TIMING_SEED = 0x5EED


def popcount_words(iterations: int, seed: int = TIMING_SEED) -> list[int]:
    rng = random.Random(seed)
    return [rng.getrandbits(64) for _ in range(iterations)]


def _median_iqr(samples: list[float]) -> tuple[float, float]:
    q1, _, q3 = statistics.quantiles(samples, n=4, method="inclusive")
    return statistics.median(samples), q3 - q1


def probe_popcount_timing(iterations: int = 100_000, repeats: int = 5,
                          seed: int = TIMING_SEED) -> TimingPayload:
    """Wall-clock comparison of software popcount vs ``int.bit_count``."""
    if iterations < 100_000:
        raise DomainError("popcount timing needs at least 1e5 iterations")
    if repeats < 2:
        raise DomainError("popcount timing needs at least 2 repeats")
    if not time.get_clock_info("perf_counter").monotonic:
        return TimingPayload.unsupported(iterations)
    words = popcount_words(iterations, seed)
    sw: list[float] = []
    hw: list[float] = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        sw_sum = sum(map(popcount_software, words))
        t1 = time.perf_counter_ns()
        hw_sum = sum(map(int.bit_count, words))
        t2 = time.perf_counter_ns()
        if sw_sum != hw_sum:
            raise RuntimeError("software and built-in popcount disagree")
        sw.append((t1 - t0) / 1e9)
        hw.append((t2 - t1) / 1e9)
    sw_med, sw_iqr = _median_iqr(sw)
    hw_med, hw_iqr = _median_iqr(hw)
    return TimingPayload(iterations, sw_med, sw_iqr, hw_med, hw_iqr, sw_med / hw_med, sw_sum)


# ---------------------------------------------------------------------------
# Registry and battery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    probe_id: str
    backend: str
    payload: Payload

    @property
    def kind(self) -> str:
        return self.payload.kind


@dataclass(frozen=True)
class ProbeSpec:
    probe_id: str
    kind: str
    run: Callable[[Backend], Payload]
    deterministic: bool = True


def _registry() -> dict[str, ProbeSpec]:
    specs = [
        ProbeSpec("sqrt-identity", "bool", lambda b: BoolPayload(probe_sqrt_identity("2.0", b))),
        ProbeSpec("gentleman", "pair",
                  lambda b: PairPayload(*_astuple(probe_gentleman(b)))),
        ProbeSpec("easy-computations", "bools", lambda b: BoolsPayload(probe_easy_computations(b))),
    ]
    for k in SIN_EXPONENTS:
        for pi in PiConstant:
            specs.append(ProbeSpec(f"sin-k{k}-{pi.value.lower()}", "sin",
                                   lambda b, k=k, pi=pi: probe_sin(k, pi, b)))
    specs.append(ProbeSpec("rump-f", "residual", probe_rump_f))
    specs.append(ProbeSpec("rump-p", "residual", probe_rump_p))
    for n in SUM_SIZES:
        specs.append(ProbeSpec(f"sum-residual-{n}", "residual",
                               lambda b, n=n: probe_sum_residual(n, b)))
    specs.append(ProbeSpec("logistic-default", "bits",
                           lambda b: BitsPayload(probe_logistic(*LOGISTIC_DEFAULTS, backend=b))))
    specs.append(ProbeSpec("popcount-timing", "timing",
                           lambda b: probe_popcount_timing(), deterministic=False))
    return {s.probe_id: s for s in specs}


def _astuple(g: GentlemanResult) -> tuple[int, int, bool]:
    return g.mantissa_bits, g.base, g.capped


REGISTRY: dict[str, ProbeSpec] = _registry()
PROBE_IDS: tuple[str, ...] = tuple(REGISTRY)
DETERMINISTIC_IDS: tuple[str, ...] = tuple(p for p, s in REGISTRY.items() if s.deterministic)
TIMING_ID = "popcount-timing"


def get_probe(probe_id: str) -> ProbeSpec:
    try:
        return REGISTRY[probe_id]
    except KeyError:
        raise UnknownProbeError(probe_id) from None


def run_probe(probe_id: str, backend: Backend = NATIVE64) -> ProbeResult:
    spec = get_probe(probe_id)
    return ProbeResult(probe_id, backend.name, spec.run(backend))


def run_battery(backend: Backend = NATIVE64, include_timing: bool | None = None,
                timing_iterations: int = 100_000) -> list[ProbeResult]:
    """Run every registered probe in canonical order (timing last).

    Timing is included by default only for native backends, since it
    measures the host rather than the arithmetic under test.  A probe that
    raises is recorded as an ``error`` result.
    """
    if include_timing is None:
        include_timing = isinstance(backend, (NativeBinary64, NativeBinary32))
    results = []
    for probe_id, spec in REGISTRY.items():
        if not spec.deterministic:
            if not include_timing:
                continue
            run = lambda b: probe_popcount_timing(timing_iterations)  # noqa: E731
        else:
            run = spec.run
        try:
            payload = run(backend)
        except Exception as exc:  # battery results stay total
            log.warning("probe %s failed on %s: %s", probe_id, backend.name, exc)
            payload = ErrorPayload(f"{type(exc).__name__}: {exc}")
        results.append(ProbeResult(probe_id, backend.name, payload))
    return results
