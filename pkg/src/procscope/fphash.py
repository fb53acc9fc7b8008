"""An experimental hash whose value depends on the floating-point unit.

Each message byte is mixed into a logistic-map state, and the state's bit
pattern is folded into a rotating accumulator.  Because the map is chaotic,
tiny rounding differences between arithmetics grow until the digests
disagree.  This is a research prototype for measuring environment
sensitivity.  It is not a secure hash and makes no cryptographic claims.

All constants (the 257 divisor, the 17-bit rotation, 16 rounds per byte)
are arbitrary and pinned only so results are reproducible.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field

from .errors import DomainError
from .fpcore import NATIVE64, Backend, BitPattern

ROTATION = 17
FINAL_BLOCKS = 4
FINAL_ROUNDS = 16


@dataclass(frozen=True)
class FpHashParams:
    r: float = 3.999
    rounds_per_byte: int = 16
    digest_bits: int = 256
    backend: Backend = field(default=NATIVE64, compare=False)

    def __post_init__(self):
        if not 3.57 < self.r <= 4.0:
            raise DomainError(f"r must lie in (3.57, 4], got {self.r}")
        if self.rounds_per_byte < 8:
            raise DomainError("rounds_per_byte must be at least 8")
        if self.digest_bits <= 0 or self.digest_bits % 64:
            raise DomainError("digest_bits must be a positive multiple of 64")


@dataclass(frozen=True)
class FpDigest:
    words: tuple[BitPattern, ...]

    @property
    def value(self) -> int:
        out = 0
        for w in self.words:
            out = (out << 64) | w.value
        return out

    def hexdigest(self) -> str:
        return "".join(w.hex for w in self.words)

    def hamming(self, other: FpDigest) -> int:
        return (self.value ^ other.value).bit_count()


def _fold64(p: BitPattern) -> int:
    v, out = p.value, 0
    while v:
        out ^= v & 0xFFFFFFFFFFFFFFFF
        v >>= 64
    return out


class _Absorber:
    def __init__(self, bits: int):
        self.bits = bits
        self.mask = (1 << bits) - 1
        self.acc = 0

    def absorb(self, p: BitPattern) -> None:
        a = self.acc
        a = ((a << ROTATION) | (a >> (self.bits - ROTATION))) & self.mask
        self.acc = a ^ _fold64(p)


def fp_hash(message: bytes, params: FpHashParams = FpHashParams()) -> FpDigest:
    b = params.backend
    one = b.const("1")
    two = b.const("2")
    c257 = b.const("257")
    r = b.const(repr(float(params.r)))
    mul, sub = b.mul, b.sub

    def iterate(x, n):
        for _ in range(n):
            x = mul(mul(r, x), sub(one, x))
        return x

    acc = _Absorber(params.digest_bits)
    x = b.const("0.5")
    for byte in bytes(message):
        x = b.div(b.add(b.div(b.from_int(byte + 1), c257), x), two)
        x = iterate(x, params.rounds_per_byte)
        acc.absorb(b.bits(x))
    for _ in range(FINAL_BLOCKS):
        x = iterate(x, FINAL_ROUNDS)
        acc.absorb(b.bits(x))
    words = params.digest_bits // 64
    return FpDigest(tuple(BitPattern.from_int((acc.acc >> (64 * (words - 1 - i))) & ((1 << 64) - 1), 64)
                          for i in range(words)))


def random_messages(trials: int, length: int = 64, seed: int = 0) -> list[bytes]:
    rng = random.Random(seed)
    return [rng.randbytes(length) for _ in range(trials)]


@dataclass(frozen=True)
class DivergenceReport:
    trials: int
    differing: int
    fraction: float
    mean_hamming: float  # over all trials
    mean_hamming_differing: float  # over differing trials only (0 if none)


def measure_divergence(params_a: FpHashParams, params_b: FpHashParams, trials: int = 100,
                       length: int = 64, seed: int = 0) -> DivergenceReport:
    """How often, and by how many bits, two arithmetics disagree on random messages."""
    if trials < 100:
        raise DomainError("divergence needs at least 100 trials")
    dists = [fp_hash(m, params_a).hamming(fp_hash(m, params_b))
             for m in random_messages(trials, length, seed)]
    differing = [d for d in dists if d]
    return DivergenceReport(trials, len(differing), len(differing) / trials,
                            statistics.fmean(dists),
                            statistics.fmean(differing) if differing else 0.0)


@dataclass(frozen=True)
class AvalancheReport:
    trials: int
    digest_bits: int
    mean_flipped: float
    min_flipped: int
    max_flipped: int


def measure_avalanche(params: FpHashParams = FpHashParams(), trials: int = 1000,
                      length: int = 64, seed: int = 1) -> AvalancheReport:
    """Digest bits flipped by a single random message-bit flip."""
    rng = random.Random(seed)
    flips = []
    for _ in range(trials):
        msg = bytearray(rng.randbytes(length))
        base = fp_hash(bytes(msg), params)
        bit = rng.randrange(8 * length)
        msg[bit // 8] ^= 1 << (bit % 8)
        flips.append(base.hamming(fp_hash(bytes(msg), params)))
    return AvalancheReport(trials, params.digest_bits, statistics.fmean(flips), min(flips), max(flips))
