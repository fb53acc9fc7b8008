import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import MpInterchange, mp_sin_rounded
from procscope.emul import BINARY32, BINARY64, EmulatedBackend, FpConfig
from procscope.errors import DomainError, EncodingError, UnknownProbeError
from procscope.fpcore import BitPattern, NativeBinary32, NativeBinary64, PiConstant, from_bits
from procscope.probes import (DETERMINISTIC_IDS, PAYLOAD_TYPES, PROBE_IDS, SUM_SIZES, BitsPayload,
                              BoolPayload, BoolsPayload, ErrorPayload, PairPayload, ResidualEntry,
                              ResidualPayload, SinPayload, TimingPayload, decode_payload,
                              logistic_value, popcount_software, power_of_ten, probe_easy_computations,
                              probe_gentleman, probe_logistic, probe_popcount_timing, probe_rump_f,
                              probe_rump_p, probe_sin, probe_sqrt_identity, probe_sum_residual,
                              render_decimal, run_battery, run_probe)

N64 = NativeBinary64()
N32 = NativeBinary32()
E64 = EmulatedBackend(BINARY64)
E32 = EmulatedBackend(BINARY32)


def test_registry_order_and_ids():
    assert len(PROBE_IDS) == 25 and len(DETERMINISTIC_IDS) == 24
    assert PROBE_IDS[:4] == ("sqrt-identity", "gentleman", "easy-computations", "sin-k10-pi1")
    assert PROBE_IDS[-1] == "popcount-timing"
    assert "sum-residual-22" in PROBE_IDS and "sin-k37-pi4" in PROBE_IDS


# -- sqrt identity ------------------------------------------------------------------

@pytest.mark.parametrize("backend", [N64, E64, N32, E32])
def test_sqrt_identity(backend):
    assert probe_sqrt_identity("2.0", backend) is False
    for a in ["0.0", "1.0", "4.0", "16", "1024", "0.25"]:
        assert probe_sqrt_identity(a, backend) is True


@pytest.mark.parametrize("a", ["-1", "nan", "inf", "-0.5"])
def test_sqrt_identity_domain(a):
    with pytest.raises(DomainError):
        probe_sqrt_identity(a)


# -- gentleman ------------------------------------------------------------------------

def test_gentleman_native():
    assert probe_gentleman(N64).mantissa_bits == 53 and probe_gentleman(N64).base == 2
    assert (probe_gentleman(N32).mantissa_bits, probe_gentleman(N32).base) == (24, 2)


@pytest.mark.parametrize("p", range(8, 65))
def test_gentleman_sweep(p):
    g = probe_gentleman(EmulatedBackend(FpConfig(p, 11)))
    assert (g.mantissa_bits, g.base, g.capped) == (p, 2, False)


def test_gentleman_directed_rounding_still_finds_width():
    g = probe_gentleman(EmulatedBackend(FpConfig(24, 8, "toward-zero")))
    assert g.mantissa_bits == 24


# -- easy computations ---------------------------------------------------------------

def test_easy_computations_binary64():
    assert probe_easy_computations(N64) == (False, True, False, False)
    assert probe_easy_computations(E64) == (False, True, False, False)
    assert probe_easy_computations(MpInterchange(64)) == (False, True, False, False)


def test_easy_computations_binary32():
    oracle = probe_easy_computations(MpInterchange(32))
    assert probe_easy_computations(N32) == oracle == probe_easy_computations(E32)


# -- sine ------------------------------------------------------------------------------

def test_power_of_ten_modes():
    assert power_of_ten(37, N64, "literal") == 1e37
    assert power_of_ten(37, N64, "iterated") != 1e37
    with pytest.raises(ValueError):
        power_of_ten(3, N64, "pow")


@pytest.mark.parametrize("pi,lo32", [(PiConstant.PI1, 0x47257756), (PiConstant.PI2, 0x9D94EF4D),
                                     (PiConstant.PI3, 0x099F9067), (PiConstant.PI4, 0x099F9067)])
def test_sin_k37_low_words_match_published_hex(pi, lo32):
    assert probe_sin(37, pi, N64).bits.low32() == lo32


@pytest.mark.parametrize("k", [10, 17, 37])
@pytest.mark.parametrize("pi", list(PiConstant))
def test_sin_matches_mpmath(k, pi):
    arg = float(f"1e{k}") * float(pi.literal)
    want = mp_sin_rounded(Fraction(arg), 53)
    assert Fraction(from_bits(probe_sin(k, pi, N64).bits)) == want


def test_sin_decimal_rendering():
    assert probe_sin(37, "PI1", N64).dec == "-0.832"
    assert probe_sin(17, "PI1", N64).dec == "0.423"
    assert probe_sin(10, "PI1", N64).dec == "0.375"


@pytest.mark.parametrize("x,text", [
    (Fraction(3, 8), "0.375"),
    (Fraction(-2239, 10**9), "-2.23e-06"),
    (Fraction(-793, 100000), "-0.00793"),
    (Fraction(123456, 1000), "123"),
    (Fraction(1234, 100), "12.3"),
    (Fraction(10**5), "1.00e+05"),
    (Fraction(0), "0"),
    (Fraction(-999999, 10**6), "-0.999"),
])
def test_render_decimal_truncates(x, text):
    assert render_decimal(x) == text


# -- cancellation probes, golden bits from the mpmath oracle --------------------------

RUMP_F_B64 = "b64:44437683b1793569,7.180560037061026e+20,false"
RUMP_P_B64 = ("b64:bd60000000000000,-4.547473508864641e-13,false;"
              "b64:be5d822000000000,-2.7481746656121686e-08,false")
RUMP_P_B32 = "b32:39800000,0.000244140625,false;b32:39800000,0.000244140625,false"
SUM_B64 = {
    10: "b64:0000000000000000,0.0,true",
    21: "b64:0000000000000000,0.0,true",
    22: "b64:c190000000000000,-67108864.0,false",
    25: "b64:c220000000000000,-34359738368.0,false",
    30: "b64:c330000000000000,-4503599627370496.0,false",
    100: "b64:51f0000000000000,4.9732323640978664e+86,false",
}
SUM_B32 = {
    10: "b32:00000000,0.0,true",
    21: "b32:d9c00000,-6755399441055744.0,false",
    22: "b32:5b400000,5.404319552844595e+16,false",
    25: "b32:df800000,-1.8446744073709552e+19,false",
    30: "b32:e8000000,-2.4178516392292583e+24,false",
}


@pytest.mark.parametrize("backend", [N64, E64, MpInterchange(64)])
def test_rump_golden_binary64(backend):
    assert probe_rump_f(backend).encode() == RUMP_F_B64
    assert probe_rump_p(backend).encode() == RUMP_P_B64


@pytest.mark.parametrize("backend", [N32, E32, MpInterchange(32)])
def test_rump_p_golden_binary32(backend):
    assert probe_rump_p(backend).encode() == RUMP_P_B32


def test_rump_f_binary32_overflows_to_nan():
    e = probe_rump_f(E32).entries[0]
    assert math.isnan(e.value) and not e.exact


@pytest.mark.parametrize("n", SUM_SIZES)
def test_sum_residual_golden(n):
    for b in (N64, E64, MpInterchange(64)):
        assert probe_sum_residual(n, b).encode() == SUM_B64[n]
    if n in SUM_B32:
        for b in (N32, E32, MpInterchange(32)):
            assert probe_sum_residual(n, b).encode() == SUM_B32[n]


@pytest.mark.parametrize("n", [0, 309, 2.5])
def test_sum_residual_domain(n):
    with pytest.raises(DomainError):
        probe_sum_residual(n)


# -- logistic ----------------------------------------------------------------------------

@pytest.mark.parametrize("backend", [N64, N32, E64, E32])
def test_logistic_exact_orbits(backend):
    assert backend.to_fraction(logistic_value("2.0", "0.5", 50, backend)) == Fraction(1, 2)
    assert backend.to_fraction(logistic_value("4.0", "0.5", 1, backend)) == 1
    assert backend.to_fraction(logistic_value("4.0", "0.5", 2, backend)) == 0


def test_logistic_golden():
    assert probe_logistic(backend=N64) == BitPattern(64, "3fb3c9f66f554941")
    assert probe_logistic(backend=MpInterchange(64)) == BitPattern(64, "3fb3c9f66f554941")
    assert probe_logistic(backend=E32) == BitPattern(32, "3f7f58df")
    assert probe_logistic(backend=MpInterchange(32)) == BitPattern(32, "3f7f58df")


@pytest.mark.parametrize("args", [("4.5", "0.5", 10), ("3.9", "1.5", 10), ("3.9", "0.5", 0),
                                  ("nan", "0.5", 3)])
def test_logistic_domain(args):
    with pytest.raises(DomainError):
        probe_logistic(*args)


# -- timing --------------------------------------------------------------------------------

@given(st.integers(0, (1 << 64) - 1))
def test_software_popcount(x):
    assert popcount_software(x) == x.bit_count()


def test_timing_checksum_is_seed_stable():
    a = probe_popcount_timing(100_000, repeats=2)
    b = probe_popcount_timing(100_000, repeats=2)
    assert a.checksum == b.checksum
    assert a.sw_median > 0 and a.hw_iqr >= 0


def test_timing_minimum_iterations():
    with pytest.raises(DomainError):
        probe_popcount_timing(1000)


# -- payload encodings ------------------------------------------------------------------

patterns = st.one_of(
    st.integers(0, (1 << 64) - 1).map(lambda v: BitPattern.from_int(v, 64)),
    st.integers(0, (1 << 32) - 1).map(lambda v: BitPattern.from_int(v, 32)))
entries = st.builds(ResidualEntry, patterns, st.floats().map(repr), st.booleans())
payloads = st.one_of(
    st.builds(BoolPayload, st.booleans()),
    st.builds(BoolsPayload, st.lists(st.booleans(), min_size=1, max_size=6).map(tuple)),
    st.builds(PairPayload, st.integers(0, 200), st.integers(-1, 64), st.booleans()),
    st.builds(SinPayload, patterns, st.from_regex(r"-?[0-9.e+-]{1,9}", fullmatch=True)),
    st.builds(ResidualPayload, st.lists(entries, min_size=1, max_size=3).map(tuple)),
    st.builds(BitsPayload, patterns),
    st.builds(TimingPayload, st.integers(100_000, 10**7), st.floats(0, 10), st.floats(0, 10),
              st.floats(0, 10), st.floats(0, 10), st.floats(0, 1000), st.integers(0, 10**9)),
    st.builds(ErrorPayload, st.from_regex(r"[A-Za-z][A-Za-z0-9 :]{0,30}[a-z]", fullmatch=True)),
)


@given(payloads)
def test_payload_round_trip(p):
    assert decode_payload(p.kind, p.encode()) == p


@pytest.mark.parametrize("kind,text", [("bool", "yes"), ("pair", "53"), ("sin", "b64:00"),
                                       ("residual", "b64:0000000000000000,x,true"),
                                       ("timing", "n=5"), ("nope", "1")])
def test_payload_decode_errors(kind, text):
    with pytest.raises(EncodingError):
        decode_payload(kind, text)


def test_payload_kinds_cover_registry():
    from procscope.probes import REGISTRY
    assert {s.kind for s in REGISTRY.values()} <= set(PAYLOAD_TYPES)


# -- battery ---------------------------------------------------------------------------------

def test_battery_shape_and_determinism():
    runs = [run_battery(N64, include_timing=False) for _ in range(3)]
    assert [r.probe_id for r in runs[0]] == list(DETERMINISTIC_IDS)
    assert runs[0] == runs[1] == runs[2]
    full = run_battery(N64)
    assert len(full) == 25 and full[-1].kind == "timing"


def test_emulated_battery_skips_timing_by_default():
    assert len(run_battery(E32)) == 24


def test_battery_records_probe_failures():
    class Broken(NativeBinary64):
        def sin(self, a):
            raise RuntimeError("no sine today")

    results = run_battery(Broken(), include_timing=False)
    errors = [r for r in results if r.kind == "error"]
    assert len(errors) == 12 and "no sine today" in errors[0].payload.message
    assert results[1].payload == PairPayload(53, 2)


def test_run_probe_unknown():
    with pytest.raises(UnknownProbeError):
        run_probe("fdiv-bug")
    assert run_probe("sqrt-identity").payload == BoolPayload(False)


def test_extended_precision_separates_pi3_and_pi4():
    # 64 significand bits resolve the two literals, so the collapse is a binary64 effect
    sig64 = EmulatedBackend(FpConfig(64, 15))
    assert sig64.const(PiConstant.PI3.literal) != sig64.const(PiConstant.PI4.literal)
    assert probe_sin(37, "PI3", sig64).bits != probe_sin(37, "PI4", sig64).bits


def test_binary32_cannot_tell_the_pi_literals_apart():
    bits = {probe_sin(17, pi, N32).bits for pi in PiConstant}
    assert len(bits) == 1
