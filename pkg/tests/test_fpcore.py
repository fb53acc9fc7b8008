import math
import struct
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from procscope.emul import EmulatedBackend, FpConfig
from procscope.errors import EncodingError, SpecificationError
from procscope.fpcore import (NATIVE64, BitPattern, EvalOrder, NativeBinary32, PiConstant,
                              eval_ordered, from_bits, pi_value, to_bits)


def test_bitpattern_text_round_trip():
    p = BitPattern.parse("b64:3ff0000000000000")
    assert p.width == 64 and p.value == 0x3FF << 52
    assert str(p) == "b64:3ff0000000000000"
    assert BitPattern.from_int(0x7F800000, 32) == BitPattern(32, "7f800000")


@pytest.mark.parametrize("text", ["b64:3FF0000000000000", "b64:3ff", "b32:1ffffffff", "x64:00", "b64:"])
def test_bitpattern_rejects_malformed(text):
    with pytest.raises(EncodingError):
        BitPattern.parse(text)


def test_bitpattern_value_must_fit_width():
    with pytest.raises(EncodingError):
        BitPattern.from_int(1 << 32, 32)
    # 79-bit patterns use 20 hex digits; the top digit may only hold 3 bits
    with pytest.raises(EncodingError):
        BitPattern(79, "f" * 20)


@pytest.mark.parametrize("x,hexval", [
    (1.0, "3ff0000000000000"),
    (-0.0, "8000000000000000"),
    (0.1, "3fb999999999999a"),
    (math.inf, "7ff0000000000000"),
    (5e-324, "0000000000000001"),
])
def test_to_bits_binary64_examples(x, hexval):
    assert to_bits(x) == BitPattern(64, hexval)


def test_quiet_nan_with_zero_payload():
    x = from_bits(BitPattern(64, "7ff8000000000000"))
    assert math.isnan(x)
    assert struct.pack(">d", x).hex() == "7ff8000000000000"


def test_binary32_examples():
    assert to_bits(np.float32(1.0)) == BitPattern(32, "3f800000")
    assert to_bits(np.float32(-0.0)) == BitPattern(32, "80000000")


@given(st.integers(0, (1 << 64) - 1))
def test_binary64_round_trip_all_patterns(v):
    p = BitPattern.from_int(v, 64)
    assert to_bits(from_bits(p)) == p


@given(st.integers(0, (1 << 32) - 1))
def test_binary32_round_trip_all_patterns(v):
    p = BitPattern.from_int(v, 32)
    assert to_bits(from_bits(p)) == p


def test_pi_constants():
    assert pi_value(PiConstant.PI3) == math.pi
    assert pi_value(PiConstant.PI4) == math.pi
    assert pi_value(PiConstant.PI1) != pi_value(PiConstant.PI2)


def test_eval_order_keeps_left_fold():
    order = EvalOrder.compile("0.1 + 0.2 + 0.3")
    assert [s.op for s in order.steps if s.op == "add"] == ["add", "add"]
    assert eval_ordered(order, {}, NATIVE64) == (0.1 + 0.2) + 0.3
    assert eval_ordered("0.1 + (0.2 + 0.3)", {}, NATIVE64) == 0.1 + (0.2 + 0.3)


def test_eval_power_is_iterated_multiplication():
    x = 1.1
    assert eval_ordered("X**3", {"X": x}, NATIVE64) == (x * x) * x
    assert eval_ordered("X**0", {"X": x}, NATIVE64) == 1.0


def test_eval_unbound_operand():
    with pytest.raises(SpecificationError):
        eval_ordered("X + 1", {}, NATIVE64)


@pytest.mark.parametrize("expr", ["X ** Y", "X % 2", "foo(X)", "X < 1", "[X]"])
def test_eval_rejects_unsupported_syntax(expr):
    with pytest.raises(SpecificationError):
        EvalOrder.compile(expr)


def test_eval_ieee_defaults_never_trap():
    assert eval_ordered("1 / 0", {}, NATIVE64) == math.inf
    assert eval_ordered("-1 / 0", {}, NATIVE64) == -math.inf
    assert math.isnan(eval_ordered("0 / 0", {}, NATIVE64))
    assert math.isnan(eval_ordered("sqrt(-1)", {}, NATIVE64))


def test_eval_contracts_only_when_fma_enabled():
    a = 1 + Fraction(1, 2**30)
    prod = float(a) * float(a)
    # the rounding error of a*a is exactly representable
    err = float(a * a - Fraction(prod))
    assert err != 0
    plain = EmulatedBackend(FpConfig(53, 11))
    fused = EmulatedBackend(FpConfig(53, 11, fma_enabled=True))
    inputs = {"A": repr(float(a)), "C": repr(prod)}
    assert plain.to_float(eval_ordered("A*A - C", inputs, plain)) == 0.0
    assert fused.to_float(eval_ordered("A*A - C", inputs, fused)) == err
    assert fused.to_float(eval_ordered("C - A*A", inputs, fused)) == -err


def test_native32_literal_avoids_double_rounding():
    # just above the midpoint 1 + 2**-24; binary64 parsing lands exactly on it
    text = "1.0000000596046448"
    assert float(text) == 1 + 2**-24
    exact = Fraction(text)
    v = NativeBinary32().const(text)
    assert Fraction(float(v)) == 1 + Fraction(1, 2**23)
    assert abs(Fraction(float(v)) - exact) < abs(1 - exact)


def test_native32_literal_overflow_edges():
    b = NativeBinary32()
    assert np.isinf(b.const("1e39"))
    assert b.const("3.40282356e38") == np.finfo(np.float32).max
