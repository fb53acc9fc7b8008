from fractions import Fraction

import pytest

from procscope.errors import DomainError
from procscope.fpcore import eval_ordered
from procscope.oracle import ExactBackend, MpBackend
from procscope.probes import RUMP_F, RUMP_F_INPUTS, RUMP_P


def test_exact_rump_f_is_1783():
    assert eval_ordered(RUMP_F, RUMP_F_INPUTS, ExactBackend()) == 1783


def test_mp_needs_enough_bits_for_rump_f():
    assert MpBackend(256).to_fraction(eval_ordered(RUMP_F, RUMP_F_INPUTS, MpBackend(256))) == 1783
    assert MpBackend(100).to_fraction(eval_ordered(RUMP_F, RUMP_F_INPUTS, MpBackend(100))) != 1783


def test_exact_rump_p_at_decimal_point():
    v = eval_ordered(RUMP_P, {"X": "0.707"}, ExactBackend())
    x = Fraction(707, 1000)
    assert v == 8118 * x**4 - 11482 * x**3 + x**2 + 5741 * x - 2030
    assert 2.748e-8 < -float(v) < 2.749e-8


def test_exact_backend_refuses_transcendentals():
    with pytest.raises(DomainError):
        ExactBackend().sqrt(Fraction(2))
    with pytest.raises(DomainError):
        ExactBackend().div(Fraction(1), Fraction(0))


def test_mp_to_fraction_keeps_sign():
    b = MpBackend(64)
    assert b.to_fraction(b.const("-0.75")) == Fraction(-3, 4)
    assert b.to_fraction(b.const("-3")) == -3
    assert b.to_fraction(b.const("inf")) is None


def test_mp_directed_rounding():
    lo = MpBackend(24, "toward-negative")
    hi = MpBackend(24, "toward-positive")
    third_lo = lo.to_fraction(lo.div(lo.const("1"), lo.const("3")))
    third_hi = hi.to_fraction(hi.div(hi.const("1"), hi.const("3")))
    assert third_lo < Fraction(1, 3) < third_hi
    assert third_hi - third_lo == Fraction(1, 2**25)
