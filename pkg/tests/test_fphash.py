import pytest
from hypothesis import given, settings, strategies as st

from oracles import MpInterchange
from procscope.emul import BINARY32, BINARY64, PRESETS, EmulatedBackend
from procscope.errors import DomainError
from procscope.fphash import FpHashParams, fp_hash, measure_avalanche, measure_divergence
from procscope.fpcore import NativeBinary32, NativeBinary64

# Frozen from the mpmath interchange oracle (see tests/oracles.py).
GOLDEN = {
    (64, b""): "000000000000000000000000000000000001fe9fc995c30a634bc176cfc8bf8d",
    (64, b"abc"): "00000000000000000000000ff4259a7da274bd26ca347a9cd06d2e063833a75b",
    (64, bytes(range(64))): "57f293584f6571a4b6a4705bcbcfe49a4b1bcf9844fe6f7b77c155379495258f",
    (32, b""): "00000000000000000000000000000000000000000001f540305d87ed5374c776",
    (32, b"abc"): "0000000000000000000000000000000fa0932df12edde9fc107745fde05cfc81",
    (32, bytes(range(64))): "3bbba5a2569733313f48cb19a977a9b104c73fc0be4c63c4eeb74b3f5505e2a1",
}


@pytest.mark.parametrize("width,msg", list(GOLDEN))
def test_golden_vectors(width, msg):
    backends = {64: (EmulatedBackend(BINARY64), NativeBinary64()),
                32: (EmulatedBackend(BINARY32), NativeBinary32())}[width]
    for b in backends:
        assert fp_hash(msg, FpHashParams(backend=b)).hexdigest() == GOLDEN[width, msg]


def test_golden_vectors_agree_with_oracle():
    for width in (32, 64):
        got = fp_hash(b"abc", FpHashParams(backend=MpInterchange(width))).hexdigest()
        assert got == GOLDEN[width, b"abc"]


@settings(max_examples=25)
@given(st.binary(max_size=200))
def test_fixed_length_and_deterministic(msg):
    d = fp_hash(msg)
    assert len(d.words) == 4 and len(d.hexdigest()) == 64
    assert fp_hash(msg) == d


def test_digest_width_parameter():
    assert len(fp_hash(b"x", FpHashParams(digest_bits=128)).hexdigest()) == 32


@pytest.mark.parametrize("kwargs", [dict(r=3.5), dict(r=4.01), dict(rounds_per_byte=7),
                                    dict(digest_bits=100), dict(digest_bits=0)])
def test_param_validation(kwargs):
    with pytest.raises(DomainError):
        FpHashParams(**kwargs)


def test_identical_backends_never_diverge():
    p = FpHashParams()
    rep = measure_divergence(p, p, trials=100)
    assert rep.fraction == 0.0 and rep.mean_hamming == 0.0


def test_fma_alone_is_invisible_to_the_hash():
    # the map has no a*b+c shape, so contraction never fires
    a = FpHashParams(backend=EmulatedBackend(BINARY64))
    b = FpHashParams(backend=EmulatedBackend(PRESETS["BINARY64-FMA"]))
    assert measure_divergence(a, b, trials=100).fraction == 0.0


def test_divergence_needs_enough_trials():
    with pytest.raises(DomainError):
        measure_divergence(FpHashParams(), FpHashParams(), trials=10)


def test_avalanche_report():
    rep = measure_avalanche(trials=50)
    assert rep.trials == 50 and 0 <= rep.min_flipped <= rep.mean_flipped <= rep.max_flipped <= 256
