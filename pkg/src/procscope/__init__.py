"""Floating-point environment fingerprinting."""

from .emul import BINARY32, BINARY64, PRESETS, FpConfig, Rounding, SinStrategy, get_backend
from .fpcore import NATIVE64, BitPattern, PiConstant, eval_ordered, from_bits, to_bits

__version__ = "0.1.0"

__all__ = [
    "BINARY32", "BINARY64", "PRESETS", "FpConfig", "Rounding", "SinStrategy", "get_backend",
    "NATIVE64", "BitPattern", "PiConstant", "eval_ordered", "from_bits", "to_bits",
]
