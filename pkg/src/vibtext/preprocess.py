"""Segmentation, scaled FFT magnitudes and their integer-token text encoding."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NonFiniteInput, SignalTooShort, TooManySegments
from .signal_io import TimeSeriesSignal

DEFAULT_SEGMENT_LENGTH = 512
DEFAULT_DECIMALS = 3
SEPARATOR = ","
MISSING_TOKEN = "NaN"
_SPLIT = 134217729.0  # 2**27 + 1


class SegmentMode(str, enum.Enum):
    CONTIGUOUS = "contiguous"
    RANDOM_START = "random"


@dataclass(frozen=True, eq=False)
class Segment:
    samples: np.ndarray
    parent: str
    start_index: int

    @property
    def length(self) -> int:
        return self.samples.size


@dataclass(frozen=True, eq=False)
class SpectrumVector:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("spectrum must be one-dimensional")
        if np.any(v[~np.isnan(v)] < 0):
            raise ValueError("spectrum magnitudes must be non-negative")
        object.__setattr__(self, "values", v)

    @property
    def length(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class EncodedSample:
    text: str
    decimals: int

    @property
    def tokens(self) -> list[str]:
        return self.text.split(SEPARATOR)


def segment_starts(n: int, length: int, count: int, mode=SegmentMode.RANDOM_START, seed: int = 0) -> np.ndarray:
    if length < 1 or count < 1:
        raise ValueError("segment length and count must be positive")
    if n < length:
        raise SignalTooShort(f"signal has {n} samples, segment length is {length}")
    mode = SegmentMode(mode)
    if mode is SegmentMode.CONTIGUOUS:
        if count > n // length:
            raise TooManySegments(f"{count} contiguous segments of {length} need {count * length} samples, have {n}")
        return np.arange(count, dtype=np.int64) * length
    rng = np.random.default_rng(seed)
    return rng.integers(0, n - length, size=count, endpoint=True, dtype=np.int64)


def segment(signal: TimeSeriesSignal, length: int = DEFAULT_SEGMENT_LENGTH, count: int = 1,
            mode=SegmentMode.RANDOM_START, seed: int = 0) -> list[Segment]:
    starts = segment_starts(len(signal), length, count, mode, seed)
    x = signal.samples
    return [Segment(x[s:s + length], signal.source_id, int(s)) for s in starts]


def windows(x: np.ndarray, starts, length: int) -> np.ndarray:
    """Stack the windows at ``starts`` into a (count, length) array."""
    starts = np.asarray(starts, dtype=np.int64)
    return x[starts[:, None] + np.arange(length)[None, :]]


def _as_array(seg) -> np.ndarray:
    return seg.samples if isinstance(seg, Segment) else np.asarray(seg, dtype=np.float64)


def fft_magnitude_batch(x: np.ndarray) -> np.ndarray:
    """|FFT|/L along the last axis."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 1:
        raise ValueError("segment length must be at least 1")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("segment contains NaN or infinite samples")
    return np.abs(np.fft.fft(x, axis=-1)) / x.shape[-1]


def fft_magnitude(seg) -> SpectrumVector:
    return SpectrumVector(fft_magnitude_batch(_as_array(seg)))


def handle_sign(y: float) -> tuple[float, int]:
    return (abs(y), 1) if y >= 0 else (abs(y), -1)


def _product_error(a: np.ndarray, b: float, p: np.ndarray) -> np.ndarray:
    """a*b - p exactly, for p = fl(a*b) (Dekker's two-product)."""
    def split(v):
        c = _SPLIT * v
        hi = c - (c - v)
        return hi, v - hi
    a_hi, a_lo = split(a)
    b_hi, b_lo = split(np.float64(b))
    return ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo


def _quantize_array(values, decimals: int):
    """Integer magnitudes (as float64) and a missing mask, sign restored.

    Each magnitude is read as the shortest decimal that round-trips to it,
    so 0.29 at D=2 gives 29 and 6.674154 at D=6 gives 6674154 even though
    neither is exactly representable. Everything else is truncated exactly.
    """
    if not 0 <= decimals <= 12:
        raise ValueError("decimals must lie in 0..12")
    y = np.asarray(values, dtype=np.float64)
    missing = ~np.isfinite(y)
    mag = np.where(missing, 0.0, np.abs(y))
    scale = 10.0 ** decimals
    p = mag * scale
    fl = np.floor(p)
    # the rounded product can land on an integer the exact product falls short of
    fl = np.where((fl == p) & (_product_error(mag, scale, p) < 0), fl - 1, fl)
    r = np.rint(p)
    q = np.where(r / scale == mag, r, fl)
    return np.where(y < 0, -q, q), missing


def truncated(values, decimals: int) -> np.ndarray:
    """Values cut to ``decimals`` places, as floats; what a decoder recovers from the tokens."""
    q, missing = _quantize_array(values, decimals)
    out = q / 10 ** decimals
    out[missing] = np.nan
    return out


def quantize(values: Sequence[float], decimals: int) -> list[Optional[int]]:
    """Truncate to ``decimals`` places and scale to integers; non-finite -> None."""
    q, missing = _quantize_array(values, decimals)
    return [None if m else int(v) for v, m in zip(q, missing)]


def _render(q: np.ndarray, missing: np.ndarray) -> str:
    tokens = q.astype(np.int64).astype(str)
    if missing.any():
        tokens = tokens.astype(object)
        tokens[missing] = MISSING_TOKEN
    return SEPARATOR.join(tokens.tolist())


def encode(spectrum, decimals: int = DEFAULT_DECIMALS, one_sided: bool = False) -> EncodedSample:
    values = spectrum.values if isinstance(spectrum, SpectrumVector) else SpectrumVector(spectrum).values
    if one_sided:
        values = values[:values.size // 2 + 1]
    q, missing = _quantize_array(values, decimals)
    return EncodedSample(_render(q, missing), decimals)


def encode_batch(spectra: np.ndarray, decimals: int = DEFAULT_DECIMALS, one_sided: bool = False) -> list[EncodedSample]:
    spectra = np.asarray(spectra, dtype=np.float64)
    if one_sided:
        spectra = spectra[:, :spectra.shape[1] // 2 + 1]
    q, missing = _quantize_array(spectra, decimals)
    return [EncodedSample(_render(qr, mr), decimals) for qr, mr in zip(q, missing)]


def decode(sample, decimals: Optional[int] = None) -> np.ndarray:
    if isinstance(sample, EncodedSample):
        text, decimals = sample.text, sample.decimals if decimals is None else decimals
    else:
        text = sample
    if decimals is None:
        raise ValueError("decimals required when decoding raw text")
    scale = 10 ** decimals
    return np.array([math.nan if tok == MISSING_TOKEN else int(tok) / scale for tok in text.split(SEPARATOR)])
