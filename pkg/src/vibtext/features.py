"""The fifteen time- and frequency-domain statistics used for the statistical track.

All moments are population moments (divide by the number of values).
Degenerate segments follow fixed conventions so no NaN reaches a prompt:
skewness and kurtosis are 0 when the standard deviation vanishes, and crest,
shape and impulse factors are 0 when the mean absolute value is 0.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput, SegmentTooShort
from .preprocess import Segment

TIME_FEATURES = (
    "mean", "rms", "std", "crest_factor", "skewness", "shape_factor",
    "kurtosis", "peak_to_peak", "energy_factor", "impulse_factor",
)
FREQ_FEATURES = (
    "peak_frequency", "p2p_frequency", "spectral_kurtosis", "spectral_bandwidth", "spectral_skewness",
)
FEATURE_NAMES = TIME_FEATURES + FREQ_FEATURES

# sigma below this fraction of the largest |value| counts as zero
_FLAT = 1e-12


@dataclass(frozen=True)
class FeatureVector:
    mean: float
    rms: float
    std: float
    crest_factor: float
    skewness: float
    shape_factor: float
    kurtosis: float
    peak_to_peak: float
    energy_factor: float
    impulse_factor: float
    peak_frequency: float
    p2p_frequency: float
    spectral_kurtosis: float
    spectral_bandwidth: float
    spectral_skewness: float
    peak_bin: int = field(default=0, compare=False, repr=False)

    @classmethod
    def from_row(cls, row, peak_bin: int = 0) -> "FeatureVector":
        return cls(*(float(v) for v in row), peak_bin=int(peak_bin))

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, n) for n in FEATURE_NAMES)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values()))


assert tuple(f.name for f in fields(FeatureVector))[:15] == FEATURE_NAMES


def _safe_div(num, den, ok):
    return np.where(ok, num / np.where(ok, den, 1.0), 0.0)


def _central_moments(v: np.ndarray):
    mu = v.mean(axis=-1)
    d = v - mu[..., None]
    var = (d ** 2).mean(axis=-1)
    sigma = np.sqrt(var)
    scale = np.max(np.abs(v), axis=-1)
    spread = sigma > _FLAT * scale
    skew = _safe_div((d ** 3).mean(axis=-1), sigma ** 3, spread)
    kurt = _safe_div((d ** 4).mean(axis=-1), var ** 2, spread)
    return mu, sigma, skew, kurt


def _check(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[-1] < 2:
        raise SegmentTooShort(f"features need at least 2 samples, got {x.shape[-1]}")
    return x


def time_feature_matrix(x) -> np.ndarray:
    """(n, 10) time-domain features for the rows of ``x``."""
    x = _check(x)
    mu, sigma, skew, kurt = _central_moments(x)
    ax = np.abs(x)
    sq_sum = (x ** 2).sum(axis=-1)
    rms = np.sqrt(sq_sum / x.shape[-1])
    abs_sum = ax.sum(axis=-1)
    abs_mean = abs_sum / x.shape[-1]
    peak = ax.max(axis=-1)
    nonzero = abs_mean > 0
    crest = _safe_div(peak, rms, nonzero)
    shape = _safe_div(rms, abs_mean, nonzero)
    impulse = _safe_div(peak, abs_mean, nonzero)
    energy = _safe_div(sq_sum, abs_sum ** 2, nonzero)
    p2p = x.max(axis=-1) - x.min(axis=-1)
    return np.stack([mu, rms, sigma, crest, skew, shape, kurt, p2p, energy, impulse], axis=-1)


def freq_feature_matrix(x, sampling_rate_hz: float):
    """(n, 5) frequency-domain features and the raw peak bin of each row.

    Uses the one-sided magnitude set |X(m)|, m = 0..L//2, of the unscaled FFT.
    Spectral bandwidth takes the magnitude-weighted mean bin as its centre.
    Peak frequency and bandwidth are converted from bins to Hz.
    """
    x = _check(x)
    length = x.shape[-1]
    hz_per_bin = sampling_rate_hz / length
    mag = np.abs(np.fft.rfft(x, axis=-1))
    peak_bin = np.argmax(mag, axis=-1)
    p2p = mag.max(axis=-1) - mag.min(axis=-1)
    _, _, skew, kurt = _central_moments(mag)
    bins = np.arange(mag.shape[-1], dtype=np.float64)
    total = mag.sum(axis=-1)
    has_energy = total > 0
    centre = _safe_div((mag * bins).sum(axis=-1), total, has_energy)
    spread = _safe_div((mag * (bins - centre[:, None]) ** 2).sum(axis=-1), total, has_energy)
    bandwidth = np.sqrt(spread) * hz_per_bin
    feats = np.stack([peak_bin * hz_per_bin, p2p, kurt, bandwidth, skew], axis=-1)
    return feats, peak_bin


def feature_matrix(x, sampling_rate_hz: float) -> np.ndarray:
    freq, _ = freq_feature_matrix(x, sampling_rate_hz)
    return np.concatenate([time_feature_matrix(x), freq], axis=-1)


def _samples(seg) -> np.ndarray:
    return seg.samples if isinstance(seg, Segment) else np.asarray(seg, dtype=np.float64)


def time_features(seg) -> dict[str, float]:
    row = time_feature_matrix(_samples(seg))[0]
    return dict(zip(TIME_FEATURES, map(float, row)))


def freq_features(seg, sampling_rate_hz: float) -> dict[str, float]:
    row, _ = freq_feature_matrix(_samples(seg), sampling_rate_hz)
    return dict(zip(FREQ_FEATURES, map(float, row[0])))


def feature_vector(seg, sampling_rate_hz: float) -> FeatureVector:
    x = _samples(seg)
    freq, peak = freq_feature_matrix(x, sampling_rate_hz)
    return FeatureVector.from_row(np.concatenate([time_feature_matrix(x)[0], freq[0]]), peak[0])


@dataclass(frozen=True, eq=False)
class FeatureTable:
    rows: np.ndarray
    header: tuple[str, ...] = FEATURE_NAMES
    labels: Optional[tuple[str, ...]] = None

    def __len__(self):
        return self.rows.shape[0]

    def vectors(self) -> list[FeatureVector]:
        return [FeatureVector.from_row(r) for r in self.rows]

    def to_csv(self, path=None) -> str:
        """Write UTF-8 CSV at 12 significant digits; an optional label column goes last."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(self.header) + (["label"] if self.labels is not None else []))
        for i, row in enumerate(self.rows):
            cells = [f"{v:.12g}" for v in row]
            if self.labels is not None:
                cells.append(self.labels[i])
            w.writerow(cells)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def feature_table(segments: Sequence, sampling_rate_hz: float, labels=None) -> FeatureTable:
    if len(segments) == 0:
        raise EmptyInput("feature_table needs at least one segment")
    x = np.stack([_samples(s) for s in segments])
    return FeatureTable(feature_matrix(x, sampling_rate_hz), FEATURE_NAMES,
                        None if labels is None else tuple(labels))


def read_vector_csv(path) -> FeatureTable:
    """Read a numeric CSV with a header row; a column named ``label`` is kept as text."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = [r for r in reader if r]
    label_col = header.index("label") if "label" in header else None
    numeric = [i for i in range(len(header)) if i != label_col]
    rows = np.array([[float(r[i]) for i in numeric] for r in body], dtype=np.float64).reshape(len(body), len(numeric))
    labels = tuple(r[label_col] for r in body) if label_col is not None else None
    return FeatureTable(rows, tuple(header[i] for i in numeric), labels)
