"""Instruction/input/output records for the FFT and statistical tracks, and JSONL corpora."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateClass,
    EmptyInput,
    IoError,
    MalformedLine,
    MissingClass,
    MissingSizeForTenScheme,
    MixedCondition,
    TrackMismatch,
)
from .features import FEATURE_NAMES, FeatureVector, feature_matrix
from .preprocess import (
    DEFAULT_DECIMALS,
    DEFAULT_SEGMENT_LENGTH,
    EncodedSample,
    SegmentMode,
    encode_batch,
    fft_magnitude_batch,
    segment_starts,
    windows,
)
from .seeding import derive_seed
from .signal_io import FAULT_SIZES_INCHES, FaultAnnotation, FaultKind, SensorPosition, TimeSeriesSignal
from .synth import class_annotations

DEFAULT_PER_CLASS = 230


class Track(str, enum.Enum):
    FFT = "fft"
    STAT = "stat"


class Scheme(str, enum.Enum):
    FOUR = "4"
    TEN = "10"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        return {"4": cls.FOUR, "four": cls.FOUR, "10": cls.TEN, "ten": cls.TEN}[text]


_KIND_CODE = {
    FaultKind.NORMAL: "NO",
    FaultKind.INNER_RACE: "IRF",
    FaultKind.OUTER_RACE: "ORF",
    FaultKind.ROLLING_ELEMENT: "REF",
}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}

# the one place the output surface forms live
CANONICAL_NAMES = {
    "NO": "Normal",
    "IRF": "Inner Race Fault",
    "ORF": "Outer Race Fault",
    "REF": "Rolling Element Fault",
}

CODES = {
    Scheme.FOUR: ("NO", "IRF", "ORF", "REF"),
    Scheme.TEN: ("NO",) + tuple(f"{c}{i}" for c in ("IRF", "ORF", "REF") for i in (1, 2, 3)),
}


@dataclass(frozen=True, order=True)
class Label:
    scheme: Scheme
    value: str

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if self.value not in CODES[self.scheme]:
            raise ValueError(f"{self.value!r} is not a {self.scheme.value}-label code")

    def __str__(self):
        return self.value

    @property
    def kind(self) -> FaultKind:
        return _CODE_KIND[self.value[:3] if self.value != "NO" else "NO"]

    @property
    def size_inches(self) -> Optional[float]:
        if self.scheme is Scheme.TEN and self.value != "NO":
            return FAULT_SIZES_INCHES[int(self.value[-1]) - 1]
        return None

    @property
    def index(self) -> int:
        return CODES[self.scheme].index(self.value)

    @property
    def text(self) -> str:
        """Canonical output string for this label."""
        base = CANONICAL_NAMES[self.value if self.value == "NO" else self.value[:3]]
        size = self.size_inches
        return base if size is None else f"{base} ({size:.3f} inch)"


def all_labels(scheme) -> list[Label]:
    scheme = Scheme.parse(scheme)
    return [Label(scheme, c) for c in CODES[scheme]]


def label_for(fault: FaultAnnotation, scheme) -> Label:
    scheme = Scheme.parse(scheme)
    code = _KIND_CODE[fault.kind]
    if scheme is Scheme.FOUR or code == "NO":
        return Label(scheme, code)
    if fault.size_index is None:
        raise MissingSizeForTenScheme(f"{fault.kind.value} fault has no size")
    return Label(scheme, f"{code}{fault.size_index}")


@dataclass(frozen=True)
class EquipInfo:
    name: str
    model: str
    geometry: dict = field(default_factory=dict)

    def render(self) -> str:
        parts = [self.name, f"model {self.model}"]
        parts += [f"{k} {self.geometry[k]}" for k in sorted(self.geometry)]
        return ", ".join(parts)

    def to_dict(self) -> dict:
        return {"name": self.name, "model": self.model, "geometry": dict(self.geometry)}

    @classmethod
    def from_dict(cls, d) -> "EquipInfo":
        return cls(d["name"], d["model"], dict(d.get("geometry", {})))


# CWRU test rig bearings; editable configuration
DEFAULT_EQUIP = {
    SensorPosition.DRIVE_END: EquipInfo(
        "CWRU 2 hp motor test rig, drive-end deep groove ball bearing",
        "SKF 6205-2RS JEM",
        {"ball count": "9", "ball diameter": "0.3126 in", "pitch diameter": "1.537 in",
         "inner diameter": "0.9843 in", "outer diameter": "2.0472 in", "thickness": "0.5906 in"},
    ),
    SensorPosition.FAN_END: EquipInfo(
        "CWRU 2 hp motor test rig, fan-end deep groove ball bearing",
        "SKF 6203-2RS JEM",
        {"ball count": "8", "ball diameter": "0.2656 in", "pitch diameter": "1.122 in",
         "inner diameter": "0.6693 in", "outer diameter": "1.5748 in", "thickness": "0.4724 in"},
    ),
}

_TASK_QUERY = {
    Track.FFT: "please predict the operating status of the bearing based on the following FFT vector.",
    Track.STAT: ("please predict the operating status of the bearing based on the following "
                 "time-domain and frequency-domain features."),
}


def make_instruction(equip: Optional[EquipInfo], load_hp: int, speed_rpm: int, track) -> str:
    track = Track(track)
    conditions = f"{load_hp} hp, {speed_rpm} rpm"
    if equip is None:
        return f"Given working conditions: {conditions}, {_TASK_QUERY[track]}"
    return f"Given machine information: {equip.render()}; and working conditions: {conditions}, {_TASK_QUERY[track]}"


def format_features(values: Sequence[float]) -> str:
    return "; ".join(f"{name}: {float(v):.6g}" for name, v in zip(FEATURE_NAMES, values))


def parse_features(text: str) -> np.ndarray:
    """Inverse of ``format_features`` (to the printed precision)."""
    values = {}
    for part in text.split("; "):
        name, _, value = part.partition(": ")
        values[name] = float(value)
    return np.array([values[n] for n in FEATURE_NAMES])


def make_input(track, payload) -> str:
    track = Track(track)
    if track is Track.FFT:
        if not isinstance(payload, EncodedSample):
            raise TrackMismatch(f"fft track expects an EncodedSample, got {type(payload).__name__}")
        return payload.text
    if not isinstance(payload, FeatureVector):
        raise TrackMismatch(f"stat track expects a FeatureVector, got {type(payload).__name__}")
    return format_features(payload.values())


@dataclass(frozen=True)
class PromptRecord:
    instruction: str
    input: str
    output: str
    meta: dict = field(default_factory=dict)

    @property
    def record_id(self) -> str:
        return self.meta.get("record_id", "")

    @property
    def label(self) -> Label:
        return Label(self.meta["scheme"], self.meta["label"])

    @property
    def prompt(self) -> str:
        """The single block sent to a model: instruction, newline, input."""
        return f"{self.instruction}\n{self.input}"

    def to_dict(self) -> dict:
        return {"instruction": self.instruction, "input": self.input, "output": self.output, "meta": self.meta}


def subset_id(load_hp: int, position) -> str:
    return f"{load_hp}HP{SensorPosition.parse(position).value}"


def _class_key(fault: FaultAnnotation):
    return fault.kind, fault.size_inches


def order_condition(signals: Sequence[TimeSeriesSignal]) -> list[TimeSeriesSignal]:
    """Check one (load, position) condition holds each class once; return them in corpus order."""
    if not signals:
        raise MissingClass("no signals given")
    conditions = {(s.load_hp, s.sensor_position) for s in signals}
    if len(conditions) > 1:
        raise MixedCondition(f"signals span several conditions: {sorted((l, p.value) for l, p in conditions)}")
    by_class = {}
    for s in signals:
        key = _class_key(s.fault)
        if key in by_class:
            raise DuplicateClass(f"{by_class[key].source_id} and {s.source_id} share class {key}")
        by_class[key] = s
    ordered = []
    for ann in class_annotations():
        key = _class_key(ann)
        if key not in by_class:
            size = "" if ann.size_inches is None else f" {ann.size_inches} in"
            raise MissingClass(f"no {ann.kind.value}{size} signal for {signals[0].subset_id}")
        ordered.append(by_class.pop(key))
    if by_class:
        raise MissingClass(f"unexpected classes {sorted(by_class)}")
    return ordered


def condition_windows(signals, per_class=DEFAULT_PER_CLASS, length=DEFAULT_SEGMENT_LENGTH,
                      seed=0, mode=SegmentMode.RANDOM_START):
    """Yield (signal, starts, windows) for each class of one condition, deterministic in ``seed``."""
    ordered = order_condition(signals)
    sid = ordered[0].subset_id
    for i, sig in enumerate(ordered):
        starts = segment_starts(len(sig), length, per_class, mode, derive_seed(seed, sid, i))
        yield sig, starts, windows(sig.samples, starts, length)


def build_subset(
    signals: Sequence[TimeSeriesSignal],
    track=Track.FFT,
    scheme=Scheme.FOUR,
    per_class: int = DEFAULT_PER_CLASS,
    length: int = DEFAULT_SEGMENT_LENGTH,
    decimals: int = DEFAULT_DECIMALS,
    seed: int = 0,
    equip: Optional[EquipInfo] = None,
    include_equip: bool = True,
    mode=SegmentMode.RANDOM_START,
    one_sided: bool = False,
) -> list[PromptRecord]:
    """Records for one condition: ``per_class`` segments of every (kind, size) recording.

    ``equip`` defaults to the CWRU bearing at the subset's sensor position;
    ``include_equip=False`` drops the machine clause from the instruction.
    """
    track, scheme = Track(track), Scheme.parse(scheme)
    records = []
    for sig, starts, win in condition_windows(signals, per_class, length, seed, mode):
        sid = sig.subset_id
        info = (equip or DEFAULT_EQUIP[sig.sensor_position]) if include_equip else None
        instruction = make_instruction(info, sig.load_hp, sig.speed_rpm, track)
        label = label_for(sig.fault, scheme)
        fine = label_for(sig.fault, Scheme.TEN).value
        if track is Track.FFT:
            inputs = [make_input(track, e) for e in encode_batch(fft_magnitude_batch(win), decimals, one_sided)]
        else:
            inputs = [format_features(row) for row in feature_matrix(win, sig.sampling_rate_hz)]
        for k, (start, text) in enumerate(zip(starts, inputs)):
            records.append(PromptRecord(instruction, text, label.text, {
                "record_id": f"{sid}/{track.value}/{fine}/{k:04d}",
                "label": label.value,
                "scheme": scheme.value,
                "subset_id": sid,
                "source_id": sig.source_id,
                "track": track.value,
                "segment_start": int(start),
            }))
    return records


def write_jsonl(records: Iterable[PromptRecord], path) -> int:
    records = list(records)
    if not records:
        raise EmptyInput("refusing to write an empty corpus")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for r in records:
                fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc
    return len(records)


def _record_from(obj, lineno) -> PromptRecord:
    if not isinstance(obj, dict):
        raise MalformedLine(lineno, "not a JSON object")
    for key in ("instruction", "input", "output"):
        if not isinstance(obj.get(key), str):
            raise MalformedLine(lineno, f"missing or non-string {key!r}")
    extra = set(obj) - {"instruction", "input", "output", "meta"}
    if extra:
        raise MalformedLine(lineno, f"unexpected keys {sorted(extra)}")
    meta = obj.get("meta", {})
    if not isinstance(meta, dict):
        raise MalformedLine(lineno, "meta must be an object")
    return PromptRecord(obj["instruction"], obj["input"], obj["output"], meta)


def read_jsonl(path) -> list[PromptRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc
    out = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(lineno, exc.msg) from None
        out.append(_record_from(obj, lineno))
    return out


def label_counts(records: Iterable[PromptRecord]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for r in records:
        counts[r.meta["label"]] = counts.get(r.meta["label"], 0) + 1
    return counts
