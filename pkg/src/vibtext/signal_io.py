"""Vibration record types and readers for MAT-v5 (CWRU layout) and raw sample files."""

from __future__ import annotations

import enum
import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    AmbiguousChannel,
    BadMagic,
    ChecksumOrInflateFailure,
    InvalidSignal,
    NoMatchingChannel,
    TruncatedFile,
    UnsupportedElement,
)

DEFAULT_SAMPLING_RATE_HZ = 12000.0
FAULT_SIZES_INCHES = (0.007, 0.014, 0.021)


class SensorPosition(str, enum.Enum):
    DRIVE_END = "DE"
    FAN_END = "FE"

    @classmethod
    def parse(cls, value) -> "SensorPosition":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper().replace("-", "_").replace(" ", "_")
        aliases = {"DE": cls.DRIVE_END, "DRIVE_END": cls.DRIVE_END, "DRIVEEND": cls.DRIVE_END,
                   "FE": cls.FAN_END, "FAN_END": cls.FAN_END, "FANEND": cls.FAN_END}
        if text not in aliases:
            raise ValueError(f"unknown sensor position {value!r}")
        return aliases[text]


class FaultKind(str, enum.Enum):
    NORMAL = "normal"
    INNER_RACE = "inner_race"
    OUTER_RACE = "outer_race"
    ROLLING_ELEMENT = "rolling_element"

    @classmethod
    def parse(cls, value) -> "FaultKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "normal": cls.NORMAL, "no": cls.NORMAL, "healthy": cls.NORMAL,
            "inner_race": cls.INNER_RACE, "inner": cls.INNER_RACE, "ir": cls.INNER_RACE, "irf": cls.INNER_RACE,
            "outer_race": cls.OUTER_RACE, "outer": cls.OUTER_RACE, "or": cls.OUTER_RACE, "orf": cls.OUTER_RACE,
            "rolling_element": cls.ROLLING_ELEMENT, "rolling": cls.ROLLING_ELEMENT, "ball": cls.ROLLING_ELEMENT,
            "b": cls.ROLLING_ELEMENT, "ref": cls.ROLLING_ELEMENT,
        }
        if text not in aliases:
            raise ValueError(f"unknown fault kind {value!r}")
        return aliases[text]


def _canonical_size(size: float) -> float:
    for s in FAULT_SIZES_INCHES:
        if abs(size - s) < 1e-9:
            return s
    raise InvalidSignal(f"fault size {size} is not one of {FAULT_SIZES_INCHES}")


@dataclass(frozen=True)
class FaultAnnotation:
    kind: FaultKind
    size_inches: Optional[float] = None

    def __post_init__(self):
        kind = FaultKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is FaultKind.NORMAL:
            if self.size_inches is not None:
                raise InvalidSignal("a normal bearing carries no fault size")
        elif self.size_inches is not None:
            object.__setattr__(self, "size_inches", _canonical_size(float(self.size_inches)))

    @property
    def size_index(self) -> Optional[int]:
        """1, 2 or 3 for the three seeded defect diameters."""
        if self.size_inches is None:
            return None
        return FAULT_SIZES_INCHES.index(self.size_inches) + 1

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "size_inches": self.size_inches}

    @classmethod
    def from_dict(cls, d) -> "FaultAnnotation":
        return cls(FaultKind.parse(d["kind"]), d.get("size_inches"))


NORMAL = FaultAnnotation(FaultKind.NORMAL)


@dataclass(frozen=True, eq=False)
class TimeSeriesSignal:
    samples: np.ndarray
    sampling_rate_hz: float
    sensor_position: SensorPosition
    load_hp: int
    speed_rpm: int
    fault: FaultAnnotation
    source_id: str

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64).ravel()
        if x.size == 0:
            raise InvalidSignal(f"{self.source_id}: no samples")
        if not np.all(np.isfinite(x)):
            raise InvalidSignal(f"{self.source_id}: non-finite samples")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        if not self.sampling_rate_hz > 0:
            raise InvalidSignal(f"sampling rate must be positive, got {self.sampling_rate_hz}")
        if not 1 <= int(self.speed_rpm) <= 100000:
            raise InvalidSignal(f"speed {self.speed_rpm} rpm outside [1, 100000]")
        if not 0 <= int(self.load_hp) <= 3:
            raise InvalidSignal(f"load {self.load_hp} hp outside 0..3")
        object.__setattr__(self, "sensor_position", SensorPosition.parse(self.sensor_position))
        object.__setattr__(self, "load_hp", int(self.load_hp))
        object.__setattr__(self, "speed_rpm", int(self.speed_rpm))

    def __len__(self):
        return self.samples.size

    @property
    def subset_id(self) -> str:
        return f"{self.load_hp}HP{self.sensor_position.value}"


# --- MAT-v5 -----------------------------------------------------------------

MAT_HEADER_LEN = 128
MAGIC = b"MATLAB 5.0"

MI_INT8, MI_UINT8, MI_INT16, MI_UINT16, MI_INT32, MI_UINT32 = 1, 2, 3, 4, 5, 6
MI_SINGLE, MI_DOUBLE, MI_INT64, MI_UINT64 = 7, 9, 12, 13
MI_MATRIX, MI_COMPRESSED = 14, 15
MX_DOUBLE_CLASS = 6
_COMPLEX_FLAG = 0x0800

_NUMERIC = {
    MI_INT8: "i1", MI_UINT8: "u1", MI_INT16: "i2", MI_UINT16: "u2",
    MI_INT32: "i4", MI_UINT32: "u4", MI_SINGLE: "f4", MI_DOUBLE: "f8",
    MI_INT64: "i8", MI_UINT64: "u8",
}


def _read_tag(buf: bytes, off: int, endian: str):
    """Return (type, payload, offset after payload, is_small)."""
    if len(buf) - off < 8:
        raise TruncatedFile(f"element tag at byte {off} is cut short")
    first, second = struct.unpack_from(endian + "II", buf, off)
    if first >> 16:
        nbytes, mtype = first >> 16, first & 0xFFFF
        if nbytes > 4:
            raise TruncatedFile(f"small data element at byte {off} claims {nbytes} bytes")
        return mtype, buf[off + 4:off + 4 + nbytes], off + 8, True
    end = off + 8 + second
    if end > len(buf):
        raise TruncatedFile(f"element at byte {off} needs {second} bytes, {len(buf) - off - 8} remain")
    return first, buf[off + 8:end], end, False


def _padded(off: int) -> int:
    return (off + 7) & ~7


def _numeric(mtype: int, payload: bytes, endian: str, what: str) -> np.ndarray:
    code = _NUMERIC.get(mtype)
    if code is None:
        raise UnsupportedElement(f"{what}: data element tag {mtype} is not numeric")
    dt = np.dtype(endian + code)
    if len(payload) % dt.itemsize:
        raise TruncatedFile(f"{what}: {len(payload)} bytes is not a whole number of {code} values")
    return np.frombuffer(payload, dtype=dt)


def _parse_matrix(body: bytes, endian: str):
    if not body:
        raise UnsupportedElement("empty miMATRIX element (tag 14)")
    off = 0
    subs = []
    while off < len(body):
        mtype, payload, end, small = _read_tag(body, off, endian)
        subs.append((mtype, payload))
        off = end if small else _padded(end)
    if len(subs) < 3:
        raise TruncatedFile("miMATRIX element lacks flags, dimensions or name")

    flags = _numeric(subs[0][0], subs[0][1], endian, "array flags")
    if flags.size < 1:
        raise TruncatedFile("array flags subelement is empty")
    cls = int(flags[0]) & 0xFF
    name = bytes(subs[2][1]).decode("ascii", errors="replace")
    if cls != MX_DOUBLE_CLASS:
        raise UnsupportedElement(f"variable {name!r}: array class {cls} (tag 14), only mxDOUBLE_CLASS (6) is read")
    if int(flags[0]) & _COMPLEX_FLAG:
        raise UnsupportedElement(f"variable {name!r}: complex arrays are not read")
    dims = _numeric(subs[1][0], subs[1][1], endian, "dimensions").astype(np.int64)
    if len(subs) < 4:
        raise TruncatedFile(f"variable {name!r}: missing real part")
    values = _numeric(subs[3][0], subs[3][1], endian, f"variable {name!r}")
    if int(np.prod(dims)) != values.size:
        raise TruncatedFile(f"variable {name!r}: dims {tuple(dims)} but {values.size} values")
    # byte swap / widening preserves the stored doubles bit for bit
    out = values.astype(np.float64).reshape(tuple(dims), order="F").ravel(order="F")
    return name, out


def _parse_elements(buf: bytes, off: int, endian: str, out: dict):
    while off < len(buf):
        mtype, payload, end, _ = _read_tag(buf, off, endian)
        if mtype == MI_COMPRESSED:
            try:
                inner = zlib.decompress(payload)
            except zlib.error as exc:
                raise ChecksumOrInflateFailure(f"compressed element at byte {off}: {exc}") from None
            _parse_elements(inner, 0, endian, out)
        elif mtype == MI_MATRIX:
            name, values = _parse_matrix(payload, endian)
            out[name] = values
        else:
            raise UnsupportedElement(f"top-level element tag {mtype} at byte {off}")
        off = end


def parse_mat_v5(data: bytes) -> dict[str, np.ndarray]:
    """Read every double array in a MAT-v5 byte string.

    Arrays come back flattened in column-major order as float64. Only the
    subset used by CWRU recordings is understood (double matrices, optionally
    zlib-compressed); anything else raises instead of being skipped.
    """
    data = bytes(data)
    head = data[:len(MAGIC)]
    if head != MAGIC[:len(head)]:
        raise BadMagic("missing 'MATLAB 5.0' header text")
    if len(data) < MAT_HEADER_LEN:
        raise TruncatedFile(f"{len(data)} bytes, a MAT-v5 header alone is {MAT_HEADER_LEN}")
    marker = data[126:128]
    if marker == b"IM":
        endian = "<"
    elif marker == b"MI":
        endian = ">"
    else:
        raise BadMagic(f"endianness marker {marker!r}")
    (version,) = struct.unpack_from(endian + "H", data, 124)
    if version != 0x0100:
        raise BadMagic(f"version 0x{version:04x}, expected 0x0100")
    out: dict[str, np.ndarray] = {}
    _parse_elements(data, MAT_HEADER_LEN, endian, out)
    return out


# --- raw formats --------------------------------------------------------------

def parse_float64_stream(data: bytes) -> np.ndarray:
    if len(data) % 8:
        raise TruncatedFile(f"{len(data)} bytes is not a whole number of float64 samples")
    return np.frombuffer(data, dtype="<f8").astype(np.float64)


def parse_text(data: bytes) -> np.ndarray:
    lines = [ln.strip() for ln in data.decode("utf-8").splitlines()]
    try:
        return np.array([float(ln) for ln in lines if ln], dtype=np.float64)
    except ValueError as exc:
        raise InvalidSignal(f"text sample file: {exc}") from None


def write_float64_stream(samples, path) -> None:
    Path(path).write_bytes(np.asarray(samples, dtype="<f8").tobytes())


_TEXT_SUFFIXES = {".txt", ".csv", ".dat"}
_F64_SUFFIXES = {".f64", ".bin", ".raw"}


def _looks_like_text(data: bytes) -> bool:
    sample = data[:4096]
    return bool(sample) and all(c in b"0123456789+-.eEinfaINFA \t\r\n" for c in sample)


def read_arrays(path) -> dict[str, np.ndarray]:
    """Load a file into a name -> samples map; raw formats yield a single entry."""
    path = Path(path)
    data = path.read_bytes()
    suffix = path.suffix.lower()
    if suffix == ".mat" or data.startswith(MAGIC):
        return parse_mat_v5(data)
    if suffix in _TEXT_SUFFIXES or (suffix not in _F64_SUFFIXES and _looks_like_text(data)):
        return {path.stem: parse_text(data)}
    return {path.stem: parse_float64_stream(data)}


def select_channel(names, channel_hint: Optional[SensorPosition] = None) -> str:
    """Pick the DE_time / FE_time variable, honoring an optional hint."""
    names = list(names)
    if channel_hint is not None:
        tag = f"{SensorPosition.parse(channel_hint).value}_time"
        found = [n for n in names if tag in n]
    else:
        found = [n for n in names if "DE_time" in n or "FE_time" in n]
    if not found:
        raise NoMatchingChannel(f"no variable matching {'DE_time/FE_time' if channel_hint is None else tag} in {names}")
    if len(found) > 1:
        raise AmbiguousChannel(f"several candidate channels {found}; pass a channel hint or variable name")
    return found[0]


def load_signal(
    path,
    channel_hint=None,
    annotation: FaultAnnotation = NORMAL,
    load_hp: int = 0,
    speed_rpm: int = 1797,
    sampling_rate_hz: float = DEFAULT_SAMPLING_RATE_HZ,
    variable: Optional[str] = None,
) -> TimeSeriesSignal:
    path = Path(path)
    arrays = read_arrays(path)
    hint = SensorPosition.parse(channel_hint) if channel_hint is not None else None
    is_mat = path.suffix.lower() == ".mat" or path.read_bytes()[:len(MAGIC)] == MAGIC
    if variable is not None:
        if variable not in arrays:
            raise NoMatchingChannel(f"variable {variable!r} not in {sorted(arrays)}")
        name = variable
    elif is_mat:
        name = select_channel(arrays, hint)
    else:
        (name,) = arrays
    if hint is not None:
        position = hint
    elif "FE_time" in name:
        position = SensorPosition.FAN_END
    else:
        position = SensorPosition.DRIVE_END
    return TimeSeriesSignal(
        samples=arrays[name],
        sampling_rate_hz=sampling_rate_hz,
        sensor_position=position,
        load_hp=load_hp,
        speed_rpm=speed_rpm,
        fault=annotation,
        source_id=f"{path.stem}:{name}" if is_mat else path.stem,
    )


# --- signal index -------------------------------------------------------------
# A JSON file listing recordings with their labels and operating condition:
# {"signals": [{"path": "97.mat", "fault": "normal", "size_inches": null,
#               "load_hp": 0, "speed_rpm": 1797, "sensor_position": "DE"}, ...]}
# Relative paths resolve against the index file's directory.

def index_entry(path, signal: TimeSeriesSignal, variable: Optional[str] = None) -> dict:
    entry = {
        "path": str(path),
        "fault": signal.fault.kind.value,
        "size_inches": signal.fault.size_inches,
        "load_hp": signal.load_hp,
        "speed_rpm": signal.speed_rpm,
        "sensor_position": signal.sensor_position.value,
        "sampling_rate_hz": signal.sampling_rate_hz,
    }
    if variable is not None:
        entry["variable"] = variable
    return entry


def write_index(entries, path) -> None:
    Path(path).write_text(json.dumps({"signals": list(entries)}, indent=2) + "\n", encoding="utf-8")


def read_index(path) -> list[TimeSeriesSignal]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        entries = doc["signals"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InvalidSignal(f"{path}: not a signal index ({exc})") from None
    out = []
    for e in entries:
        file = Path(e["path"])
        if not file.is_absolute():
            file = path.parent / file
        out.append(load_signal(
            file,
            channel_hint=e.get("sensor_position"),
            annotation=FaultAnnotation(FaultKind.parse(e["fault"]), e.get("size_inches")),
            load_hp=int(e["load_hp"]),
            speed_rpm=int(e["speed_rpm"]),
            sampling_rate_hz=float(e.get("sampling_rate_hz", DEFAULT_SAMPLING_RATE_HZ)),
            variable=e.get("variable"),
        ))
    return out
