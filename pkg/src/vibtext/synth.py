"""Labeled synthetic bearing signals for desk-scale runs.

Normal bearings are a shaft-rate sinusoid plus white noise. Each fault kind
adds a train of rings (a cosine at a resonance frequency under an envelope
decaying exponentially away from the ring centre) repeating at a fixed
multiple of the shaft rate; the ringing frequency depends on where the
sensor sits, which is what makes drive-end and fan-end data disagree.
None of this is a physical bearing model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec
from .seeding import derive_seed
from .signal_io import (
    DEFAULT_SAMPLING_RATE_HZ,
    FAULT_SIZES_INCHES,
    FaultAnnotation,
    FaultKind,
    SensorPosition,
    TimeSeriesSignal,
)

# CWRU motor speed at each load
CWRU_SPEEDS = {0: 1797, 1: 1772, 2: 1750, 3: 1730}


@dataclass(frozen=True)
class ImpulseModel:
    shaft_amplitude: float = 0.2
    # impulse repetition rate as a multiple of shaft frequency
    repetition: dict = field(default_factory=lambda: {
        FaultKind.OUTER_RACE: 3.58,
        FaultKind.INNER_RACE: 5.41,
        FaultKind.ROLLING_ELEMENT: 2.36,
    })
    resonance_hz: dict = field(default_factory=lambda: {
        SensorPosition.DRIVE_END: 4500.0,
        SensorPosition.FAN_END: 1200.0,
    })
    # amplitude per 0.007 inch of defect diameter
    impulse_amplitude: float = 2.0
    decay_s: float = 0.0008
    load_gain: float = 0.05


DEFAULT_MODEL = ImpulseModel()


@dataclass(frozen=True)
class SynthSpec:
    fault: FaultAnnotation
    load_hp: int = 0
    speed_rpm: int = 1797
    duration_s: float = 10.0
    sampling_rate_hz: float = DEFAULT_SAMPLING_RATE_HZ
    noise_sigma: float = 0.1
    seed: int = 0
    sensor_position: SensorPosition = SensorPosition.DRIVE_END
    segment_length: int = 512

    def validate(self) -> None:
        if not self.sampling_rate_hz > 0:
            raise InvalidSpec("sampling_rate_hz must be positive")
        if not self.duration_s > 0:
            raise InvalidSpec("duration_s must be positive")
        if self.noise_sigma < 0:
            raise InvalidSpec("noise_sigma must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec("seed must fit in 64 unsigned bits")
        if not 1 <= self.speed_rpm <= 100000:
            raise InvalidSpec(f"speed {self.speed_rpm} rpm outside [1, 100000]")
        if not 0 <= self.load_hp <= 3:
            raise InvalidSpec(f"load {self.load_hp} hp outside 0..3")
        if self.duration_s * self.sampling_rate_hz < 2 * self.segment_length:
            raise InvalidSpec(
                f"{self.duration_s} s at {self.sampling_rate_hz} Hz is shorter than two {self.segment_length}-sample segments")
        if self.fault.kind is not FaultKind.NORMAL and self.fault.size_inches is None:
            raise InvalidSpec("fault signals need a defect size")


def generate(spec: SynthSpec, model: ImpulseModel = DEFAULT_MODEL) -> TimeSeriesSignal:
    spec.validate()
    position = SensorPosition.parse(spec.sensor_position)
    fs = spec.sampling_rate_hz
    n = int(round(spec.duration_s * fs))
    t = np.arange(n) / fs
    rng = np.random.default_rng(spec.seed)

    shaft_hz = spec.speed_rpm / 60.0
    phase = rng.uniform(0.0, 2 * np.pi)
    x = model.shaft_amplitude * np.sin(2 * np.pi * shaft_hz * t + phase)

    kind = spec.fault.kind
    if kind is not FaultKind.NORMAL:
        period = 1.0 / (model.repetition[kind] * shaft_hz)
        offset = rng.uniform(0.0, period)
        # time from the nearest ring centre; rings decay exponentially on both sides
        lag = np.mod(t - offset + period / 2, period) - period / 2
        amp = (model.impulse_amplitude * spec.fault.size_inches / FAULT_SIZES_INCHES[0]
               * (1.0 + model.load_gain * spec.load_hp))
        x = x + amp * np.exp(-np.abs(lag) / model.decay_s) * np.cos(2 * np.pi * model.resonance_hz[position] * lag)

    if spec.noise_sigma > 0:
        x = x + rng.normal(0.0, spec.noise_sigma, size=n)

    size = "" if spec.fault.size_inches is None else f"_{spec.fault.size_inches:.3f}"
    return TimeSeriesSignal(
        samples=x,
        sampling_rate_hz=fs,
        sensor_position=position,
        load_hp=spec.load_hp,
        speed_rpm=spec.speed_rpm,
        fault=spec.fault,
        source_id=f"synth_{spec.load_hp}HP{position.value}_{kind.value}{size}",
    )


def class_annotations() -> list[FaultAnnotation]:
    """Normal plus every (fault kind, size) pair, in corpus order."""
    out = [FaultAnnotation(FaultKind.NORMAL)]
    for kind in (FaultKind.INNER_RACE, FaultKind.OUTER_RACE, FaultKind.ROLLING_ELEMENT):
        out.extend(FaultAnnotation(kind, s) for s in FAULT_SIZES_INCHES)
    return out


def synthetic_condition(load_hp: int, position, seed: int = 0, duration_s: float = 10.0,
                        noise_sigma: float = 0.1, model: ImpulseModel = DEFAULT_MODEL) -> list[TimeSeriesSignal]:
    """The ten recordings of one (load, sensor position) condition."""
    position = SensorPosition.parse(position)
    signals = []
    for i, ann in enumerate(class_annotations()):
        spec = SynthSpec(
            fault=ann,
            load_hp=load_hp,
            speed_rpm=CWRU_SPEEDS[load_hp],
            duration_s=duration_s,
            noise_sigma=noise_sigma,
            seed=derive_seed(seed, load_hp, position.value, i),
            sensor_position=position,
        )
        signals.append(generate(spec, model))
    return signals
