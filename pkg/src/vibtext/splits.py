"""Train/evaluation plans for the three experiment settings, with stratified holdouts."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidPlan, MissingSubset
from .promptgen import PromptRecord, Track, write_jsonl
from .seeding import derive_seed
from .signal_io import SensorPosition

LOADS = (0, 1, 2, 3)
EVAL_FRACTION = 0.10


@dataclass(frozen=True)
class EvalSet:
    name: str
    subsets: tuple[str, ...]
    fraction: float = 1.0


@dataclass(frozen=True)
class SplitPlan:
    name: str
    train_subsets: tuple[str, ...]
    train_fraction: float
    eval_sets: tuple[EvalSet, ...]
    seed: int = 0

    def __post_init__(self):
        fracs = [self.train_fraction] + [e.fraction for e in self.eval_sets]
        if any(not 0 < f <= 1 for f in fracs):
            raise InvalidPlan(f"fractions must lie in (0, 1], got {fracs}")
        train = set(self.train_subsets)
        for e in self.eval_sets:
            overlap = train & set(e.subsets)
            if not overlap:
                continue
            if set(e.subsets) != train or abs(e.fraction - (1 - self.train_fraction)) > 1e-9:
                raise InvalidPlan(f"eval set {e.name} overlaps training subsets but is not the holdout")

    @property
    def subsets(self) -> list[str]:
        seen = list(self.train_subsets)
        for e in self.eval_sets:
            seen += [s for s in e.subsets if s not in seen]
        return seen

    def require(self, available: Iterable[str]) -> None:
        missing = [s for s in self.subsets if s not in set(available)]
        if missing:
            raise MissingSubset(f"plan {self.name} needs subsets {missing}")


def _subsets(position) -> tuple[str, ...]:
    pos = SensorPosition.parse(position).value
    return tuple(f"{load}HP{pos}" for load in LOADS)


def _dataset_name(track, suffix) -> str:
    tag = "fft" if Track(track) is Track.FFT else "st"
    return f"CWRU{tag}-{suffix}"


def _holdout_plan(name, subsets, seed, available) -> SplitPlan:
    plan = SplitPlan(name, subsets, 1 - EVAL_FRACTION, (EvalSet(name, subsets, EVAL_FRACTION),), seed)
    if available is not None:
        plan.require(available)
    return plan


def task1_plan(end, track=Track.FFT, seed: int = 0, available: Optional[Iterable[str]] = None) -> SplitPlan:
    """All four load conditions of one sensor position, 90/10 stratified."""
    pos = SensorPosition.parse(end)
    return _holdout_plan(_dataset_name(track, pos.value), _subsets(pos), seed, available)


def task2_plan(track=Track.FFT, seed: int = 0, available: Optional[Iterable[str]] = None) -> SplitPlan:
    """Train on 0HPDE; evaluate on its holdout, the other drive-end loads, then 0HPFE and 1HPFE."""
    plan = SplitPlan(
        "task2",
        ("0HPDE",),
        1 - EVAL_FRACTION,
        (
            EvalSet("0HPDE", ("0HPDE",), EVAL_FRACTION),
            EvalSet("1HPDE", ("1HPDE",)),
            EvalSet("2HPDE", ("2HPDE",)),
            EvalSet("3HPDE", ("3HPDE",)),
            EvalSet("0HPFE", ("0HPFE",)),
            EvalSet("1HPFE", ("1HPFE",)),
        ),
        seed,
    )
    if available is not None:
        plan.require(available)
    return plan


def task3_plan(track=Track.FFT, seed: int = 0, available: Optional[Iterable[str]] = None) -> SplitPlan:
    subsets = _subsets(SensorPosition.DRIVE_END) + _subsets(SensorPosition.FAN_END)
    return _holdout_plan(_dataset_name(track, "all"), subsets, seed, available)


def plan_by_name(name: str, end=None, track=Track.FFT, seed: int = 0, available=None) -> SplitPlan:
    if name == "task1":
        if end is None:
            raise InvalidPlan("task1 needs a sensor end (DE or FE)")
        return task1_plan(end, track, seed, available)
    if name == "task2":
        return task2_plan(track, seed, available)
    if name == "task3":
        return task3_plan(track, seed, available)
    raise InvalidPlan(f"unknown plan {name!r}")


@dataclass
class SplitResult:
    plan: SplitPlan
    train: list
    evals: dict = field(default_factory=dict)


def stratified_pick(records: Sequence[PromptRecord], fraction: float, seed: int, key: str = "") -> set[str]:
    """Record ids of a per-class random ``fraction`` of ``records``."""
    groups: dict[str, list[str]] = {}
    for r in records:
        groups.setdefault(r.meta["label"], []).append(r.record_id)
    picked = set()
    for label in sorted(groups):
        ids = sorted(groups[label])
        n = int(round(fraction * len(ids)))
        rng = np.random.default_rng(derive_seed(seed, key, label))
        picked.update(ids[i] for i in rng.permutation(len(ids))[:n])
    return picked


def materialize(plan: SplitPlan, records: Sequence[PromptRecord]) -> SplitResult:
    by_subset: dict[str, list[PromptRecord]] = {}
    for r in records:
        by_subset.setdefault(r.meta["subset_id"], []).append(r)
    plan.require(by_subset)
    ids = [r.record_id for r in records]
    if len(set(ids)) != len(ids):
        raise InvalidPlan("record ids are not unique")

    pool = [r for s in plan.train_subsets for r in by_subset[s]]
    holdout = stratified_pick(pool, 1 - plan.train_fraction, plan.seed, plan.name)
    result = SplitResult(plan, [r for r in pool if r.record_id not in holdout])
    train_set = set(plan.train_subsets)
    for e in plan.eval_sets:
        if set(e.subsets) == train_set:
            result.evals[e.name] = [r for r in pool if r.record_id in holdout]
            continue
        members = [r for s in e.subsets for r in by_subset[s]]
        if e.fraction < 1:
            keep = stratified_pick(members, e.fraction, plan.seed, e.name)
            members = [r for r in members if r.record_id in keep]
        result.evals[e.name] = members
    return result


def write_manifest(ids: Sequence[str], path, plan: SplitPlan, part: str) -> None:
    lines = [f"# plan: {plan.name}", f"# seed: {plan.seed}", f"# part: {part}"] + list(ids)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path) -> tuple[dict, list[str]]:
    header, ids = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
        elif line.strip():
            ids.append(line.strip())
    return header, ids


def write_split(result: SplitResult, out_dir) -> dict[str, Path]:
    """Manifests plus matching JSONL files for the training part and every eval set."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    parts = [("train", result.train)] + [(f"eval_{name}", recs) for name, recs in result.evals.items()]
    for part, recs in parts:
        write_manifest([r.record_id for r in recs], out / f"{part}.ids", result.plan, part)
        if recs:
            write_jsonl(recs, out / f"{part}.jsonl")
        written[part] = out / f"{part}.ids"
    return written
