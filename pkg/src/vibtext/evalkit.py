"""Free-text prediction mapping and classification metrics.

Precision, recall and F1 are macro-averaged over the classes that occur in
either the truths or the mapped predictions. A class with no predictions (or
no instances) gets precision (or recall) 0 and is flagged in the report.
Metrics are computed in exact rational arithmetic and rounded once.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Hashable, Optional, Sequence

import numpy as np

from .errors import EmptyInput
from .promptgen import Label, Scheme


class _Unmapped:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unmapped"

    __str__ = __repr__

    def __reduce__(self):
        return (_Unmapped, ())


UNMAPPED = _Unmapped()


@dataclass(frozen=True)
class SynonymTable:
    phrases: dict          # code -> list of regexes
    codes: dict            # code -> regex matching abbreviations with optional size digit
    exact: dict            # code -> set of whole-answer strings
    sizes: dict            # size index -> regex

    @classmethod
    def from_dict(cls, d) -> "SynonymTable":
        phrases, codes, exact = {}, {}, {}
        for code, entry in d["labels"].items():
            phrases[code] = [_word(p) for p in entry.get("phrases", [])]
            abbrevs = entry.get("codes", [])
            codes[code] = (re.compile(r"(?<![a-z0-9])(?:" + "|".join(map(re.escape, abbrevs)) + r")\s?([123])?(?![a-z0-9.])")
                           if abbrevs else None)
            exact[code] = {normalize(e) for e in entry.get("exact", [])}
        sizes = {int(k): re.compile("|".join(_word(v).pattern for v in vals)) for k, vals in d["sizes"].items()}
        return cls(phrases, codes, exact, sizes)

    @classmethod
    def load(cls, path=None) -> "SynonymTable":
        if path is None:
            text = resources.files("vibtext").joinpath("data/synonyms.json").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))


def _word(phrase: str) -> re.Pattern:
    body = r"\s+".join(re.escape(w) for w in normalize(phrase).split())
    return re.compile(r"(?<![a-z0-9])" + body + r"(?![a-z0-9])")


_PUNCT = re.compile(r"[^a-z0-9.]+")
_LOOSE_DOTS = re.compile(r"(?<![0-9])\.|\.(?![0-9])")


def normalize(text: str) -> str:
    """Lowercase, turn punctuation into spaces, keep decimal points inside numbers."""
    text = _PUNCT.sub(" ", text.lower())
    text = _LOOSE_DOTS.sub(" ", text)
    return " ".join(text.split())


@lru_cache(maxsize=1)
def default_synonyms() -> SynonymTable:
    return SynonymTable.load()


def map_prediction(text: str, scheme=Scheme.FOUR, synonyms: Optional[SynonymTable] = None):
    """Map model output text to a Label, or UNMAPPED when there is no single clear cue."""
    scheme = Scheme.parse(scheme)
    table = synonyms or default_synonyms()
    norm = normalize(text)
    kinds = set()
    sizes = set()
    for code in ("NO", "IRF", "ORF", "REF"):
        if norm in table.exact.get(code, ()):
            kinds.add(code)
        if any(p.search(norm) for p in table.phrases.get(code, ())):
            kinds.add(code)
        rx = table.codes.get(code)
        if rx is not None:
            for m in rx.finditer(norm):
                kinds.add(code)
                if m.group(1):
                    sizes.add(int(m.group(1)))
    for idx, rx in table.sizes.items():
        if rx.search(norm):
            sizes.add(idx)
    if len(kinds) != 1:
        return UNMAPPED
    (kind,) = kinds
    if kind == "NO" or scheme is Scheme.FOUR:
        return Label(scheme, kind)
    if len(sizes) != 1:
        return UNMAPPED
    return Label(scheme, f"{kind}{sizes.pop()}")


def _sort_key(c):
    return (0, c.index, "") if isinstance(c, Label) else (1, 0, str(c))


@dataclass(eq=False)
class ConfusionMatrix:
    classes: list
    counts: np.ndarray  # rows: truth, cols: prediction; last column counts Unmapped

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(Fraction(int(np.trace(self.counts[:, :-1])), self.total))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true\\pred"] + [str(c) for c in self.classes] + ["Unmapped"])
        for c, row in zip(self.classes, self.counts):
            w.writerow([str(c)] + [int(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def to_dict(self) -> dict:
        return {"classes": [str(c) for c in self.classes], "counts": self.counts.tolist()}


@dataclass
class EvalReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class: dict
    unmapped_count: int
    n: int
    undefined: list = field(default_factory=list)
    confusion: Optional[ConfusionMatrix] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "unmapped_count": self.unmapped_count,
            "undefined": list(self.undefined),
            "per_class": self.per_class,
        }
        if self.confusion is not None:
            d["confusion_matrix"] = self.confusion.to_dict()
        d.update(self.extra)
        return d

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_dict(cls, d) -> "EvalReport":
        cm = None
        if "confusion_matrix" in d:
            cm = ConfusionMatrix(list(d["confusion_matrix"]["classes"]),
                                 np.array(d["confusion_matrix"]["counts"], dtype=np.int64))
        known = {"n", "accuracy", "macro_precision", "macro_recall", "macro_f1", "unmapped_count",
                 "undefined", "per_class", "confusion_matrix"}
        return cls(d["accuracy"], d["macro_precision"], d["macro_recall"], d["macro_f1"], d["per_class"],
                   d["unmapped_count"], d["n"], d.get("undefined", []), cm,
                   {k: v for k, v in d.items() if k not in known})

    def table(self) -> str:
        lines = [f"{'class':<10}{'precision':>11}{'recall':>9}{'f1':>9}{'support':>9}"]
        for name, m in self.per_class.items():
            lines.append(f"{name:<10}{m['precision']:>11.4f}{m['recall']:>9.4f}{m['f1']:>9.4f}{m['support']:>9d}")
        lines.append(f"{'macro':<10}{self.macro_precision:>11.4f}{self.macro_recall:>9.4f}{self.macro_f1:>9.4f}{self.n:>9d}")
        lines.append(f"accuracy {self.accuracy:.4f}   unmapped {self.unmapped_count}")
        if self.undefined:
            lines.append("0/0 set to 0: " + ", ".join(self.undefined))
        return "\n".join(lines)


def score(pairs: Sequence[tuple[Hashable, object]], classes: Optional[Sequence] = None):
    """Score (truth, prediction) pairs; a prediction may be UNMAPPED.

    Returns ``(EvalReport, ConfusionMatrix)``.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no predictions to score")
    if classes is None:
        seen = {t for t, _ in pairs} | {p for _, p in pairs if p is not UNMAPPED}
        classes = sorted(seen, key=_sort_key)
    classes = list(classes)
    index = {c: i for i, c in enumerate(classes)}
    k = len(classes)
    counts = np.zeros((k, k + 1), dtype=np.int64)
    for truth, pred in pairs:
        if truth not in index:
            raise ValueError(f"true label {truth!r} not among classes")
        if pred is UNMAPPED:
            col = k
        elif pred in index:
            col = index[pred]
        else:
            raise ValueError(f"predicted label {pred!r} not among classes")
        counts[index[truth], col] += 1

    per_class, undefined = {}, []
    precisions, recalls, f1s = [], [], []
    for i, c in enumerate(classes):
        tp = int(counts[i, i])
        predicted = int(counts[:k, i].sum())
        actual = int(counts[i].sum())
        if predicted:
            p = Fraction(tp, predicted)
        else:
            p = Fraction(0)
            undefined.append(f"precision:{c}")
        if actual:
            r = Fraction(tp, actual)
        else:
            r = Fraction(0)
            undefined.append(f"recall:{c}")
        f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
        precisions.append(p)
        recalls.append(r)
        f1s.append(f1)
        per_class[str(c)] = {"precision": float(p), "recall": float(r), "f1": float(f1), "support": actual}

    total = len(pairs)
    cm = ConfusionMatrix(classes, counts)
    report = EvalReport(
        accuracy=float(Fraction(int(np.trace(counts[:, :k])), total)),
        macro_precision=float(sum(precisions) / k),
        macro_recall=float(sum(recalls) / k),
        macro_f1=float(sum(f1s) / k),
        per_class=per_class,
        unmapped_count=int(counts[:, k].sum()),
        n=total,
        undefined=undefined,
        confusion=cm,
    )
    return report, cm
