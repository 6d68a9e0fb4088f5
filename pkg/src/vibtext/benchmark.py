"""Cross-domain trend check: the Task 2 protocol run with oracle classifiers on synthetic data."""

from __future__ import annotations

import numpy as np

from . import baselines, evalkit
from .preprocess import DEFAULT_DECIMALS, decode
from .promptgen import Label, PromptRecord, Scheme, Track, build_subset, parse_features
from .splits import materialize, task2_plan
from .synth import synthetic_condition


def record_vectors(records, decimals: int = DEFAULT_DECIMALS) -> np.ndarray:
    """Numeric vectors recovered from record inputs (decoded FFT tokens or parsed features)."""
    rows = []
    for r in records:
        if r.meta["track"] == Track.FFT.value:
            rows.append(decode(r.input, decimals))
        else:
            rows.append(parse_features(r.input))
    return np.stack(rows)


def record_labels(records) -> list[str]:
    return [r.meta["label"] for r in records]


def evaluate_classifier(model, records, scheme, decimals: int = DEFAULT_DECIMALS) -> evalkit.EvalReport:
    preds = baselines.predict_many(model, record_vectors(records, decimals))
    pairs = [(Label(scheme, t), Label(scheme, p)) for t, p in zip(record_labels(records), preds)]
    report, _ = evalkit.score(pairs)
    return report


def synthetic_corpus(track=Track.FFT, scheme=Scheme.FOUR, seed: int = 0, per_class: int = 230,
                     conditions=((0, "DE"), (1, "DE"), (2, "DE"), (3, "DE"), (0, "FE"), (1, "FE")),
                     noise_sigma: float = 0.1, duration_s: float = 10.0) -> list[PromptRecord]:
    records = []
    for load, pos in conditions:
        signals = synthetic_condition(load, pos, seed=seed, duration_s=duration_s, noise_sigma=noise_sigma)
        records += build_subset(signals, track, scheme, per_class=per_class, seed=seed)
    return records


def task2_trend(records, kind=baselines.Kind.KNN, k: int = 5, seed: int = 0,
                decimals: int = DEFAULT_DECIMALS) -> dict[str, evalkit.EvalReport]:
    """Fit on the 0HPDE training share; score every Task 2 evaluation set."""
    split = materialize(task2_plan(seed=seed), records)
    scheme = Scheme.parse(split.train[0].meta["scheme"])
    model = baselines.fit(record_vectors(split.train, decimals), record_labels(split.train), kind, k)
    return {name: evaluate_classifier(model, recs, scheme, decimals) for name, recs in split.evals.items()}
