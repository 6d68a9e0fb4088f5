"""Acceptance criteria AC1-AC10, one or more tests per criterion.

Each test carries ``@pytest.mark.criterion(n, title)``; the conftest hook
prints one PASS/FAIL line per criterion at the end of the run.
"""

import json
import math
import random
import struct
import time
import zlib
from fractions import Fraction

import numpy as np
import pytest

import matwriter as mw
import oracles
from mockllm import chat_reply, lookup_responder, prompt_of, serve
from vibtext import benchmark, evalkit
from vibtext.errors import BadMagic, ChecksumOrInflateFailure, TruncatedFile, UnsupportedElement
from vibtext.features import FEATURE_NAMES, feature_vector
from vibtext.llm_client import InferenceConfig, evaluate_endpoint, infer_batch
from vibtext.preprocess import EncodedSample, SpectrumVector, decode, encode, fft_magnitude, fft_magnitude_batch, windows
from vibtext.promptgen import (
    DEFAULT_EQUIP,
    EquipInfo,
    PromptRecord,
    all_labels,
    build_subset,
    condition_windows,
    label_counts,
    make_input,
    make_instruction,
)
from vibtext.signal_io import SensorPosition, parse_mat_v5, read_arrays
from vibtext.synth import synthetic_condition

FS = 12000.0
ALL_SUBSETS = [(load, pos) for pos in ("DE", "FE") for load in range(4)]

criterion = pytest.mark.criterion


# --- AC1 ------------------------------------------------------------------------

@criterion(1, "FFT magnitude equals the naive O(L^2) DFT within 1e-9 (<10 s)")
def test_ac1_fft_matches_naive_dft():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for L in (8, 64, 512):
        x = rng.normal(scale=rng.uniform(0.1, 10.0, size=(200, 1)), size=(200, L))
        fast = fft_magnitude_batch(x)
        slow = np.abs(x @ oracles.dft_matrix(L).T) / L
        worst = max(worst, float(np.max(np.abs(fast - slow))))
        # the single-segment path agrees with the batch path
        assert np.array_equal(fft_magnitude(x[0]).values, fast[0])
    # pure-Python reference on a few segments, no numpy in the loop
    for L in (8, 64):
        for row in rng.normal(size=(5, L)):
            ref = oracles.naive_magnitude(row.tolist())
            worst = max(worst, float(np.max(np.abs(fft_magnitude(row).values - ref))))
    elapsed = time.perf_counter() - t0
    print(f"AC1 max abs error {worst:.3e}, {elapsed:.2f} s")
    assert worst < 1e-9
    assert elapsed < 10.0


# --- AC2 ------------------------------------------------------------------------

@criterion(2, "Parseval holds on every segment of a full synthetic build (rel < 1e-6)")
def test_ac2_parseval_full_build():
    worst, count = 0.0, 0
    for load, pos in ALL_SUBSETS:
        for _, _, win in condition_windows(synthetic_condition(load, pos, seed=0), seed=0):
            L = win.shape[1]
            v = fft_magnitude_batch(win)
            lhs = np.sum((L * v) ** 2, axis=1)
            rhs = L * np.sum(win ** 2, axis=1)
            rel = np.abs(lhs - rhs) / rhs
            worst = max(worst, float(rel.max()))
            count += win.shape[0]
    print(f"AC2 {count} segments, max relative error {worst:.3e}")
    assert count == 8 * 2300
    assert worst < 1e-6


# --- AC3 ------------------------------------------------------------------------

def _feature_corpus():
    """250 segments cut from synthetic recordings (L = 512) and 250 random ones of varied length."""
    rng = np.random.default_rng(303)
    out = []
    signals = synthetic_condition(1, "DE", seed=3) + synthetic_condition(2, "FE", seed=3)
    for sig in signals:
        starts = rng.integers(0, len(sig) - 512, size=13)
        out += list(windows(sig.samples, starts, 512))
    out = out[:250]
    for _ in range(250):
        n = int(rng.integers(2, 97))
        kind = rng.integers(3)
        if kind == 0:
            x = rng.normal(loc=rng.normal(), size=n)
        elif kind == 1:
            x = rng.standard_t(3, size=n) * 10 ** rng.uniform(-3, 3)
        else:
            x = np.sin(2 * np.pi * rng.uniform(0, 0.5) * np.arange(n)) + 0.01 * rng.normal(size=n)
        out.append(x)
    return out


@criterion(3, "15 features match a naive implementation within 1e-9 relative; identities hold")
def test_ac3_features_match_naive_oracle():
    corpus = _feature_corpus()
    assert len(corpus) == 500
    worst = 0.0
    for x in corpus:
        got = feature_vector(x, FS).as_dict()
        spectrum = (oracles.dft_matrix(len(x)) @ x).tolist() if len(x) > 128 else None
        want = oracles.naive_features(x.tolist(), FS, spectrum)
        for name in FEATURE_NAMES:
            a, b = got[name], want[name]
            assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12), (name, a, b)
            if abs(b) > 1e-12:  # skip analytic zeros that are pure roundoff in both
                worst = max(worst, abs(a - b) / abs(b))
        assert math.isclose(got["rms"] ** 2, got["std"] ** 2 + got["mean"] ** 2, rel_tol=1e-9, abs_tol=1e-15)
        assert math.isclose(got["impulse_factor"], got["crest_factor"] * got["shape_factor"], rel_tol=1e-9)
    print(f"AC3 500 segments, max relative deviation {worst:.3e}")


# --- AC4 ------------------------------------------------------------------------

@criterion(4, "decode(encode(y)) == floor(y*10^D)/10^D exactly; L tokens; NaN slots")
def test_ac4_encoding_contract():
    rng = np.random.default_rng(404)
    y = np.concatenate([rng.uniform(0, 3, size=5000), 10 ** rng.uniform(-6, 3, size=5000)])
    assert y.size == 10_000
    for d in (1, 3, 6):
        sample = encode(SpectrumVector(y), d)
        assert len(sample.tokens) == y.size
        got = decode(sample)
        # oracle 1: truncate the decimal literal of each value
        want = [float(Fraction(oracles.decimal_quantize(v, d), 10 ** d)) for v in y]
        assert got.tolist() == want
        # oracle 2: exact rational floor of the binary value
        exact = [float(Fraction(math.floor(Fraction(float(v)) * 10 ** d), 10 ** d)) for v in y]
        assert got.tolist() == exact
    for L in (4, 64, 257, 512):
        s = encode(fft_magnitude(rng.normal(size=L)), 3)
        assert len(s.text.split(",")) == L
    s = encode(SpectrumVector([0.5, float("nan"), 1.25]), 2)
    assert s.text == "50,NaN,125"
    back = decode(s)
    assert back[0] == 0.5 and math.isnan(back[1]) and back[2] == 1.25
    assert decode(EncodedSample("NaN,NaN", 1)).size == 2


# --- AC5 ------------------------------------------------------------------------

@criterion(5, "per-condition corpus 2300 (230/690/690/690); four-condition Ten scheme 9200 (<60 s)")
def test_ac5_dataset_counts():
    t0 = time.perf_counter()
    four = build_subset(synthetic_condition(0, "DE", seed=0), scheme="4", seed=0)
    assert len(four) == 2300
    assert label_counts(four) == {"NO": 230, "IRF": 690, "ORF": 690, "REF": 690}
    ten = []
    for load in range(4):
        ten += build_subset(synthetic_condition(load, "DE", seed=0), scheme="10", seed=0)
    assert len(ten) == 9200
    assert label_counts(ten) == {lab.value: 920 for lab in all_labels("10")}
    assert len({r.record_id for r in ten}) == 9200
    assert all(len(r.input.split(",")) == 512 for r in ten)
    elapsed = time.perf_counter() - t0
    print(f"AC5 11500 records in {elapsed:.2f} s")
    assert elapsed < 60.0


# --- AC6 ------------------------------------------------------------------------

def _equip(spec):
    if spec is None:
        return None
    if isinstance(spec, str):
        return DEFAULT_EQUIP[SensorPosition.parse(spec)]
    return EquipInfo(spec["name"], spec["model"], spec["geometry"])


@criterion(6, "prompt templates byte-match the golden fixtures, including the no-machine-info variant")
def test_ac6_golden_templates(fixtures_dir):
    doc = json.loads((fixtures_dir / "templates.json").read_text(encoding="utf-8"))
    for case in doc["instructions"]:
        got = make_instruction(_equip(case["equip"]), case["load_hp"], case["speed_rpm"], case["track"])
        assert got.encode("utf-8") == case["text"].encode("utf-8")

    fft = doc["fft_record"]
    x = np.array(fft["samples"])
    text = make_input("fft", encode(fft_magnitude(x), fft["decimals"]))
    assert text == fft["input"]
    rec = PromptRecord(make_instruction(None, 0, 1797, "fft"), text, "Normal", {})
    assert rec.prompt.encode("utf-8") == fft["prompt"].encode("utf-8")

    stat = doc["stat_record"]
    got = make_input("stat", feature_vector(np.array(stat["samples"]), stat["sampling_rate_hz"]))
    assert got.encode("utf-8") == stat["input"].encode("utf-8")


@criterion(6, "prompt templates byte-match the golden fixtures, including the no-machine-info variant")
def test_ac6_built_records_use_templates(fixtures_dir):
    doc = json.loads((fixtures_dir / "templates.json").read_text(encoding="utf-8"))
    signals = synthetic_condition(0, "DE", seed=0, duration_s=1.0)
    with_info = build_subset(signals, "fft", per_class=1)
    without = build_subset(signals, "fft", per_class=1, include_equip=False)
    assert {r.instruction for r in with_info} == {doc["instructions"][0]["text"]}
    assert {r.instruction for r in without} == {
        "Given working conditions: 0 hp, 1797 rpm, please predict the operating status of the bearing "
        "based on the following FFT vector."}
    assert [r.input for r in with_info] == [r.input for r in without]


# --- AC7 ------------------------------------------------------------------------

@criterion(7, "metrics: 2-class fixture (acc 0.75, macro F1 11/15) and 20 random cases match brute force")
def test_ac7_metrics_oracle():
    truths, preds = ["A", "A", "B", "B"], ["A", "B", "B", "B"]
    rep, _ = evalkit.score(list(zip(truths, preds)))
    assert rep.accuracy == 0.75
    assert rep.macro_f1 == float(Fraction(11, 15))
    want = oracles.brute_force_metrics(truths, preds, ["A", "B"])
    assert want["macro_f1"] == Fraction(11, 15) and want["accuracy"] == Fraction(3, 4)

    rng = random.Random(707)
    for _ in range(20):
        k = rng.randint(2, 6)
        classes = [f"k{i}" for i in range(k)]
        n = rng.randint(1, 40)
        truths = [rng.choice(classes) for _ in range(n)]
        preds = [rng.choice(classes + [evalkit.UNMAPPED]) for _ in range(n)]
        rep, cm = evalkit.score(list(zip(truths, preds)), classes)
        want = oracles.brute_force_metrics(truths, preds, classes, evalkit.UNMAPPED)
        for key in ("accuracy", "macro_precision", "macro_recall", "macro_f1"):
            assert getattr(rep, key) == float(want[key]), key
        for c in classes:
            assert tuple(rep.per_class[c][m] for m in ("precision", "recall", "f1")) == tuple(
                float(v) for v in want["per_class"][c])
        assert cm.counts.sum(axis=1).tolist() == [truths.count(c) for c in classes]


# --- AC8 ------------------------------------------------------------------------

# measured once with seed 0: 0HPDE 0.9833, 0HPFE 0.3967; thresholds fixed before that run
IN_DOMAIN_MIN = 0.95
CROSS_SENSOR_DROP_MIN = 0.15


@criterion(8, "kNN-on-FFT: in-domain >= 0.95 and in-domain minus cross-sensor >= 0.15 (<2 min)")
def test_ac8_cross_domain_trend():
    t0 = time.perf_counter()
    records = benchmark.synthetic_corpus(seed=0)
    reports = benchmark.task2_trend(records, "knn", k=5, seed=0)
    elapsed = time.perf_counter() - t0
    acc = {name: r.accuracy for name, r in reports.items()}
    print("AC8 " + ", ".join(f"{k} {v:.4f}" for k, v in acc.items()) + f"; {elapsed:.1f} s")
    assert acc["0HPDE"] >= IN_DOMAIN_MIN
    assert acc["0HPDE"] - acc["0HPFE"] >= CROSS_SENSOR_DROP_MIN
    assert elapsed < 120.0


# --- AC9 ------------------------------------------------------------------------

LENGTHS = [1, 2, 3, 7, 8, 9, 100, 511, 512, 4097, 9999, 10_000]


def _bits(a):
    return np.asarray(a, dtype=np.float64).view(np.uint64)


@criterion(9, "MAT-v5 round trips (lengths 1..1e4, both byte orders, zlib or not) and rejects malformed files")
def test_ac9_round_trip_corpus(tmp_path, fixtures_dir):
    rng = np.random.default_rng(909)
    for n in LENGTHS:
        x = rng.normal(scale=100.0, size=n)
        x[:: max(1, n // 3)] *= -0.0
        for endian in "<>":
            for compress in (False, True):
                path = tmp_path / f"n{n}_{'le' if endian == '<' else 'be'}{'_z' if compress else ''}.mat"
                path.write_bytes(mw.mat_file({f"X{n:03d}_DE_time": x, "X_RPM": np.array([1797.0])}, endian, compress))
                out = read_arrays(path)
                assert np.array_equal(_bits(out[f"X{n:03d}_DE_time"]), _bits(x))
                assert out["X_RPM"].tolist() == [1797.0]
    for name in ("x097_le.mat", "x097_be.mat", "x097_le_z.mat"):
        assert read_arrays(fixtures_dir / name)["X097_DE_time"].tolist() == [1.0, 2.0, 3.0, 4.0]


@criterion(9, "MAT-v5 round trips (lengths 1..1e4, both byte orders, zlib or not) and rejects malformed files")
def test_ac9_malformed_rejected(fixtures_dir):
    good = (fixtures_dir / "x097_le.mat").read_bytes()
    bad_version = bytearray(good)
    bad_version[124:126] = b"\x00\x02"
    corrupt = bytearray(mw.mat_file({"a": np.arange(100.0)}, compress=True))
    corrupt[140:150] = b"\xff" * 10
    short_inflate = mw.matrix("a", np.arange(10.0))
    z = zlib.compress(short_inflate[:-16])
    cases = [
        (b"PK\x03\x04" + b"\x00" * 200, BadMagic),
        (bytes(bad_version), BadMagic),
        (b"", TruncatedFile),
        (good[:100], TruncatedFile),
        (good[:140], TruncatedFile),
        (good[:-8], TruncatedFile),
        (mw.header() + struct.pack("<II", mw.miCOMPRESSED, len(z)) + z, TruncatedFile),
        (bytes(corrupt), ChecksumOrInflateFailure),
        (mw.header() + mw.matrix("c", np.zeros(2), cls=mw.mxCELL_CLASS), UnsupportedElement),
        (mw.header() + mw.matrix("z", np.arange(3.0), complex_flag=True), UnsupportedElement),
        (mw.header() + struct.pack("<II", mw.miDOUBLE, 8) + b"\x00" * 8, UnsupportedElement),
    ]
    for data, error in cases:
        with pytest.raises(error):
            parse_mat_v5(data)


# --- AC10 -----------------------------------------------------------------------

def _eval_records(n, scheme="4"):
    labels = all_labels(scheme)
    return [PromptRecord(f"query {i}", f"{i}", labels[i % len(labels)].text,
                         {"record_id": f"e{i:04d}", "label": labels[i % len(labels)].value, "scheme": scheme})
            for i in range(n)]


def _cfg(url, concurrency=8):
    return InferenceConfig(url, "mock", max_concurrency=concurrency, backoff_s=(0.0,))


@criterion(10, "mock endpoint: ground truth gives 1.0, 10% corruption gives 0.9 exactly, order preserved")
def test_ac10_ground_truth_and_corruption(tmp_path):
    recs = _eval_records(200)
    with serve(lookup_responder({r.prompt: r.output for r in recs}), latency=(0.0, 0.004)) as (url, _):
        report = evaluate_endpoint(_cfg(url), recs, out_dir=tmp_path / "truth")
    assert report.accuracy == 1.0
    assert json.loads((tmp_path / "truth" / "report.json").read_text())["accuracy"] == 1.0

    # every tenth record answered with the next class's name: 20 of 200 wrong
    labels = all_labels("4")
    answers = {}
    for i, r in enumerate(recs):
        lab = labels[i % 4]
        answers[r.prompt] = labels[(lab.index + 1) % 4].text if i % 10 == 3 else r.output
    with serve(lookup_responder(answers), latency=(0.0, 0.004), seed=1) as (url, _):
        report = evaluate_endpoint(_cfg(url), recs)
    assert report.accuracy == float(Fraction(180, 200)) == 0.9
    assert report.unmapped_count == 0


@criterion(10, "mock endpoint: ground truth gives 1.0, 10% corruption gives 0.9 exactly, order preserved")
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_ac10_order_under_random_latency(seed):
    recs = _eval_records(100)
    with serve(lambda body: chat_reply(prompt_of(body).split()[1]), latency=(0.0, 0.02), seed=seed) as (url, state):
        results = infer_batch(_cfg(url), recs)
    assert [r.text for r in results] == [str(i) for i in range(100)]
    assert state.peak <= 8
    finished = [prompt_of(body) for _, _, body, _ in sorted(state.log, key=lambda e: e[1])]
    assert finished != [r.prompt for r in recs]
