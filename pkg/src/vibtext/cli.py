"""Command line entry point: synth, ingest, build, split, baseline, eval, report, trend, encode.

Every option can also come from a JSON or YAML file given with ``--config``;
top-level scalars apply to all commands and a section named after the
command overrides them. Flags given on the command line win over both.
Relative paths resolve against ``--workdir``.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, baselines, benchmark, evalkit, plotting, splits
from .errors import ConfigError, EmptyInput, SignalTooShort, UnknownRecord, VibtextError
from .features import FEATURE_NAMES, FeatureTable, feature_matrix, read_vector_csv
from .llm_client import InferenceConfig, ResponseCache, evaluate_endpoint
from .preprocess import (
    SegmentMode,
    encode,
    fft_magnitude,
    fft_magnitude_batch,
    truncated,
)
from .promptgen import (
    DEFAULT_PER_CLASS,
    Label,
    Scheme,
    Track,
    build_subset,
    condition_windows,
    label_counts,
    label_for,
    read_jsonl,
    write_jsonl,
)
from .signal_io import (
    FaultAnnotation,
    FaultKind,
    SensorPosition,
    index_entry,
    read_arrays,
    read_index,
    write_float64_stream,
    write_index,
)
from .synth import CWRU_SPEEDS, SynthSpec, generate, synthetic_condition

log = logging.getLogger("vibtext")

ALL_SUBSETS = tuple(f"{load}HP{pos}" for pos in ("DE", "FE") for load in range(4))

DEFAULTS = {
    "synth": {
        "fault": "normal", "size": None, "load": 0, "speed": None, "position": "DE", "duration": 10.0,
        "noise": 0.1, "seed": 0, "fs": 12000.0, "suite": False, "subset": None, "out": None,
    },
    "ingest": {
        "index": None, "subset": None, "per_class": DEFAULT_PER_CLASS, "l": 512, "d": 3, "seed": 0,
        "scheme": "4", "mode": "random", "out_dir": None,
    },
    "build": {
        "track": "fft", "scheme": "4", "subset": None, "index": None, "per_class": DEFAULT_PER_CLASS,
        "l": 512, "d": 3, "seed": 0, "no_equip_info": False, "one_sided": False, "mode": "random",
        "duration": 10.0, "noise": 0.1, "out": None,
    },
    "split": {"plan": None, "end": None, "corpus": None, "seed": 0, "out_dir": None},
    "baseline": {"model": "knn", "k": 5, "train": None, "test": None, "scheme": None, "d": 3, "out": None},
    "eval": {
        "endpoint": None, "model": None, "set": None, "corpus": None, "scheme": None, "out": None,
        "temperature": 0.0, "max_tokens": 32, "concurrency": 4, "timeout": 60.0, "attempts": 3,
        "cache": None,
    },
    "report": {"input": None, "format": "table", "out_dir": None},
    "trend": {
        "track": "fft", "scheme": "4", "model": "knn", "k": 5, "seed": 0, "per_class": DEFAULT_PER_CLASS,
        "noise": 0.1, "duration": 10.0, "out_dir": None,
    },
    "encode": {"input": None, "l": 512, "d": 3, "start": 0, "one_sided": False},
}


# --- config plumbing ---------------------------------------------------------

def load_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}".replace("\n", " ")) from None
    else:
        try:
            doc = json.loads(text)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def effective_config(command: str, args: argparse.Namespace, file_cfg: dict) -> dict:
    defaults = DEFAULTS[command]
    cfg = dict(defaults)
    for key, value in file_cfg.items():
        if not isinstance(value, dict) and key.replace("-", "_") in defaults:
            cfg[key.replace("-", "_")] = value
    section = file_cfg.get(command) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"config section {command!r} must be a mapping")
    for key, value in section.items():
        key = key.replace("-", "_")
        if key not in defaults:
            raise ConfigError(f"unknown option {key!r} in config section {command!r}")
        cfg[key] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _versions() -> dict:
    import httpx
    import matplotlib
    return {
        "vibtext": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "matplotlib": matplotlib.__version__,
        "httpx": httpx.__version__,
    }


def record_artifacts(out_dir: Path, command: str, cfg: dict, artifacts) -> None:
    """Add entries for ``artifacts`` to ``out_dir/manifest.json``; older entries are kept."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "manifest.json"
    manifest = {"artifacts": {}}
    if path.exists():
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except ValueError:
            log.warning("replacing unreadable %s", path)
    digest = config_hash(cfg)
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    for art in artifacts:
        manifest.setdefault("artifacts", {})[Path(art).name] = {
            "command": command,
            "config_hash": digest,
            "config": cfg,
            "created": stamp,
        }
    manifest["versions"] = _versions()
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


class Ctx:
    def __init__(self, workdir: Path, command: str, cfg: dict):
        self.workdir = workdir
        self.command = command
        self.cfg = cfg

    def path(self, value):
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.workdir / p

    def need(self, key: str):
        value = self.cfg.get(key)
        if value is None or value == []:
            raise ConfigError(f"{self.command} needs --{key.replace('_', '-')}")
        return value

    def archive(self, out_dir: Path, *artifacts) -> None:
        record_artifacts(out_dir, self.command, self.cfg, artifacts)


def _listify(value):
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    return list(value)


def _subsets(value) -> list[str]:
    subsets = []
    for item in _listify(value):
        subsets += [s.strip() for s in str(item).split(",") if s.strip()]
    for s in subsets:
        if s not in ALL_SUBSETS:
            raise ConfigError(f"unknown subset {s!r}; expected one of {', '.join(ALL_SUBSETS)}")
    return subsets


def _parse_subset(sid: str):
    return int(sid[0]), SensorPosition.parse(sid[-2:])


def _condition_signals(ctx: Ctx, subsets: list[str]) -> dict[str, list]:
    """Signals per subset: from --index when given, otherwise synthesized."""
    cfg = ctx.cfg
    if cfg.get("index"):
        groups: dict[str, list] = {}
        for sig in read_index(ctx.path(cfg["index"])):
            groups.setdefault(sig.subset_id, []).append(sig)
        wanted = subsets or sorted(groups)
        missing = [s for s in wanted if s not in groups]
        if missing:
            raise splits.MissingSubset(f"index has no signals for {missing}")
        return {s: groups[s] for s in wanted}
    wanted = subsets or ["0HPDE"]
    out = {}
    for sid in wanted:
        load, pos = _parse_subset(sid)
        out[sid] = synthetic_condition(load, pos, seed=int(cfg["seed"]),
                                       duration_s=float(cfg.get("duration", 10.0)),
                                       noise_sigma=float(cfg.get("noise", 0.1)))
    return out


# --- commands ------------------------------------------------------------------

def cmd_synth(ctx: Ctx) -> int:
    cfg = ctx.cfg
    out = ctx.path(ctx.need("out"))
    if cfg["suite"]:
        out.mkdir(parents=True, exist_ok=True)
        entries, files = [], []
        for sid in _subsets(cfg["subset"]) or list(ALL_SUBSETS):
            load, pos = _parse_subset(sid)
            for sig in synthetic_condition(load, pos, seed=int(cfg["seed"]), duration_s=float(cfg["duration"]),
                                           noise_sigma=float(cfg["noise"])):
                name = sig.source_id + ".f64"
                write_float64_stream(sig.samples, out / name)
                entries.append(index_entry(name, sig))
                files.append(out / name)
        write_index(entries, out / "signals.json")
        ctx.archive(out, out / "signals.json", *files)
        print(f"wrote {len(entries)} signals and {out / 'signals.json'}")
        return 0

    load = int(cfg["load"])
    kind = FaultKind.parse(cfg["fault"])
    size = None if kind is FaultKind.NORMAL else float(ctx.need("size"))
    spec = SynthSpec(
        fault=FaultAnnotation(kind, size),
        load_hp=load,
        speed_rpm=int(cfg["speed"] or CWRU_SPEEDS.get(load, 1797)),
        duration_s=float(cfg["duration"]),
        sampling_rate_hz=float(cfg["fs"]),
        noise_sigma=float(cfg["noise"]),
        seed=int(cfg["seed"]),
        sensor_position=SensorPosition.parse(cfg["position"]),
    )
    sig = generate(spec)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_float64_stream(sig.samples, out)
    ctx.archive(out.parent, out)
    print(f"wrote {len(sig)} samples to {out}")
    return 0


def cmd_ingest(ctx: Ctx) -> int:
    """Segment indexed recordings into labeled feature and FFT-vector CSVs, one pair per subset."""
    cfg = ctx.cfg
    out = ctx.path(ctx.need("out_dir"))
    ctx.need("index")
    scheme = Scheme.parse(cfg["scheme"])
    length, decimals = int(cfg["l"]), int(cfg["d"])
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for sid, signals in _condition_signals(ctx, _subsets(cfg["subset"])).items():
        feats, ffts, labels = [], [], []
        for sig, _, win in condition_windows(signals, int(cfg["per_class"]), length, int(cfg["seed"]),
                                             SegmentMode(cfg["mode"])):
            feats.append(feature_matrix(win, sig.sampling_rate_hz))
            ffts.append(truncated(fft_magnitude_batch(win), decimals))
            labels += [label_for(sig.fault, scheme).value] * win.shape[0]
        feat_path, fft_path = out / f"{sid}_features.csv", out / f"{sid}_fft.csv"
        FeatureTable(np.vstack(feats), FEATURE_NAMES, tuple(labels)).to_csv(feat_path)
        FeatureTable(np.vstack(ffts), tuple(f"bin{m}" for m in range(length)), tuple(labels)).to_csv(fft_path)
        written += [feat_path, fft_path]
        print(f"{sid}: {len(labels)} segments")
    ctx.archive(out, *written)
    return 0


def cmd_build(ctx: Ctx) -> int:
    cfg = ctx.cfg
    out = ctx.path(ctx.need("out"))
    records = []
    for sid, signals in _condition_signals(ctx, _subsets(cfg["subset"])).items():
        records += build_subset(
            signals,
            track=Track(cfg["track"]),
            scheme=Scheme.parse(cfg["scheme"]),
            per_class=int(cfg["per_class"]),
            length=int(cfg["l"]),
            decimals=int(cfg["d"]),
            seed=int(cfg["seed"]),
            include_equip=not cfg["no_equip_info"],
            mode=SegmentMode(cfg["mode"]),
            one_sided=bool(cfg["one_sided"]),
        )
    out.parent.mkdir(parents=True, exist_ok=True)
    n = write_jsonl(records, out)
    ctx.archive(out.parent, out)
    counts = label_counts(records)
    print(f"wrote {n} records to {out}: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def _read_corpora(ctx: Ctx, key: str) -> list:
    records = []
    for path in _listify(ctx.need(key)):
        records += read_jsonl(ctx.path(path))
    return records


def cmd_split(ctx: Ctx) -> int:
    cfg = ctx.cfg
    out = ctx.path(ctx.need("out_dir"))
    records = _read_corpora(ctx, "corpus")
    if not records:
        raise EmptyInput("corpus is empty")
    track = records[0].meta.get("track", "fft")
    plan = splits.plan_by_name(ctx.need("plan"), cfg["end"], track, int(cfg["seed"]))
    result = splits.materialize(plan, records)
    written = splits.write_split(result, out)
    files = [p for part in written.values() for p in (part, part.with_suffix(".jsonl")) if p.exists()]
    ctx.archive(out, *files)
    print(f"{plan.name}: train {len(result.train)}; " +
          "; ".join(f"{name} {len(recs)}" for name, recs in result.evals.items()))
    return 0


def _labeled_vectors(ctx: Ctx, path, decimals: int):
    """(vectors, label strings, scheme or None) from a labeled CSV or a JSONL corpus."""
    path = ctx.path(path)
    if path.suffix.lower() == ".jsonl":
        records = read_jsonl(path)
        if not records:
            raise EmptyInput(f"{path} has no records")
        return benchmark.record_vectors(records, decimals), benchmark.record_labels(records), records[0].meta.get("scheme")
    table = read_vector_csv(path)
    if table.labels is None:
        raise ConfigError(f"{path} has no label column")
    return table.rows, list(table.labels), None


def cmd_baseline(ctx: Ctx) -> int:
    cfg = ctx.cfg
    decimals = int(cfg["d"])
    x, y, scheme = _labeled_vectors(ctx, ctx.need("train"), decimals)
    model = baselines.fit(x, y, baselines.Kind(cfg["model"]), int(cfg["k"]))
    scheme = Scheme.parse(cfg["scheme"] or scheme or ("10" if any(c[-1].isdigit() for c in y) else "4"))
    reports = {}
    for test in _listify(ctx.need("test")):
        tx, ty, _ = _labeled_vectors(ctx, test, decimals)
        preds = baselines.predict_many(model, tx)
        report, _ = evalkit.score([(Label(scheme, t), Label(scheme, p)) for t, p in zip(ty, preds)])
        report.extra.update({"model": cfg["model"], "k": int(cfg["k"]), "train": str(cfg["train"])})
        reports[Path(test).stem] = report
    for name, report in reports.items():
        print(f"== {name}")
        print(report.table())
    if cfg["out"]:
        out = ctx.path(cfg["out"])
        out.parent.mkdir(parents=True, exist_ok=True)
        doc = {name: r.to_dict() for name, r in reports.items()}
        out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        ctx.archive(out.parent, out)
    return 0


def _eval_records(ctx: Ctx) -> list:
    target = ctx.path(ctx.need("set"))
    if target.suffix.lower() == ".jsonl":
        return read_jsonl(target)
    _, ids = splits.read_manifest(target)
    pool = {r.record_id: r for r in _read_corpora(ctx, "corpus")}
    missing = [i for i in ids if i not in pool]
    if missing:
        raise UnknownRecord(f"{len(missing)} manifest ids not in the corpus, first {missing[0]!r}")
    return [pool[i] for i in ids]


def cmd_eval(ctx: Ctx) -> int:
    cfg = ctx.cfg
    out = ctx.path(ctx.need("out"))
    records = _eval_records(ctx)
    if not records:
        raise EmptyInput("evaluation set is empty")
    icfg = InferenceConfig(
        endpoint_url=ctx.need("endpoint"),
        model_name=ctx.need("model"),
        temperature=float(cfg["temperature"]),
        max_tokens=int(cfg["max_tokens"]),
        max_concurrency=int(cfg["concurrency"]),
        timeout_s=float(cfg["timeout"]),
        max_attempts=int(cfg["attempts"]),
    )
    cache = ResponseCache(ctx.path(cfg["cache"])) if cfg["cache"] else None
    report = evaluate_endpoint(icfg, records, cfg["scheme"], out_dir=out.parent, cache=cache, report_name=out.name)
    ctx.archive(out.parent, out, out.parent / "responses.jsonl", out.parent / "confusion_matrix.csv")
    print(report.table())
    if report.extra.get("error_count"):
        print(f"{report.extra['error_count']} requests failed; see responses.jsonl", file=sys.stderr)
    return 0


def _load_reports(path: Path) -> dict[str, evalkit.EvalReport]:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if "accuracy" in doc:
        return {path.stem: evalkit.EvalReport.from_dict(doc)}
    return {name: evalkit.EvalReport.from_dict(d) for name, d in doc.items()}


SUMMARY_FIELDS = ("set", "n", "accuracy", "macro_precision", "macro_recall", "macro_f1", "unmapped_count")


def summary_rows(reports: dict) -> list[dict]:
    return [{"set": name, **{f: getattr(r, f) for f in SUMMARY_FIELDS[1:]}} for name, r in reports.items()]


def cmd_report(ctx: Ctx) -> int:
    cfg = ctx.cfg
    reports: dict[str, evalkit.EvalReport] = {}
    for path in _listify(ctx.need("input")):
        reports.update(_load_reports(ctx.path(path)))
    fmt = cfg["format"]
    rows = summary_rows(reports)
    if fmt == "json":
        print(json.dumps({name: r.to_dict() for name, r in reports.items()}, indent=2))
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})
        sys.stdout.write(buf.getvalue())
    else:
        for name, r in reports.items():
            print(f"== {name}")
            print(r.table())
    if cfg["out_dir"]:
        out = ctx.path(cfg["out_dir"])
        figures = []
        for name, r in reports.items():
            safe = name.replace("/", "_")
            if r.confusion is not None:
                figures.append(plotting.confusion_png(r.confusion, out / f"{safe}_confusion.png", title=name))
            figures.append(plotting.per_class_png(r, out / f"{safe}_per_class.png", title=name))
        if len(reports) > 1:
            figures.append(plotting.accuracy_png({n: r.accuracy for n, r in reports.items()}, out / "accuracy.png"))
        summary = out / "summary.csv"
        with open(summary, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, SUMMARY_FIELDS, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        ctx.archive(out, summary, *figures)
        print(f"wrote {len(figures)} figures and {summary}", file=sys.stderr)
    return 0


def cmd_trend(ctx: Ctx) -> int:
    """Task 2 protocol on synthetic data with an oracle classifier."""
    cfg = ctx.cfg
    records = benchmark.synthetic_corpus(Track(cfg["track"]), Scheme.parse(cfg["scheme"]), int(cfg["seed"]),
                                         int(cfg["per_class"]), noise_sigma=float(cfg["noise"]),
                                         duration_s=float(cfg["duration"]))
    reports = benchmark.task2_trend(records, baselines.Kind(cfg["model"]), int(cfg["k"]), int(cfg["seed"]))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["set", "accuracy", "macro_f1"])
    for name, r in reports.items():
        w.writerow([name, f"{r.accuracy:.4f}", f"{r.macro_f1:.4f}"])
    if cfg["out_dir"]:
        out = ctx.path(cfg["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        doc = out / "trend.json"
        doc.write_text(json.dumps({n: r.to_dict() for n, r in reports.items()}, indent=2) + "\n", encoding="utf-8")
        fig = plotting.accuracy_png({n: r.accuracy for n, r in reports.items()}, out / "trend.png",
                                    title=f"{cfg['model']} trained on 0HPDE")
        ctx.archive(out, doc, fig)
    return 0


def cmd_encode(ctx: Ctx) -> int:
    cfg = ctx.cfg
    arrays = read_arrays(ctx.path(ctx.need("input")))
    if len(arrays) != 1:
        raise ConfigError(f"input holds {len(arrays)} arrays; convert one channel to a raw stream first")
    (x,) = arrays.values()
    start, length = int(cfg["start"]), int(cfg["l"])
    if start < 0 or start + length > x.size:
        raise SignalTooShort(f"window {start}..{start + length} lies outside {x.size} samples")
    sample = encode(fft_magnitude(x[start:start + length]), int(cfg["d"]), bool(cfg["one_sided"]))
    print(sample.text)
    return 0


COMMANDS = {
    "synth": cmd_synth, "ingest": cmd_ingest, "build": cmd_build, "split": cmd_split,
    "baseline": cmd_baseline, "eval": cmd_eval, "report": cmd_report, "trend": cmd_trend,
    "encode": cmd_encode,
}


# --- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vibtext", description="Vibration recordings to LLM fault-diagnosis corpora.")
    p.add_argument("--workdir", default=".", help="base directory for relative paths")
    p.add_argument("--config", help="JSON or YAML file of option values")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write synthetic recordings as little-endian float64 streams")
    s.add_argument("--fault", help="normal, inner_race, outer_race or rolling_element")
    s.add_argument("--size", type=float, help="defect diameter in inches")
    s.add_argument("--load", type=int)
    s.add_argument("--speed", type=int, help="rpm; defaults to the CWRU speed for the load")
    s.add_argument("--position", help="DE or FE")
    s.add_argument("--duration", type=float)
    s.add_argument("--noise", type=float)
    s.add_argument("--fs", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--suite", action="store_true", default=None,
                   help="write every class of each subset plus a signals.json index into --out")
    s.add_argument("--subset", action="append", help="with --suite: subsets to write (default all eight)")
    s.add_argument("--out")

    s = sub.add_parser("ingest", help="segment indexed recordings into labeled feature/FFT CSVs")
    s.add_argument("--index", help="signals.json")
    s.add_argument("--subset", action="append")
    s.add_argument("--per-class", type=int)
    s.add_argument("--l", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--scheme", choices=["4", "10"])
    s.add_argument("--mode", choices=["random", "contiguous"])
    s.add_argument("--seed", type=int)
    s.add_argument("--out-dir")

    s = sub.add_parser("build", help="build a prompt corpus (JSONL)")
    s.add_argument("--track", choices=["fft", "stat"])
    s.add_argument("--scheme", choices=["4", "10"])
    s.add_argument("--subset", action="append", help="e.g. 0HPDE; repeat or comma-separate")
    s.add_argument("--index", help="signals.json; synthetic signals are used when absent")
    s.add_argument("--per-class", type=int)
    s.add_argument("--l", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--mode", choices=["random", "contiguous"])
    s.add_argument("--no-equip-info", action="store_true", default=None)
    s.add_argument("--one-sided", action="store_true", default=None)
    s.add_argument("--duration", type=float, help="synthetic recording length in seconds")
    s.add_argument("--noise", type=float, help="synthetic noise sigma")
    s.add_argument("--out")

    s = sub.add_parser("split", help="apply a task split plan and write manifests")
    s.add_argument("--plan", choices=["task1", "task2", "task3"])
    s.add_argument("--end", help="DE or FE (task1)")
    s.add_argument("--corpus", action="append")
    s.add_argument("--seed", type=int)
    s.add_argument("--out-dir")

    s = sub.add_parser("baseline", help="kNN or nearest-centroid on vector CSVs or corpora")
    s.add_argument("--model", choices=["knn", "centroid"])
    s.add_argument("--k", type=int)
    s.add_argument("--train")
    s.add_argument("--test", action="append")
    s.add_argument("--scheme", choices=["4", "10"])
    s.add_argument("--d", type=int, help="decimals used when decoding FFT corpora")
    s.add_argument("--out")

    s = sub.add_parser("eval", help="score a chat-completions endpoint on an evaluation set")
    s.add_argument("--endpoint")
    s.add_argument("--model")
    s.add_argument("--set", help="manifest (.ids) or corpus (.jsonl)")
    s.add_argument("--corpus", action="append", help="corpora holding the manifest's records")
    s.add_argument("--scheme", choices=["4", "10"])
    s.add_argument("--temperature", type=float)
    s.add_argument("--max-tokens", type=int)
    s.add_argument("--concurrency", type=int)
    s.add_argument("--timeout", type=float)
    s.add_argument("--attempts", type=int)
    s.add_argument("--cache", help="JSONL response cache")
    s.add_argument("--out", help="report path; responses.jsonl is written beside it")

    s = sub.add_parser("report", help="print reports and render figures")
    s.add_argument("--input", action="append")
    s.add_argument("--format", choices=["table", "json", "csv"])
    s.add_argument("--out-dir", help="directory for PNG figures and summary.csv")

    s = sub.add_parser("trend", help="Task 2 cross-domain check on synthetic data")
    s.add_argument("--track", choices=["fft", "stat"])
    s.add_argument("--scheme", choices=["4", "10"])
    s.add_argument("--model", choices=["knn", "centroid"])
    s.add_argument("--k", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--per-class", type=int)
    s.add_argument("--noise", type=float)
    s.add_argument("--duration", type=float)
    s.add_argument("--out-dir")

    s = sub.add_parser("encode", help="print the encoded FFT of one window of a sample file")
    s.add_argument("input", nargs="?")
    s.add_argument("--l", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--start", type=int)
    s.add_argument("--one-sided", action="store_true", default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_cfg = load_config_file(args.config) if args.config else {}
        cfg = effective_config(args.command, args, file_cfg)
        ctx = Ctx(Path(args.workdir), args.command, cfg)
        return COMMANDS[args.command](ctx)
    except (VibtextError, ValueError, OSError) as exc:
        message = " ".join(str(exc).split())
        print(f"{type(exc).__name__}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
