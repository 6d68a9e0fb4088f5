import json

import numpy as np
import pytest

from mockllm import chat_reply, serve
from vibtext.cli import main
from vibtext.promptgen import read_jsonl
from vibtext.signal_io import parse_float64_stream

SECRET = "sk-cli-secret-42"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """One synthetic 0HPDE corpus shared by the tests below."""
    work = tmp_path_factory.mktemp("work")
    assert main(["--workdir", str(work), "build", "--subset", "0HPDE", "--seed", "1", "--out", "c/0HPDE.jsonl"]) == 0
    return work


def test_build_counts_and_manifest(corpus):
    path = corpus / "c" / "0HPDE.jsonl"
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2300
    manifest = json.loads((corpus / "c" / "manifest.json").read_text())
    entry = manifest["artifacts"]["0HPDE.jsonl"]
    assert entry["command"] == "build" and len(entry["config_hash"]) == 64
    assert entry["config"]["seed"] == 1 and "created" in entry
    assert "numpy" in manifest["versions"]


def test_build_rerun_byte_identical(corpus, tmp_path):
    assert main(["--workdir", str(tmp_path), "build", "--subset", "0HPDE", "--seed", "1", "--out", "again.jsonl"]) == 0
    assert (tmp_path / "again.jsonl").read_bytes() == (corpus / "c" / "0HPDE.jsonl").read_bytes()


def test_config_file_and_flag_precedence(tmp_path, capsys):
    (tmp_path / "cfg.yaml").write_text("seed: 3\nbuild:\n  per_class: 5\n  track: stat\n  scheme: '10'\n")
    code, out, _ = run(capsys, "--workdir", tmp_path, "--config", tmp_path / "cfg.yaml", "build",
                       "--subset", "1HPFE", "--per-class", "2", "--duration", "1", "--out", "s.jsonl")
    assert code == 0
    recs = read_jsonl(tmp_path / "s.jsonl")
    assert len(recs) == 20  # flag beats the file's per_class; the file's scheme 10 applies
    assert recs[0].input.startswith("mean: ")
    cfg = json.loads((tmp_path / "manifest.json").read_text())["artifacts"]["s.jsonl"]["config"]
    assert cfg["seed"] == 3 and cfg["per_class"] == 2


def test_unknown_config_key(tmp_path, capsys):
    (tmp_path / "cfg.json").write_text(json.dumps({"build": {"colour": "red"}}))
    code, out, err = run(capsys, "--workdir", tmp_path, "--config", tmp_path / "cfg.json", "build", "--out", "x.jsonl")
    assert code == 1
    assert err.startswith("ConfigError: ")


def test_error_is_one_line(tmp_path, capsys):
    code, out, err = run(capsys, "--workdir", tmp_path, "split", "--plan", "task2", "--corpus", "missing.jsonl",
                         "--out-dir", "s")
    assert code == 1
    assert len(err.strip().splitlines()) == 1
    assert err.split(":")[0] in ("IoError", "FileNotFoundError")


def test_missing_subset_error(corpus, tmp_path, capsys):
    code, _, err = run(capsys, "--workdir", corpus, "split", "--plan", "task2", "--corpus", "c/0HPDE.jsonl",
                       "--out-dir", tmp_path / "s")
    assert code == 1 and err.startswith("MissingSubset: ")


def test_split_baseline_eval_report(corpus, tmp_path, capsys, monkeypatch):
    work = corpus
    code, out, _ = run(capsys, "--workdir", work, "build", "--subset", "0HPDE,1HPDE,2HPDE,3HPDE", "--seed", "1",
                       "--per-class", "20", "--duration", "2", "--out", "c/de.jsonl")
    assert code == 0
    code, out, _ = run(capsys, "--workdir", work, "split", "--plan", "task1", "--end", "DE",
                       "--corpus", "c/de.jsonl", "--out-dir", "split")
    assert code == 0 and "CWRUfft-DE" in out
    assert (work / "split" / "manifest.json").exists()

    code, out, _ = run(capsys, "--workdir", work, "baseline", "--train", "split/train.jsonl",
                       "--test", "split/eval_CWRUfft-DE.jsonl", "--out", "base/reports.json")
    assert code == 0
    base = json.loads((work / "base" / "reports.json").read_text())
    assert base["eval_CWRUfft-DE"]["accuracy"] >= 0.9

    monkeypatch.setenv("FDLLM_API_KEY", SECRET)
    with serve(lambda body: chat_reply("Outer Race Fault")) as (url, _):
        code, out, err = run(capsys, "--workdir", work, "-v", "eval", "--endpoint", url, "--model", "m",
                             "--set", "split/eval_CWRUfft-DE.ids", "--corpus", "c/de.jsonl",
                             "--out", "ev/report.json", "--concurrency", "3")
    assert code == 0
    report = json.loads((work / "ev" / "report.json").read_text())
    # the holdout has 8 NO and 24 of each fault kind; only the 24 ORF replies are right
    assert report["accuracy"] == 24 / 80
    assert SECRET not in out + err
    for p in (work / "ev").iterdir():
        assert SECRET not in p.read_text()

    code, out, _ = run(capsys, "--workdir", work, "report", "--input", "ev/report.json", "--input",
                       "base/reports.json", "--format", "csv", "--out-dir", "figs")
    assert code == 0
    assert out.splitlines()[0] == "set,n,accuracy,macro_precision,macro_recall,macro_f1,unmapped_count"
    assert len(out.splitlines()) == 3
    for name in ("report_confusion.png", "report_per_class.png", "accuracy.png", "summary.csv", "manifest.json"):
        data = (work / "figs" / name).read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n" or name.endswith((".csv", ".json"))


def test_synth_suite_then_ingest(tmp_path, capsys):
    code, _, _ = run(capsys, "--workdir", tmp_path, "synth", "--suite", "--subset", "2HPFE", "--duration", "1",
                     "--out", "sig")
    assert code == 0
    index = json.loads((tmp_path / "sig" / "signals.json").read_text())
    assert len(index["signals"]) == 10
    code, _, _ = run(capsys, "--workdir", tmp_path, "ingest", "--index", "sig/signals.json", "--per-class", "4",
                     "--out-dir", "vec")
    assert code == 0
    header = (tmp_path / "vec" / "2HPFE_features.csv").read_text().splitlines()[0]
    assert header.startswith("mean,rms,std,") and header.endswith(",label")
    assert len((tmp_path / "vec" / "2HPFE_fft.csv").read_text().splitlines()) == 1 + 4 + 3 * 12
    code, _, _ = run(capsys, "--workdir", tmp_path, "build", "--index", "sig/signals.json", "--subset", "2HPFE",
                     "--per-class", "4", "--out", "fromindex.jsonl")
    assert code == 0
    assert len(read_jsonl(tmp_path / "fromindex.jsonl")) == 40


def test_synth_single_and_encode(tmp_path, capsys):
    code, _, _ = run(capsys, "--workdir", tmp_path, "synth", "--fault", "inner_race", "--size", "0.007",
                     "--duration", "0.5", "--out", "ir.f64")
    assert code == 0
    x = parse_float64_stream((tmp_path / "ir.f64").read_bytes())
    assert x.size == 6000 and np.all(np.isfinite(x))
    code, out, _ = run(capsys, "--workdir", tmp_path, "encode", "ir.f64", "--l", "64", "--d", "2")
    assert code == 0 and len(out.strip().split(",")) == 64
    code, _, err = run(capsys, "--workdir", tmp_path, "encode", "ir.f64", "--start", "5990")
    assert code == 1 and err.startswith("SignalTooShort: ")


def test_trend_small(tmp_path, capsys):
    code, out, _ = run(capsys, "--workdir", tmp_path, "trend", "--per-class", "20", "--duration", "2",
                       "--out-dir", "t")
    assert code == 0
    assert [line.split(",")[0] for line in out.splitlines()] == [
        "set", "0HPDE", "1HPDE", "2HPDE", "3HPDE", "0HPFE", "1HPFE"]
    assert (tmp_path / "t" / "trend.png").read_bytes()[:4] == b"\x89PNG"
