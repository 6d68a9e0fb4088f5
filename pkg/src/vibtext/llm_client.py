"""Query an OpenAI-compatible chat-completions endpoint with corpus records and score the replies."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import httpx

from . import evalkit
from .errors import EmptyInput, HttpStatus, InferenceError, MalformedResponse, Transport
from .promptgen import PromptRecord, Scheme

log = logging.getLogger(__name__)

API_KEY_ENV = "FDLLM_API_KEY"
RETRY_STATUS = {408, 425, 429, 500, 502, 503, 504}


@dataclass(frozen=True)
class InferenceConfig:
    endpoint_url: str
    model_name: str
    temperature: float = 0.0
    max_tokens: int = 32
    max_concurrency: int = 4
    timeout_s: float = 60.0
    max_attempts: int = 3
    backoff_s: tuple = (0.5, 1.0, 2.0)

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        if self.max_tokens < 1 or self.max_attempts < 1 or not self.timeout_s > 0:
            raise ValueError("max_tokens, max_attempts and timeout_s must be positive")

    @property
    def chat_url(self) -> str:
        url = self.endpoint_url.rstrip("/")
        if url.endswith("/chat/completions"):
            return url
        if url.endswith("/v1"):
            return url + "/chat/completions"
        return url + "/v1/chat/completions"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["backoff_s"] = list(self.backoff_s)
        return d


@dataclass(frozen=True)
class InferenceResult:
    record_id: str
    text: Optional[str] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _headers() -> dict:
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(API_KEY_ENV)
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


def request_body(cfg: InferenceConfig, record: PromptRecord) -> dict:
    return {
        "model": cfg.model_name,
        "messages": [{"role": "user", "content": record.prompt}],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }


def _content(resp: httpx.Response) -> str:
    try:
        text = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"no choices[0].message.content in reply ({type(exc).__name__})") from None
    if not isinstance(text, str):
        raise MalformedResponse("message content is not a string")
    return text


def infer_one(cfg: InferenceConfig, record: PromptRecord, client: Optional[httpx.Client] = None,
              sleep: Callable[[float], None] = time.sleep) -> str:
    """Send one record as a single user message and return the reply text verbatim.

    Transport failures, timeouts and 408/425/429/5xx replies are retried up to
    ``max_attempts`` times with the configured backoff; other statuses fail at once.
    """
    own = client is None
    if own:
        client = httpx.Client(timeout=cfg.timeout_s)
    body = request_body(cfg, record)
    failure: InferenceError = Transport("no attempt made")
    try:
        for attempt in range(cfg.max_attempts):
            if attempt:
                sleep(cfg.backoff_s[min(attempt - 1, len(cfg.backoff_s) - 1)] if cfg.backoff_s else 0.0)
            try:
                resp = client.post(cfg.chat_url, json=body, headers=_headers(), timeout=cfg.timeout_s)
            except httpx.TransportError as exc:
                failure = Transport(f"{type(exc).__name__}: {exc}")
                log.debug("record %s attempt %d: %s", record.record_id, attempt + 1, failure)
                continue
            if resp.status_code == 200:
                return _content(resp)
            failure = HttpStatus(resp.status_code, resp.text)
            if resp.status_code not in RETRY_STATUS:
                raise failure
            log.debug("record %s attempt %d: HTTP %d", record.record_id, attempt + 1, resp.status_code)
        raise failure
    finally:
        if own:
            client.close()


def prompt_hash(record: PromptRecord) -> str:
    return hashlib.sha256(record.prompt.encode("utf-8")).hexdigest()


class ResponseCache:
    """Append-only JSONL cache of reply texts keyed by (model, record id, prompt hash)."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._data: dict[str, str] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    entry = json.loads(line)
                    self._data[entry["key"]] = entry["text"]

    @staticmethod
    def key(model: str, record: PromptRecord) -> str:
        return f"{model}|{record.record_id}|{prompt_hash(record)}"

    def get(self, model: str, record: PromptRecord) -> Optional[str]:
        with self._lock:
            return self._data.get(self.key(model, record))

    def put(self, model: str, record: PromptRecord, text: str) -> None:
        k = self.key(model, record)
        with self._lock:
            self._data[k] = text
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"key": k, "text": text}, ensure_ascii=False) + "\n")

    def __len__(self):
        return len(self._data)


def infer_batch(cfg: InferenceConfig, records: Sequence[PromptRecord], client: Optional[httpx.Client] = None,
                cache: Optional[ResponseCache] = None, sleep: Callable[[float], None] = time.sleep) -> list[InferenceResult]:
    """Run every record with at most ``max_concurrency`` requests in flight; output follows input order."""
    records = list(records)
    if not records:
        raise EmptyInput("no records to send")
    own = client is None
    if own:
        limits = httpx.Limits(max_connections=cfg.max_concurrency, max_keepalive_connections=cfg.max_concurrency)
        client = httpx.Client(timeout=cfg.timeout_s, limits=limits)

    def run(record: PromptRecord) -> InferenceResult:
        if cache is not None:
            hit = cache.get(cfg.model_name, record)
            if hit is not None:
                return InferenceResult(record.record_id, hit)
        try:
            text = infer_one(cfg, record, client, sleep)
        except InferenceError as exc:
            return InferenceResult(record.record_id, error=f"{type(exc).__name__}: {exc}")
        if cache is not None:
            cache.put(cfg.model_name, record, text)
        return InferenceResult(record.record_id, text)

    try:
        with ThreadPoolExecutor(max_workers=cfg.max_concurrency) as pool:
            return list(pool.map(run, records))
    finally:
        if own:
            client.close()


def score_results(records: Sequence[PromptRecord], results: Sequence[InferenceResult], scheme=None):
    scheme = Scheme.parse(scheme or records[0].meta["scheme"])
    pairs, rows = [], []
    for rec, res in zip(records, results):
        pred = evalkit.map_prediction(res.text, scheme) if res.ok else evalkit.UNMAPPED
        truth = evalkit.map_prediction(rec.output, scheme) if "label" not in rec.meta else rec.label
        pairs.append((truth, pred))
        rows.append({"record_id": rec.record_id, "truth": str(truth), "prediction": str(pred),
                     "text": res.text, "error": res.error})
    report, _ = evalkit.score(pairs)
    report.extra.update({"scheme": scheme.value, "error_count": sum(1 for r in results if not r.ok)})
    return report, rows


def evaluate_endpoint(cfg: InferenceConfig, eval_set: Sequence[PromptRecord], scheme=None, out_dir=None,
                      client: Optional[httpx.Client] = None, cache: Optional[ResponseCache] = None,
                      sleep: Callable[[float], None] = time.sleep,
                      report_name: str = "report.json") -> evalkit.EvalReport:
    """infer_batch, then map and score; raw replies are written next to the report when ``out_dir`` is set."""
    eval_set = list(eval_set)
    if not eval_set:
        raise EmptyInput("empty evaluation set")
    results = infer_batch(cfg, eval_set, client, cache, sleep)
    report, rows = score_results(eval_set, results, scheme)
    report.extra.update({"model": cfg.model_name, "endpoint": cfg.chat_url})
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "responses.jsonl", "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        report.to_json(out / report_name)
        report.confusion.to_csv(out / "confusion_matrix.csv")
    return report
