"""
Hypothesis sources: JSON pool files, built-in fixtures, and a remote
chat-completion endpoint whose responses are cached on disk.

The cache is a directory of ``<sha256>.json`` files, one per request. Entries
are written once and never modified.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import httpx

from .dsl import Hypothesis, HypothesisSchemaError, ProgramError
from .fixtures import FIXTURES, fixture_records
from .grid import Connectivity, serialize_objects
from .tasks import TaskBundle

logger = logging.getLogger(__name__)

PROMPT_TEMPLATE_VERSION = "occamix-prompt-v1"
DEFAULT_N = 6
API_KEY_ENV = "OCCAMIX_API_KEY"


class ProviderError(Exception):
    pass


class PoolIOError(ProviderError):
    pass


class PoolSchemaError(ProviderError):
    pass


class ProgramParseError(ProviderError):
    def __init__(self, hypothesis_id: str, cause: Exception):
        self.hypothesis_id = hypothesis_id
        super().__init__(f"hypothesis {hypothesis_id!r}: {cause}")


class DuplicateId(ProviderError):
    pass


class EmptyPool(ProviderError):
    pass


class UnknownFixture(ProviderError):
    pass


class NetworkError(ProviderError):
    pass


class AuthError(ProviderError):
    pass


class AllRecordsMalformed(ProviderError):
    pass


@dataclass(frozen=True)
class FileSource:
    path: str


@dataclass(frozen=True)
class ScriptedSource:
    fixture_id: str


@dataclass(frozen=True)
class RemoteSource:
    endpoint_url: str
    model_name: str
    n: int = DEFAULT_N

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("remote source needs n >= 1")


HypothesisSource = FileSource | ScriptedSource | RemoteSource


def pool_from_records(records: Sequence[dict]) -> list[Hypothesis]:
    if len(records) == 0:
        raise EmptyPool("hypothesis pool is empty")
    pool, seen = [], set()
    for rec in records:
        try:
            h = Hypothesis.from_record(rec)
        except ProgramError as exc:
            raise ProgramParseError(getattr(exc, "hypothesis_id", "?"), exc) from exc
        except HypothesisSchemaError as exc:
            raise PoolSchemaError(str(exc)) from exc
        if h.id in seen:
            raise DuplicateId(f"duplicate hypothesis id {h.id!r}")
        seen.add(h.id)
        pool.append(h)
    return pool


def load_pool(path: str | Path) -> list[Hypothesis]:
    """Read a JSON array of hypothesis records."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PoolIOError(f"cannot read pool {path}: {exc}") from exc
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PoolSchemaError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise PoolSchemaError(f"{path}: expected a JSON array of hypothesis records")
    return pool_from_records(records)


def scripted_pool(fixture_id: str) -> list[Hypothesis]:
    if fixture_id not in FIXTURES:
        raise UnknownFixture(f"unknown fixture {fixture_id!r}; known: {', '.join(sorted(FIXTURES))}")
    return pool_from_records(fixture_records(fixture_id))


def pool_hash(pool: Sequence[Hypothesis]) -> str:
    """Content hash over the canonical records of a pool."""
    blob = json.dumps([h.to_record() for h in pool], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# prompt

_DSL_SUMMARY = """\
Programs are ';'-separated steps drawn from:
  translate(dx=INT, dy=INT)            dx right, dy down, in [-30, 30]
  duplicate_offset(dx=INT, dy=INT)     keep original, paint shifted copy
  replicate_vertical(direction=up|down|both, until=edge|blocked)
  move_to_center()
  rotate(quarter_turns=INT)            counter-clockwise
  reflect(axis=h|v)
  recolor(from=COLOR, to=COLOR)
  per_column(parity=even|odd, inner=STEP)
  per_object(inner=STEP, color=COLOR|any, min_size=INT, max_size=INT)
  fill_column()
Colours are 0-9, 0 is background. Columns are 0-indexed."""


def objects_text(task: TaskBundle, connectivity: Connectivity = Connectivity.FOUR) -> str:
    """Serialised objects of every training pair, the variable part of the prompt."""
    blocks = []
    for i, pair in enumerate(task.train, 1):
        blocks.append(f"## example {i} input\n{serialize_objects(pair.input, connectivity)}"
                      f"## example {i} output\n{serialize_objects(pair.output, connectivity)}")
    return "\n".join(blocks)


def build_prompt(objects: str, n: int) -> str:
    return (
        f"[{PROMPT_TEMPLATE_VERSION}]\n"
        "You are given input/output grid pairs described as objects.\n\n"
        + objects
        + f"\nPropose {n} different hypotheses for the transformation.\n"
        "Reply with only a JSON array. Each element must be an object with keys\n"
        '"id" (string), "description" (one sentence), "sub_hypotheses" (list of strings)\n'
        'and "program" (a program in the DSL below).\n\n'
        + _DSL_SUMMARY
    )


def cache_key(objects_text: str, model_name: str, n: int,
              template_version: str = PROMPT_TEMPLATE_VERSION) -> str:
    blob = json.dumps({"objects": objects_text, "template": template_version,
                       "model": model_name, "n": n}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ResponseCache:
    """Append-only on-disk cache keyed by request hash.

    Concurrent callers for the same key are serialised on a per-key lock so
    only one of them computes; the rest read the entry it wrote.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        try:
            entry = json.loads(self.path(key).read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        return entry["response"]

    def put(self, key: str, response: str, request: dict | None = None) -> None:
        target = self.path(key)
        if target.exists():
            return
        entry = {"key": key, "request": request or {}, "response": response,
                 "timestamp": time.time()}
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(entry, f, indent=2, sort_keys=True)
        os.replace(tmp, target)

    def _lock(self, key: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    def get_or_compute(self, key: str, compute: Callable[[], str], request: dict | None = None) -> str:
        hit = self.get(key)
        if hit is not None:
            return hit
        with self._lock(key):
            hit = self.get(key)
            if hit is not None:
                return hit
            response = compute()
            self.put(key, response, request)
            return response


def _post_chat(client: httpx.Client, source: RemoteSource, prompt: str, api_key: str | None,
               retries: int = 2) -> str:
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    body = {"model": source.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0}
    last: Exception | None = None
    for attempt in range(retries + 1):
        try:
            resp = client.post(source.endpoint_url, json=body, headers=headers)
        except httpx.HTTPError as exc:
            last = exc
            logger.warning("request to endpoint failed (attempt %d): %s", attempt + 1, type(exc).__name__)
            continue
        if resp.status_code in (401, 403):
            raise AuthError(f"endpoint rejected credentials (HTTP {resp.status_code})")
        if resp.status_code >= 500:
            last = NetworkError(f"HTTP {resp.status_code}")
            continue
        if resp.status_code != 200:
            raise NetworkError(f"endpoint returned HTTP {resp.status_code}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise NetworkError(f"unexpected response shape: {exc}") from exc
    raise NetworkError(f"endpoint unreachable after {retries + 1} attempts: {last}")


def _extract_json_array(text: str):
    text = text.strip()
    if text.startswith("```"):
        text = text.strip("`")
        text = text[text.find("\n") + 1:] if "\n" in text else text
    start, end = text.find("["), text.rfind("]")
    if start < 0 or end < start:
        raise AllRecordsMalformed("response contains no JSON array")
    try:
        data = json.loads(text[start:end + 1])
    except json.JSONDecodeError as exc:
        raise AllRecordsMalformed(f"response is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise AllRecordsMalformed("response is not a JSON array")
    return data


def parse_response(text: str) -> tuple[list[Hypothesis], list[str]]:
    """Parse model output into hypotheses, skipping malformed records.

    Returns ``(pool, warnings)``.
    """
    records = _extract_json_array(text)
    pool, warnings, seen = [], [], set()
    for i, rec in enumerate(records):
        try:
            h = Hypothesis.from_record(rec)
        except (ProgramError, HypothesisSchemaError) as exc:
            warnings.append(f"record {i} skipped: {exc}")
            continue
        if h.id in seen:
            warnings.append(f"record {i} skipped: duplicate id {h.id!r}")
            continue
        seen.add(h.id)
        pool.append(h)
    for w in warnings:
        logger.warning(w)
    if not pool:
        raise AllRecordsMalformed("no valid hypothesis records in response")
    return pool, warnings


def fetch_remote_pool(task: TaskBundle, source: RemoteSource, cache: ResponseCache,
                      client: httpx.Client | None = None, api_key: str | None = None,
                      connectivity: Connectivity = Connectivity.FOUR) -> list[Hypothesis]:
    """Ask a chat-completion endpoint for ``source.n`` hypotheses.

    The API key defaults to the ``OCCAMIX_API_KEY`` environment variable. A
    cache hit never touches the network.
    """
    objects = objects_text(task, connectivity)
    prompt = build_prompt(objects, source.n)
    key = cache_key(objects, source.model_name, source.n)
    if api_key is None:
        api_key = os.environ.get(API_KEY_ENV)

    def compute() -> str:
        own = client is None
        c = client or httpx.Client(timeout=60.0)
        try:
            return _post_chat(c, source, prompt, api_key)
        finally:
            if own:
                c.close()

    request = {"model": source.model_name, "n": source.n, "template": PROMPT_TEMPLATE_VERSION,
               "endpoint": source.endpoint_url}
    text = cache.get_or_compute(key, compute, request)
    pool, _ = parse_response(text)
    return pool


def resolve_pool(source: HypothesisSource, task: TaskBundle | None = None,
                 cache: ResponseCache | None = None, **kwargs) -> list[Hypothesis]:
    if isinstance(source, FileSource):
        return load_pool(source.path)
    if isinstance(source, ScriptedSource):
        return scripted_pool(source.fixture_id)
    if task is None or cache is None:
        raise ValueError("remote sources need a task and a cache")
    return fetch_remote_pool(task, source, cache, **kwargs)
