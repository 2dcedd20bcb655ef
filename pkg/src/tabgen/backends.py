"""Pluggable text-generation and embedding providers.

Four generation backends share one contract: a remote HTTP completion
service, a gold-table oracle for offline testing, a record/replay pair
for deterministic CI, and a caching wrapper. Batch dispatch fans out up
to a configured concurrency limit and realigns responses by index, so
callers never observe completion order.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from abc import ABC, abstractmethod
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import requests

from tabgen.prompts import SEP_TOKEN, formulate_question
from tabgen.table import NEWLINE_TOKEN, Orientation, Table, serialize_flat


class Decoding(str, Enum):
    GREEDY = "greedy"


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_new_tokens: int = 64
    decoding: Decoding = Decoding.GREEDY

    def __post_init__(self):
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")

    def digest(self) -> str:
        payload = json.dumps(
            {
                "prompt": self.prompt,
                "max_new_tokens": self.max_new_tokens,
                "decoding": self.decoding.value,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class GenerationResponse:
    text: str
    prompt_tokens: int | None = None
    completion_tokens: int | None = None
    latency_ms: float | None = None


@dataclass(frozen=True)
class EmbeddingResponse:
    vectors: tuple[tuple[float, ...], ...]
    mode: str = "text"  # "text" | "token"

    def __post_init__(self):
        if not self.vectors:
            raise ValueError("EmbeddingResponse requires at least one vector")
        dims = {len(v) for v in self.vectors}
        if len(dims) != 1 or 0 in dims:
            raise ValueError(f"vectors must share one dimension >= 1, got dims {sorted(dims)}")


class BackendError(Exception):
    retryable = False


class BackendTimeout(BackendError):
    retryable = True


class RateLimited(BackendError):
    retryable = True

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class Unreachable(BackendError):
    retryable = True


class MalformedResponse(BackendError):
    retryable = False


@dataclass
class BackendConfig:
    """Configuration for backend construction; file keys mirror field names.

    The auth token is read from the environment variable named by
    `auth_env`, never from flags or files.
    """

    kind: str = "mock-oracle"  # mock-oracle | http | replay
    base_url: str | None = None
    completion_path: str = "/v1/completions"
    embeddings_path: str = "/v1/embeddings"
    model: str | None = None
    auth_env: str | None = None
    timeout_ms: int = 30000
    retry_cap: int = 3
    backoff_s: float = 0.25
    concurrency: int = 8
    cache: bool = False
    fixture_dir: str | None = None
    max_input_tokens: int = 2048
    headers_max_new_tokens: int = 256
    answer_max_new_tokens: int = 64
    baseline_max_new_tokens: int = 512

    @classmethod
    def from_dict(cls, data: dict) -> "BackendConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "BackendConfig":
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        return cls.from_dict(data)

    def merged(self, **overrides) -> "BackendConfig":
        provided = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **provided)


class GenerationBackend(ABC):
    """Base generation provider: retry policy plus the concurrent batch contract."""

    def __init__(self, *, concurrency: int = 8, retry_cap: int = 3, backoff_s: float = 0.25):
        if concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        if retry_cap < 1:
            raise ValueError("retry_cap must be >= 1")
        self.concurrency = concurrency
        self.retry_cap = retry_cap
        self.backoff_s = backoff_s

    @abstractmethod
    def _generate_once(self, request: GenerationRequest) -> GenerationResponse:
        ...

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        """Run one request with bounded exponential-backoff retries.

        Retryable failures are retried up to `retry_cap` total attempts;
        a rate limit that names a retry-after delay is honored.
        """
        for attempt in range(self.retry_cap):
            try:
                return self._generate_once(request)
            except BackendError as err:
                last_attempt = attempt == self.retry_cap - 1
                if not err.retryable or last_attempt:
                    raise
                delay = self.backoff_s * (2**attempt)
                if isinstance(err, RateLimited) and err.retry_after is not None:
                    delay = err.retry_after
                time.sleep(delay)
        raise AssertionError("unreachable")

    def generate_batch(
        self, requests_: Sequence[GenerationRequest]
    ) -> list[GenerationResponse | BackendError]:
        """Dispatch many requests, returning results aligned by index.

        Failures are reported per index instead of aborting the batch;
        only a batch where every request failed as Unreachable raises.
        """
        if not requests_:
            raise ValueError("generate_batch requires a non-empty request list")

        def call(request: GenerationRequest) -> GenerationResponse | BackendError:
            try:
                return self.generate(request)
            except BackendError as err:
                return err

        if self.concurrency == 1 or len(requests_) == 1:
            results = [call(r) for r in requests_]
        else:
            workers = min(self.concurrency, len(requests_))
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(call, requests_))

        if all(isinstance(r, Unreachable) for r in results):
            raise Unreachable(f"all {len(results)} batched requests failed as unreachable")
        return results


class EmbeddingBackend(ABC):
    @abstractmethod
    def embed(self, texts: Sequence[str], mode: str = "text") -> EmbeddingResponse:
        ...


class MockEmbedder(EmbeddingBackend):
    """Hash-seeded unit vectors: identical inputs embed identically, forever.

    Components are non-negative so cosine similarities stay in [0, 1].
    """

    def __init__(self, dim: int = 32):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim

    def _vector(self, text: str) -> tuple[float, ...]:
        seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")
        rng = np.random.default_rng(seed)
        raw = rng.random(self.dim) + 1e-9
        return tuple((raw / np.linalg.norm(raw)).tolist())

    def embed(self, texts: Sequence[str], mode: str = "text") -> EmbeddingResponse:
        if not texts:
            raise ValueError("embed requires a non-empty input list")
        return EmbeddingResponse(vectors=tuple(self._vector(t) for t in texts), mode=mode)


class HttpBackend(GenerationBackend, EmbeddingBackend):
    """Client for a hosted completion/embeddings service speaking the common JSON shape.

    POSTs {model, prompt, max_tokens, temperature: 0} and reads the
    generated text from choices[0]; endpoint paths, model name, and the
    auth env var are all configuration.
    """

    def __init__(self, config: BackendConfig):
        super().__init__(
            concurrency=config.concurrency,
            retry_cap=config.retry_cap,
            backoff_s=config.backoff_s,
        )
        if not config.base_url:
            raise ValueError("http backend requires base_url")
        self.config = config
        self._token = None
        if config.auth_env:
            self._token = os.environ.get(config.auth_env)
            if not self._token:
                raise ValueError(
                    f"auth environment variable {config.auth_env} is not set"
                )

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self._token:
            headers["Authorization"] = f"Bearer {self._token}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        url = self.config.base_url.rstrip("/") + path
        try:
            response = requests.post(
                url,
                json=payload,
                headers=self._headers(),
                timeout=self.config.timeout_ms / 1000.0,
            )
        except requests.Timeout as err:
            raise BackendTimeout(f"timeout calling {url}") from err
        except requests.ConnectionError as err:
            raise Unreachable(f"cannot reach {url}") from err

        if response.status_code == 429:
            retry_after = response.headers.get("Retry-After")
            raise RateLimited(
                "rate limited",
                retry_after=float(retry_after) if retry_after else None,
            )
        if response.status_code >= 500:
            raise Unreachable(f"server error {response.status_code} from {url}")
        if response.status_code >= 400:
            raise MalformedResponse(f"request rejected ({response.status_code}): {response.text[:200]}")
        try:
            return response.json()
        except ValueError as err:
            raise MalformedResponse("response body is not JSON") from err

    def _generate_once(self, request: GenerationRequest) -> GenerationResponse:
        payload = {
            "model": self.config.model,
            "prompt": request.prompt,
            "max_tokens": request.max_new_tokens,
            "temperature": 0,
        }
        started = time.monotonic()
        data = self._post(self.config.completion_path, payload)
        latency_ms = (time.monotonic() - started) * 1000.0
        try:
            choice = data["choices"][0]
            text = choice["text"] if "text" in choice else choice["message"]["content"]
        except (KeyError, IndexError, TypeError) as err:
            raise MalformedResponse(f"unexpected completion payload: {data!r:.200}") from err
        if not isinstance(text, str):
            raise MalformedResponse("generated text is not a string")
        usage = data.get("usage") or {}
        return GenerationResponse(
            text=text,
            prompt_tokens=usage.get("prompt_tokens"),
            completion_tokens=usage.get("completion_tokens"),
            latency_ms=latency_ms,
        )

    def embed(self, texts: Sequence[str], mode: str = "text") -> EmbeddingResponse:
        if not texts:
            raise ValueError("embed requires a non-empty input list")
        data = self._post(self.config.embeddings_path, {"model": self.config.model, "input": list(texts)})
        try:
            vectors = tuple(tuple(float(x) for x in item["embedding"]) for item in data["data"])
        except (KeyError, TypeError, ValueError) as err:
            raise MalformedResponse(f"unexpected embeddings payload: {data!r:.200}") from err
        if len(vectors) != len(texts):
            raise MalformedResponse("embedding count does not match input count")
        return EmbeddingResponse(vectors=vectors, mode=mode)


class MockOracleBackend(GenerationBackend):
    """Answers prompts from gold tables, enabling offline end-to-end runs.

    Structure prompts get the gold header sequence, cell questions get the
    gold cell (or "unknown" for an absent cell), and baseline prompts get
    the gold table in flat format. Prompts are matched to samples by the
    passage text embedded in them.
    """

    def __init__(self, samples: Iterable[tuple[str, Table]], **kwargs):
        super().__init__(**kwargs)
        self._samples = [(passage, table) for passage, table in samples]
        if not self._samples:
            raise ValueError("mock oracle needs at least one (passage, gold table) pair")

    def _lookup(self, prompt: str) -> Table:
        for passage, table in self._samples:
            if passage[:120] in prompt:
                return table
        if len(self._samples) == 1:
            return self._samples[0][1]
        raise MalformedResponse("prompt does not mention any registered passage")

    @staticmethod
    def _structure_answer(table: Table) -> str:
        if table.orientation is Orientation.ATTRIBUTE_VALUE:
            return " <SEP> ".join(header for header, _ in table.rows)
        rows = " <SEP> ".join(table.row_headers)
        cols = " <SEP> ".join(table.col_headers)
        return f"{rows} <ROWCOL> {cols}"

    @staticmethod
    def _answer_question(table: Table, prompt: str) -> str:
        candidates: list[tuple[str, str | None]] = []
        if table.orientation is Orientation.ATTRIBUTE_VALUE:
            for header, value in table.rows:
                candidates.append((formulate_question(None, header), value))
        else:
            for r, row_header in enumerate(table.row_headers):
                for c, col_header in enumerate(table.col_headers):
                    value = table.cells[r][c]
                    for hint in (True, False):
                        candidates.append((formulate_question(row_header, col_header, hint), value))
        matches = [(q, v) for q, v in candidates if q in prompt]
        if not matches:
            return "unknown"
        _, value = max(matches, key=lambda pair: len(pair[0]))
        return value if value is not None else "unknown"

    def _generate_once(self, request: GenerationRequest) -> GenerationResponse:
        table = self._lookup(request.prompt)
        if SEP_TOKEN in request.prompt:
            text = self._structure_answer(table)
        elif NEWLINE_TOKEN in request.prompt:
            text = serialize_flat(table)
        else:
            text = self._answer_question(table, request.prompt)
        return GenerationResponse(text=text, latency_ms=0.0)


class ReplayBackend(GenerationBackend):
    """Serves responses recorded on disk; a missing fixture fails loudly.

    An optional latency function simulates slow upstream completion
    without affecting what is returned.
    """

    def __init__(
        self,
        fixture_dir: str | Path,
        latency_fn: Callable[[GenerationRequest], float] | None = None,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.fixture_dir = Path(fixture_dir)
        self.latency_fn = latency_fn

    def _generate_once(self, request: GenerationRequest) -> GenerationResponse:
        path = self.fixture_dir / f"{request.digest()}.json"
        if not path.exists():
            raise MalformedResponse(f"no recorded fixture for request digest {request.digest()}")
        try:
            data = json.loads(path.read_text("utf-8"))
            text = data["response"]["text"]
        except (ValueError, KeyError, TypeError) as err:
            raise MalformedResponse(f"fixture {path.name} is unreadable") from err
        if not isinstance(text, str):
            raise MalformedResponse(f"fixture {path.name} has no response text")
        delay = self.latency_fn(request) if self.latency_fn else 0.0
        if delay > 0:
            time.sleep(delay)
        return GenerationResponse(text=text, latency_ms=delay * 1000.0)


class RecordingBackend(GenerationBackend):
    """Wraps a live backend and persists every response as a replay fixture."""

    def __init__(self, inner: GenerationBackend, fixture_dir: str | Path):
        super().__init__(
            concurrency=inner.concurrency,
            retry_cap=inner.retry_cap,
            backoff_s=inner.backoff_s,
        )
        self.inner = inner
        self.fixture_dir = Path(fixture_dir)
        self.fixture_dir.mkdir(parents=True, exist_ok=True)

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        # The inner backend already retries; no second retry layer here.
        return self._generate_once(request)

    def _generate_once(self, request: GenerationRequest) -> GenerationResponse:
        response = self.inner.generate(request)
        record = {
            "request": {
                "prompt": request.prompt,
                "max_new_tokens": request.max_new_tokens,
                "decoding": request.decoding.value,
            },
            "response": {"text": response.text},
        }
        path = self.fixture_dir / f"{request.digest()}.json"
        path.write_text(json.dumps(record, sort_keys=True, ensure_ascii=False, indent=2), "utf-8")
        return response


class CachedBackend(GenerationBackend):
    """In-memory request cache; identical requests hit upstream exactly once.

    Concurrent misses on the same key share one in-flight upstream call,
    so batch semantics are unchanged with the cache on or off.
    """

    def __init__(self, inner: GenerationBackend):
        super().__init__(
            concurrency=inner.concurrency,
            retry_cap=inner.retry_cap,
            backoff_s=inner.backoff_s,
        )
        self.inner = inner
        self._lock = threading.Lock()
        self._futures: dict[str, Future] = {}
        self.upstream_calls = 0

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        return self._generate_once(request)

    def _generate_once(self, request: GenerationRequest) -> GenerationResponse:
        key = request.digest()
        with self._lock:
            future = self._futures.get(key)
            if future is None:
                future = Future()
                self._futures[key] = future
                owner = True
            else:
                owner = False
        if not owner:
            return future.result()

        try:
            response = self.inner.generate(request)
        except BaseException as err:
            with self._lock:
                del self._futures[key]  # failed calls are not cached
            future.set_exception(err)
            raise
        with self._lock:
            self.upstream_calls += 1
        future.set_result(response)
        return response
