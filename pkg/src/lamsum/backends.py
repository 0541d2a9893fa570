"""LLM backends: offline mocks for tests and an OpenAI-compatible HTTP client.

A backend is anything with ``complete(request) -> str``. ``LlmClient`` wraps
a backend with retries, exponential backoff, an in-flight cap and a shared
minimum interval between requests.
"""

from __future__ import annotations

import hashlib
import logging
import os
import random
import threading
import time
from dataclasses import dataclass
from typing import Callable, Protocol

import httpx

from .prompts import LlmRequest, parse_prompt

logger = logging.getLogger(__name__)

API_KEY_ENV = "LAMSUM_API_KEY"


class BackendError(RuntimeError):
    code = "backend_error"
    retryable = False


class AuthError(BackendError):
    code = "auth_error"


class RateLimitError(BackendError):
    code = "rate_limited"
    retryable = True


class LlmTimeoutError(BackendError):
    code = "timeout"
    retryable = True


class TransientError(BackendError):
    code = "transient"
    retryable = True


class RetriesExhausted(BackendError):
    def __init__(self, last: BackendError, attempts: int):
        super().__init__(f"{last.code} after {attempts} attempts: {last}")
        self.last = last
        self.code = f"{last.code}_exhausted"


class Backend(Protocol):
    name: str

    def complete(self, request: LlmRequest) -> str: ...


class MockBackend:
    """Deterministic offline backend that echoes sentences from the prompt.

    Strategies, for approval prompts (size q) and ranked prompts:

    * ``first-q``: first q lines / input order
    * ``last-q``: last q lines / reversed order
    * ``random-q``: q random lines / random order, seeded by prompt and seed
    * ``reverse-rank``: last q lines reversed / reversed order
    * ``identity-rank``: first q lines / input order
    """

    STRATEGIES = ("first-q", "last-q", "random-q", "reverse-rank", "identity-rank")

    def __init__(self, strategy: str = "first-q", seed: int = 0):
        if strategy not in self.STRATEGIES:
            raise ValueError(f"unknown mock strategy {strategy!r}; choose from {self.STRATEGIES}")
        self.strategy = strategy
        self.seed = seed
        self.name = f"mock:{strategy}"

    def select(self, sentences: list[str], size: int | None) -> list[str]:
        n = len(sentences) if size is None else min(size, len(sentences))
        st = self.strategy
        if st in ("first-q", "identity-rank"):
            return sentences[:n]
        if st == "last-q":
            return sentences[len(sentences) - n:] if size is not None else sentences[::-1]
        if st == "reverse-rank":
            return sentences[::-1][:n]
        digest = hashlib.sha256(f"{self.seed}\x00".encode() + "\n".join(sentences).encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        return rng.sample(sentences, n)

    def complete(self, request: LlmRequest) -> str:
        sentences, size = parse_prompt(request.prompt_text)
        if request.kind == "ranked":
            size = None
        picked = self.select(sentences, size)
        return "\n".join(f"{i}. {s}" for i, s in enumerate(picked, start=1))


class FunctionBackend:
    """Adapter turning ``fn(sentences, size, request) -> list[str] | str`` into a backend."""

    def __init__(self, fn: Callable, name: str = "function"):
        self.fn = fn
        self.name = name

    def complete(self, request: LlmRequest) -> str:
        sentences, size = parse_prompt(request.prompt_text)
        if request.kind == "ranked":
            size = None
        out = self.fn(sentences, size, request)
        return out if isinstance(out, str) else "\n".join(out)


class HttpBackend:
    """OpenAI-compatible ``/chat/completions`` endpoint."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.name = f"http:{model}"
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def payload(self, request: LlmRequest) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt_text}],
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_output_tokens,
        }

    def complete(self, request: LlmRequest) -> str:
        if not self.api_key:
            raise AuthError(f"no API key; set {API_KEY_ENV}")
        try:
            resp = self._client.post(
                f"{self.endpoint}/chat/completions",
                json=self.payload(request),
                headers={"Authorization": f"Bearer {self.api_key}"},
            )
        except httpx.TimeoutException as exc:
            raise LlmTimeoutError(str(exc)) from exc
        except httpx.TransportError as exc:
            raise TransientError(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code == 429:
            raise RateLimitError(f"HTTP 429: {resp.text[:200]}")
        if resp.status_code == 408:
            raise LlmTimeoutError("HTTP 408")
        if resp.status_code >= 500:
            raise TransientError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected response body: {resp.text[:200]}") from exc

    def close(self) -> None:
        self._client.close()


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 6
    base_delay: float = 1.0
    max_delay: float = 60.0

    def delay(self, attempt: int) -> float:
        return min(self.base_delay * 2**attempt, self.max_delay)


class LlmClient:
    """Thread-safe wrapper adding retries, an in-flight cap and request pacing."""

    def __init__(
        self,
        backend: Backend,
        retry: RetryPolicy | None = None,
        max_in_flight: int = 4,
        min_interval: float = 0.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.backend = backend
        self.retry = retry or RetryPolicy()
        self.min_interval = min_interval
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._pace_lock = threading.Lock()
        self._next_slot = 0.0
        self._count_lock = threading.Lock()
        self.n_calls = 0
        self.n_retries = 0

    def _pace(self) -> None:
        if self.min_interval <= 0:
            return
        with self._pace_lock:
            now = time.monotonic()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + self.min_interval
        if wait > 0:
            self._sleep(wait)

    def complete(self, request: LlmRequest) -> str:
        last: BackendError | None = None
        for attempt in range(self.retry.max_attempts):
            self._pace()
            with self._slots:
                with self._count_lock:
                    self.n_calls += 1
                try:
                    return self.backend.complete(request)
                except BackendError as exc:
                    if not exc.retryable:
                        raise
                    last = exc
            with self._count_lock:
                self.n_retries += 1
            delay = self.retry.delay(attempt)
            logger.warning("%s (attempt %d), retrying in %.1fs", last.code, attempt + 1, delay)
            self._sleep(delay)
        raise RetriesExhausted(last, self.retry.max_attempts)


def llm_complete(request: LlmRequest, backend: Backend | LlmClient) -> str:
    client = backend if isinstance(backend, LlmClient) else LlmClient(backend)
    return client.complete(request)


def make_backend(spec: str, endpoint: str | None = None, seed: int = 0) -> Backend:
    """Build a backend from ``mock:<strategy>`` or ``http:<model>``."""
    kind, _, arg = spec.partition(":")
    if kind == "mock":
        return MockBackend(arg or "first-q", seed=seed)
    if kind == "http":
        if not endpoint:
            raise ValueError("http backend needs an endpoint URL")
        if not arg:
            raise ValueError("http backend needs a model name, e.g. http:my-model")
        return HttpBackend(endpoint, arg)
    raise ValueError(f"unknown backend {spec!r}; use mock:<strategy> or http:<model>")
