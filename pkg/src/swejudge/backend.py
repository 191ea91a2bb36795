"""Judge backends: live OpenAI-compatible endpoint, scripted mock, and cache replay.

Every backend consults a content-addressed response cache before doing any
work, so a run against a warmed cache performs no live calls.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

import httpx

from .core import EvalSample, ScoreScale
from .strategies.prompts import (
    ENSEMBLE_STRATEGIES,
    Conversation,
    StrategyId,
    to_messages,
)

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4o-mini-2024-07-18"
DEFAULT_ENDPOINT = "https://api.openai.com/v1"
API_KEY_ENV = "SWEJ_API_KEY"
BACKEND_KINDS = ("live", "mock", "replay")


class BackendError(RuntimeError):
    """Base class for failures talking to the judge model."""


class AuthenticationError(BackendError):
    pass


class BackendTimeout(BackendError):
    pass


class MalformedResponse(BackendError):
    pass


class ReplayMiss(BackendError):
    pass


class UnscriptedCall(BackendError):
    pass


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "live"
    model_name: str = DEFAULT_MODEL
    temperature: float = 0.0
    endpoint_url: str = DEFAULT_ENDPOINT
    max_concurrency: int = 4
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 1.0
    cache_dir: Path | None = None

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"backend kind must be one of {BACKEND_KINDS}, got {self.kind!r}")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.kind == "replay" and self.cache_dir is None:
            raise ValueError("replay backend needs a cache directory")


@dataclass(frozen=True)
class CallContext:
    """Who is asking: used for mock lookup and error messages, never for cache keys."""

    sample_id: str = "?"
    strategy: StrategyId | None = None
    phase: int = 1
    attempt: int = 0

    def describe(self) -> str:
        strategy = self.strategy.value if self.strategy else "?"
        extra = f", retry {self.attempt}" if self.attempt else ""
        return f"sample {self.sample_id!r}, {strategy} phase {self.phase}{extra}"


def canonical_bytes(model_name: str, temperature: float, conversation: Conversation) -> bytes:
    """Length-prefixed serialization: ``<len>:<utf-8 bytes>`` fields, newline separated."""

    def field_(text: str) -> bytes:
        raw = text.encode("utf-8")
        return str(len(raw)).encode("ascii") + b":" + raw + b"\n"

    parts = [b"swej-v1\n", field_(model_name), field_(repr(float(temperature))),
             field_(str(len(conversation)))]
    for turn in conversation:
        parts.append(field_(turn.role))
        parts.append(field_(turn.content))
    return b"".join(parts)


def cache_key(model_name: str, temperature: float, conversation: Conversation) -> str:
    return hashlib.sha256(canonical_bytes(model_name, temperature, conversation)).hexdigest()


class MemoryCache:
    def __init__(self):
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> str | None:
        with self._lock:
            return self._entries.get(key)

    def put(self, key: str, reply: str, meta: Mapping | None = None) -> None:
        with self._lock:
            self._entries[key] = reply

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None

    def __len__(self) -> int:
        return len(self._entries)


class DiskCache:
    """``<root>/<key[:2]>/<key>.txt`` holds the reply; ``<key>.meta`` a JSON sidecar."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.txt"

    def get(self, key: str) -> str | None:
        try:
            return self.path(key).read_bytes().decode("utf-8")
        except FileNotFoundError:
            return None

    def __contains__(self, key: str) -> bool:
        return self.path(key).is_file()

    def _atomic_write(self, target: Path, data: bytes) -> None:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-", suffix=target.suffix)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, target)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    def put(self, key: str, reply: str, meta: Mapping | None = None) -> None:
        target = self.path(key)
        self._atomic_write(target, reply.encode("utf-8"))
        if meta is not None:
            sidecar = json.dumps(dict(meta), indent=2, sort_keys=True).encode("utf-8")
            self._atomic_write(target.with_suffix(".meta"), sidecar)

    def keys(self) -> Iterable[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.stem for p in self.root.glob("??/*.txt"))

    def __len__(self) -> int:
        return sum(1 for _ in self.keys())


@dataclass
class CallStats:
    live_calls: int = 0
    cache_hits: int = 0
    prompt_chars: int = 0
    reply_chars: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, *, live: bool, prompt_chars: int, reply_chars: int) -> None:
        with self._lock:
            if live:
                self.live_calls += 1
            else:
                self.cache_hits += 1
            self.prompt_chars += prompt_chars
            self.reply_chars += reply_chars

    def to_dict(self) -> dict:
        with self._lock:
            return {
                "live_calls": self.live_calls,
                "cache_hits": self.cache_hits,
                "prompt_chars": self.prompt_chars,
                "reply_chars": self.reply_chars,
            }


class MockScript:
    """Scripted replies keyed by ``(sample_id, strategy, phase)``.

    Retries of a phase receive the same scripted reply, as a deterministic
    judge would give.
    """

    def __init__(self, replies: Mapping[tuple[str, str, int], str] | None = None):
        self.replies: dict[tuple[str, str, int], str] = {}
        for (sid, strategy, phase), reply in (replies or {}).items():
            self.add(sid, strategy, phase, reply)

    def add(self, sample_id: str, strategy: str | StrategyId, phase: int, reply: str) -> None:
        self.replies[(sample_id, StrategyId(strategy).value, int(phase))] = reply

    def lookup(self, context: CallContext) -> str:
        strategy = context.strategy.value if context.strategy else "?"
        try:
            return self.replies[(context.sample_id, strategy, context.phase)]
        except KeyError:
            raise UnscriptedCall(f"no scripted reply for {context.describe()}") from None

    def to_json(self) -> list[dict]:
        return [
            {"sample_id": sid, "strategy": strategy, "phase": phase, "reply": reply}
            for (sid, strategy, phase), reply in sorted(self.replies.items())
        ]

    @classmethod
    def from_json(cls, entries: list[dict]) -> "MockScript":
        script = cls()
        for entry in entries:
            script.add(entry["sample_id"], entry["strategy"], entry["phase"], entry["reply"])
        return script

    @classmethod
    def load(cls, path: str | Path) -> "MockScript":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def mock_judge(conversation: Conversation, script: MockScript, context: CallContext) -> str:
    return script.lookup(context)


def rescale_to_100(score: float, scale: ScoreScale) -> float:
    return (score - scale.min) / (scale.max - scale.min) * 100.0


def render_number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def perfect_judge_script(
    samples: Iterable[EvalSample],
    scale: ScoreScale,
    strategies: Iterable[StrategyId] = (StrategyId.P0, *ENSEMBLE_STRATEGIES),
) -> MockScript:
    """Every variant answers with the sample's ground truth rescaled to 0-100.

    Unannotated samples get the midpoint score 50.
    """
    script = MockScript()
    for sample in samples:
        raw = 50.0 if sample.human_score is None else rescale_to_100(sample.human_score, scale)
        final = f"Score: {render_number(raw)}"
        for strategy in strategies:
            strategy = StrategyId(strategy)
            if strategy is StrategyId.P2:
                script.add(sample.id, strategy, 1, final)
                script.add(sample.id, strategy, 2, final)
            elif strategy is StrategyId.P4:
                script.add(sample.id, strategy, 1, f"Tests for {sample.id}.")
                script.add(sample.id, strategy, 2, final)
            elif strategy is StrategyId.P5:
                script.add(sample.id, strategy, 1, f"Properties of {sample.id}.")
                script.add(sample.id, strategy, 2, final)
            else:
                script.add(sample.id, strategy, 1, final)
    return script


_TRANSIENT_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


class JudgeBackend:
    """Executes conversations against the configured judge.

    ``client`` may be any ``httpx.Client``; tests pass one built on
    ``httpx.MockTransport``.
    """

    def __init__(
        self,
        config: BackendConfig,
        *,
        script: MockScript | None = None,
        cache: DiskCache | MemoryCache | None = None,
        client: httpx.Client | None = None,
        api_key: str | None = None,
    ):
        self.config = config
        if config.kind == "mock" and script is None:
            raise ValueError("mock backend needs a MockScript")
        self.script = script
        if cache is None:
            cache = DiskCache(config.cache_dir) if config.cache_dir is not None else MemoryCache()
        self.cache = cache
        self._client = client
        self._api_key = api_key
        self.stats = CallStats()
        self._slots = threading.BoundedSemaphore(config.max_concurrency)
        self._key_locks: dict[str, threading.Lock] = {}
        self._key_locks_guard = threading.Lock()

    def __deepcopy__(self, memo):
        # a backend is a shared resource handle (cache, connection pool, counters);
        # sklearn.clone must not duplicate it
        return self

    def _lock_for(self, key: str) -> threading.Lock:
        with self._key_locks_guard:
            return self._key_locks.setdefault(key, threading.Lock())

    def key(self, conversation: Conversation) -> str:
        return cache_key(self.config.model_name, self.config.temperature, conversation)

    def complete(self, conversation: Conversation, context: CallContext | None = None) -> str:
        context = context or CallContext()
        key = self.key(conversation)
        prompt_chars = sum(len(t.content) for t in conversation)
        # one in-flight request per key, so concurrent duplicates become cache hits
        with self._lock_for(key):
            cached = self.cache.get(key)
            if cached is not None:
                self.stats.record(live=False, prompt_chars=prompt_chars, reply_chars=len(cached))
                return cached
            if self.config.kind == "replay":
                raise ReplayMiss(f"replay cache has no entry {key} ({context.describe()})")
            if self.config.kind == "mock":
                reply = mock_judge(conversation, self.script, context)
            else:
                with self._slots:
                    reply = self._post(conversation, context)
            self.cache.put(key, reply, {
                "model": self.config.model_name,
                "temperature": self.config.temperature,
                "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                "prompt_chars": prompt_chars,
                "reply_chars": len(reply),
                "source": self.config.kind,
            })
            self.stats.record(live=True, prompt_chars=prompt_chars, reply_chars=len(reply))
            return reply

    def _credential(self, context: CallContext) -> str:
        key = self._api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise AuthenticationError(f"{API_KEY_ENV} is not set ({context.describe()})")
        return key

    def _http(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(timeout=self.config.timeout)
        return self._client

    def _post(self, conversation: Conversation, context: CallContext) -> str:
        url = self.config.endpoint_url.rstrip("/") + "/chat/completions"
        body = {
            "model": self.config.model_name,
            "messages": to_messages(conversation),
            "temperature": self.config.temperature,
        }
        headers = {"Authorization": f"Bearer {self._credential(context)}"}
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                delay = self.config.backoff_base * 2 ** (attempt - 1)
                logger.warning("retrying %s in %.1fs after %s", context.describe(), delay, last_error)
                time.sleep(delay)
            try:
                response = self._http().post(url, json=body, headers=headers, timeout=self.config.timeout)
            except httpx.TimeoutException as exc:
                last_error = exc
                continue
            except httpx.TransportError as exc:
                last_error = exc
                continue
            if response.status_code in (401, 403):
                raise AuthenticationError(
                    f"endpoint rejected credentials (HTTP {response.status_code}) ({context.describe()})"
                )
            if response.status_code in _TRANSIENT_STATUS:
                last_error = BackendError(f"HTTP {response.status_code}")
                continue
            if response.status_code >= 400:
                raise BackendError(
                    f"endpoint returned HTTP {response.status_code}: {response.text[:200]} ({context.describe()})"
                )
            return self._extract(response, context)
        if isinstance(last_error, httpx.TimeoutException):
            raise BackendTimeout(
                f"timed out after {self.config.max_retries + 1} attempts ({context.describe()})"
            ) from last_error
        raise BackendError(
            f"giving up after {self.config.max_retries + 1} attempts: {last_error} ({context.describe()})"
        ) from last_error

    @staticmethod
    def _extract(response: httpx.Response, context: CallContext) -> str:
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response body ({context.describe()})") from exc
        if not isinstance(content, str):
            raise MalformedResponse(f"reply content is not text ({context.describe()})")
        return content

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
