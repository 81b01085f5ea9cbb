"""Chat-completion transport with retries, an in-flight limit and record/replay."""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import httpx

from .errors import RateLimited, ReplayMiss, TransportError

log = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "OPENAI_API_KEY"
DEFAULT_BASE_URL = "https://api.openai.com/v1"


class ClientMode(str, enum.Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


@dataclass(frozen=True)
class ClientConfig:
    model: str
    base_url: str = DEFAULT_BASE_URL
    api_key_env: str = DEFAULT_API_KEY_ENV
    temperature: float = 1.0
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 1.0
    max_in_flight: int = 4
    mode: ClientMode = ClientMode.LIVE
    cache_path: str | None = None

    def __post_init__(self) -> None:
        if self.mode is not ClientMode.LIVE and not self.cache_path:
            raise ValueError(f"{self.mode.value} mode needs a replay cache path")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


def request_digest(model: str, temperature: float, messages: list[dict[str, str]]) -> str:
    payload = json.dumps(
        {"model": model, "temperature": temperature, "messages": messages},
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ReplayCache:
    """Append-only JSONL file of ``{"digest": ..., "response": ...}`` entries."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        row = json.loads(line)
                        self._entries[row["digest"]] = row["response"]

    def __contains__(self, digest: str) -> bool:
        return digest in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, digest: str) -> str:
        try:
            return self._entries[digest]
        except KeyError:
            raise ReplayMiss(f"no recorded response for request {digest[:12]}") from None

    def append(self, digest: str, response: str) -> None:
        with self._lock:
            if digest in self._entries:
                return
            self._entries[digest] = response
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"digest": digest, "response": response}, ensure_ascii=False) + "\n")


class ChatClient:
    def __init__(
        self,
        config: ClientConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config
        self._transport = transport
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(config.max_in_flight)
        self._http: httpx.Client | None = None
        self.cache = ReplayCache(config.cache_path) if config.cache_path else None

    def _client(self) -> httpx.Client:
        if self._http is None:
            self._http = httpx.Client(transport=self._transport, timeout=self.config.timeout)
        return self._http

    def close(self) -> None:
        if self._http is not None:
            self._http.close()
            self._http = None

    def messages(self, prompt: str) -> list[dict[str, str]]:
        return [{"role": "user", "content": prompt}]

    def complete(self, prompt: str) -> str:
        cfg = self.config
        messages = self.messages(prompt)
        digest = request_digest(cfg.model, cfg.temperature, messages)
        if cfg.mode is ClientMode.REPLAY:
            assert self.cache is not None
            return self.cache.get(digest)
        if cfg.mode is ClientMode.RECORD and self.cache is not None and digest in self.cache:
            return self.cache.get(digest)
        with self._slots:
            text = self._post(messages)
        if cfg.mode is ClientMode.RECORD:
            assert self.cache is not None
            self.cache.append(digest, text)
        return text

    def _post(self, messages: list[dict[str, str]]) -> str:
        cfg = self.config
        key = os.environ.get(cfg.api_key_env)
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body: dict[str, Any] = {
            "model": cfg.model,
            "messages": messages,
            "temperature": cfg.temperature,
        }
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        last: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                delay = cfg.backoff_base * 2 ** (attempt - 1)
                log.info("retrying chat request (attempt %d) after %.2fs", attempt + 1, delay)
                self._sleep(delay)
            try:
                response = self._client().post(url, json=body, headers=headers)
            except httpx.TransportError as exc:
                last = TransportError(f"transport failure: {type(exc).__name__}")
                continue
            if response.status_code == 429:
                last = RateLimited("rate limited by the chat service")
                continue
            if response.status_code >= 500:
                last = TransportError(f"server error {response.status_code}")
                continue
            if response.status_code >= 400:
                raise TransportError(f"request rejected with status {response.status_code}")
            try:
                return response.json()["choices"][0]["message"]["content"] or ""
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError("malformed chat completion response") from exc
        assert last is not None
        raise last
