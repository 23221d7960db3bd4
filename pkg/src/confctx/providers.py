"""Chat-completion providers.

``HttpProvider`` talks to any OpenAI-compatible ``/v1/chat/completions``
endpoint.  ``ScriptedProvider`` replays canned replies and is what the
tests and offline runs use.
"""

from __future__ import annotations

import enum
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import requests

logger = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "PROVIDER_API_KEY"


class Role(str, enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self):
        if not self.content:
            raise ValueError("chat message content must be non-empty")
        object.__setattr__(self, "role", Role(self.role))

    def to_wire(self) -> dict:
        return {"role": self.role.value, "content": self.content}


class ProviderError(RuntimeError):
    pass


class AuthError(ProviderError):
    pass


class ProviderTimeout(ProviderError):
    pass


class RateLimited(ProviderError):
    pass


class TransportError(ProviderError):
    pass


class ScriptExhausted(ProviderError):
    pass


class MalformedScript(ValueError):
    pass


class ProviderKind(enum.Enum):
    HTTP = "Http"
    SCRIPTED = "Scripted"


@dataclass(frozen=True)
class ProviderConfig:
    kind: ProviderKind
    endpoint_url: Optional[str] = None
    model_name: Optional[str] = None
    temperature: float = 0.0
    timeout: float = 60.0
    api_key_env: str = DEFAULT_API_KEY_ENV
    script_path: Optional[str] = None
    max_in_flight: int = 4
    requests_per_minute: Optional[int] = None

    def __post_init__(self):
        if self.kind is ProviderKind.HTTP:
            if not self.endpoint_url or not self.model_name:
                raise ValueError("Http provider needs endpoint_url and model_name")
            if self.script_path:
                raise ValueError("script_path is only valid for Scripted providers")
        else:
            if not self.script_path:
                raise ValueError("Scripted provider needs script_path")
            if self.endpoint_url:
                raise ValueError("endpoint_url is only valid for Http providers")


class ChatProvider:
    """Base class: validates the conversation, then defers to ``_complete``."""

    #: whether concurrent sessions may share this provider
    concurrent = True

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        if not messages:
            raise ValueError("no messages to send")
        if messages[0].role is not Role.SYSTEM:
            raise ValueError("first message must be the system message")
        return self._complete(tuple(messages))

    def _complete(self, messages: tuple[ChatMessage, ...]) -> str:
        raise NotImplementedError


class ScriptedProvider(ChatProvider):
    """Replies from a script: ordered ``responses`` first, then ``rules``, then ``default``.

    A rule fires when its ``contains`` string occurs in the latest message.
    Non-string replies are sent as compact JSON.
    """

    concurrent = False

    def __init__(self, responses=(), rules=(), default=None):
        self._responses = [_as_text(r) for r in responses]
        self._rules = [(r["contains"], _as_text(r["respond"])) for r in rules]
        self._default = None if default is None else _as_text(default)
        self._lock = threading.Lock()
        self.calls: list[tuple[ChatMessage, ...]] = []

    def _complete(self, messages):
        with self._lock:
            self.calls.append(messages)
            if self._responses:
                return self._responses.pop(0)
            latest = messages[-1].content
            for needle, reply in self._rules:
                if needle in latest:
                    return reply
            if self._default is not None:
                return self._default
            raise ScriptExhausted(f"script ran out of replies after {len(self.calls) - 1} calls")


def _as_text(reply) -> str:
    return reply if isinstance(reply, str) else json.dumps(reply, separators=(",", ":"))


def load_script(path) -> ScriptedProvider:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedScript(f"{path}: {exc}") from None
    return script_from_dict(data, str(path))


def script_from_dict(data, where: str = "<script>") -> ScriptedProvider:
    if not isinstance(data, dict) or not ({"responses", "rules", "default"} & data.keys()):
        raise MalformedScript(f"{where}: expected an object with responses, rules and/or default")
    responses = data.get("responses", [])
    rules = data.get("rules", [])
    if not isinstance(responses, list) or not isinstance(rules, list):
        raise MalformedScript(f"{where}: responses and rules must be arrays")
    for rule in rules:
        if not isinstance(rule, dict) or not isinstance(rule.get("contains"), str) or "respond" not in rule:
            raise MalformedScript(f"{where}: each rule needs a 'contains' string and a 'respond'")
    return ScriptedProvider(responses, rules, data.get("default"))


class HttpProvider(ChatProvider):
    """OpenAI-compatible chat completions over HTTP.

    Retries 429 and 5xx with exponential backoff, at most ``max_attempts``
    tries.  The API key is read from the environment on every call and is
    never stored on the instance.
    """

    max_attempts = 3
    backoff_base = 1.0

    def __init__(self, config: ProviderConfig, session: Optional[requests.Session] = None):
        if config.kind is not ProviderKind.HTTP:
            raise ValueError("HttpProvider needs an Http config")
        self.config = config
        self._session = session or requests.Session()
        self._slots = threading.BoundedSemaphore(max(1, config.max_in_flight))
        self._pace_lock = threading.Lock()
        self._next_slot = 0.0

    @property
    def url(self) -> str:
        base = self.config.endpoint_url.rstrip("/")
        if base.endswith("/chat/completions"):
            return base
        if not base.endswith("/v1"):
            base += "/v1"
        return base + "/chat/completions"

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _pace(self) -> None:
        rpm = self.config.requests_per_minute
        if not rpm:
            return
        with self._pace_lock:
            now = time.monotonic()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + 60.0 / rpm
        if wait > 0:
            time.sleep(wait)

    def _complete(self, messages):
        body = {
            "model": self.config.model_name,
            "messages": [m.to_wire() for m in messages],
            "temperature": self.config.temperature,
        }
        with self._slots:
            for attempt in range(1, self.max_attempts + 1):
                self._pace()
                try:
                    resp = self._session.post(
                        self.url, json=body, headers=self._headers(), timeout=self.config.timeout
                    )
                except requests.Timeout:
                    raise ProviderTimeout(f"no reply from {self.url} within {self.config.timeout}s") from None
                except requests.RequestException as exc:
                    raise TransportError(f"{type(exc).__name__} talking to {self.url}") from None

                status = resp.status_code
                if status in (401, 403):
                    raise AuthError(f"{self.url} rejected credentials (HTTP {status})")
                if status == 429 or status >= 500:
                    if attempt < self.max_attempts:
                        delay = self.backoff_base * 2 ** (attempt - 1)
                        logger.warning("HTTP %d from %s, retrying in %.1fs", status, self.url, delay)
                        time.sleep(delay)
                        continue
                    if status == 429:
                        raise RateLimited(f"still rate limited after {attempt} attempts")
                    raise TransportError(f"HTTP {status} from {self.url} after {attempt} attempts")
                if status >= 400:
                    raise TransportError(f"HTTP {status} from {self.url}")
                try:
                    return resp.json()["choices"][0]["message"]["content"]
                except (ValueError, KeyError, IndexError, TypeError):
                    raise TransportError(f"unexpected response shape from {self.url}") from None
        raise TransportError("unreachable")  # pragma: no cover


def make_provider(config: ProviderConfig) -> ChatProvider:
    if config.kind is ProviderKind.SCRIPTED:
        return load_script(config.script_path)
    return HttpProvider(config)


def complete(provider: ChatProvider, messages: Sequence[ChatMessage]) -> str:
    return provider.complete(messages)
