"""Uniform chat-completion access.

Two backends share one interface: an HTTP client speaking the common
chat-completions wire protocol (for a live model behind any serving layer),
and a deterministic scripted backend driven by fixture files (for tests and
desk-scale evaluation). A recording wrapper captures live traffic in the
fixture format so any real run can be replayed bit-for-bit.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence, Union

import httpx

from .errors import BackendError, ScriptExhausted
from .tokens import TokenCounter, count_tokens

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    """One completion request. The first message is always the system prompt;
    temperature defaults to 0 so selection behavior is reproducible."""

    messages: tuple[ChatMessage, ...]
    model_id: str = "default"
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[0].role != "system":
            raise ValueError("first message must be the system prompt")

    def last_user_message(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        return ""


@dataclass(frozen=True)
class ChatResult:
    text: str
    prompt_tokens: int
    completion_tokens: int
    source: str  # "live" | "scripted"

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


class LLMBackend(Protocol):
    def complete(self, request: ChatRequest) -> ChatResult: ...


def make_request(
    system_prompt: str,
    instruction: str,
    history: Sequence[str] = (),
    model_id: str = "default",
) -> ChatRequest:
    """Assemble the standard message list: system prompt, prior user
    instructions (history policy), then the current instruction."""
    messages = [ChatMessage("system", system_prompt)]
    messages.extend(ChatMessage("user", h) for h in history)
    messages.append(ChatMessage("user", instruction))
    return ChatRequest(messages=tuple(messages), model_id=model_id)


def complete(request: ChatRequest, backend: LLMBackend) -> ChatResult:
    """Run one completion against the configured backend."""
    return backend.complete(request)


# --- scripted backend ---------------------------------------------------------


@dataclass(frozen=True)
class ScriptEntry:
    """One fixture record: a matcher over the request's last user message and
    the response to return. ``match_kind`` is "substring" or "regex"."""

    match: str
    response: str
    match_kind: str = "substring"

    def matches(self, last_user_message: str) -> bool:
        if self.match_kind == "regex":
            return re.search(self.match, last_user_message) is not None
        return self.match in last_user_message


@dataclass
class ScriptFixture:
    """An ordered response script.

    Non-strict: each request is answered by the first entry whose matcher
    hits; entries are reusable. Strict: entries are consumed in order and
    every request must match the next unconsumed entry — the mode used for
    multi-call flows where the same user message drives different calls.
    """

    entries: list[ScriptEntry] = field(default_factory=list)
    strict: bool = False

    @staticmethod
    def load(path: Union[str, Path]) -> "ScriptFixture":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = [
            ScriptEntry(e["match"], e["response"], e.get("match_kind", "substring"))
            for e in doc["entries"]
        ]
        return ScriptFixture(entries=entries, strict=doc.get("strict", False))

    def save(self, path: Union[str, Path]) -> None:
        doc = {
            "strict": self.strict,
            "entries": [
                {"match": e.match, "match_kind": e.match_kind, "response": e.response}
                for e in self.entries
            ],
        }
        Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False), encoding="utf-8")


class ScriptedBackend:
    """Deterministic fixture-driven stand-in for a live model.

    Token accounting uses the default counter over the request messages and
    the scripted response. Every request is kept in ``request_log`` so tests
    can assert on the exact conversations sent.
    """

    def __init__(self, fixture: ScriptFixture, counter: TokenCounter = count_tokens):
        self.fixture = fixture
        self.counter = counter
        self.request_log: list[ChatRequest] = []
        self._cursor = 0
        self._lock = threading.Lock()

    def reset(self) -> None:
        with self._lock:
            self._cursor = 0
            self.request_log.clear()

    def _pick(self, request: ChatRequest) -> ScriptEntry:
        key = request.last_user_message()
        if self.fixture.strict:
            if self._cursor >= len(self.fixture.entries):
                raise ScriptExhausted(f"no entries left for message {key!r}")
            entry = self.fixture.entries[self._cursor]
            if not entry.matches(key):
                raise ScriptExhausted(
                    f"entry {self._cursor} expects {entry.match!r}, got message {key!r}"
                )
            self._cursor += 1
            return entry
        for entry in self.fixture.entries:
            if entry.matches(key):
                return entry
        raise ScriptExhausted(f"no entry matches message {key!r}")

    def complete(self, request: ChatRequest) -> ChatResult:
        with self._lock:
            self.request_log.append(request)
            entry = self._pick(request)
        prompt_tokens = sum(self.counter(m.content) for m in request.messages)
        return ChatResult(
            text=entry.response,
            prompt_tokens=prompt_tokens,
            completion_tokens=self.counter(entry.response),
            source="scripted",
        )


class RecordingBackend:
    """Wraps any backend and captures its traffic as a strict fixture, so a
    live session can be replayed deterministically later."""

    def __init__(self, inner: LLMBackend):
        self.inner = inner
        self.entries: list[ScriptEntry] = []

    def complete(self, request: ChatRequest) -> ChatResult:
        result = self.inner.complete(request)
        self.entries.append(ScriptEntry(match=request.last_user_message(), response=result.text))
        return result

    def transcript(self) -> ScriptFixture:
        return ScriptFixture(entries=list(self.entries), strict=True)

    def write(self, path: Union[str, Path]) -> None:
        try:
            self.transcript().save(path)
        except OSError as exc:
            raise BackendError("storage", str(exc)) from exc


def record_transcript(backend: RecordingBackend, path: Union[str, Path]) -> None:
    """Persist a recording backend's captured calls in the fixture format."""
    backend.write(path)


# --- live backend -------------------------------------------------------------


class HttpChatBackend:
    """Client for the de-facto chat-completions HTTP interface.

    Base URL, model id and timeout come from configuration; the bearer
    credential is read from an environment variable, never from code. Token
    counts come from the server-reported usage.
    """

    def __init__(
        self,
        base_url: str,
        model_id: str,
        api_key_env: str = "CHATEDIT_API_KEY",
        timeout: float = 60.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.api_key_env = api_key_env
        self.timeout = timeout
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, request: ChatRequest) -> ChatResult:
        headers = {}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": request.model_id if request.model_id != "default" else self.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
        }
        try:
            resp = self._client.post(
                f"{self.base_url}/chat/completions", json=payload, headers=headers
            )
        except httpx.TimeoutException as exc:
            raise BackendError("timeout", str(exc)) from exc
        except httpx.HTTPError as exc:
            raise BackendError("transport", str(exc)) from exc
        if resp.status_code in (401, 403):
            raise BackendError("auth", f"HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise BackendError("transport", f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            doc = resp.json()
            text = doc["choices"][0]["message"]["content"]
            usage = doc.get("usage", {})
        except (KeyError, IndexError, ValueError) as exc:
            raise BackendError("transport", f"malformed response: {exc}") from exc
        return ChatResult(
            text=text,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            source="live",
        )


def scripted_from_pairs(pairs: Iterable[tuple[str, str]], strict: bool = False) -> ScriptedBackend:
    """Convenience constructor used all over the tests."""
    fixture = ScriptFixture(
        entries=[ScriptEntry(match=m, response=r) for m, r in pairs], strict=strict
    )
    return ScriptedBackend(fixture)
