"""Retrying facade over a chat backend.

Transient transport failures (unreachable, rate limited) are retried with
exponential backoff up to ``max_attempts``; well-formed responses are never
retried here. Empty responses propagate: deciding whether empty is
acceptable is the caller's business, not transport's.
"""

from __future__ import annotations

import time
from dataclasses import replace
from typing import Callable, Optional, Protocol

from bimspeak.errors import BackendUnreachableError, RateLimitedError
from bimspeak.gateway.mock import MockChatBackend
from bimspeak.gateway.types import ChatRequest, ChatResponse, MockScript, Transcript

ExchangeHook = Callable[[ChatRequest, ChatResponse], None]


class ChatBackend(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...

    def transcribe(self, audio: bytes, media_type: str) -> Transcript: ...


class LlmGateway:
    def __init__(
        self,
        backend: ChatBackend,
        max_attempts: int = 3,
        backoff_base: float = 0.25,
        sleep: Callable[[float], None] = time.sleep,
        on_exchange: Optional[ExchangeHook] = None,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self._backend = backend
        self._max_attempts = max_attempts
        self._backoff_base = backoff_base
        self._sleep = sleep
        self.on_exchange = on_exchange
        self._exchange_log: list[tuple[ChatRequest, ChatResponse]] = []

    @property
    def backend(self) -> ChatBackend:
        return self._backend

    def register_script(self, script: MockScript, seed: Optional[int] = None) -> None:
        """Activate (or replace) a scripted mock backend; live is bypassed."""
        script.validate()
        if isinstance(self._backend, MockChatBackend):
            self._backend.register_script(script)
        else:
            self._backend = MockChatBackend(script, seed=seed)

    def _with_retries(self, call):
        for attempt in range(1, self._max_attempts + 1):
            try:
                return call(), attempt
            except RateLimitedError as exc:
                if attempt == self._max_attempts:
                    raise
                wait = exc.retry_after if exc.retry_after else self._backoff_base * 2 ** (attempt - 1)
                self._sleep(wait)
            except BackendUnreachableError:
                if attempt == self._max_attempts:
                    raise
                self._sleep(self._backoff_base * 2 ** (attempt - 1))
        raise AssertionError("unreachable")

    def chat(self, request: ChatRequest) -> ChatResponse:
        response, attempt = self._with_retries(lambda: self._backend.complete(request))
        response = replace(response, attempt=attempt)
        self._exchange_log.append((request, response))
        if self.on_exchange is not None:
            self.on_exchange(request, response)
        return response

    def drain_exchange_log(self) -> list[tuple[ChatRequest, ChatResponse]]:
        """Pop every exchange recorded since the last drain (trace capture)."""
        log, self._exchange_log = self._exchange_log, []
        return log

    def transcribe(self, audio: bytes, media_type: str) -> Transcript:
        transcript, _ = self._with_retries(lambda: self._backend.transcribe(audio, media_type))
        return transcript
