"""Deterministic scripted chat backend.

Responses come from the first matching rule of a :class:`MockScript`.
Fault injection (malformed JSON, rule-violating content, timeouts) rides on
the rules themselves so pipeline code stays oblivious to test scaffolding.
"""

from __future__ import annotations

import hashlib
import random
from typing import Optional

from bimspeak.clock import Clock, TickClock
from bimspeak.errors import (
    BackendUnreachableError,
    ResponseEmptyError,
    UnsupportedMediaError,
)
from bimspeak.gateway.types import ChatRequest, ChatResponse, MockScript, Transcript

BACKEND_ID = "mock"


def _mangle_json(text: str) -> str:
    """Deterministically break a payload the way flaky backends do."""
    cut = max(1, (2 * len(text)) // 3)
    return text[:cut].rstrip("}] \n") + " ..."


class MockChatBackend:
    def __init__(self, script: MockScript, seed: Optional[int] = None, clock: Optional[Clock] = None):
        script.validate()
        self._script = script
        self._rng = random.Random(script.seed if seed is None else seed)
        self._clock: Clock = clock if clock is not None else TickClock()

    def register_script(self, script: MockScript) -> None:
        script.validate()
        self._script = script

    def complete(self, request: ChatRequest) -> ChatResponse:
        started = self._clock()
        for rule in self._script.rules:
            if not rule.matches(request):
                continue
            content = rule.render(request)
            if rule.failure is not None and self._rng.random() < rule.failure.probability:
                if rule.failure.mode == "Timeout":
                    raise BackendUnreachableError(f"simulated timeout (rule {rule.name or '?'})")
                if rule.failure.mode == "MalformedJson":
                    content = _mangle_json(content)
                else:  # RuleViolation
                    content = rule.failure.response or content
            return ChatResponse(
                content=content,
                backend_id=BACKEND_ID,
                latency_ms=(self._clock() - started) * 1000.0,
            )
        if self._script.default_response is not None:
            return ChatResponse(
                content=self._script.default_response,
                backend_id=BACKEND_ID,
                latency_ms=(self._clock() - started) * 1000.0,
            )
        raise ResponseEmptyError(
            f"no mock rule matched (tags={list(request.tags)}, "
            f"last_user={request.last_user_content[:80]!r})"
        )

    def transcribe(self, audio: bytes, media_type: str) -> Transcript:
        if not audio:
            raise UnsupportedMediaError("empty audio blob")
        digest = hashlib.sha256(audio).hexdigest()
        text = self._script.transcripts.get(digest)
        if text is None:
            raise ResponseEmptyError(f"no transcript scripted for digest {digest[:12]}...")
        # synthetic but deterministic: pretend 16 kB of audio per second
        return Transcript(text=text, language_tag="en", duration=round(len(audio) / 16000.0, 3))
