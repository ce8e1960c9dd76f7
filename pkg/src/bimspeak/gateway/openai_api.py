"""Live backend speaking the OpenAI-compatible HTTP API."""

from __future__ import annotations

import os
import time
from typing import Optional

import httpx

from bimspeak.errors import (
    BackendUnreachableError,
    RateLimitedError,
    ResponseEmptyError,
    UnsupportedMediaError,
)
from bimspeak.gateway.types import ChatRequest, ChatResponse, ResponseHint, Transcript


class OpenAIChatBackend:
    """Chat completions plus audio transcription against one base URL.

    The API key is read from ``api_key_env`` at call time, never stored in
    config files. ``transport`` is injectable for tests (httpx.MockTransport).
    """

    def __init__(
        self,
        base_url: str,
        chat_model: str,
        transcription_model: str = "whisper-1",
        api_key_env: str = "OPENAI_API_KEY",
        timeout: float = 60.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self._base_url = base_url.rstrip("/")
        self._chat_model = chat_model
        self._transcription_model = transcription_model
        self._api_key_env = api_key_env
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def _headers(self) -> dict:
        key = os.environ.get(self._api_key_env, "")
        return {"Authorization": f"Bearer {key}"} if key else {}

    def _raise_for_status(self, response: httpx.Response) -> None:
        if response.status_code == 429:
            retry_after = response.headers.get("Retry-After")
            raise RateLimitedError(float(retry_after) if retry_after else None)
        if response.status_code >= 400:
            raise BackendUnreachableError(
                f"{response.status_code} from {response.request.url}: {response.text[:200]}"
            )

    def complete(self, request: ChatRequest) -> ChatResponse:
        body = {
            "model": self._chat_model,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "messages": [
                {"role": "system", "content": request.system_instruction},
                *({"role": m.role, "content": m.content} for m in request.messages),
            ],
        }
        if request.response_hint is ResponseHint.JSON_OBJECT:
            body["response_format"] = {"type": "json_object"}
        started = time.monotonic()
        try:
            response = self._client.post(
                f"{self._base_url}/chat/completions", json=body, headers=self._headers()
            )
        except httpx.HTTPError as exc:
            raise BackendUnreachableError(str(exc)) from exc
        self._raise_for_status(response)
        data = response.json()
        choices = data.get("choices") or []
        content = (choices[0].get("message") or {}).get("content") if choices else None
        if not content:
            raise ResponseEmptyError("backend returned no content")
        return ChatResponse(
            content=content,
            backend_id=self._chat_model,
            latency_ms=(time.monotonic() - started) * 1000.0,
        )

    def transcribe(self, audio: bytes, media_type: str) -> Transcript:
        if not audio:
            raise UnsupportedMediaError("empty audio blob")
        files = {"file": ("audio", audio, media_type)}
        data = {"model": self._transcription_model}
        try:
            response = self._client.post(
                f"{self._base_url}/audio/transcriptions",
                files=files,
                data=data,
                headers=self._headers(),
            )
        except httpx.HTTPError as exc:
            raise BackendUnreachableError(str(exc)) from exc
        if response.status_code == 415:
            raise UnsupportedMediaError(f"endpoint rejected media type {media_type!r}")
        self._raise_for_status(response)
        payload = response.json()
        text = payload.get("text", "")
        if not text:
            raise ResponseEmptyError("transcription returned no text")
        return Transcript(
            text=text,
            language_tag=payload.get("language", "en"),
            duration=float(payload.get("duration", 0.0) or 0.0) or round(len(audio) / 16000.0, 3),
        )
