from bimspeak.gateway.gateway import LlmGateway
from bimspeak.gateway.mock import MockChatBackend
from bimspeak.gateway.openai_api import OpenAIChatBackend
from bimspeak.gateway.types import (
    ChatRequest,
    ChatResponse,
    FailureSpec,
    Message,
    MockRule,
    MockScript,
    ResponseHint,
    Transcript,
)

__all__ = [
    "ChatRequest",
    "ChatResponse",
    "FailureSpec",
    "LlmGateway",
    "Message",
    "MockChatBackend",
    "MockRule",
    "MockScript",
    "OpenAIChatBackend",
    "ResponseHint",
    "Transcript",
]
