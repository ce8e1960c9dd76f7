"""Request/response types shared by the live and mock chat backends."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from bimspeak.errors import InvalidScriptError

ROLES = ("user", "assistant")


class ResponseHint(str, Enum):
    FREE_TEXT = "FreeText"
    JSON_OBJECT = "JsonObject"


@dataclass
class Message:
    role: str
    content: str


@dataclass
class ChatRequest:
    """A backend-neutral chat completion request.

    ``tags`` are matcher hooks for the scripted mock backend (the pipeline
    tags each request with its step name); the live backend ignores them.
    """

    system_instruction: str
    messages: list[Message]
    temperature: float = 0.0
    max_tokens: int = 1024
    response_hint: ResponseHint = ResponseHint.FREE_TEXT
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        # roles must alternate user/assistant, starting and ending with user
        for i, msg in enumerate(self.messages):
            if msg.role not in ROLES:
                raise ValueError(f"message {i}: unknown role {msg.role!r}")
            expected = ROLES[i % 2]
            if msg.role != expected:
                raise ValueError(f"message {i}: expected role {expected!r}, got {msg.role!r}")
        if self.messages[-1].role != "user":
            raise ValueError("last message must have role 'user'")

    @property
    def last_user_content(self) -> str:
        return self.messages[-1].content


@dataclass
class ChatResponse:
    content: str
    backend_id: str
    latency_ms: float
    attempt: int = 1


@dataclass
class Transcript:
    text: str
    language_tag: str = "en"
    duration: float = 0.0

    def __post_init__(self):
        if not self.text and self.duration != 0:
            raise ValueError("empty text only allowed when duration is 0")


FAILURE_MODES = ("MalformedJson", "RuleViolation", "Timeout")


@dataclass
class FailureSpec:
    """Optional fault injection attached to a mock rule."""

    mode: str
    probability: float
    rule_id: Optional[str] = None
    response: Optional[str] = None  # alternate content for RuleViolation

    def problems(self) -> list[str]:
        out = []
        if self.mode not in FAILURE_MODES:
            out.append(f"unknown failure mode {self.mode!r}")
        if not 0.0 <= self.probability <= 1.0:
            out.append(f"probability {self.probability} outside [0, 1]")
        if self.mode == "RuleViolation" and not self.response:
            out.append("RuleViolation needs a violating response")
        return out


@dataclass
class MockRule:
    """First matching rule wins; a rule with no matcher matches everything.

    ``substring`` is checked case-insensitively against the last user
    message, ``tag`` against the request's tags. Responses may reference
    ``{{last_user}}`` and ``{{system}}``.
    """

    response: str
    name: str = ""
    substring: Optional[str] = None
    tag: Optional[str] = None
    failure: Optional[FailureSpec] = None

    def matches(self, request: ChatRequest) -> bool:
        if self.tag is not None and self.tag not in request.tags:
            return False
        if self.substring is not None:
            if self.substring.lower() not in request.last_user_content.lower():
                return False
        return True

    def render(self, request: ChatRequest) -> str:
        # plain replace: str.format would choke on JSON braces in responses
        out = self.response
        out = out.replace("{{last_user}}", request.last_user_content)
        out = out.replace("{{system}}", request.system_instruction)
        return out


@dataclass
class MockScript:
    rules: list[MockRule] = field(default_factory=list)
    transcripts: dict[str, str] = field(default_factory=dict)  # sha256 hex -> text
    seed: int = 0
    default_response: Optional[str] = None

    def validate(self) -> None:
        problems = []
        for i, rule in enumerate(self.rules):
            label = rule.name or f"rules[{i}]"
            if rule.failure is not None:
                problems.extend(f"{label}: {p}" for p in rule.failure.problems())
            if not isinstance(rule.response, str):
                problems.append(f"{label}: response must be a string")
        if problems:
            raise InvalidScriptError("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "default_response": self.default_response,
            "transcripts": dict(self.transcripts),
            "rules": [
                {
                    "name": r.name,
                    "substring": r.substring,
                    "tag": r.tag,
                    "response": r.response,
                    "failure": None
                    if r.failure is None
                    else {
                        "mode": r.failure.mode,
                        "probability": r.failure.probability,
                        "rule_id": r.failure.rule_id,
                        "response": r.failure.response,
                    },
                }
                for r in self.rules
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MockScript":
        try:
            rules = []
            for r in data.get("rules", []):
                failure = None
                if r.get("failure") is not None:
                    f = r["failure"]
                    failure = FailureSpec(
                        mode=f["mode"],
                        probability=float(f["probability"]),
                        rule_id=f.get("rule_id"),
                        response=f.get("response"),
                    )
                rules.append(
                    MockRule(
                        response=r["response"],
                        name=r.get("name", ""),
                        substring=r.get("substring"),
                        tag=r.get("tag"),
                        failure=failure,
                    )
                )
            script = cls(
                rules=rules,
                transcripts=dict(data.get("transcripts", {})),
                seed=int(data.get("seed", 0)),
                default_response=data.get("default_response"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidScriptError(f"malformed mock script: {exc}") from exc
        script.validate()
        return script

    @classmethod
    def load(cls, path: str | Path) -> "MockScript":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidScriptError(f"{path}: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
