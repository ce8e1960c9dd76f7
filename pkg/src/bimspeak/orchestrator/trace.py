"""Per-turn pipeline traces: what ran, what was skipped, and why."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..gateway import ChatRequest, ChatResponse

STEP_ORDER = ("Interpret", "Fill", "Match", "Structure", "Execute", "Check")


@dataclass
class LlmExchange:
    """One gateway round trip, kept verbatim for audit."""

    id: str
    step: str
    attempt: int
    request: ChatRequest
    response_content: str
    backend_id: str
    latency_ms: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "step": self.step,
            "attempt": self.attempt,
            "system_instruction": self.request.system_instruction,
            "messages": [{"role": m.role, "content": m.content} for m in self.request.messages],
            "temperature": self.request.temperature,
            "tags": list(self.request.tags),
            "response": self.response_content,
            "backend_id": self.backend_id,
            "latency_ms": self.latency_ms,
        }


@dataclass
class StepRecord:
    step: str
    attempt: int = 1
    skipped: bool = False
    skip_reason: str = ""
    input_summary: str = ""
    output_summary: str = ""
    duration_ms: float = 0.0
    exchange_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "attempt": self.attempt,
            "skipped": self.skipped,
            "skip_reason": self.skip_reason,
            "input_summary": self.input_summary,
            "output_summary": self.output_summary,
            "duration_ms": round(self.duration_ms, 3),
            "exchange_ids": list(self.exchange_ids),
        }


@dataclass
class PipelineTrace:
    """Ordered record of one turn. Steps appear once per attempt, in order."""

    turn: int
    utterance: str
    task: str = "Unknown"
    outcome: str = "Pending"
    attempts: int = 1
    steps: list[StepRecord] = field(default_factory=list)
    exchanges: list[LlmExchange] = field(default_factory=list)

    def executed_steps(self) -> list[StepRecord]:
        return [s for s in self.steps if not s.skipped]

    def add_exchange(self, step: str, attempt: int, request: ChatRequest, response: ChatResponse) -> LlmExchange:
        ex = LlmExchange(
            id=f"llm-{len(self.exchanges) + 1}",
            step=step,
            attempt=attempt,
            request=request,
            response_content=response.content,
            backend_id=response.backend_id,
            latency_ms=response.latency_ms,
        )
        self.exchanges.append(ex)
        return ex

    def check_invariants(self) -> list[str]:
        problems = []
        seen: set[tuple[str, int]] = set()
        for rec in self.steps:
            key = (rec.step, rec.attempt)
            if key in seen:
                problems.append(f"step {rec.step} appears twice in attempt {rec.attempt}")
            seen.add(key)
            if rec.step not in STEP_ORDER:
                problems.append(f"unknown step {rec.step!r}")
            if rec.skipped and not rec.skip_reason:
                problems.append(f"skipped step {rec.step} lacks a reason")
        for attempt in {a for _, a in seen}:
            names = [r.step for r in self.steps if r.attempt == attempt]
            order = [s for s in STEP_ORDER if s in names]
            if names != order:
                problems.append(f"attempt {attempt} steps out of order: {names}")
        return problems

    def to_json_dict(self) -> dict:
        return {
            "turn": self.turn,
            "utterance": self.utterance,
            "task": self.task,
            "outcome": self.outcome,
            "attempts": self.attempts,
            "steps": [s.to_dict() for s in self.steps],
            "exchanges": [e.to_dict() for e in self.exchanges],
        }
