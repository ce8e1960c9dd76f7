"""Session state: dialogue history, active project, pending question."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

from ..gateway import LlmGateway
from ..kernel import Project
from ..nlu import ClarificationQuestion, SlotSpec, TaskClass, TaskFrame
from .events import EventBus
from .trace import PipelineTrace, StepRecord


@dataclass
class DialogueTurn:
    seq: int
    speaker: str  # "User" | "System"
    text: str
    trace_index: Optional[int] = None


@dataclass
class PendingState:
    """A turn parked on a clarification question, resumable from Fill."""

    question: ClarificationQuestion
    frame: TaskFrame
    schema: list[SlotSpec]
    task: TaskClass
    trace: PipelineTrace
    fill_record: Optional[StepRecord]
    user_turn: int


@dataclass
class Session:
    id: str
    project: Project
    gateway: LlmGateway
    clock: object  # Callable[[], float]
    seed: int
    turns: list[DialogueTurn] = field(default_factory=list)
    traces: list[PipelineTrace] = field(default_factory=list)
    pending: Optional[PendingState] = None
    bus: EventBus = field(default_factory=EventBus)
    lock: threading.Lock = field(default_factory=threading.Lock)
    closed: bool = False

    def append_turn(self, speaker: str, text: str, trace_index: Optional[int] = None) -> DialogueTurn:
        turn = DialogueTurn(seq=len(self.turns) + 1, speaker=speaker, text=text, trace_index=trace_index)
        self.turns.append(turn)
        return turn

    def context_lines(self, limit: int) -> list[str]:
        """The last `limit` dialogue turns, oldest first."""
        if limit <= 0:
            return []
        return [f"{t.speaker}: {t.text}" for t in self.turns[-limit:]]

    def trace_for_turn(self, turn_seq: int) -> Optional[PipelineTrace]:
        for trace in self.traces:
            if trace.turn == turn_seq:
                return trace
        return None
