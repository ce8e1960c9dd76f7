"""Session orchestration: pipeline driver, events, wire protocol, CLI."""

from bimspeak.orchestrator.config import EngineConfig
from bimspeak.orchestrator.engine import Engine, PlannedStep, TurnOutcome, plan_steps
from bimspeak.orchestrator.events import EVENT_TYPES, EventBus, Subscription
from bimspeak.orchestrator.session import DialogueTurn, PendingState, Session
from bimspeak.orchestrator.trace import STEP_ORDER, LlmExchange, PipelineTrace, StepRecord

__all__ = [
    "EngineConfig",
    "Engine",
    "PlannedStep",
    "TurnOutcome",
    "plan_steps",
    "EVENT_TYPES",
    "EventBus",
    "Subscription",
    "DialogueTurn",
    "PendingState",
    "Session",
    "STEP_ORDER",
    "LlmExchange",
    "PipelineTrace",
    "StepRecord",
]
