"""Per-session event fan-out.

Events are plain dicts (JSON-ready for the wire). Every subscriber gets its
own queue, so all of them observe the same order regardless of consumer pace.
"""

from __future__ import annotations

import queue
from dataclasses import dataclass, field
from typing import Optional

from ..errors import SessionClosedError

EVENT_TYPES = (
    "turn_started",
    "step_started",
    "step_completed",
    "question_pending",
    "check_report",
    "model_updated",
    "turn_completed",
    "turn_failed",
)

_CLOSE = object()


@dataclass
class Subscription:
    _queue: "queue.Queue[object]" = field(default_factory=queue.Queue)
    closed: bool = False

    def get(self, timeout: Optional[float] = None) -> Optional[dict]:
        """Next event, or None once the stream is closed."""
        if self.closed:
            return None
        item = self._queue.get(timeout=timeout)
        if item is _CLOSE:
            self.closed = True
            return None
        return item  # type: ignore[return-value]

    def drain(self) -> list[dict]:
        out = []
        while True:
            try:
                item = self._queue.get_nowait()
            except queue.Empty:
                return out
            if item is _CLOSE:
                self.closed = True
                return out
            out.append(item)


class EventBus:
    def __init__(self):
        self._subs: list[Subscription] = []
        self._closed = False

    def subscribe(self) -> Subscription:
        if self._closed:
            raise SessionClosedError("session is closed")
        sub = Subscription()
        self._subs.append(sub)
        return sub

    def emit(self, type_: str, **payload) -> dict:
        if type_ not in EVENT_TYPES:
            raise ValueError(f"unknown event type {type_!r}")
        event = {"type": type_, **payload}
        for sub in self._subs:
            sub._queue.put(event)
        return event

    def unsubscribe(self, sub: Subscription) -> None:
        """Detach one consumer; a blocked get() wakes up with None."""
        if sub in self._subs:
            self._subs.remove(sub)
        sub._queue.put(_CLOSE)

    def close(self) -> None:
        self._closed = True
        for sub in self._subs:
            sub._queue.put(_CLOSE)
