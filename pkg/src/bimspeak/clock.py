"""Injectable time sources.

Mock-mode components take a zero-argument callable returning seconds so
latencies and durations stay reproducible. Live components default to
``time.monotonic``.
"""

from __future__ import annotations

import time
from typing import Callable

Clock = Callable[[], float]

wall_clock: Clock = time.monotonic


class TickClock:
    """Synthetic clock advancing a fixed step per call.

    With the default 1 ms step, every measured latency comes out as exactly
    one step, which keeps traces byte-identical across machines.
    """

    def __init__(self, start: float = 0.0, step: float = 0.001):
        self._now = start
        self._step = step

    def __call__(self) -> float:
        self._now += self._step
        return self._now
