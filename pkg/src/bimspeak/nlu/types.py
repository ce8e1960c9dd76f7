"""Frames, slots, and the task taxonomy for steps 1 and 2."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Optional


class TaskClass(str, Enum):
    CREATE_WALL_DETAIL = "CreateWallDetail"
    PLACE_WINDOW = "PlaceWindow"
    MODIFY_WALL = "ModifyWall"
    DELETE_COLUMN = "DeleteColumn"
    SIMPLE_TRANSFORM = "SimpleTransform"
    UNKNOWN = "Unknown"


class Provenance(str, Enum):
    USER_STATED = "UserStated"
    INFERRED = "Inferred"
    USER_ANSWERED = "UserAnswered"


class FillPolicy(str, Enum):
    INFER_ALLOWED = "InferAllowed"
    MUST_ASK = "MustAsk"


SEMANTIC_TYPES = ("string", "material_term", "length_mm", "enum", "number")

_LENGTH_RE = re.compile(
    r"^\s*([-+]?\d+(?:\.\d+)?)\s*(mm|millimeters?|millimetres?|cm|centimeters?|centimetres?|m|meters?|metres?)?\s*$",
    re.IGNORECASE,
)
_NUMBER_RE = re.compile(r"^\s*([-+]?\d+(?:\.\d+)?)")

_LENGTH_FACTORS = {"mm": 1.0, "cm": 10.0, "m": 1000.0}


def parse_length_mm(value: Any) -> float:
    """Normalize a stated length to millimeters; bare numbers are taken as mm."""
    if isinstance(value, bool):
        raise ValueError(f"not a length: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _LENGTH_RE.match(value)
        if m:
            unit = (m.group(2) or "mm").lower()
            if unit.startswith("mm") or unit.startswith("milli"):
                factor = _LENGTH_FACTORS["mm"]
            elif unit.startswith("cm") or unit.startswith("centi"):
                factor = _LENGTH_FACTORS["cm"]
            else:
                factor = _LENGTH_FACTORS["m"]
            return float(m.group(1)) * factor
    raise ValueError(f"not a length: {value!r}")


def parse_number(value: Any) -> float:
    """Lenient numeric parse: '90 degrees' -> 90.0."""
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _NUMBER_RE.match(value)
        if m:
            return float(m.group(1))
    raise ValueError(f"not a number: {value!r}")


@dataclass
class SlotSpec:
    name: str
    semantic_type: str
    required: bool
    policy: FillPolicy
    question: str
    values: tuple[str, ...] = ()  # enum vocabulary
    suggested: tuple[str, ...] = ()

    def coerce(self, value: Any) -> Any:
        """Normalize a raw value to the slot's semantic type; ValueError if hopeless."""
        if self.semantic_type == "length_mm":
            return parse_length_mm(value)
        if self.semantic_type == "number":
            return parse_number(value)
        if not isinstance(value, str):
            raise ValueError(f"expected text for {self.name}, got {value!r}")
        text = value.strip()
        if not text:
            raise ValueError(f"empty value for {self.name}")
        if self.semantic_type == "enum":
            for candidate in self.values:
                if candidate.lower() == text.lower():
                    return candidate
            raise ValueError(f"{text!r} not one of {list(self.values)}")
        return text


@dataclass
class SlotValue:
    name: str
    value: Any
    provenance: Provenance
    confidence: float = 1.0
    span: Optional[str] = None  # source text, UserStated only

    def __post_init__(self):
        if self.provenance is Provenance.INFERRED and self.confidence >= 1.0:
            raise ValueError("inferred values must carry confidence < 1.0")


@dataclass
class ClarificationQuestion:
    slot: str
    text: str
    suggested: tuple[str, ...] = ()
    attempt: int = 1


@dataclass
class TaskFrame:
    task: TaskClass
    source_utterance: str
    slots: dict[str, SlotValue] = field(default_factory=dict)
    missing: list[str] = field(default_factory=list)
    dialogue_context: list[str] = field(default_factory=list)

    @property
    def ready(self) -> bool:
        return not self.missing

    def value(self, name: str, default: Any = None) -> Any:
        slot = self.slots.get(name)
        return default if slot is None else slot.value

    def check_invariants(self) -> None:
        overlap = set(self.missing) & set(self.slots)
        if overlap:
            raise AssertionError(f"slots both filled and missing: {sorted(overlap)}")


SlotSchema = dict[TaskClass, list[SlotSpec]]


def load_slot_schemas(path: str | Path | None = None) -> SlotSchema:
    """Load the per-task slot registry (bundled default, user-overridable)."""
    if path is None:
        raw = resources.files("bimspeak.data").joinpath("slot_schemas.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    schemas: SlotSchema = {}
    for task_name, slot_list in data.items():
        task = TaskClass(task_name)
        specs = []
        for s in slot_list:
            if s["type"] not in SEMANTIC_TYPES:
                raise ValueError(f"{task_name}.{s['name']}: unknown semantic type {s['type']!r}")
            specs.append(
                SlotSpec(
                    name=s["name"],
                    semantic_type=s["type"],
                    required=bool(s["required"]),
                    policy=FillPolicy(s["policy"]),
                    question=s.get("question", f"Please provide {s['name']}."),
                    values=tuple(s.get("values", [])),
                    suggested=tuple(s.get("suggested", [])),
                )
            )
        schemas[task] = specs
    return schemas
