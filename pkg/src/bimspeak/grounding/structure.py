"""Step 4 (Structure): obtain and strictly validate the machine-readable spec.

The schema instruction sent to the backend is fixed verbatim; the validator
is the only authority on whether a payload becomes a WallDetailSpec. A
bounded repair loop re-prompts with the collected violations.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from bimspeak.errors import RepairExhaustedError
from bimspeak.gateway import ChatRequest, Message, ResponseHint
from bimspeak.kernel import LayerFunction, Material, WallDetailSpec, WallLayer
from bimspeak.nlu.types import TaskFrame

STRUCTURING_INSTRUCTION = (
    "Return in JSON format with 'wall_detail_name' and each layer with 'material', "
    "'layer_type', 'thermal_conductivity' (W/m·K), and 'thickness' (mm), with exact "
    "values without units, and in order of exterior to interior layer."
)

STRUCTURE_SYSTEM = "You translate wall design decisions into structured BIM data."


class Mode(str, Enum):
    FUSED = "Fused"
    SPLIT = "Split"


class ViolationCode(str, Enum):
    MISSING_FIELD = "MISSING_FIELD"
    UNIT_STRING = "UNIT_STRING"
    NOT_A_NUMBER = "NOT_A_NUMBER"
    NON_POSITIVE = "NON_POSITIVE"
    UNKNOWN_LAYER_TYPE = "UNKNOWN_LAYER_TYPE"
    EMPTY_LAYERS = "EMPTY_LAYERS"
    MALFORMED_JSON = "MALFORMED_JSON"


Violation = tuple[ViolationCode, str, str]  # (code, field path, message)


@dataclass
class StructuredPayload:
    raw: str
    parsed: Optional[WallDetailSpec]
    violations: list[Violation]

    def __post_init__(self):
        if (self.parsed is None) == (not self.violations):
            raise AssertionError("parsed present iff violations empty")


def build_structuring_prompt(
    frame: TaskFrame,
    mode: Mode = Mode.FUSED,
    library: Optional[Iterable[Material]] = None,
    temperature: float = 0.0,
) -> ChatRequest:
    """Fused mode embeds the library vocabulary so Match rides along."""
    if not frame.ready:
        raise ValueError(f"frame not ready: missing {frame.missing}")
    lines = ["Design decision:"]
    for slot in frame.slots.values():
        lines.append(f"- {slot.name}: {slot.value}")
    lines += ["", STRUCTURING_INSTRUCTION]
    if mode is Mode.FUSED:
        names = sorted(m.name for m in (library or []))
        if names:
            lines += ["", "Use these material names where applicable: " + ", ".join(names) + "."]
    lines += ["", f"User request: {frame.source_utterance}"]
    return ChatRequest(
        system_instruction=STRUCTURE_SYSTEM,
        messages=[Message("user", "\n".join(lines))],
        temperature=temperature,
        response_hint=ResponseHint.JSON_OBJECT,
        tags=("structure",),
    )


_UNIT_SUFFIX = re.compile(r"^\s*[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?\s*[^\s\d.+-]\S*\s*$")
_BARE_NUMBER = re.compile(r"^\s*[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?\s*$")

_LAYER_VOCAB = ", ".join(f.value for f in LayerFunction)


def _check_numeric(value, path: str, out: list[Violation]) -> Optional[float]:
    field_name = path.rsplit(".", 1)[-1]
    if isinstance(value, bool):
        out.append((ViolationCode.NOT_A_NUMBER, path, f"{field_name} must be a number, got boolean"))
        return None
    if isinstance(value, str):
        if _UNIT_SUFFIX.match(value):
            out.append(
                (
                    ViolationCode.UNIT_STRING,
                    path,
                    f"{field_name} must be a bare number without units, got {value!r}",
                )
            )
        elif _BARE_NUMBER.match(value):
            out.append(
                (ViolationCode.NOT_A_NUMBER, path, f"{field_name} must be a JSON number, got string {value!r}")
            )
        else:
            out.append((ViolationCode.NOT_A_NUMBER, path, f"{field_name} must be a number, got {value!r}"))
        return None
    if not isinstance(value, (int, float)):
        out.append((ViolationCode.NOT_A_NUMBER, path, f"{field_name} must be a number, got {type(value).__name__}"))
        return None
    number = float(value)
    if not math.isfinite(number) or number <= 0:
        out.append((ViolationCode.NON_POSITIVE, path, f"{field_name} must be positive and finite, got {value}"))
        return None
    return number


def validate_payload(raw: str) -> StructuredPayload:
    """All violations are collected; `parsed` is set only on a clean pass."""
    violations: list[Violation] = []

    def reject_constant(name):
        raise ValueError(f"non-finite constant {name}")

    try:
        data = json.loads(raw, parse_constant=reject_constant)
    except ValueError as exc:
        return StructuredPayload(raw, None, [(ViolationCode.MALFORMED_JSON, "$", str(exc))])
    if not isinstance(data, dict):
        return StructuredPayload(
            raw, None, [(ViolationCode.MALFORMED_JSON, "$", "top level must be a JSON object")]
        )

    name = data.get("wall_detail_name")
    if not isinstance(name, str) or not name.strip():
        violations.append(
            (ViolationCode.MISSING_FIELD, "$.wall_detail_name", "wall_detail_name must be a non-empty string")
        )

    layers_raw = data.get("layers")
    if not isinstance(layers_raw, list):
        violations.append((ViolationCode.MISSING_FIELD, "$.layers", "layers must be a list"))
        return StructuredPayload(raw, None, violations)
    if not layers_raw:
        violations.append((ViolationCode.EMPTY_LAYERS, "$.layers", "at least one layer is required"))
        return StructuredPayload(raw, None, violations)

    layers: list[WallLayer] = []
    for i, layer in enumerate(layers_raw):
        base = f"$.layers[{i}]"
        if not isinstance(layer, dict):
            violations.append((ViolationCode.MISSING_FIELD, base, "layer must be an object"))
            continue
        material = layer.get("material")
        if not isinstance(material, str) or not material.strip():
            violations.append(
                (ViolationCode.MISSING_FIELD, f"{base}.material", "material must be a non-empty string")
            )
            material = None

        layer_type = None
        if "layer_type" not in layer:
            violations.append((ViolationCode.MISSING_FIELD, f"{base}.layer_type", "layer_type is required"))
        else:
            try:
                layer_type = LayerFunction.parse(layer["layer_type"])
            except (ValueError, TypeError):
                violations.append(
                    (
                        ViolationCode.UNKNOWN_LAYER_TYPE,
                        f"{base}.layer_type",
                        f"layer_type {layer['layer_type']!r} not one of: {_LAYER_VOCAB}",
                    )
                )

        conductivity = thickness = None
        if "thermal_conductivity" not in layer:
            violations.append(
                (ViolationCode.MISSING_FIELD, f"{base}.thermal_conductivity", "thermal_conductivity is required")
            )
        else:
            conductivity = _check_numeric(layer["thermal_conductivity"], f"{base}.thermal_conductivity", violations)
        if "thickness" not in layer:
            violations.append((ViolationCode.MISSING_FIELD, f"{base}.thickness", "thickness is required"))
        else:
            thickness = _check_numeric(layer["thickness"], f"{base}.thickness", violations)

        if material is not None and layer_type is not None and conductivity is not None and thickness is not None:
            layers.append(
                WallLayer(
                    material=material.strip(),
                    layer_type=layer_type,
                    thermal_conductivity=conductivity,
                    thickness=thickness,
                )
            )

    if violations:
        return StructuredPayload(raw, None, violations)
    return StructuredPayload(raw, WallDetailSpec(wall_detail_name=name.strip(), layers=layers), [])


@dataclass
class RepairState:
    budget: int = 2
    attempt: int = 0
    history: list[tuple[str, list[Violation]]] = field(default_factory=list)


def repair(
    state: RepairState,
    previous: StructuredPayload,
    base_request: ChatRequest,
    source_utterance: str,
) -> ChatRequest:
    """Build the re-prompt for an invalid payload, or raise when out of budget.

    The returned request replays the original prompt, the bad reply as an
    assistant turn, and a correction message enumerating every violation.
    """
    if not previous.violations:
        raise ValueError("repair requires a payload with violations")
    if state.attempt >= state.budget:
        raise RepairExhaustedError(
            f"structuring failed after {state.attempt + 1} attempts; "
            f"last violations: {[f'{c.value} at {p}' for c, p, _ in previous.violations]}"
        )
    state.attempt += 1
    state.history.append((previous.raw, list(previous.violations)))
    correction = "\n".join(
        [
            "The previous response was invalid:",
            *(f"- {code.value} at {path}: {message}" for code, path, message in previous.violations),
            "",
            STRUCTURING_INSTRUCTION,
            "Return only the corrected JSON.",
            f"User request: {source_utterance}",
        ]
    )
    return ChatRequest(
        system_instruction=base_request.system_instruction,
        messages=[
            *base_request.messages,
            Message("assistant", previous.raw),
            Message("user", correction),
        ],
        temperature=base_request.temperature,
        response_hint=ResponseHint.JSON_OBJECT,
        tags=tuple(dict.fromkeys((*base_request.tags, "repair"))),
    )
