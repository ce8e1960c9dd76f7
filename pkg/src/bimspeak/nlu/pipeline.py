"""Steps 1 and 2: classify the task, extract slots, complete the frame.

All LLM traffic goes through the gateway; every reply is parsed against a
closed contract so arbitrary backend output degrades to Unknown / missing
rather than crashing the pipeline.
"""

from __future__ import annotations

import json
import re
from typing import Optional

from bimspeak.errors import UnknownSlotError, UnparseableAnswerError
from bimspeak.gateway import ChatRequest, LlmGateway, Message, ResponseHint
from bimspeak.nlu.types import (
    ClarificationQuestion,
    FillPolicy,
    Provenance,
    SlotSpec,
    SlotValue,
    TaskClass,
    TaskFrame,
)

# Label vocabulary lives in the system instruction, not the user message, so
# scripted-mock substring rules only ever see dialogue content.
CLASSIFY_SYSTEM = (
    "You are a BIM assistant that classifies user commands into design tasks. "
    "Classify each request into exactly one of: "
    + ", ".join(t.value for t in TaskClass if t is not TaskClass.UNKNOWN)
    + ". Reply with the label only; reply Unknown if none fits. "
    "You may append a confidence between 0 and 1."
)
EXTRACT_SYSTEM = "You extract task parameters from user requests."
CONSULTANT_SYSTEM = (
    "You are an experienced architectural design consultant. Use your knowledge of "
    "climates, building practice and typical wall assemblies to complete missing design inputs."
)

_LABELS = [t.value for t in TaskClass]
_LABEL_RE = re.compile("|".join(rf"\b{re.escape(label)}\b" for label in _LABELS))
_CONF_RE = re.compile(r"\b(?:0(?:\.\d+)?|1(?:\.0+)?)\b")

DEFAULT_CONFIDENCE_FLOOR = 0.5
INFERRED_CONFIDENCE = 0.8


def classify_task(
    gateway: LlmGateway,
    utterance: str,
    context: list[str],
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR,
    temperature: float = 0.0,
) -> tuple[TaskClass, float]:
    """Closed-set classification; any unparseable reply degrades to Unknown."""
    if not utterance.strip():
        raise ValueError("utterance must be non-empty")
    prompt_lines = []
    if context:
        prompt_lines += ["Recent dialogue:", *context, ""]
    prompt_lines.append(f"Request: {utterance}")
    response = gateway.chat(
        ChatRequest(
            system_instruction=CLASSIFY_SYSTEM,
            messages=[Message("user", "\n".join(prompt_lines))],
            temperature=temperature,
            tags=("classify",),
        )
    )
    found = {m.group(0) for m in _LABEL_RE.finditer(response.content)}
    if len(found) != 1:
        return TaskClass.UNKNOWN, 0.0
    label = found.pop()
    conf_match = _CONF_RE.search(response.content.replace(label, ""))
    confidence = float(conf_match.group(0)) if conf_match else 1.0
    if label == "Unknown" or confidence < confidence_floor:
        return TaskClass.UNKNOWN, confidence if label != "Unknown" else 0.0
    return TaskClass(label), confidence


def _describe_slot(spec: SlotSpec) -> str:
    if spec.semantic_type == "enum":
        return f"- {spec.name} (one of: {', '.join(spec.values)})"
    if spec.semantic_type == "length_mm":
        return f"- {spec.name} (length in mm)"
    if spec.semantic_type == "number":
        return f"- {spec.name} (number)"
    if spec.semantic_type == "material_term":
        return f"- {spec.name} (material name)"
    return f"- {spec.name} (free text)"


def extract_slots(
    gateway: LlmGateway,
    utterance: str,
    task: TaskClass,
    schema: list[SlotSpec],
    context: Optional[list[str]] = None,
    temperature: float = 0.0,
) -> TaskFrame:
    """Step 1 output: every schema slot is either UserStated or listed missing."""
    if task is TaskClass.UNKNOWN:
        raise ValueError("cannot extract slots for Unknown task")
    prompt = "\n".join(
        [
            f"Task: {task.value}",
            "Slots:",
            *(_describe_slot(s) for s in schema),
            "",
            'Return JSON {"slots": {<name>: {"value": <value>, "span": <quoted source text>}}}',
            "containing only slots the request states explicitly.",
            "",
            f"Request: {utterance}",
        ]
    )
    response = gateway.chat(
        ChatRequest(
            system_instruction=EXTRACT_SYSTEM,
            messages=[Message("user", prompt)],
            temperature=temperature,
            response_hint=ResponseHint.JSON_OBJECT,
            tags=("extract",),
        )
    )
    try:
        data = json.loads(response.content)
        stated = data.get("slots", {}) if isinstance(data, dict) else {}
    except json.JSONDecodeError:
        stated = {}

    frame = TaskFrame(task=task, source_utterance=utterance, dialogue_context=list(context or []))
    for spec in schema:
        entry = stated.get(spec.name)
        if isinstance(entry, dict) and "value" in entry:
            try:
                value = spec.coerce(entry["value"])
            except ValueError:
                frame.missing.append(spec.name)
                continue
            frame.slots[spec.name] = SlotValue(
                name=spec.name,
                value=value,
                provenance=Provenance.USER_STATED,
                confidence=1.0,
                span=entry.get("span") or str(entry["value"]),
            )
        else:
            frame.missing.append(spec.name)
    frame.check_invariants()
    return frame


def fill_missing(
    gateway: LlmGateway,
    frame: TaskFrame,
    schema: list[SlotSpec],
    temperature: float = 0.7,
) -> tuple[TaskFrame, list[ClarificationQuestion]]:
    """Step 2: infer what policy allows, ask for the rest, drop optional slots.

    Optional slots that the user did not state are neither inferred nor asked;
    downstream checks treat them as absent requirements.
    """
    if not frame.missing:
        return frame, []
    by_name = {s.name: s for s in schema}
    infer = [n for n in frame.missing if by_name[n].required and by_name[n].policy is FillPolicy.INFER_ALLOWED]
    ask = [n for n in frame.missing if by_name[n].required and by_name[n].policy is FillPolicy.MUST_ASK]
    frame.missing = [n for n in frame.missing if by_name[n].required]

    if infer:
        known = [f"- {s.name}: {s.value}" for s in frame.slots.values()]
        prompt = "\n".join(
            [
                f'The user asked: "{frame.source_utterance}"',
                "Known so far:" if known else "Nothing is known yet.",
                *known,
                "",
                "Provide reasonable values for:",
                *(_describe_slot(by_name[n]) for n in infer),
                "",
                "Return JSON mapping each slot name to its value.",
            ]
        )
        response = gateway.chat(
            ChatRequest(
                system_instruction=CONSULTANT_SYSTEM,
                messages=[Message("user", prompt)],
                temperature=temperature,
                response_hint=ResponseHint.JSON_OBJECT,
                tags=("fill",),
            )
        )
        try:
            proposed = json.loads(response.content)
            if not isinstance(proposed, dict):
                proposed = {}
        except json.JSONDecodeError:
            proposed = {}
        for name in infer:
            spec = by_name[name]
            if name in proposed:
                try:
                    value = spec.coerce(proposed[name])
                except ValueError:
                    ask.append(name)  # uncoercible proposal: fall back to asking
                    continue
                frame.slots[name] = SlotValue(
                    name=name,
                    value=value,
                    provenance=Provenance.INFERRED,
                    confidence=INFERRED_CONFIDENCE,
                )
                frame.missing.remove(name)
            else:
                ask.append(name)

    questions = [
        ClarificationQuestion(slot=n, text=by_name[n].question, suggested=by_name[n].suggested)
        for n in ask
    ]
    frame.check_invariants()
    return frame, questions


def apply_answer(
    frame: TaskFrame,
    question: ClarificationQuestion,
    answer: str,
    schema: list[SlotSpec],
) -> TaskFrame:
    """Fill one slot from a user answer; the frame is untouched on parse failure."""
    if question.slot not in frame.missing:
        raise UnknownSlotError(f"slot {question.slot!r} is not awaiting an answer")
    spec = next((s for s in schema if s.name == question.slot), None)
    if spec is None:
        raise UnknownSlotError(f"slot {question.slot!r} not in schema for {frame.task.value}")
    try:
        value = spec.coerce(answer)
    except ValueError as exc:
        raise UnparseableAnswerError(str(exc)) from exc
    frame.slots[question.slot] = SlotValue(
        name=question.slot,
        value=value,
        provenance=Provenance.USER_ANSWERED,
        confidence=1.0,
    )
    frame.missing.remove(question.slot)
    frame.check_invariants()
    return frame
