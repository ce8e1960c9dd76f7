from bimspeak.nlu.pipeline import (
    apply_answer,
    classify_task,
    extract_slots,
    fill_missing,
)
from bimspeak.nlu.types import (
    ClarificationQuestion,
    FillPolicy,
    Provenance,
    SlotSpec,
    SlotValue,
    TaskClass,
    TaskFrame,
    load_slot_schemas,
    parse_length_mm,
    parse_number,
)

__all__ = [
    "ClarificationQuestion",
    "FillPolicy",
    "Provenance",
    "SlotSpec",
    "SlotValue",
    "TaskClass",
    "TaskFrame",
    "apply_answer",
    "classify_task",
    "extract_slots",
    "fill_missing",
    "load_slot_schemas",
    "parse_length_mm",
    "parse_number",
]
