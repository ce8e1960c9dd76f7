from bimspeak.grounding.match import (
    DEFAULT_THETA,
    AliasTable,
    GroundingReport,
    MatchMethod,
    MatchResult,
    levenshtein,
    load_alias_table,
    match_term,
    normalize_term,
    resolve_frame,
    similarity,
)
from bimspeak.grounding.structure import (
    STRUCTURING_INSTRUCTION,
    Mode,
    RepairState,
    StructuredPayload,
    Violation,
    ViolationCode,
    build_structuring_prompt,
    repair,
    validate_payload,
)

__all__ = [
    "DEFAULT_THETA",
    "AliasTable",
    "GroundingReport",
    "MatchMethod",
    "MatchResult",
    "Mode",
    "RepairState",
    "STRUCTURING_INSTRUCTION",
    "StructuredPayload",
    "Violation",
    "ViolationCode",
    "build_structuring_prompt",
    "levenshtein",
    "load_alias_table",
    "match_term",
    "normalize_term",
    "repair",
    "resolve_frame",
    "similarity",
    "validate_payload",
]
