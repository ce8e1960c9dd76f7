"""Step 3 (Match): resolve free-text terms to library vocabulary.

Tiered resolution: Exact -> Normalized -> Synonym (alias table) -> Fuzzy
(normalized Levenshtein with threshold). Deterministic and total: every query
yields exactly one MatchResult.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from bimspeak.kernel import Material
from bimspeak.nlu.types import Provenance, SlotValue, TaskFrame

DEFAULT_THETA = 0.8

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def normalize_term(term: str) -> str:
    """Lowercase, trim, collapse whitespace, strip punctuation to spaces."""
    return _NON_ALNUM.sub(" ", term.lower()).strip()


def levenshtein(a: str, b: str) -> int:
    """Plain edit distance, two-row DP."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        curr = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            curr.append(min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost))
        prev = curr
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """1 - dist/maxlen over already-normalized strings; 1.0 iff equal."""
    if a == b:
        return 1.0
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


class MatchMethod(str, Enum):
    EXACT = "Exact"
    NORMALIZED = "Normalized"
    SYNONYM = "Synonym"
    FUZZY = "Fuzzy"
    NONE = "None"


@dataclass
class MatchResult:
    query: str
    matched: Optional[Material]
    score: float
    method: MatchMethod


AliasTable = dict[str, str]  # normalized alias -> canonical material name


def load_alias_table(path: str | Path | None = None) -> AliasTable:
    if path is None:
        raw = resources.files("bimspeak.data").joinpath("aliases.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    return {normalize_term(k): v for k, v in data.items()}


def match_term(
    term: str,
    library: Iterable[Material],
    theta: float = DEFAULT_THETA,
    aliases: Optional[AliasTable] = None,
) -> MatchResult:
    materials = list(library)
    if not materials:
        raise ValueError("library must be non-empty")
    by_name = {m.name: m for m in materials}

    if term in by_name:
        return MatchResult(term, by_name[term], 1.0, MatchMethod.EXACT)

    norm = normalize_term(term)
    by_norm = {normalize_term(m.name): m for m in materials}
    if norm in by_norm:
        return MatchResult(term, by_norm[norm], 1.0, MatchMethod.NORMALIZED)

    # synonym tier: material-local aliases first, then the external table
    for material in materials:
        if any(normalize_term(alias) == norm for alias in material.aliases):
            return MatchResult(term, material, 1.0, MatchMethod.SYNONYM)
    if aliases and norm in aliases:
        canonical = aliases[norm]
        target = by_name.get(canonical) or by_norm.get(normalize_term(canonical))
        if target is not None:
            return MatchResult(term, target, 1.0, MatchMethod.SYNONYM)

    best_score = -1.0
    best: Optional[Material] = None
    for material in sorted(materials, key=lambda m: m.name):  # tie -> smallest name
        score = similarity(norm, normalize_term(material.name))
        if score > best_score:
            best_score, best = score, material
    if best is not None and best_score >= theta:
        return MatchResult(term, best, best_score, MatchMethod.FUZZY)
    return MatchResult(term, None, max(best_score, 0.0), MatchMethod.NONE)


@dataclass
class GroundingReport:
    """What resolve_frame could not ground; downstream creates unverified materials."""

    unmatched: list[tuple[str, str]] = field(default_factory=list)  # (slot, term)
    resolved: list[tuple[str, str, str]] = field(default_factory=list)  # (slot, term, canonical)


def resolve_frame(
    frame: TaskFrame,
    library: Iterable[Material],
    theta: float = DEFAULT_THETA,
    aliases: Optional[AliasTable] = None,
    material_slots: tuple[str, ...] = ("structural_material",),
) -> tuple[TaskFrame, GroundingReport]:
    """Replace material terms with canonical names; report the rest."""
    report = GroundingReport()
    materials = list(library)
    for name in material_slots:
        slot = frame.slots.get(name)
        if slot is None or not isinstance(slot.value, str):
            continue
        result = match_term(slot.value, materials, theta=theta, aliases=aliases)
        if result.matched is not None:
            if result.matched.name != slot.value:
                frame.slots[name] = SlotValue(
                    name=name,
                    value=result.matched.name,
                    provenance=slot.provenance,
                    confidence=slot.confidence,
                    span=slot.span,
                )
            report.resolved.append((name, slot.value, result.matched.name))
        else:
            report.unmatched.append((name, slot.value))
    return frame, report
