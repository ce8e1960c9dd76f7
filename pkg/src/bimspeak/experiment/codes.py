"""Prompt codes for the eight-way wall-detail evaluation.

A code is material x insulation x size: C/T = reinforced concrete/timber,
E/I = exterior/interior insulation, 1/2 = the smaller/larger thickness for
that material (140/190 mm for concrete, 140/184 mm for timber).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

MATERIAL_WORD = {"C": "reinforced concrete", "T": "timber"}
INSULATION_WORD = {"E": "exterior", "I": "interior"}
THICKNESS_MM = {("C", 1): 140, ("C", 2): 190, ("T", 1): 140, ("T", 2): 184}

_CODE_RE = re.compile(r"^([CT])([EI])([12])$")

_TEMPLATE = (
    "Propose a wall detail using a {material} structure and {insulation} "
    "insulation method, ensuring a minimum thickness of {thickness} mm."
)


@dataclass(frozen=True)
class PromptCode:
    material: str  # "C" | "T"
    insulation: str  # "E" | "I"
    size: int  # 1 | 2

    def __post_init__(self):
        if (self.material, self.size) not in THICKNESS_MM or self.insulation not in INSULATION_WORD:
            raise ValueError(f"invalid prompt code {self.material}{self.insulation}{self.size}")

    @classmethod
    def parse(cls, text: str) -> "PromptCode":
        m = _CODE_RE.match(text.strip().upper())
        if not m:
            raise ValueError(f"prompt code must look like CE1/TI2, got {text!r}")
        return cls(material=m.group(1), insulation=m.group(2), size=int(m.group(3)))

    @property
    def code(self) -> str:
        return f"{self.material}{self.insulation}{self.size}"

    @property
    def material_word(self) -> str:
        return MATERIAL_WORD[self.material]

    @property
    def insulation_word(self) -> str:
        return INSULATION_WORD[self.insulation]

    @property
    def thickness_mm(self) -> int:
        return THICKNESS_MM[(self.material, self.size)]


ALL_CODES = tuple(
    PromptCode(m, i, s) for m in ("C", "T") for i in ("E", "I") for s in (1, 2)
)


def expand_prompt_code(code: PromptCode) -> str:
    return _TEMPLATE.format(
        material=code.material_word,
        insulation=code.insulation_word,
        thickness=code.thickness_mm,
    )


def parse_code_list(text: str) -> list[PromptCode]:
    return [PromptCode.parse(part) for part in text.split(",") if part.strip()]
