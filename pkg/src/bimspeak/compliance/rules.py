"""Step 6 (Check): the rule engine behind the execute-until-compliant loop.

Pure functions over (WallDetailSpec, RequirementContext). Boundary math uses
an absolute 1e-6 mm tolerance so exact threshold values pass and anything
measurably under fails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional

from bimspeak.grounding.match import AliasTable, match_term, normalize_term
from bimspeak.kernel import LayerFunction, Material, WallDetailSpec, total_thickness

MM_TOL = 1e-6


class Severity(str, Enum):
    BLOCKING = "Blocking"
    ADVISORY = "Advisory"


class StructuralFamily(str, Enum):
    REINFORCED_CONCRETE = "ReinforcedConcrete"
    TIMBER = "Timber"
    OTHER = "Other"


# fixed mapping table, normalized material term -> family
FAMILY_BY_MATERIAL: dict[str, StructuralFamily] = {
    "reinforced concrete": StructuralFamily.REINFORCED_CONCRETE,
    "reinforced cement concrete": StructuralFamily.REINFORCED_CONCRETE,
    "cast in place concrete": StructuralFamily.REINFORCED_CONCRETE,
    "in situ concrete": StructuralFamily.REINFORCED_CONCRETE,
    "precast concrete panel": StructuralFamily.REINFORCED_CONCRETE,
    "precast concrete": StructuralFamily.REINFORCED_CONCRETE,
    "concrete": StructuralFamily.REINFORCED_CONCRETE,
    "concrete masonry unit": StructuralFamily.REINFORCED_CONCRETE,
    "timber": StructuralFamily.TIMBER,
    "timber stud": StructuralFamily.TIMBER,
    "timber frame": StructuralFamily.TIMBER,
    "wood": StructuralFamily.TIMBER,
    "wood stud": StructuralFamily.TIMBER,
    "clt panel": StructuralFamily.TIMBER,
    "clt": StructuralFamily.TIMBER,
    "cross laminated timber": StructuralFamily.TIMBER,
}


def derive_family(material_term: str) -> StructuralFamily:
    return FAMILY_BY_MATERIAL.get(normalize_term(material_term), StructuralFamily.OTHER)


@dataclass
class RequirementContext:
    requested_structural_material: Optional[str]
    requested_min_thickness: Optional[float]
    structural_family: StructuralFamily

    @classmethod
    def build(
        cls,
        material_term: Optional[str],
        min_thickness_mm: Optional[float] = None,
        library: Optional[Iterable[Material]] = None,
        aliases: Optional[AliasTable] = None,
        theta: float = 0.8,
    ) -> "RequirementContext":
        """Canonicalize the requested material Match-style when a library is given."""
        canonical = material_term
        if material_term and library:
            result = match_term(material_term, library, theta=theta, aliases=aliases)
            if result.matched is not None:
                canonical = result.matched.name
        family = derive_family(canonical) if canonical else StructuralFamily.OTHER
        return cls(
            requested_structural_material=canonical,
            requested_min_thickness=min_thickness_mm,
            structural_family=family,
        )


@dataclass
class RuleVerdict:
    rule_id: str
    passed: bool
    expected: str
    message: str
    measured: Optional[float] = None
    unit: Optional[str] = None
    severity: Severity = Severity.BLOCKING
    skipped: bool = False

    def __post_init__(self):
        if not self.passed and not self.message:
            raise AssertionError("failed verdicts must carry a message")


@dataclass
class CheckReport:
    verdicts: list[RuleVerdict]
    attempt: int = 1

    @property
    def overall(self) -> bool:
        return all(v.passed for v in self.verdicts if v.severity is Severity.BLOCKING)

    @property
    def failed(self) -> list[RuleVerdict]:
        return [v for v in self.verdicts if not v.passed]

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "attempt": self.attempt,
            "verdicts": [
                {
                    "rule": v.rule_id,
                    "passed": v.passed,
                    "measured": v.measured,
                    "unit": v.unit,
                    "expected": v.expected,
                    "message": v.message,
                    "severity": v.severity.value,
                    "skipped": v.skipped,
                }
                for v in self.verdicts
            ],
        }


def _structure_layers(spec: WallDetailSpec):
    return [l for l in spec.layers if l.layer_type is LayerFunction.STRUCTURE]


def rule_structural_material(spec: WallDetailSpec, ctx: RequirementContext) -> RuleVerdict:
    rule_id = "structural_material"
    if not ctx.requested_structural_material:
        return RuleVerdict(
            rule_id,
            passed=True,
            expected="no structural material requested",
            message="skipped: prompt named no structural material",
            skipped=True,
        )
    wanted = normalize_term(ctx.requested_structural_material)
    structures = _structure_layers(spec)
    if not structures:
        return RuleVerdict(
            rule_id,
            passed=False,
            expected=ctx.requested_structural_material,
            message="no structural layer present",
        )
    names = [l.material for l in structures]
    if any(normalize_term(n) == wanted for n in names):
        return RuleVerdict(
            rule_id,
            passed=True,
            expected=ctx.requested_structural_material,
            message=f"structure uses {ctx.requested_structural_material}",
        )
    return RuleVerdict(
        rule_id,
        passed=False,
        expected=ctx.requested_structural_material,
        message=(
            f"structural layer uses {', '.join(sorted(set(names)))}; "
            f"requested {ctx.requested_structural_material}"
        ),
    )


def rule_min_structural_thickness(
    spec: WallDetailSpec,
    ctx: RequirementContext,
    rc_min: float = 100.0,
    timber_min: float = 140.0,
    timber_max: float = 190.0,
    strict_rc: bool = False,
) -> RuleVerdict:
    rule_id = "structural_thickness"
    measured = sum(l.thickness for l in _structure_layers(spec))
    if ctx.structural_family is StructuralFamily.REINFORCED_CONCRETE:
        passed = measured > rc_min if strict_rc else measured > rc_min - MM_TOL
        expected = f"> {rc_min:g} mm" if strict_rc else f">= {rc_min:g} mm"
        message = (
            f"structural thickness {measured:g} mm meets {expected}"
            if passed
            else f"structural thickness {measured:g} mm is under the {rc_min:g} mm minimum"
        )
        return RuleVerdict(rule_id, passed, expected, message, measured=measured, unit="mm")
    if ctx.structural_family is StructuralFamily.TIMBER:
        passed = measured > timber_min - MM_TOL and measured < timber_max + MM_TOL
        expected = f"{timber_min:g} to {timber_max:g} mm"
        if passed:
            message = f"structural thickness {measured:g} mm is within {expected}"
        elif measured < timber_min:
            message = f"structural thickness {measured:g} mm is under the {timber_min:g} mm minimum"
        else:
            message = f"structural thickness {measured:g} mm exceeds the {timber_max:g} mm maximum"
        return RuleVerdict(rule_id, passed, expected, message, measured=measured, unit="mm")
    return RuleVerdict(
        rule_id,
        passed=True,
        expected="no thickness rule for this structural family",
        message="advisory: no structural thickness rule applies",
        measured=measured,
        unit="mm",
        severity=Severity.ADVISORY,
    )


def rule_requested_total_thickness(spec: WallDetailSpec, ctx: RequirementContext) -> RuleVerdict:
    rule_id = "requested_total_thickness"
    if ctx.requested_min_thickness is None:
        return RuleVerdict(
            rule_id,
            passed=True,
            expected="no total thickness requested",
            message="skipped: prompt stated no minimum thickness",
            skipped=True,
        )
    requested = ctx.requested_min_thickness
    measured = total_thickness(spec)
    passed = measured > requested - MM_TOL
    message = (
        f"total thickness {measured:g} mm meets the requested {requested:g} mm minimum"
        if passed
        else f"total thickness {measured:g} mm is under the requested {requested:g} mm minimum"
    )
    return RuleVerdict(
        rule_id, passed, f">= {requested:g} mm", message, measured=measured, unit="mm"
    )


@dataclass
class Rule:
    id: str
    description: str
    severity: Severity
    fn: Callable[[WallDetailSpec, RequirementContext], RuleVerdict]


def builtin_registry(
    params: Optional[dict] = None, strict_rc: bool = False
) -> list[Rule]:
    p = dict(rc_min=100.0, timber_min=140.0, timber_max=190.0)
    if params:
        p.update({k: float(v) for k, v in params.items() if k in p})

    def thickness_rule(spec, ctx):
        return rule_min_structural_thickness(spec, ctx, strict_rc=strict_rc, **p)

    return [
        Rule(
            "structural_material",
            "the requested structural material is employed",
            Severity.BLOCKING,
            rule_structural_material,
        ),
        Rule(
            "structural_thickness",
            "load-bearing thickness within the accepted range for the family",
            Severity.BLOCKING,
            thickness_rule,
        ),
        Rule(
            "requested_total_thickness",
            "total thickness meets the minimum stated in the prompt",
            Severity.BLOCKING,
            rule_requested_total_thickness,
        ),
    ]


def load_rule_params(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("rule params file must hold a JSON object")
    return data


def run_checks(
    spec: WallDetailSpec,
    ctx: RequirementContext,
    registry: list[Rule],
    attempt: int = 1,
) -> CheckReport:
    """Evaluate every rule, no short-circuit, so reports are complete."""
    return CheckReport(verdicts=[rule.fn(spec, ctx) for rule in registry], attempt=attempt)
