from bimspeak.compliance.rules import (
    FAMILY_BY_MATERIAL,
    CheckReport,
    RequirementContext,
    Rule,
    RuleVerdict,
    Severity,
    StructuralFamily,
    builtin_registry,
    derive_family,
    load_rule_params,
    rule_min_structural_thickness,
    rule_requested_total_thickness,
    rule_structural_material,
    run_checks,
)

__all__ = [
    "CheckReport",
    "FAMILY_BY_MATERIAL",
    "RequirementContext",
    "Rule",
    "RuleVerdict",
    "Severity",
    "StructuralFamily",
    "builtin_registry",
    "derive_family",
    "load_rule_params",
    "rule_min_structural_thickness",
    "rule_requested_total_thickness",
    "rule_structural_material",
    "run_checks",
]
