"""Rule engine: boundary exactness, material matrix, report mechanics."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bimspeak.compliance import (
    CheckReport,
    RequirementContext,
    Severity,
    StructuralFamily,
    builtin_registry,
    derive_family,
    rule_min_structural_thickness,
    rule_requested_total_thickness,
    rule_structural_material,
    run_checks,
)
from bimspeak.grounding import load_alias_table
from bimspeak.kernel import LayerFunction, WallDetailSpec, WallLayer, seed_materials

LIBRARY = seed_materials()
ALIASES = load_alias_table()


def spec_with_structure(material="Reinforced Concrete", thickness=150.0, extra=()):
    layers = [
        WallLayer("Cement Render", LayerFunction.FINISH, 1.0, 20.0),
        WallLayer(material, LayerFunction.STRUCTURE, 2.3, thickness),
        *extra,
    ]
    return WallDetailSpec("Test Wall", layers)


def rc_ctx(min_thickness=None):
    return RequirementContext.build("reinforced concrete", min_thickness, LIBRARY, ALIASES)


def timber_ctx(min_thickness=None):
    return RequirementContext.build("timber", min_thickness, LIBRARY, ALIASES)


class TestFamilyDerivation:
    @pytest.mark.parametrize(
        "term, family",
        [
            ("reinforced concrete", StructuralFamily.REINFORCED_CONCRETE),
            ("Reinforced Concrete", StructuralFamily.REINFORCED_CONCRETE),
            ("cast-in-place concrete", StructuralFamily.REINFORCED_CONCRETE),
            ("timber", StructuralFamily.TIMBER),
            ("Timber Stud", StructuralFamily.TIMBER),
            ("CLT Panel", StructuralFamily.TIMBER),
            ("Brick Veneer", StructuralFamily.OTHER),
            ("unobtainium", StructuralFamily.OTHER),
        ],
    )
    def test_mapping(self, term, family):
        assert derive_family(term) is family

    def test_context_builder_canonicalizes(self):
        ctx = timber_ctx()
        assert ctx.requested_structural_material == "Timber Stud"
        assert ctx.structural_family is StructuralFamily.TIMBER


class TestThicknessBoundaries:
    """The acceptance boundary suite: exact thresholds, 1e-6 mm tolerance."""

    @pytest.mark.parametrize(
        "thickness, passes",
        [
            (100.0, True),
            (99.999, False),
            (100.001, True),
            (99.999999, False),
            (250.0, True),
        ],
    )
    def test_rc_threshold(self, thickness, passes):
        verdict = rule_min_structural_thickness(spec_with_structure(thickness=thickness), rc_ctx())
        assert verdict.passed is passes
        assert verdict.measured == pytest.approx(thickness)
        assert verdict.unit == "mm"

    @pytest.mark.parametrize(
        "thickness, passes",
        [
            (140.0, True),
            (190.0, True),
            (139.9, False),
            (190.1, False),
            (165.0, True),
            (200.0, False),
        ],
    )
    def test_timber_closed_range(self, thickness, passes):
        spec = spec_with_structure("Timber Stud", thickness)
        verdict = rule_min_structural_thickness(spec, timber_ctx())
        assert verdict.passed is passes

    def test_strict_rc_excludes_boundary(self):
        spec = spec_with_structure(thickness=100.0)
        assert rule_min_structural_thickness(spec, rc_ctx(), strict_rc=True).passed is False
        assert rule_min_structural_thickness(spec, rc_ctx(), strict_rc=False).passed is True

    def test_multiple_structure_layers_summed(self):
        extra = (WallLayer("Reinforced Concrete", LayerFunction.STRUCTURE, 2.3, 60.0),)
        spec = spec_with_structure(thickness=50.0, extra=extra)
        verdict = rule_min_structural_thickness(spec, rc_ctx())
        assert verdict.measured == pytest.approx(110.0)
        assert verdict.passed

    def test_other_family_is_advisory_pass(self):
        ctx = RequirementContext.build("Brick Veneer", None, LIBRARY, ALIASES)
        verdict = rule_min_structural_thickness(spec_with_structure("Brick Veneer", 10.0), ctx)
        assert verdict.passed
        assert verdict.severity is Severity.ADVISORY

    @given(st.floats(min_value=100.0, max_value=2000.0, allow_nan=False))
    @settings(max_examples=100)
    def test_rc_monotone_in_thickness(self, thickness):
        # increasing RC structure thickness never flips pass -> fail
        assert rule_min_structural_thickness(spec_with_structure(thickness=thickness), rc_ctx()).passed


# 12-case matrix: requested material x structure layer material
MATERIAL_MATRIX = [
    ("reinforced concrete", "Reinforced Concrete", True),
    ("reinforced concrete", "reinforced concrete", True),  # normalized comparison
    ("reinforced concrete", "Timber Stud", False),
    ("reinforced concrete", "CLT Panel", False),
    ("reinforced concrete", None, False),  # no structural layer
    ("reinforced concrete", "Brick Veneer", False),
    ("timber", "Timber Stud", True),  # alias grounds to Timber Stud
    ("timber", "Reinforced Concrete", False),
    ("timber", "CLT Panel", False),  # canonical-name comparison, not family
    ("timber", None, False),
    ("Timber Stud", "Timber Stud", True),
    (None, "Reinforced Concrete", True),  # nothing requested: skip-pass
]


class TestMaterialMatrix:
    @pytest.mark.parametrize("requested, structure, passes", MATERIAL_MATRIX)
    def test_case(self, requested, structure, passes):
        if structure is None:
            spec = WallDetailSpec("T", [WallLayer("Cement Render", LayerFunction.FINISH, 1.0, 20.0)])
        else:
            spec = spec_with_structure(structure, 150.0)
        ctx = RequirementContext.build(requested, None, LIBRARY, ALIASES)
        verdict = rule_structural_material(spec, ctx)
        assert verdict.passed is passes, verdict.message

    def test_matrix_has_twelve_cases(self):
        assert len(MATERIAL_MATRIX) == 12

    def test_failure_names_both_materials(self):
        verdict = rule_structural_material(spec_with_structure("Timber Stud"), rc_ctx())
        assert "Timber Stud" in verdict.message
        assert "Reinforced Concrete" in verdict.message

    def test_no_structural_layer_message(self):
        spec = WallDetailSpec("T", [WallLayer("Mineral Wool", LayerFunction.INSULATION, 0.04, 80.0)])
        verdict = rule_structural_material(spec, rc_ctx())
        assert not verdict.passed
        assert "no structural layer" in verdict.message


class TestRequestedTotalThickness:
    def test_meets_requested(self):
        spec = spec_with_structure(thickness=200.0)  # total 220
        verdict = rule_requested_total_thickness(spec, rc_ctx(min_thickness=140.0))
        assert verdict.passed and verdict.measured == pytest.approx(220.0)

    def test_under_requested(self):
        spec = spec_with_structure(thickness=119.0)  # total 139
        verdict = rule_requested_total_thickness(spec, rc_ctx(min_thickness=140.0))
        assert not verdict.passed

    def test_exactly_requested(self):
        spec = spec_with_structure(thickness=120.0)  # total 140
        assert rule_requested_total_thickness(spec, rc_ctx(min_thickness=140.0)).passed

    def test_absent_request_skips(self):
        verdict = rule_requested_total_thickness(spec_with_structure(), rc_ctx())
        assert verdict.passed and verdict.skipped


class TestRunChecks:
    def compliant_spec(self):
        return WallDetailSpec(
            "CE1 Wall",
            [
                WallLayer("Cement Render", LayerFunction.FINISH, 1.0, 10.0),
                WallLayer("Mineral Wool", LayerFunction.INSULATION, 0.038, 80.0),
                WallLayer("Reinforced Concrete", LayerFunction.STRUCTURE, 2.3, 150.0),
                WallLayer("Gypsum Plaster", LayerFunction.FINISH, 0.51, 10.0),
            ],
        )

    def test_compliant_spec_three_verdicts(self):
        report = run_checks(self.compliant_spec(), rc_ctx(min_thickness=140.0), builtin_registry())
        assert report.overall
        assert len(report.verdicts) == 3

    def test_single_failure_still_reports_all(self):
        spec = self.compliant_spec()
        spec.layers[2] = WallLayer("Timber Stud", LayerFunction.STRUCTURE, 0.12, 150.0)
        report = run_checks(spec, rc_ctx(min_thickness=140.0), builtin_registry())
        assert not report.overall
        assert len(report.verdicts) == 3
        assert [v.rule_id for v in report.failed] == ["structural_material"]

    def test_empty_registry_vacuous_pass(self):
        report = run_checks(self.compliant_spec(), rc_ctx(), [])
        assert report.overall and report.verdicts == []

    def test_deterministic(self):
        ctx = rc_ctx(min_thickness=140.0)
        a = run_checks(self.compliant_spec(), ctx, builtin_registry())
        b = run_checks(self.compliant_spec(), ctx, builtin_registry())
        assert a.to_dict() == b.to_dict()

    def test_registry_params_override(self):
        registry = builtin_registry(params={"rc_min": 200.0})
        report = run_checks(self.compliant_spec(), rc_ctx(), registry)
        assert not report.overall  # 150 mm under the overridden 200 mm floor

    def test_report_serialization(self):
        report = run_checks(self.compliant_spec(), rc_ctx(min_thickness=140.0), builtin_registry())
        doc = report.to_dict()
        assert doc["overall"] is True
        assert doc["attempt"] == 1
        assert {v["rule"] for v in doc["verdicts"]} == {
            "structural_material",
            "structural_thickness",
            "requested_total_thickness",
        }

    def test_advisory_does_not_block(self):
        ctx = RequirementContext.build("Brick Veneer", None, LIBRARY, ALIASES)
        spec = spec_with_structure("Brick Veneer", 10.0)
        report = run_checks(spec, ctx, builtin_registry())
        thickness = next(v for v in report.verdicts if v.rule_id == "structural_thickness")
        assert thickness.severity is Severity.ADVISORY
        assert report.overall
