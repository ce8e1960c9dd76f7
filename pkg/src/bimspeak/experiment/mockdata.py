"""Scripted mock content: the experiment script and the interactive demo.

The experiment script answers every pipeline call for the eight prompt
codes. Fault injection lives solely on the structuring rules, as a
RuleViolation swapping in a spec that breaks exactly one of the two scored
requirements: concrete codes get an undersized structure (thickness
criterion fails), timber codes get a concrete structure (material criterion
fails). Classification and extraction never fail, which keeps one RNG draw
per structuring call and makes first-attempt pass rates track 1 - p.
"""

from __future__ import annotations

import hashlib
import json

from ..gateway import FailureSpec, MockRule, MockScript
from .codes import ALL_CODES, PromptCode, expand_prompt_code


def _layer(material: str, layer_type: str, conductivity: float, thickness: float) -> dict:
    return {
        "material": material,
        "layer_type": layer_type,
        "thermal_conductivity": conductivity,
        "thickness": thickness,
    }


def compliant_spec(code: PromptCode) -> dict:
    """A detail that satisfies all three built-in rules for this code."""
    name = f"{code.code} Wall Detail"
    if code.material == "C":
        structure = _layer("Reinforced Concrete", "Structure", 2.3, 150)
        insulation = _layer("Mineral Wool", "Insulation", 0.038, 80)
        outer = _layer("Cement Render", "Finish", 1.0, 10)
        inner = _layer("Gypsum Plaster", "Finish", 0.4, 10)
    else:
        structure = _layer("Timber Stud", "Structure", 0.12, code.thickness_mm)
        insulation = _layer("Mineral Wool", "Insulation", 0.038, 60)
        outer = _layer("Timber Cladding", "Finish", 0.14, 20)
        inner = _layer("Gypsum Wallboard", "Finish", 0.25, 12.5)
    if code.insulation == "E":
        layers = [outer, insulation, structure, inner]
    else:
        layers = [outer, structure, insulation, inner]
    return {"wall_detail_name": name, "layers": layers}


def violating_spec(code: PromptCode) -> dict:
    """Break exactly one scored criterion, and keep the payload well-formed."""
    spec = compliant_spec(code)
    spec["wall_detail_name"] = f"{code.code} Wall Detail"
    if code.material == "C":
        # Undersized structure and a total below the requested minimum.
        spec["layers"] = [
            _layer("Cement Render", "Finish", 1.0, 10),
            _layer("Mineral Wool", "Insulation", 0.038, 20),
            _layer("Reinforced Concrete", "Structure", 2.3, 90),
            _layer("Gypsum Plaster", "Finish", 0.4, 10),
        ]
    else:
        # Concrete where timber was requested; thickness bounds all pass.
        for layer in spec["layers"]:
            if layer["layer_type"] == "Structure":
                layer["material"] = "Reinforced Concrete"
                layer["thermal_conductivity"] = 2.3
                layer["thickness"] = 150
    return spec


def _extraction_for(code: PromptCode) -> str:
    return json.dumps(
        {
            "slots": {
                "structural_material": {
                    "value": code.material_word,
                    "span": f"{code.material_word} structure",
                },
                "insulation_method": {
                    "value": code.insulation_word,
                    "span": f"{code.insulation_word} insulation method",
                },
                "min_thickness": {
                    "value": f"{code.thickness_mm} mm",
                    "span": f"minimum thickness of {code.thickness_mm} mm",
                },
            }
        }
    )


GENERIC_FILL = json.dumps(
    {
        "structural_material": "reinforced concrete",
        "layer_composition": "exterior finish, insulation, structural core, interior finish",
    }
)


def experiment_script(violation_p: float = 0.3) -> MockScript:
    rules = [
        MockRule(
            name="classify-wall", tag="classify", substring="request: propose a wall detail",
            response="CreateWallDetail",
        ),
        MockRule(name="classify-fallback", tag="classify", response="Unknown"),
    ]
    for code in ALL_CODES:
        rules.append(
            MockRule(
                name=f"extract-{code.code}",
                tag="extract",
                substring=expand_prompt_code(code),
                response=_extraction_for(code),
            )
        )
    rules.append(MockRule(name="fill-generic", tag="fill", response=GENERIC_FILL))
    for code in ALL_CODES:
        failure = None
        if violation_p > 0:
            failure = FailureSpec(
                mode="RuleViolation",
                probability=violation_p,
                rule_id="structural_thickness" if code.material == "C" else "structural_material",
                response=json.dumps(violating_spec(code)),
            )
        rules.append(
            MockRule(
                name=f"structure-{code.code}",
                tag="structure",
                substring=expand_prompt_code(code),
                response=json.dumps(compliant_spec(code)),
                failure=failure,
            )
        )
    return MockScript(rules=rules)


# -- interactive demo --------------------------------------------------------

ALASKA_UTTERANCE = "Create an exterior wall for Alaska."
ALASKA_AUDIO = b"alaska-voice-sample"
ALASKA_DIGEST = hashlib.sha256(ALASKA_AUDIO).hexdigest()

_RC_DEMO_SPEC = json.dumps(
    {
        "wall_detail_name": "RC Exterior Insulated Wall",
        "layers": [
            _layer("Cement Render", "Finish", 1.0, 10),
            _layer("Mineral Wool", "Insulation", 0.038, 120),
            _layer("Reinforced Concrete", "Structure", 2.3, 150),
            _layer("Gypsum Plaster", "Finish", 0.4, 10),
        ],
    }
)

_TIMBER_DEMO_SPEC = json.dumps(
    {
        "wall_detail_name": "Timber Frame Exterior Wall",
        "layers": [
            _layer("Timber Cladding", "Finish", 0.14, 20),
            _layer("Mineral Wool", "Insulation", 0.038, 120),
            _layer("Timber Stud", "Structure", 0.12, 140),
            _layer("Gypsum Wallboard", "Finish", 0.25, 12.5),
        ],
    }
)


def demo_script() -> MockScript:
    """Handles the rotate example, the Alaska walk-through, and CE1-style prompts."""
    # classify substrings anchor on "request: ..." so stale dialogue context
    # (e.g. "created wall type ...") cannot hijack a later classification
    rules = [
        MockRule(name="classify-rotate", tag="classify", substring="request: rotate", response="SimpleTransform"),
        MockRule(name="classify-window", tag="classify", substring="request: place a window", response="PlaceWindow"),
        MockRule(name="classify-column", tag="classify", substring="request: delete", response="DeleteColumn"),
        MockRule(
            name="classify-create-wall", tag="classify", substring="request: create an exterior wall",
            response="CreateWallDetail",
        ),
        MockRule(
            name="classify-wall-detail", tag="classify", substring="request: propose a wall detail",
            response="CreateWallDetail",
        ),
        MockRule(name="classify-fallback", tag="classify", response="Unknown"),
        MockRule(
            name="extract-rotate-full",
            tag="extract",
            substring="rotate a model 90 degrees on the x axis",
            response=json.dumps(
                {"slots": {"axis": {"value": "X", "span": "X axis"}, "degrees": {"value": 90, "span": "90 degrees"}}}
            ),
        ),
        MockRule(
            name="extract-alaska",
            tag="extract",
            substring="alaska",
            response=json.dumps(
                {"slots": {"insulation_method": {"value": "exterior", "span": "exterior wall"}}}
            ),
        ),
        MockRule(
            name="extract-ce1",
            tag="extract",
            substring="reinforced concrete structure and exterior insulation",
            response=json.dumps(
                {
                    "slots": {
                        "structural_material": {"value": "reinforced concrete", "span": "reinforced concrete structure"},
                        "insulation_method": {"value": "exterior", "span": "exterior insulation method"},
                        "min_thickness": {"value": "140 mm", "span": "minimum thickness of 140 mm"},
                    }
                }
            ),
        ),
        MockRule(name="extract-fallback", tag="extract", response=json.dumps({"slots": {}})),
        MockRule(name="fill-generic", tag="fill", response=GENERIC_FILL),
        # structure rules key on the post-Match design-decision line; a bare
        # "timber" would false-match the fused prompt's material vocabulary
        MockRule(
            name="structure-timber", tag="structure",
            substring="structural_material: timber stud", response=_TIMBER_DEMO_SPEC,
        ),
        MockRule(name="structure-rc", tag="structure", response=_RC_DEMO_SPEC),
    ]
    return MockScript(rules=rules, transcripts={ALASKA_DIGEST: ALASKA_UTTERANCE})
