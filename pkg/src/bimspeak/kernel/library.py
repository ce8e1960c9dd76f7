"""Seed material library.

Fixture data only: names, layer roles, and round-number conductivities chosen
to give the matcher and the rule engine a realistic vocabulary to resolve
against. Do not treat the W/(m·K) values as engineering input.
"""

from __future__ import annotations

from bimspeak.kernel.model import LayerFunction, Material, Project

_F = LayerFunction

# (name, default layer function, thermal conductivity W/(m·K), aliases)
_SEED_MATERIALS: tuple[tuple[str, LayerFunction, float, tuple[str, ...]], ...] = (
    ("Reinforced Concrete", _F.STRUCTURE, 2.3, ("rc", "reinforced cement concrete")),
    ("Cast-in-place Concrete", _F.STRUCTURE, 1.95, ("cip concrete", "in-situ concrete")),
    ("Precast Concrete Panel", _F.STRUCTURE, 2.0, ("precast panel",)),
    ("Concrete Masonry Unit", _F.STRUCTURE, 0.9, ("cmu", "concrete block")),
    ("Structural Brick", _F.STRUCTURE, 0.77, ("brick masonry",)),
    ("Timber Stud", _F.STRUCTURE, 0.12, ("wood stud", "timber frame")),
    ("CLT Panel", _F.STRUCTURE, 0.13, ("clt", "cross laminated timber")),
    ("Mineral Wool", _F.INSULATION, 0.038, ("rock wool", "stone wool")),
    ("EPS Insulation", _F.INSULATION, 0.035, ("eps", "expanded polystyrene")),
    ("XPS Insulation", _F.INSULATION, 0.032, ("xps", "extruded polystyrene")),
    ("Polyurethane Foam Board", _F.INSULATION, 0.025, ("pur board", "pu foam board")),
    ("Fiberglass Batt", _F.INSULATION, 0.04, ("glass wool", "fibreglass batt")),
    ("Cellulose Fill", _F.INSULATION, 0.04, ("blown cellulose",)),
    ("Gypsum Wallboard", _F.FINISH, 0.25, ("drywall", "plasterboard")),
    ("Gypsum Plaster", _F.FINISH, 0.51, ("plaster",)),
    ("Cement Render", _F.FINISH, 1.0, ("stucco", "cement plaster")),
    ("Brick Veneer", _F.FINISH, 0.84, ("face brick", "brick cladding")),
    ("Timber Cladding", _F.FINISH, 0.14, ("wood siding", "timber siding")),
    ("Plywood Sheathing", _F.SUBSTRATE, 0.13, ("plywood", "ply sheathing")),
    ("OSB Sheathing", _F.SUBSTRATE, 0.13, ("osb", "oriented strand board")),
    ("Vapor Membrane", _F.MEMBRANE, 0.17, ("vapor barrier", "vapour barrier")),
    ("Air Barrier Membrane", _F.MEMBRANE, 0.2, ("air barrier", "house wrap")),
)


def seed_materials() -> list[Material]:
    return [
        Material(
            id=f"mat-{i:04d}",
            name=name,
            default_layer_type=kind,
            thermal_conductivity=k,
            aliases=aliases,
        )
        for i, (name, kind, k, aliases) in enumerate(_SEED_MATERIALS, start=1)
    ]


def new_project(materials: list[Material] | None = None) -> Project:
    """Fresh project preloaded with the seed library (or the given one)."""
    project = Project()
    for mat in seed_materials() if materials is None else materials:
        project.material_library[mat.id] = mat
    return project
