"""Embedded minimal BIM kernel: layered wall types, placed instances, materials."""

from bimspeak.kernel.model import (
    Baseline,
    ExecutionResult,
    LayerFunction,
    Material,
    Project,
    WallDetailSpec,
    WallInstance,
    WallLayer,
    WallType,
)
from bimspeak.kernel.ops import (
    apply_wall_detail,
    create_wall_type,
    delete_wall_type,
    duplicate_wall_type,
    modify_wall_type,
    place_wall,
    replace_wall_type,
    total_thickness,
)
from bimspeak.kernel.store import (
    load_project,
    project_to_dict,
    save_project,
    spec_from_dict,
    spec_to_dict,
)
from bimspeak.kernel.library import new_project, seed_materials
from bimspeak.kernel.tasks import apply_transform, delete_column_stub, place_window_stub

__all__ = [
    "Baseline",
    "ExecutionResult",
    "LayerFunction",
    "Material",
    "Project",
    "WallDetailSpec",
    "WallInstance",
    "WallLayer",
    "WallType",
    "apply_wall_detail",
    "create_wall_type",
    "delete_wall_type",
    "duplicate_wall_type",
    "modify_wall_type",
    "place_wall",
    "replace_wall_type",
    "total_thickness",
    "save_project",
    "load_project",
    "project_to_dict",
    "spec_to_dict",
    "spec_from_dict",
    "new_project",
    "seed_materials",
    "apply_transform",
    "place_window_stub",
    "delete_column_stub",
]
