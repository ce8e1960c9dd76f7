"""Kernel operations over a project.

Every mutating operation is transactional: all validation happens before any
state is touched, so a raised error leaves the project exactly as it was.
Mutations on one project must not be interleaved across threads; concurrent
reads between mutations are fine.
"""

from __future__ import annotations

import math

from bimspeak.errors import (
    DuplicateNameError,
    InUseError,
    InvalidGeometryError,
    InvalidSpecError,
    NotFoundError,
)
from bimspeak.kernel.model import (
    Baseline,
    ExecutionResult,
    Material,
    Project,
    WallDetailSpec,
    WallInstance,
    WallType,
    _name_key,
)


def total_thickness(spec: WallDetailSpec) -> float:
    """Exact sum of layer thicknesses in mm."""
    return math.fsum(layer.thickness for layer in spec.layers)


def _require_valid(spec: WallDetailSpec) -> None:
    problems = spec.problems()
    if problems:
        path, message = problems[0]
        raise InvalidSpecError(path, message)


def _ensure_materials(project: Project, spec: WallDetailSpec) -> list[str]:
    """Resolve layer materials against the library, auto-adding unknowns.

    Known materials are rewritten to their canonical library name (matching is
    case-insensitive on names and aliases). Unknown ones are added flagged
    `unverified` so model-invented vocabulary stays visible. Returns the ids
    of materials that were added.
    """
    added: list[str] = []
    alias_index: dict[str, Material] = {}
    for mat in project.material_library.values():
        alias_index[_name_key(mat.name)] = mat
        for alias in mat.aliases:
            alias_index.setdefault(_name_key(alias), mat)
    for layer in spec.layers:
        key = _name_key(layer.material)
        mat = alias_index.get(key)
        if mat is None:
            mat = Material(
                id=project.next_id("mat"),
                name=layer.material.strip(),
                default_layer_type=layer.layer_type,
                thermal_conductivity=layer.thermal_conductivity,
                unverified=True,
            )
            project.material_library[mat.id] = mat
            alias_index[key] = mat
            added.append(mat.id)
        layer.material = mat.name
    return added


def create_wall_type(project: Project, spec: WallDetailSpec) -> str:
    """Add a new wall type; the name must be unused. Returns the new id."""
    _require_valid(spec)
    if project.wall_type_by_name(spec.wall_detail_name) is not None:
        raise DuplicateNameError(f"wall type named {spec.wall_detail_name!r} already exists")
    stored = spec.clone()
    _ensure_materials(project, stored)
    wall_type = WallType(id=project.next_id("wt"), spec=stored)
    project.wall_types[wall_type.id] = wall_type
    return wall_type.id


def duplicate_wall_type(project: Project, source_id: str, new_name: str) -> str:
    source = project.wall_types.get(source_id)
    if source is None:
        raise NotFoundError(f"wall type {source_id!r} not found")
    if not new_name or not new_name.strip():
        raise InvalidSpecError("wall_detail_name", "must be a non-empty string")
    if project.wall_type_by_name(new_name) is not None:
        raise DuplicateNameError(f"wall type named {new_name!r} already exists")
    spec = source.spec.clone()
    spec.wall_detail_name = new_name
    copy = WallType(id=project.next_id("wt"), spec=spec, created_from=source.id)
    project.wall_types[copy.id] = copy
    return copy.id


def modify_wall_type(project: Project, type_id: str, new_spec: WallDetailSpec) -> WallType:
    wall_type = project.wall_types.get(type_id)
    if wall_type is None:
        raise NotFoundError(f"wall type {type_id!r} not found")
    _require_valid(new_spec)
    holder = project.wall_type_by_name(new_spec.wall_detail_name)
    if holder is not None and holder.id != type_id:
        raise DuplicateNameError(f"wall type named {new_spec.wall_detail_name!r} already exists")
    stored = new_spec.clone()
    _ensure_materials(project, stored)
    wall_type.spec = stored
    wall_type.revision += 1
    wall_type.non_compliant = False
    return wall_type


def delete_wall_type(project: Project, type_id: str) -> None:
    if type_id not in project.wall_types:
        raise NotFoundError(f"wall type {type_id!r} not found")
    referrers = [inst.id for inst in project.wall_instances.values() if inst.wall_type == type_id]
    if referrers:
        raise InUseError(f"wall type {type_id!r} is referenced by instances", referrers)
    del project.wall_types[type_id]


def place_wall(
    project: Project,
    type_id: str,
    baseline: Baseline,
    height: float,
) -> str:
    if type_id not in project.wall_types:
        raise NotFoundError(f"wall type {type_id!r} not found")
    if baseline.length() <= 0:
        raise InvalidGeometryError("baseline start and end coincide")
    if not (isinstance(height, (int, float)) and math.isfinite(height) and height > 0):
        raise InvalidGeometryError("height must be a finite number > 0")
    instance = WallInstance(
        id=project.next_id("wi"),
        wall_type=type_id,
        baseline=baseline,
        height=float(height),
    )
    project.wall_instances[instance.id] = instance
    return instance.id


def replace_wall_type(project: Project, instance_id: str, new_type_id: str) -> None:
    """Re-point an instance at another type; geometry is untouched."""
    instance = project.wall_instances.get(instance_id)
    if instance is None:
        raise NotFoundError(f"wall instance {instance_id!r} not found")
    if new_type_id not in project.wall_types:
        raise NotFoundError(f"wall type {new_type_id!r} not found")
    instance.wall_type = new_type_id


def apply_wall_detail(
    project: Project,
    spec: WallDetailSpec,
    target: str | None = None,
) -> ExecutionResult:
    """Materialize a validated wall detail in the project.

    Creates the wall type, or updates it in place (revision bump) when the
    name already exists — re-running a regenerated detail must converge on
    one type instead of piling up near-duplicates. With `target`, the given
    instance is re-pointed at the resulting type as well.
    """
    _require_valid(spec)
    if target is not None and target not in project.wall_instances:
        raise NotFoundError(f"wall instance {target!r} not found")

    existing = project.wall_type_by_name(spec.wall_detail_name)
    stored = spec.clone()
    added_materials = _ensure_materials(project, stored)
    mutated: list[str] = list(added_materials)
    if existing is None:
        wall_type = WallType(id=project.next_id("wt"), spec=stored)
        project.wall_types[wall_type.id] = wall_type
        action = "created"
    else:
        wall_type = existing
        wall_type.spec = stored
        wall_type.revision += 1
        wall_type.non_compliant = False
        action = "updated"
    mutated.append(wall_type.id)

    if target is not None:
        project.wall_instances[target].wall_type = wall_type.id
        mutated.append(target)

    summary = (
        f"{action} wall type {stored.wall_detail_name!r} "
        f"({len(stored.layers)} layers, {total_thickness(stored):g} mm total)"
    )
    if target is not None:
        summary += f"; applied to instance {target}"
    return ExecutionResult(mutated_ids=mutated, produced_spec=stored, summary=summary)
