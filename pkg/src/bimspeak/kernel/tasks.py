"""Minimal executors for non-wall task classes.

These keep the task registry honest: the classes are classifiable and their
commands run end to end, but no real geometry work happens. Wall detailing
lives in ops.apply_wall_detail.
"""

from __future__ import annotations

from bimspeak.errors import InvalidGeometryError, NotFoundError
from bimspeak.kernel.model import ExecutionResult, Project

_AXES = ("X", "Y", "Z")


def apply_transform(project: Project, axis: str, degrees: float) -> ExecutionResult:
    """Acknowledge a whole-model transform; instances are only 2D baselines."""
    axis_u = str(axis).strip().upper()
    if axis_u not in _AXES:
        raise InvalidGeometryError(f"axis must be one of {_AXES}, got {axis!r}")
    if not isinstance(degrees, (int, float)):
        raise InvalidGeometryError("degrees must be a number")
    touched = list(project.wall_instances.keys())
    return ExecutionResult(
        mutated_ids=touched,
        produced_spec=None,
        summary=f"rotated model {degrees:g} degrees on the {axis_u} axis "
        f"({len(touched)} wall instances affected)",
    )


def place_window_stub(project: Project, target_wall: str, width_mm: float | None, height_mm: float | None) -> ExecutionResult:
    if target_wall not in project.wall_instances:
        raise NotFoundError(f"wall instance {target_wall!r} not found")
    size = ""
    if width_mm and height_mm:
        size = f" ({width_mm:g} x {height_mm:g} mm)"
    return ExecutionResult(
        mutated_ids=[target_wall],
        produced_spec=None,
        summary=f"recorded window placement on {target_wall}{size}; opening geometry is out of scope",
    )


def delete_column_stub(project: Project, column_id: str) -> ExecutionResult:
    # No column entities exist in this kernel; acknowledge and do nothing.
    return ExecutionResult(
        mutated_ids=[],
        produced_spec=None,
        summary=f"no column {column_id!r} in the model; nothing deleted",
    )
