"""Domain model for the embedded BIM kernel.

Units are fixed by convention: layer thickness in mm, thermal conductivity
in W/(m·K), instance geometry in meters. Layer order is exterior to interior,
index 0 being the exterior-most layer.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from enum import Enum

SCHEMA_VERSION = 1

# Absolute tolerance for thickness equality; values are decimal millimeters.
MM_TOL = 1e-6


class LayerFunction(str, Enum):
    STRUCTURE = "Structure"
    INSULATION = "Insulation"
    FINISH = "Finish"
    MEMBRANE = "Membrane"
    SUBSTRATE = "Substrate"

    @classmethod
    def parse(cls, value: str) -> "LayerFunction":
        """Case-insensitive lookup; raises ValueError for unknown names."""
        for member in cls:
            if member.value.lower() == str(value).strip().lower():
                return member
        raise ValueError(f"unknown layer function {value!r}")


@dataclass
class Material:
    id: str
    name: str
    default_layer_type: LayerFunction
    thermal_conductivity: float  # W/(m·K), > 0
    aliases: tuple[str, ...] = ()
    unverified: bool = False  # True for entries auto-added from model output


@dataclass
class WallLayer:
    material: str  # canonical material name, resolved against the library
    layer_type: LayerFunction
    thermal_conductivity: float  # W/(m·K)
    thickness: float  # mm


@dataclass
class WallDetailSpec:
    wall_detail_name: str
    layers: list[WallLayer] = field(default_factory=list)

    def problems(self) -> list[tuple[str, str]]:
        """All invariant violations as (field path, message) pairs."""
        out: list[tuple[str, str]] = []
        if not isinstance(self.wall_detail_name, str) or not self.wall_detail_name.strip():
            out.append(("wall_detail_name", "must be a non-empty string"))
        if not self.layers:
            out.append(("layers", "empty"))
        for i, layer in enumerate(self.layers):
            prefix = f"layers[{i}]"
            if not isinstance(layer.material, str) or not layer.material.strip():
                out.append((f"{prefix}.material", "must be a non-empty string"))
            if not isinstance(layer.layer_type, LayerFunction):
                out.append((f"{prefix}.layer_type", "must be a layer function"))
            if not _positive_finite(layer.thickness):
                out.append((f"{prefix}.thickness", "must be a finite number > 0"))
            if not _positive_finite(layer.thermal_conductivity):
                out.append((f"{prefix}.thermal_conductivity", "must be a finite number > 0"))
        return out

    def clone(self) -> "WallDetailSpec":
        return copy.deepcopy(self)


@dataclass
class WallType:
    id: str
    spec: WallDetailSpec
    created_from: str | None = None  # source WallType id when duplicated
    revision: int = 1
    non_compliant: bool = False  # set when a retry loop gave up on this type


@dataclass
class Baseline:
    """2D wall axis in plan, meters."""

    start: tuple[float, float]
    end: tuple[float, float]

    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


@dataclass
class WallInstance:
    id: str
    wall_type: str  # WallType id
    baseline: Baseline
    height: float  # m, > 0


@dataclass
class Project:
    schema_version: int = SCHEMA_VERSION
    material_library: dict[str, Material] = field(default_factory=dict)  # by id
    wall_types: dict[str, WallType] = field(default_factory=dict)  # by id
    wall_instances: dict[str, WallInstance] = field(default_factory=dict)  # by id

    def materials(self) -> list[Material]:
        return list(self.material_library.values())

    def material_by_name(self, name: str) -> Material | None:
        key = _name_key(name)
        for mat in self.material_library.values():
            if _name_key(mat.name) == key:
                return mat
        return None

    def wall_type_by_name(self, name: str) -> WallType | None:
        key = _name_key(name)
        for wt in self.wall_types.values():
            if _name_key(wt.spec.wall_detail_name) == key:
                return wt
        return None

    def next_id(self, prefix: str) -> str:
        """Smallest unused sequential id for the given entity prefix."""
        pools = {"mat": self.material_library, "wt": self.wall_types, "wi": self.wall_instances}
        taken = pools[prefix]
        n = len(taken) + 1
        while f"{prefix}-{n:04d}" in taken:
            n += 1
        return f"{prefix}-{n:04d}"

    def integrity_problems(self) -> list[str]:
        """Dangling references: layer materials or instance types that do not resolve."""
        out: list[str] = []
        for wt in self.wall_types.values():
            for i, layer in enumerate(wt.spec.layers):
                if self.material_by_name(layer.material) is None:
                    out.append(f"wall_types[{wt.id}].spec.layers[{i}].material {layer.material!r} not in library")
        for inst in self.wall_instances.values():
            if inst.wall_type not in self.wall_types:
                out.append(f"wall_instances[{inst.id}].wall_type {inst.wall_type!r} not found")
        return out


@dataclass
class ExecutionResult:
    mutated_ids: list[str]
    produced_spec: WallDetailSpec | None
    summary: str


def _positive_finite(value: object) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
        and value > 0
    )


def _name_key(name: str) -> str:
    return " ".join(name.strip().lower().split())
