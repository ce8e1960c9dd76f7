"""Project persistence: versioned JSON, UTF-8, round-trip safe."""

from __future__ import annotations

import json
import os
from pathlib import Path

from bimspeak.errors import CorruptFileError, SchemaVersionMismatchError
from bimspeak.kernel.model import (
    SCHEMA_VERSION,
    Baseline,
    LayerFunction,
    Material,
    Project,
    WallDetailSpec,
    WallInstance,
    WallLayer,
    WallType,
)


def project_to_dict(project: Project) -> dict:
    return {
        "schema_version": project.schema_version,
        "material_library": [
            {
                "id": m.id,
                "name": m.name,
                "default_layer_type": m.default_layer_type.value,
                "thermal_conductivity": m.thermal_conductivity,
                "aliases": list(m.aliases),
                "unverified": m.unverified,
            }
            for m in project.material_library.values()
        ],
        "wall_types": [
            {
                "id": wt.id,
                "spec": spec_to_dict(wt.spec),
                "created_from": wt.created_from,
                "revision": wt.revision,
                "non_compliant": wt.non_compliant,
            }
            for wt in project.wall_types.values()
        ],
        "wall_instances": [
            {
                "id": wi.id,
                "wall_type": wi.wall_type,
                "baseline": {"start": list(wi.baseline.start), "end": list(wi.baseline.end)},
                "height": wi.height,
            }
            for wi in project.wall_instances.values()
        ],
    }


def spec_to_dict(spec: WallDetailSpec) -> dict:
    return {
        "wall_detail_name": spec.wall_detail_name,
        "layers": [
            {
                "material": layer.material,
                "layer_type": layer.layer_type.value,
                "thermal_conductivity": layer.thermal_conductivity,
                "thickness": layer.thickness,
            }
            for layer in spec.layers
        ],
    }


def spec_from_dict(data: dict, location: str = "spec") -> WallDetailSpec:
    try:
        layers = [
            WallLayer(
                material=layer["material"],
                layer_type=LayerFunction.parse(layer["layer_type"]),
                thermal_conductivity=float(layer["thermal_conductivity"]),
                thickness=float(layer["thickness"]),
            )
            for layer in data["layers"]
        ]
        return WallDetailSpec(wall_detail_name=data["wall_detail_name"], layers=layers)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(location, f"bad wall detail: {exc}") from exc


def save_project(project: Project, path: str | os.PathLike) -> None:
    """Write the project atomically (temp file + rename)."""
    target = Path(path)
    payload = json.dumps(project_to_dict(project), indent=2, ensure_ascii=False) + "\n"
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(payload, encoding="utf-8")
    tmp.replace(target)


def load_project(path: str | os.PathLike) -> Project:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from exc
    if not isinstance(data, dict):
        raise CorruptFileError("$", "top level must be an object")

    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(version, SCHEMA_VERSION)

    project = Project(schema_version=SCHEMA_VERSION)
    try:
        for i, m in enumerate(data.get("material_library", [])):
            mat = Material(
                id=m["id"],
                name=m["name"],
                default_layer_type=LayerFunction.parse(m["default_layer_type"]),
                thermal_conductivity=float(m["thermal_conductivity"]),
                aliases=tuple(m.get("aliases", [])),
                unverified=bool(m.get("unverified", False)),
            )
            project.material_library[mat.id] = mat
        for i, t in enumerate(data.get("wall_types", [])):
            spec = spec_from_dict(t["spec"], location=f"wall_types[{i}].spec")
            problems = spec.problems()
            if problems:
                path_, reason = problems[0]
                raise CorruptFileError(f"wall_types[{i}].spec.{path_}", reason)
            wt = WallType(
                id=t["id"],
                spec=spec,
                created_from=t.get("created_from"),
                revision=int(t["revision"]),
                non_compliant=bool(t.get("non_compliant", False)),
            )
            project.wall_types[wt.id] = wt
        for i, w in enumerate(data.get("wall_instances", [])):
            wi = WallInstance(
                id=w["id"],
                wall_type=w["wall_type"],
                baseline=Baseline(
                    start=tuple(w["baseline"]["start"]),
                    end=tuple(w["baseline"]["end"]),
                ),
                height=float(w["height"]),
            )
            project.wall_instances[wi.id] = wi
    except CorruptFileError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError("$", f"malformed entity: {exc}") from exc

    dangling = project.integrity_problems()
    if dangling:
        raise CorruptFileError("$", "; ".join(dangling))
    return project
