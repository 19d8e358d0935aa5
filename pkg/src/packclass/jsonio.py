"""JSON interchange for layouts.

Schema::

    {"container": {"width": int, "height": int},
     "modules": [{"id": str, "width": int, "height": int, "usage": int}],
     "placements": [{"id": str, "x": int, "y": int}]}
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .geometry import Container, Layout, ModuleSpec, Placement


class InputError(ValueError):
    """Malformed input document; the message names the offending field."""


def _int(obj: dict, key: str, where: str, default=None) -> int:
    if key not in obj:
        if default is not None:
            return default
        raise InputError(f"{where}: missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{where}.{key}: expected integer, got {value!r}")
    return value


def _obj(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise InputError(f"{where}: expected object, got {type(value).__name__}")
    return value


def container_from_dict(obj, where="container") -> Container:
    obj = _obj(obj, where)
    try:
        return Container(_int(obj, "width", where), _int(obj, "height", where))
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def module_from_dict(obj, where="module") -> ModuleSpec:
    obj = _obj(obj, where)
    mid = obj.get("id")
    if not isinstance(mid, str) or not mid:
        raise InputError(f"{where}.id: expected non-empty string, got {mid!r}")
    try:
        return ModuleSpec(mid, _int(obj, "width", where), _int(obj, "height", where), _int(obj, "usage", where, 0))
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def module_to_dict(m: ModuleSpec) -> dict:
    return {"id": m.id, "width": m.width, "height": m.height, "usage": m.usage_count}


def modules_from_list(items, where="modules") -> list[ModuleSpec]:
    if not isinstance(items, list):
        raise InputError(f"{where}: expected list")
    modules = [module_from_dict(m, f"{where}[{i}]") for i, m in enumerate(items)]
    seen = set()
    for i, m in enumerate(modules):
        if m.id in seen:
            raise InputError(f"{where}[{i}].id: duplicate id {m.id!r}")
        seen.add(m.id)
    return modules


def layout_from_dict(doc) -> Layout:
    doc = _obj(doc, "document")
    if "container" not in doc:
        raise InputError("document: missing field 'container'")
    container = container_from_dict(doc["container"])
    modules = modules_from_list(doc.get("modules", []))
    by_id = {m.id: m for m in modules}
    raw = doc.get("placements", [])
    if not isinstance(raw, list):
        raise InputError("placements: expected list")
    placements = []
    for i, p in enumerate(raw):
        where = f"placements[{i}]"
        p = _obj(p, where)
        pid = p.get("id")
        if pid not in by_id:
            raise InputError(f"{where}.id: unknown module {pid!r}")
        placements.append(Placement(pid, _int(p, "x", where), _int(p, "y", where)))
    return Layout(container, tuple(placements), by_id)


def layout_to_dict(layout: Layout) -> dict:
    return {
        "container": {"width": layout.container.width, "height": layout.container.height},
        "modules": [module_to_dict(m) for m in layout.modules.values()],
        "placements": [{"id": p.module_id, "x": p.x, "y": p.y} for p in layout.placements],
    }


def parse_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return parse_json(text, str(path))


def load_layout(path) -> Layout:
    return layout_from_dict(read_json(path))


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_atomic(path, text: str) -> None:
    """Write via a temporary sibling and rename so readers never see partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
