"""Scene graphs: objects with parts or attributes plus directional relation tables.

A relation table row reads ``j in relations[r][i]`` as "object j is r-of object i",
so ``behind[1] == [0]`` means object 0 stands behind object 1.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

from .errors import ConsistencyError, SchemaError, UnknownRelation

OPPOSED_RELATIONS = (("left", "right"), ("front", "behind"), ("above", "below"))
# order used wherever a set of relation names is reported
RELATION_ORDER = ("front", "behind", "left", "right", "above", "below")

_TRAILING_DIGITS = re.compile(r"\d+$")


class SceneStyle(str, enum.Enum):
    PART_BASED = "PartBased"
    ATTRIBUTE_BASED = "AttributeBased"


def category_of(name: str) -> str:
    """``"Chair0"`` -> ``"chair"``; names without a numeric suffix are only lowercased."""
    return _TRAILING_DIGITS.sub("", name).lower()


@dataclass(frozen=True)
class Part:
    color: str
    count: int


@dataclass(frozen=True)
class Attributes:
    color: str
    size: str
    material: str


@dataclass(frozen=True)
class SceneObject:
    name: str
    category: str
    parts: Mapping[str, Part] | None = None
    attributes: Attributes | None = None


@dataclass(frozen=True)
class VocabularyIndex:
    parts: frozenset[str] = frozenset()
    colors: frozenset[str] = frozenset()
    categories: frozenset[str] = frozenset()
    sizes: frozenset[str] = frozenset()
    materials: frozenset[str] = frozenset()
    max_part_count: int = 0

    @classmethod
    def build(cls, objects: tuple[SceneObject, ...]) -> VocabularyIndex:
        parts: set[str] = set()
        colors: set[str] = set()
        sizes: set[str] = set()
        materials: set[str] = set()
        max_count = 0
        for obj in objects:
            if obj.parts is not None:
                for part_name, part in obj.parts.items():
                    parts.add(part_name)
                    colors.add(part.color)
                    max_count = max(max_count, part.count)
            if obj.attributes is not None:
                colors.add(obj.attributes.color)
                sizes.add(obj.attributes.size)
                materials.add(obj.attributes.material)
        return cls(
            parts=frozenset(parts),
            colors=frozenset(colors),
            categories=frozenset(o.category for o in objects),
            sizes=frozenset(sizes),
            materials=frozenset(materials),
            max_part_count=max_count,
        )


@dataclass(frozen=True, eq=True)
class SceneGraph:
    objects: tuple[SceneObject, ...]
    relations: Mapping[str, tuple[tuple[int, ...], ...]]
    style: SceneStyle
    vocabulary: VocabularyIndex = field(compare=False)

    def __len__(self) -> int:
        return len(self.objects)

    @property
    def all_indices(self) -> tuple[int, ...]:
        return tuple(range(len(self.objects)))

    def objects_in_relation(self, relation: str, anchor: int) -> tuple[int, ...]:
        """Objects that are ``relation``-of ``anchor``, ascending."""
        try:
            rows = self.relations[relation]
        except KeyError:
            raise UnknownRelation(f"relation {relation!r} is not defined in this scene") from None
        if not 0 <= anchor < len(self.objects):
            raise ConsistencyError(f"object index {anchor} out of range")
        return rows[anchor]

    def to_document(self) -> dict[str, Any]:
        objects: list[dict[str, Any]] = []
        for obj in self.objects:
            if obj.parts is not None:
                objects.append({obj.name: {k: [p.color, p.count] for k, p in obj.parts.items()}})
            else:
                a = obj.attributes
                assert a is not None
                objects.append({obj.name: [a.color, a.size, a.material]})
        return {
            "relationships": {r: [list(row) for row in rows] for r, rows in self.relations.items()},
            "objects": objects,
        }


def objects_in_relation(scene: SceneGraph, relation: str, anchor: int) -> tuple[int, ...]:
    return scene.objects_in_relation(relation, anchor)


def _nonempty_text(value: Any, what: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(f"{what} must be a nonempty string, got {value!r}")
    return value.strip().lower()


def _parse_object(entry: Any, position: int) -> SceneObject:
    if not isinstance(entry, dict) or len(entry) != 1:
        raise SchemaError(f"objects[{position}] must be a single-key map")
    (name, body), = entry.items()
    if not isinstance(name, str) or not name:
        raise SchemaError(f"objects[{position}] has an empty name")
    category = category_of(name)
    if not category:
        raise SchemaError(f"objects[{position}] name {name!r} yields an empty category")

    if isinstance(body, dict):
        if not body:
            raise SchemaError(f"object {name!r} has an empty part map")
        parts: dict[str, Part] = {}
        for part_name, spec in body.items():
            if not (isinstance(spec, list) and len(spec) == 2):
                raise SchemaError(f"part {part_name!r} of {name!r} must be [color, count]")
            color, count = spec
            if isinstance(count, bool) or not isinstance(count, int) or count < 1:
                raise SchemaError(f"part {part_name!r} of {name!r} has invalid count {count!r}")
            parts[_nonempty_text(part_name, "part name")] = Part(_nonempty_text(color, "part color"), count)
        return SceneObject(name, category, parts=MappingProxyType(parts))
    if isinstance(body, list):
        if len(body) != 3:
            raise SchemaError(f"object {name!r} must carry exactly [color, size, material]")
        color, size, material = (_nonempty_text(v, f"attribute of {name!r}") for v in body)
        return SceneObject(name, category, attributes=Attributes(color, size, material))
    raise SchemaError(f"object {name!r} must map to a part map or an attribute triple")


def _parse_relations(raw: Any, n: int) -> dict[str, tuple[tuple[int, ...], ...]]:
    if not isinstance(raw, dict):
        raise SchemaError("'relationships' must be a map of relation -> list of index lists")
    relations: dict[str, tuple[tuple[int, ...], ...]] = {}
    for rel, rows in raw.items():
        if not isinstance(rows, list) or len(rows) != n:
            raise SchemaError(f"relation {rel!r} must have one row per object ({n})")
        parsed_rows = []
        for i, row in enumerate(rows):
            if not isinstance(row, list):
                raise SchemaError(f"relation {rel!r} row {i} must be a list")
            for j in row:
                if isinstance(j, bool) or not isinstance(j, int):
                    raise SchemaError(f"relation {rel!r} row {i} holds non-integer {j!r}")
                if not 0 <= j < n:
                    raise ConsistencyError(f"relation {rel!r} row {i} index {j} out of range")
                if j == i:
                    raise ConsistencyError(f"relation {rel!r} is reflexive at object {i}")
            parsed_rows.append(tuple(sorted(set(row))))
        relations[rel] = tuple(parsed_rows)
    return relations


def _check_duality(relations: Mapping[str, tuple[tuple[int, ...], ...]]) -> None:
    for a, b in OPPOSED_RELATIONS:
        if a not in relations or b not in relations:
            continue
        for first, second in ((a, b), (b, a)):
            for i, row in enumerate(relations[first]):
                for j in row:
                    if i not in relations[second][j]:
                        raise ConsistencyError(
                            f"{j} in {first}[{i}] but {i} missing from {second}[{j}]"
                        )


def scene_from_document(document: Mapping[str, Any]) -> SceneGraph:
    if not isinstance(document, Mapping):
        raise SchemaError("scene document must be a JSON object")
    for key in ("relationships", "objects"):
        if key not in document:
            raise SchemaError(f"scene document lacks {key!r}")
    raw_objects = document["objects"]
    if not isinstance(raw_objects, list) or not raw_objects:
        raise SchemaError("'objects' must be a nonempty list")
    objects = tuple(_parse_object(entry, i) for i, entry in enumerate(raw_objects))

    if all(o.parts is not None for o in objects):
        style = SceneStyle.PART_BASED
    elif all(o.attributes is not None for o in objects):
        style = SceneStyle.ATTRIBUTE_BASED
    else:
        raise SchemaError("scene mixes part-based and attribute-based objects")

    relations = _parse_relations(document["relationships"], len(objects))
    _check_duality(relations)
    return SceneGraph(objects, MappingProxyType(relations), style, VocabularyIndex.build(objects))


def load_scene(document: str | bytes) -> SceneGraph:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scene document is not valid JSON: {exc}") from exc
    return scene_from_document(data)
