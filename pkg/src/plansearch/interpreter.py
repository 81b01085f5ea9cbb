"""Deterministic execution of plans against a scene graph.

Every tool is a plain function ``tool(scene, *values) -> Value``; :data:`TOOLS`
maps plan function names onto them and :data:`SIGNATURES` records the argument
and result kinds that the evaluator checks statically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Union

from .dsl import IntLit, ListLit, Plan, PlanStep, StringLit, VarRef
from .errors import (
    AmbiguousPart,
    ArityMismatch,
    DescriptorError,
    NoMatch,
    NoRelation,
    NonSingleton,
    NoSuchPart,
    RuntimeFailure,
    SameObject,
    TypeMismatch,
    UndefinedVariable,
    UnformattableValue,
    UnknownFunction,
    UnknownRelation,
    UnsupportedStyle,
)
from .scene import RELATION_ORDER, SceneGraph, SceneObject, SceneStyle
from .vocab import (
    SLOT_COLOR,
    SLOT_COUNT,
    SLOT_MATERIAL,
    SLOT_NAME,
    SLOT_SIZE,
    canonical,
    classify,
)

ALL_OBJ = "all_obj"
STOP_SIGN = "ans"


@dataclass(frozen=True)
class Objects:
    indices: tuple[int, ...]

    @classmethod
    def of(cls, indices) -> Objects:
        return cls(tuple(sorted(set(indices))))

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Relations:
    names: tuple[str, ...]


Value = Union[Objects, Num, Bool, Text, Relations]
# list literals evaluate to a tuple of element values
Descriptors = tuple[Union[Text, Num], ...]


def value_to_json(value: Value | Descriptors) -> dict[str, Any]:
    if isinstance(value, Objects):
        return {"kind": "objects", "value": list(value.indices)}
    if isinstance(value, Num):
        return {"kind": "num", "value": value.value}
    if isinstance(value, Bool):
        return {"kind": "bool", "value": value.value}
    if isinstance(value, Text):
        return {"kind": "text", "value": value.value}
    if isinstance(value, Relations):
        return {"kind": "relations", "value": list(value.names)}
    return {"kind": "list", "value": [value_to_json(v) for v in value]}


def format_answer(value: Value) -> str:
    if isinstance(value, Bool):
        return "yes" if value.value else "no"
    if isinstance(value, Num):
        return str(value.value)
    if isinstance(value, Text):
        return canonical(value.value)
    raise UnformattableValue(f"a {type(value).__name__} value is not a final answer")


def normalize_answer(text: str) -> str:
    """Canonical form of a gold answer string for comparison."""
    return " ".join(str(text).lower().split())


# -- argument coercion -------------------------------------------------------


def _objects(value: Any, what: str = "object list") -> Objects:
    if not isinstance(value, Objects):
        raise TypeMismatch(f"expected {what}, got {type(value).__name__}")
    return value


def _single(scene: SceneGraph, value: Any) -> tuple[int, SceneObject]:
    objs = _objects(value, "object")
    if len(objs) != 1:
        raise NonSingleton(f"expected exactly one object, got {len(objs)}")
    index = objs.indices[0]
    return index, scene.objects[index]


def _text(value: Any) -> str:
    if not isinstance(value, Text):
        raise TypeMismatch(f"expected text, got {type(value).__name__}")
    return canonical(value.value)


def _num(value: Any) -> int:
    if not isinstance(value, Num):
        raise TypeMismatch(f"expected number, got {type(value).__name__}")
    return value.value


def _relation_names(scene: SceneGraph, value: Any) -> tuple[str, ...]:
    if isinstance(value, Text):
        names: tuple[str, ...] = (canonical(value.value),)
    elif isinstance(value, Relations):
        names = value.names
    else:
        raise TypeMismatch(f"expected relation, got {type(value).__name__}")
    if not names:
        raise NoRelation("empty relation set")
    for name in names:
        if name not in scene.relations:
            raise UnknownRelation(f"relation {name!r} is not defined in this scene")
    return names


def _require_style(scene: SceneGraph, style: SceneStyle, tool: str) -> None:
    if scene.style is not style:
        raise UnsupportedStyle(f"{tool} needs a {style.value} scene")


# -- descriptor lists ----------------------------------------------------------


@dataclass(frozen=True)
class DescriptorList:
    count: int | None = None
    color: str | None = None
    size: str | None = None
    material: str | None = None
    name: str | None = None

    @classmethod
    def from_values(cls, values: Any) -> DescriptorList:
        if not isinstance(values, tuple) or not values:
            raise DescriptorError("filter_part needs a nonempty list of parts or attributes")
        slots: dict[str, Any] = {}
        for v in values:
            if isinstance(v, Num):
                slot, token = SLOT_COUNT, v.value
            elif isinstance(v, Text):
                slot, token = classify(v.value)
            else:
                raise TypeMismatch(f"descriptor lists hold text or numbers, got {type(v).__name__}")
            if slot in slots:
                raise DescriptorError(f"two descriptors claim the {slot} slot")
            slots[slot] = token
        return cls(**slots)

    def matches(self, obj: SceneObject) -> bool:
        if obj.parts is not None:
            if self.size is not None or self.material is not None:
                return False
            if self.name is not None:
                part = obj.parts.get(self.name)
                candidates = [part] if part is not None else []
            else:
                candidates = list(obj.parts.values())
            return any(
                (self.color is None or p.color == self.color)
                and (self.count is None or p.count == self.count)
                for p in candidates
            )
        attrs = obj.attributes
        assert attrs is not None
        if self.count is not None:
            raise DescriptorError("part counts do not apply to attribute-based scenes")
        return (
            (self.color is None or attrs.color == self.color)
            and (self.size is None or attrs.size == self.size)
            and (self.material is None or attrs.material == self.material)
            and (self.name is None or obj.category == self.name)
        )


# -- tools ---------------------------------------------------------------------


def filter_object(scene: SceneGraph, category: Value, objs: Value) -> Objects:
    cat = _text(category)
    return Objects(tuple(i for i in _objects(objs).indices if scene.objects[i].category == cat))


def filter_category(scene: SceneGraph, category: Value, objs: Value) -> Objects:
    return filter_object(scene, category, objs)


def filter_part(scene: SceneGraph, descriptors: Any, objs: Value) -> Objects:
    desc = DescriptorList.from_values(descriptors)
    return Objects(tuple(i for i in _objects(objs).indices if desc.matches(scene.objects[i])))


def exclude_object(scene: SceneGraph, obj: Value, objs: Value) -> Objects:
    drop = set(_objects(obj).indices)
    return Objects(tuple(i for i in _objects(objs).indices if i not in drop))


def intersection(scene: SceneGraph, a: Value, b: Value) -> Objects:
    keep = set(_objects(b).indices)
    return Objects(tuple(i for i in _objects(a).indices if i in keep))


def query_relation(scene: SceneGraph, relation: Value, obj: Value) -> Objects:
    rel = _text(relation)
    index, _ = _single(scene, obj)
    return Objects(scene.objects_in_relation(rel, index))


def get_relation(scene: SceneGraph, a: Value, b: Value) -> Relations:
    ia, _ = _single(scene, a)
    ib, _ = _single(scene, b)
    if ia == ib:
        raise SameObject("get_relation needs two distinct objects")
    order = [r for r in RELATION_ORDER if r in scene.relations]
    order += sorted(r for r in scene.relations if r not in RELATION_ORDER)
    found = tuple(r for r in order if ia in scene.relations[r][ib])
    if not found:
        raise NoRelation(f"no relation holds between objects {ia} and {ib}")
    return Relations(found)


def filter_relation(scene: SceneGraph, relations: Value, thing: Value, objs: Value) -> Objects:
    names = _relation_names(scene, relations)
    t, _ = _single(scene, thing)
    return Objects(
        tuple(
            y
            for y in _objects(objs).indices
            if y != t and all(t in scene.relations[r][y] for r in names)
        )
    )


def query_category(scene: SceneGraph, obj: Value) -> Text:
    _, o = _single(scene, obj)
    return Text(o.category)


def query_part(scene: SceneGraph, color: Value, obj: Value) -> Text:
    wanted = _text(color)
    _require_style(scene, SceneStyle.PART_BASED, "query_part")
    _, o = _single(scene, obj)
    assert o.parts is not None
    names = [name for name, part in o.parts.items() if part.color == wanted]
    if not names:
        raise NoMatch(f"{o.name} has no {wanted} part")
    if len(names) > 1:
        raise AmbiguousPart(f"{o.name} has {len(names)} {wanted} parts")
    return Text(names[0])


def query_color(scene: SceneGraph, *args: Value) -> Text:
    if len(args) == 1:
        _require_style(scene, SceneStyle.ATTRIBUTE_BASED, "query_color(object)")
        _, o = _single(scene, args[0])
        assert o.attributes is not None
        return Text(o.attributes.color)
    if len(args) != 2:
        raise ArityMismatch(f"query_color takes 1 or 2 arguments, got {len(args)}")
    part = _text(args[0])
    _require_style(scene, SceneStyle.PART_BASED, "query_color(part, object)")
    _, o = _single(scene, args[1])
    assert o.parts is not None
    if part not in o.parts:
        raise NoSuchPart(f"{o.name} has no part {part!r}")
    return Text(o.parts[part].color)


def query_size(scene: SceneGraph, obj: Value) -> Text:
    _require_style(scene, SceneStyle.ATTRIBUTE_BASED, "query_size")
    _, o = _single(scene, obj)
    assert o.attributes is not None
    return Text(o.attributes.size)


def count_part(scene: SceneGraph, part: Value, obj: Value) -> Num:
    name = _text(part)
    _require_style(scene, SceneStyle.PART_BASED, "count_part")
    _, o = _single(scene, obj)
    assert o.parts is not None
    found = o.parts.get(name)
    return Num(found.count if found is not None else 0)


def count_object(scene: SceneGraph, objs: Value) -> Num:
    return Num(len(_objects(objs)))


def sum_(scene: SceneGraph, a: Value, b: Value) -> Num:
    return Num(_num(a) + _num(b))


def equal(scene: SceneGraph, a: Value, b: Value) -> Bool:
    if isinstance(a, Num) and isinstance(b, Num):
        return Bool(a.value == b.value)
    if isinstance(a, Text) and isinstance(b, Text):
        return Bool(canonical(a.value) == canonical(b.value))
    raise TypeMismatch(f"equal compares two numbers or two texts, got {type(a).__name__}/{type(b).__name__}")


def more_than(scene: SceneGraph, a: Value, b: Value) -> Bool:
    return Bool(_num(a) > _num(b))


def few_than(scene: SceneGraph, a: Value, b: Value) -> Bool:
    return Bool(_num(a) < _num(b))


def exist(scene: SceneGraph, objs: Value) -> Bool:
    return Bool(len(_objects(objs)) > 0)


@dataclass(frozen=True)
class Signature:
    params: tuple[tuple[str, ...], ...]  # accepted parameter-kind tuples
    result: str


# Parameter kinds: objects, text, num, descriptors, relation, comparable.
SIGNATURES: dict[str, Signature] = {
    "filter_object": Signature((("text", "objects"),), "objects"),
    "filter_part": Signature((("descriptors", "objects"),), "objects"),
    "filter_category": Signature((("text", "objects"),), "objects"),
    "exclude_object": Signature((("objects", "objects"),), "objects"),
    "intersection": Signature((("objects", "objects"),), "objects"),
    "query_relation": Signature((("text", "objects"),), "objects"),
    "get_relation": Signature((("objects", "objects"),), "relations"),
    "filter_relation": Signature((("relation", "objects", "objects"),), "objects"),
    "query_category": Signature((("objects",),), "text"),
    "query_part": Signature((("text", "objects"),), "text"),
    "query_color": Signature((("objects",), ("text", "objects")), "text"),
    "query_size": Signature((("objects",),), "text"),
    "count_part": Signature((("text", "objects"),), "num"),
    "count_object": Signature((("objects",),), "num"),
    "sum": Signature((("num", "num"),), "num"),
    "equal": Signature((("comparable", "comparable"),), "bool"),
    "more_than": Signature((("num", "num"),), "bool"),
    "few_than": Signature((("num", "num"),), "bool"),
    "exist": Signature((("objects",),), "bool"),
}
SIGNATURES["fewer_than"] = SIGNATURES["few_than"]

TOOLS: dict[str, Callable[..., Value]] = {
    "filter_object": filter_object,
    "filter_part": filter_part,
    "filter_category": filter_category,
    "exclude_object": exclude_object,
    "intersection": intersection,
    "query_relation": query_relation,
    "get_relation": get_relation,
    "filter_relation": filter_relation,
    "query_category": query_category,
    "query_part": query_part,
    "query_color": query_color,
    "query_size": query_size,
    "count_part": count_part,
    "count_object": count_object,
    "sum": sum_,
    "equal": equal,
    "more_than": more_than,
    "few_than": few_than,
    "fewer_than": few_than,
    "exist": exist,
}


# -- execution -------------------------------------------------------------------


@dataclass
class Trace:
    entries: list[tuple[PlanStep, Value]] = field(default_factory=list)
    answer: Value | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {"step": step.index, "target": step.target, **value_to_json(value)},
                sort_keys=True,
            )
            for step, value in self.entries
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def _evaluate_arg(arg: Any, env: dict[str, Value]) -> Any:
    if isinstance(arg, StringLit):
        return Text(arg.value)
    if isinstance(arg, IntLit):
        return Num(arg.value)
    if isinstance(arg, VarRef):
        try:
            return env[arg.name]
        except KeyError:
            raise UndefinedVariable(f"variable {arg.name!r} is not defined") from None
    if isinstance(arg, ListLit):
        return tuple(_evaluate_arg(item, env) for item in arg.items)
    raise TypeMismatch(f"unsupported argument {arg!r}")


def execute_step(step: PlanStep, env: dict[str, Value], scene: SceneGraph) -> Value:
    fn = TOOLS.get(step.call.function)
    if fn is None:
        raise UnknownFunction(f"unknown function {step.call.function!r}")
    sig = SIGNATURES[step.call.function]
    if len(step.call.args) not in {len(p) for p in sig.params}:
        arities = "/".join(str(len(p)) for p in sig.params)
        raise ArityMismatch(
            f"{step.call.function} takes {arities} arguments, got {len(step.call.args)}"
        )
    if step.target == ALL_OBJ:
        raise RuntimeFailure(f"{ALL_OBJ} cannot be rebound")
    args = [_evaluate_arg(a, env) for a in step.call.args]
    for value in args:
        if isinstance(value, tuple) and fn is not filter_part:
            raise TypeMismatch("list literals are only accepted by filter_part")
    return fn(scene, *args)


def new_env(scene: SceneGraph) -> dict[str, Value]:
    return {ALL_OBJ: Objects(scene.all_indices)}


def execute_plan(plan: Plan, scene: SceneGraph, stop_sign: str = STOP_SIGN) -> Trace:
    """Run ``plan`` step by step; stop after the step that binds ``stop_sign``.

    The first failing step raises a :class:`RuntimeFailure` whose ``step`` is the
    step index and whose ``trace`` holds everything executed before it.
    """
    env = new_env(scene)
    trace = Trace()
    for step in plan.steps:
        try:
            value = execute_step(step, env, scene)
        except RuntimeFailure as exc:
            exc.step = step.index
            exc.trace = trace  # type: ignore[attr-defined]
            raise
        env[step.target] = value
        trace.entries.append((step, value))
        if step.target == stop_sign:
            trace.answer = value
            break
    return trace
