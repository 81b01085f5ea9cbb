"""State evaluator for candidate plan prefixes.

A candidate passes when every step type-checks, every string literal handed to a
scene-facing tool names something the scene actually contains, and the prefix
executes without error or a disallowed empty result.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any

from .dsl import ListLit, Plan, PlanStep, StringLit, VarRef
from .errors import (
    ArityMismatch,
    RuntimeFailure,
    UndefinedVariable,
    UnknownFunction,
)
from .interpreter import ALL_OBJ, SIGNATURES, STOP_SIGN, Objects, execute_plan
from .scene import SceneGraph, SceneStyle
from .vocab import SLOT_COLOR, SLOT_COUNT, SLOT_MATERIAL, SLOT_NAME, SLOT_SIZE, canonical, classify


class DiagnosticKind(str, enum.Enum):
    PARSE_FAILURE = "ParseFailure"
    UNKNOWN_FUNCTION = "UnknownFunction"
    ARITY_MISMATCH = "ArityMismatch"
    ARG_TYPE_MISMATCH = "ArgTypeMismatch"
    UNDEFINED_VARIABLE = "UndefinedVariable"
    VOCABULARY_MISMATCH = "VocabularyMismatch"
    RUNTIME_FAILURE = "RuntimeFailure"
    EMPTY_RESULT = "EmptyResult"
    NON_SEQUENTIAL_INDEX = "NonSequentialIndex"
    REBINDING = "Rebinding"

    @property
    def hard(self) -> bool:
        return self not in SOFT_KINDS


SOFT_KINDS = frozenset({DiagnosticKind.NON_SEQUENTIAL_INDEX, DiagnosticKind.REBINDING})

# tools whose empty object-set result means the plan went wrong
EMPTY_IS_HARD = frozenset(
    {"filter_object", "filter_part", "filter_category", "query_relation", "intersection"}
)


@dataclass(frozen=True)
class Diagnostic:
    step: int
    kind: DiagnosticKind
    message: str

    def to_json(self) -> dict[str, Any]:
        return {"step": self.step, "kind": self.kind.value, "message": self.message}


@dataclass(frozen=True)
class Verdict:
    passed: bool
    diagnostics: tuple[Diagnostic, ...] = ()

    @classmethod
    def from_diagnostics(cls, diagnostics: list[Diagnostic]) -> Verdict:
        return cls(not any(d.kind.hard for d in diagnostics), tuple(diagnostics))

    @classmethod
    def parse_failure(cls, message: str, step: int = 0) -> Verdict:
        return cls(False, (Diagnostic(step, DiagnosticKind.PARSE_FAILURE, message),))

    @property
    def kinds(self) -> set[DiagnosticKind]:
        return {d.kind for d in self.diagnostics}

    def to_json(self) -> dict[str, Any]:
        return {"pass": self.passed, "diagnostics": [d.to_json() for d in self.diagnostics]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def detect_stop(prefix: Plan, stop_sign: str = STOP_SIGN) -> bool:
    return any(step.target == stop_sign for step in prefix.steps)


def _arg_kind(arg: Any, kinds: dict[str, str]) -> str | None:
    """Static kind of an argument; ``None`` when unknown (undefined or unknown producer)."""
    if isinstance(arg, StringLit):
        return "text"
    if isinstance(arg, ListLit):
        return "descriptors"
    if isinstance(arg, VarRef):
        return kinds.get(arg.name)
    return "num"


def _accepts(param: str, kind: str) -> bool:
    if param == "relation":
        return kind in ("relations", "text")
    if param == "comparable":
        return kind in ("num", "text")
    return param == kind


class _StaticChecker:
    def __init__(self, scene: SceneGraph) -> None:
        self.scene = scene
        self.vocab = scene.vocabulary
        self.kinds: dict[str, str] = {ALL_OBJ: "objects"}
        self.defined: set[str] = {ALL_OBJ}
        self.diagnostics: list[Diagnostic] = []

    def add(self, step: PlanStep, kind: DiagnosticKind, message: str) -> None:
        self.diagnostics.append(Diagnostic(step.index, kind, message))

    def check(self, position: int, step: PlanStep) -> None:
        if step.index != position:
            self.add(step, DiagnosticKind.NON_SEQUENTIAL_INDEX, f"expected Step {position}")
        self._check_undefined(step)
        fn = step.call.function
        sig = SIGNATURES.get(fn)
        if sig is None:
            self.add(step, DiagnosticKind.UNKNOWN_FUNCTION, f"unknown function {fn!r}")
        else:
            self._check_types(step, sig)
            self._check_vocabulary(step)
        if step.target == ALL_OBJ:
            self.add(step, DiagnosticKind.ARG_TYPE_MISMATCH, f"{ALL_OBJ} cannot be rebound")
        elif step.target in self.defined:
            self.add(step, DiagnosticKind.REBINDING, f"{step.target} is assigned again")
        self.defined.add(step.target)
        if sig is not None:
            self.kinds[step.target] = sig.result
        else:
            self.kinds.pop(step.target, None)

    def _check_undefined(self, step: PlanStep) -> None:
        for arg in step.call.args:
            refs = arg.items if isinstance(arg, ListLit) else (arg,)
            for ref in refs:
                if isinstance(ref, VarRef) and ref.name not in self.defined:
                    self.add(step, DiagnosticKind.UNDEFINED_VARIABLE, f"{ref.name} used before definition")

    def _check_types(self, step: PlanStep, sig) -> None:
        args = step.call.args
        candidates = [p for p in sig.params if len(p) == len(args)]
        if not candidates:
            arities = "/".join(str(len(p)) for p in sig.params)
            self.add(step, DiagnosticKind.ARITY_MISMATCH,
                     f"{step.call.function} takes {arities} arguments, got {len(args)}")
            return
        params = candidates[0]
        arg_kinds = [_arg_kind(a, self.kinds) for a in args]
        for param, kind, arg in zip(params, arg_kinds, args):
            if kind is not None and not _accepts(param, kind):
                self.add(step, DiagnosticKind.ARG_TYPE_MISMATCH,
                         f"{step.call.function} expects {param}, got {kind}")
            if isinstance(arg, ListLit):
                for item in arg.items:
                    item_kind = _arg_kind(item, self.kinds)
                    if item_kind is not None and item_kind not in ("text", "num"):
                        self.add(step, DiagnosticKind.ARG_TYPE_MISMATCH,
                                 f"descriptor lists hold text or numbers, got {item_kind}")
        if "comparable" in params:
            known = [k for k in arg_kinds if k is not None]
            if len(known) == 2 and known[0] != known[1]:
                self.add(step, DiagnosticKind.ARG_TYPE_MISMATCH,
                         f"{step.call.function} compares {known[0]} with {known[1]}")

    def _literal_known(self, slot: str, value: Any) -> bool:
        v = self.vocab
        if slot == SLOT_COUNT:
            return 1 <= value <= v.max_part_count
        if slot == SLOT_COLOR:
            return value in v.colors
        if slot == SLOT_SIZE:
            return value in v.sizes
        if slot == SLOT_MATERIAL:
            return value in v.materials
        if self.scene.style is SceneStyle.PART_BASED:
            return value in v.parts
        return value in v.categories

    def _check_vocabulary(self, step: PlanStep) -> None:
        fn, args = step.call.function, step.call.args
        checks: list[tuple[str, str]] = []  # (vocabulary slot, raw token)
        if fn in ("filter_object", "filter_category") and args and isinstance(args[0], StringLit):
            token = canonical(args[0].value)
            if token not in self.vocab.categories:
                self.add(step, DiagnosticKind.VOCABULARY_MISMATCH, f"no object of category {token!r}")
            return
        if fn == "filter_part" and args and isinstance(args[0], ListLit):
            for item in args[0].items:
                if isinstance(item, StringLit):
                    slot, value = classify(item.value)
                    if not self._literal_known(slot, value):
                        self.add(step, DiagnosticKind.VOCABULARY_MISMATCH,
                                 f"{item.value!r} ({slot}) does not occur in the scene")
            return
        if fn == "query_part" and len(args) == 2 and isinstance(args[0], StringLit):
            checks.append((SLOT_COLOR, args[0].value))
        if fn in ("query_color", "count_part") and len(args) == 2 and isinstance(args[0], StringLit):
            checks.append(("part", args[0].value))
        for slot, raw in checks:
            token = canonical(raw)
            known = token in self.vocab.parts if slot == "part" else self._literal_known(slot, token)
            if not known:
                self.add(step, DiagnosticKind.VOCABULARY_MISMATCH, f"{raw!r} does not occur in the scene")


_RUNTIME_KIND = {
    UndefinedVariable: DiagnosticKind.UNDEFINED_VARIABLE,
    UnknownFunction: DiagnosticKind.UNKNOWN_FUNCTION,
    ArityMismatch: DiagnosticKind.ARITY_MISMATCH,
}


def evaluate_candidate(prefix: Plan, scene: SceneGraph, stop_sign: str = STOP_SIGN) -> Verdict:
    checker = _StaticChecker(scene)
    for position, step in enumerate(prefix.steps, start=1):
        checker.check(position, step)
    diagnostics = checker.diagnostics
    if any(d.kind.hard for d in diagnostics):
        return Verdict.from_diagnostics(diagnostics)

    try:
        trace = execute_plan(prefix, scene, stop_sign)
        failure: RuntimeFailure | None = None
    except RuntimeFailure as exc:
        trace = exc.trace  # type: ignore[attr-defined]
        failure = exc
    for step, value in trace.entries:
        if step.call.function in EMPTY_IS_HARD and isinstance(value, Objects) and not value.indices:
            diagnostics.append(Diagnostic(step.index, DiagnosticKind.EMPTY_RESULT,
                                          f"{step.call.function} returned no objects"))
    if failure is not None:
        kind = _RUNTIME_KIND.get(type(failure), DiagnosticKind.RUNTIME_FAILURE)
        diagnostics.append(Diagnostic(failure.step or 0, kind, f"{failure.kind}: {failure.message}"))
    return Verdict.from_diagnostics(diagnostics)
