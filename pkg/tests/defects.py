"""Seeded plan defects, one family per hard diagnostic class."""

from __future__ import annotations

import random
from dataclasses import replace

from plansearch.dsl import Call, ListLit, Plan, PlanStep, StringLit, VarRef
from plansearch.evaluator import DiagnosticKind
from plansearch.interpreter import SIGNATURES, Objects, execute_plan

CLASSES = (
    DiagnosticKind.UNKNOWN_FUNCTION,
    DiagnosticKind.ARITY_MISMATCH,
    DiagnosticKind.ARG_TYPE_MISMATCH,
    DiagnosticKind.UNDEFINED_VARIABLE,
    DiagnosticKind.VOCABULARY_MISMATCH,
    DiagnosticKind.EMPTY_RESULT,
)


def _with_step(plan, pos, step):
    steps = list(plan.steps)
    steps[pos] = step
    return Plan(tuple(steps))


def _with_args(step, args):
    return replace(step, call=Call(step.call.function, tuple(args)))


def unknown_function(plan, scene, rng):
    pos = rng.randrange(len(plan))
    step = plan[pos]
    return _with_step(plan, pos, replace(step, call=Call(step.call.function + "s", step.call.args)))


def arity(plan, scene, rng):
    pos = rng.randrange(len(plan))
    step = plan[pos]
    valid = {len(p) for p in SIGNATURES[step.call.function].params}
    args = list(step.call.args)
    if rng.random() < 0.5 and len(args) - 1 not in valid:
        args.pop()
    else:
        while len(args) in valid:
            args.append(VarRef("all_obj"))
    return _with_step(plan, pos, _with_args(step, args))


def arg_type(plan, scene, rng):
    # hand a text literal where an object list is expected, or an object list where text is
    candidates = []
    for pos, step in enumerate(plan.steps):
        for k, arg in enumerate(step.call.args):
            if isinstance(arg, VarRef) and arg.name == "all_obj":
                candidates.append((pos, k, StringLit("everything")))
            if isinstance(arg, StringLit) and step.call.function in ("query_relation", "count_part", "query_part"):
                candidates.append((pos, k, VarRef("all_obj")))
    pos, k, new = rng.choice(candidates)
    args = list(plan[pos].call.args)
    args[k] = new
    return _with_step(plan, pos, _with_args(plan[pos], args))


def undefined_variable(plan, scene, rng):
    candidates = [
        (pos, k)
        for pos, step in enumerate(plan.steps)
        for k, arg in enumerate(step.call.args)
        if isinstance(arg, VarRef)
    ]
    pos, k = rng.choice(candidates)
    args = list(plan[pos].call.args)
    args[k] = VarRef("obj99")
    return _with_step(plan, pos, _with_args(plan[pos], args))


def vocabulary(plan, scene, rng):
    candidates = []
    for pos, step in enumerate(plan.steps):
        for k, arg in enumerate(step.call.args):
            if isinstance(arg, StringLit) and step.call.function in (
                "filter_object", "filter_category", "query_part", "query_color", "count_part"
            ):
                candidates.append((pos, k, None))
            if isinstance(arg, ListLit):
                for j, item in enumerate(arg.items):
                    if isinstance(item, StringLit):
                        candidates.append((pos, k, j))
    pos, k, j = rng.choice(candidates)
    args = list(plan[pos].call.args)
    if j is None:
        args[k] = StringLit("unicorn")
    else:
        items = list(args[k].items)
        items[j] = StringLit("unicorn")
        args[k] = ListLit(tuple(items))
    return _with_step(plan, pos, _with_args(plan[pos], args))


def empty_result(plan, scene, rng):
    """Insert a filter that keeps nothing: a category absent from an intermediate set."""
    trace = execute_plan(plan, scene)
    options = []
    for pos, (step, value) in enumerate(trace.entries):
        if isinstance(value, Objects) and value.indices:
            present = {scene.objects[i].category for i in value.indices}
            for cat in sorted(scene.vocabulary.categories - present):
                options.append((pos, step.target, cat))
    if not options:
        raise LookupError("every intermediate set already spans all categories")
    pos, var, cat = rng.choice(options)
    new = PlanStep(plan[pos].index, "empty1", Call("filter_object", (StringLit(cat), VarRef(var))))
    steps = list(plan.steps[: pos + 1]) + [new] + list(plan.steps[pos + 1 :])
    return Plan(tuple(steps))


SEEDERS = {
    DiagnosticKind.UNKNOWN_FUNCTION: unknown_function,
    DiagnosticKind.ARITY_MISMATCH: arity,
    DiagnosticKind.ARG_TYPE_MISMATCH: arg_type,
    DiagnosticKind.UNDEFINED_VARIABLE: undefined_variable,
    DiagnosticKind.VOCABULARY_MISMATCH: vocabulary,
    DiagnosticKind.EMPTY_RESULT: empty_result,
}


def seeded_defects(records, per_record=2, seed=0):
    """Yield ``(record, kind, defective plan)`` for every class and record."""
    rng = random.Random(seed)
    for record in records:
        for kind in CLASSES:
            for _ in range(per_record):
                try:
                    yield record, kind, SEEDERS[kind](record.gold_plan, record.scene, rng)
                except (LookupError, IndexError):
                    continue

