"""Plan generators: a seeded mock for offline runs and a chat-backed generator.

Both return raw text; callers pull step lines out with
:func:`plansearch.dsl.extract_steps_from_response`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

from .dsl import ListLit, Plan, PlanStep, StringLit, VarRef, render_plan
from .errors import InsufficientExamples


@dataclass(frozen=True)
class GenMode:
    kind: str  # "next", "remaining" or "block"
    k: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("next", "remaining", "block"):
            raise ValueError(f"unknown generation mode {self.kind!r}")
        if self.k < 1:
            raise ValueError("block size must be >= 1")

    def __str__(self) -> str:
        return f"block({self.k})" if self.kind == "block" else self.kind


NEXT_STEP = GenMode("next")
REMAINING = GenMode("remaining")


def block(k: int) -> GenMode:
    return GenMode("block", k)


@dataclass(frozen=True)
class GenRequest:
    question: str
    trajectory: Plan = Plan()
    mode: GenMode = NEXT_STEP
    depth: int = 1
    branch: int = 0


class Generator(Protocol):
    def generate(self, request: GenRequest) -> str: ...


@dataclass(frozen=True)
class Example:
    question: str
    plan: Plan
    question_type: str | None = None


def variant_dispatch(algorithm: str, depth: int, branch: int, start_depth: int = 2, block_size: int = 2) -> GenMode:
    """Generation mode for the node at ``depth`` (1-based) on branch ``branch`` (0-based)."""
    if depth < 1 or branch < 0:
        raise ValueError("depth starts at 1 and branch at 0")
    if algorithm == "tot":
        return NEXT_STEP
    if algorithm == "tot-os":
        return REMAINING if depth >= start_depth and branch == 0 else NEXT_STEP
    if algorithm == "tot-block":
        return block(block_size)
    if algorithm == "onestop":
        return REMAINING
    raise ValueError(f"unknown algorithm {algorithm!r}")


# -- mock ------------------------------------------------------------------------

CORRUPTIONS = ("wrong_function", "wrong_literal", "undefined_variable")
_OOV_TOKEN = "unicorn"
_UNDEFINED_VAR = "obj99"


def _corrupt_function(step: PlanStep) -> PlanStep | None:
    return replace(step, call=replace(step.call, function=step.call.function + "s"))


def _corrupt_literal(step: PlanStep) -> PlanStep | None:
    args = list(step.call.args)
    for pos, arg in enumerate(args):
        if isinstance(arg, StringLit):
            args[pos] = StringLit(_OOV_TOKEN)
            return replace(step, call=replace(step.call, args=tuple(args)))
        if isinstance(arg, ListLit):
            for j, item in enumerate(arg.items):
                if isinstance(item, StringLit):
                    items = list(arg.items)
                    items[j] = StringLit(_OOV_TOKEN)
                    args[pos] = ListLit(tuple(items))
                    return replace(step, call=replace(step.call, args=tuple(args)))
    return None


def _corrupt_variable(step: PlanStep) -> PlanStep | None:
    args = list(step.call.args)
    for pos, arg in enumerate(args):
        if isinstance(arg, VarRef):
            args[pos] = VarRef(_UNDEFINED_VAR)
            return replace(step, call=replace(step.call, args=tuple(args)))
    return None


_CORRUPTORS = {
    "wrong_function": _corrupt_function,
    "wrong_literal": _corrupt_literal,
    "undefined_variable": _corrupt_variable,
}


@dataclass
class MockGenerator:
    """Replays a gold plan, corrupting output at configurable rates.

    ``p_step`` is the chance a single-step generation is the correct next gold step;
    ``p_full`` the chance a remaining-steps or block generation is entirely correct.
    Every corruption is one the evaluator rejects.
    """

    gold_plan: Plan
    p_step: float = 1.0
    p_full: float = 1.0
    seed: int = 0
    corruptions: Sequence[str] = CORRUPTIONS
    calls: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        for p in (self.p_step, self.p_full):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        unknown = set(self.corruptions) - set(_CORRUPTORS)
        if unknown or not self.corruptions:
            raise ValueError(f"bad corruption kinds {sorted(unknown) or 'none'}")
        self._rng = random.Random(self.seed)

    def generate(self, request: GenRequest) -> str:
        self.calls += 1
        remaining = self.gold_plan.steps[len(request.trajectory):]
        if request.mode.kind == "next":
            steps, p = list(remaining[:1]), self.p_step
        elif request.mode.kind == "block":
            steps, p = list(remaining[: request.mode.k]), self.p_full
        else:
            steps, p = list(remaining), self.p_full
        if not steps:
            return ""
        if self._rng.random() >= p:
            steps = self._corrupt(steps)
        return render_plan(Plan(tuple(steps))) + "\n"

    def _corrupt(self, steps: list[PlanStep]) -> list[PlanStep]:
        pos = self._rng.randrange(len(steps))
        kinds = list(self.corruptions)
        first = self._rng.choice(kinds)
        # fall back through the other kinds when the chosen one does not apply
        for kind in [first] + [k for k in kinds if k != first] + ["wrong_function"]:
            bad = _CORRUPTORS[kind](steps[pos])
            if bad is not None:
                steps[pos] = bad
                return steps
        raise AssertionError("unreachable: wrong_function always applies")


# -- prompting ---------------------------------------------------------------------

INSTRUCTION = (
    "Answer the question with a numbered plan of tool calls, one call per line, "
    "in the form Step n:var = tool(args). Assign the final result to ans."
)

MODE_HINTS = {
    "next": "Write only the next step.",
    "remaining": "Write all of the remaining steps, ending with the step that assigns ans.",
    "block": "Write the next {k} steps, or fewer if the plan ends by assigning ans.",
}

TOOL_DESCRIPTIONS = {
    "filter_object": "filter_object(category, object_list): keep the objects of the given category.",
    "filter_part": (
        "filter_part(part_list, object_list): keep the objects matching every part or "
        "attribute in the list (number word, color, size, material, part or shape name)."
    ),
    "filter_category": "filter_category(category, object_list): keep the objects whose category matches.",
    "exclude_object": "exclude_object(object, object_list): the object list without the given object.",
    "intersection": "intersection(object_list, object_list): objects present in both lists.",
    "query_relation": "query_relation(relation, object): the objects standing in the relation to the object.",
    "get_relation": "get_relation(object, object): every spatial relation the first object has to the second.",
    "filter_relation": (
        "filter_relation(relation, thing, object_list): the objects in the list that the thing "
        "stands in the relation to."
    ),
    "query_category": "query_category(object): the category of the object.",
    "query_part": "query_part(color, object): the name of the part of the object with that color.",
    "query_color": "query_color(part, object): the color of the part; query_color(object) gives the object color.",
    "query_size": "query_size(object): the size of the object.",
    "count_part": "count_part(part, object): how many of the part the object has.",
    "count_object": "count_object(object_list): how many objects the list holds.",
    "sum": "sum(num1, num2): the sum of two numbers.",
    "equal": "equal(input1, input2): whether two numbers or two attributes are equal.",
    "more_than": "more_than(num1, num2): whether the first number is larger.",
    "few_than": "few_than(num1, num2): whether the first number is smaller.",
    "exist": "exist(object_list): whether the object list is nonempty.",
}


def tool_description_block(names: Sequence[str] | None = None) -> str:
    names = list(TOOL_DESCRIPTIONS) if names is None else names
    return "\n".join(TOOL_DESCRIPTIONS[n] for n in names)


def sample_examples(library: Sequence[Example], m: int, seed: int | random.Random) -> list[Example]:
    if len(library) < m:
        raise InsufficientExamples(f"need {m} examples, library has {len(library)}")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return rng.sample(list(library), m)


def build_prompt(
    instruction: str,
    tool_descriptions: str,
    examples: Sequence[Example],
    question: str,
    trajectory: Plan = Plan(),
) -> str:
    parts = [instruction.strip(), "", tool_descriptions.strip(), ""]
    for ex in examples:
        parts += [f"Question: {ex.question}", "Answer:", render_plan(ex.plan), ""]
    parts += [f"Question: {question}", "Answer:"]
    text = "\n".join(parts) + "\n"
    if trajectory.steps:
        text += render_plan(trajectory) + "\n"
    return text


class ChatGenerator:
    """Generator backed by a chat-completion client.

    A fresh set of ``m`` demonstrations is drawn for every node.
    """

    def __init__(
        self,
        client,
        library: Sequence[Example],
        m: int = 4,
        seed: int = 0,
        instruction: str = INSTRUCTION,
        tools: str | None = None,
    ) -> None:
        if len(library) < m:
            raise InsufficientExamples(f"need {m} examples, library has {len(library)}")
        self.client = client
        self.library = list(library)
        self.m = m
        self.instruction = instruction
        self.tools = tools if tools is not None else tool_description_block()
        self.calls = 0
        self._rng = random.Random(seed)

    def prompt_for(self, request: GenRequest) -> str:
        examples = sample_examples(self.library, self.m, self._rng)
        hint = MODE_HINTS[request.mode.kind].format(k=request.mode.k)
        return build_prompt(
            f"{self.instruction}\n{hint}", self.tools, examples, request.question, request.trajectory
        )

    def generate(self, request: GenRequest) -> str:
        self.calls += 1
        return self.client.complete(self.prompt_for(request))
