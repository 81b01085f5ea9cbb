"""Depth-first plan search mixing single-step, one-stop and block generation.

One generator invocation is one reasoning step. The budget is checked before each
invocation, so ``steps_used <= max_step`` always holds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .dsl import Plan, extract_steps_from_response, render_plan
from .errors import RuntimeFailure
from .evaluator import Verdict, detect_stop, evaluate_candidate
from .generator import GenMode, GenRequest, Generator, REMAINING, variant_dispatch
from .interpreter import STOP_SIGN, execute_plan, format_answer
from .scene import SceneGraph

ALGORITHMS = ("onestop", "tot", "tot-os", "tot-block")
LABELS = {"onestop": "One-Stop", "tot": "ToT", "tot-os": "ToT-OS", "tot-block": "ToT-Block"}


@dataclass(frozen=True)
class SearchConfig:
    algorithm: str = "tot"
    branch: int | None = None  # None -> 5 for tot-block, 3 otherwise
    max_step: int = 30
    start_depth: int = 2
    block_size: int = 2
    stop_sign: str = STOP_SIGN

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.branch is None:
            object.__setattr__(self, "branch", 5 if self.algorithm == "tot-block" else 3)
        if self.branch < 1 or self.max_step < 1 or self.start_depth < 1 or self.block_size < 1:
            raise ValueError("branch, max_step, start_depth and block_size must be >= 1")

    @property
    def label(self) -> str:
        if self.algorithm == "tot-os" and self.start_depth != 2:
            return f"ToT-OS(sn={self.start_depth})"
        if self.algorithm == "tot-block" and self.block_size != 2:
            return f"ToT-Block(k={self.block_size})"
        return LABELS[self.algorithm]

    def mode_for(self, depth: int, branch: int) -> GenMode:
        return variant_dispatch(self.algorithm, depth, branch, self.start_depth, self.block_size)

    def to_json(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "branch": self.branch,
            "max_step": self.max_step,
            "start_depth": self.start_depth,
            "block_size": self.block_size,
            "stop_sign": self.stop_sign,
        }


@dataclass(frozen=True)
class NodeEvent:
    depth: int
    branch: int
    t: int
    mode: str
    text: str
    verdict: Verdict

    def to_json(self) -> dict[str, Any]:
        return {
            "depth": self.depth,
            "branch": self.branch,
            "t": self.t,
            "mode": self.mode,
            "text": self.text,
            "verdict": self.verdict.to_json(),
        }


@dataclass
class SearchResult:
    success: bool = False
    plan: Plan | None = None
    answer: str | None = None
    steps_used: int = 0
    backtracks: int = 0
    budget_exhausted: bool = False
    trace: list[NodeEvent] = field(default_factory=list)

    @property
    def no_back(self) -> bool:
        return self.backtracks == 0

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in self.trace)

    def to_json(self) -> dict[str, Any]:
        return {
            "success": self.success,
            "plan": render_plan(self.plan) if self.plan is not None else None,
            "answer": self.answer,
            "steps_used": self.steps_used,
            "backtracks": self.backtracks,
            "no_back": self.no_back,
            "budget_exhausted": self.budget_exhausted,
        }


def _truncate_at_stop(plan: Plan, stop_sign: str) -> Plan:
    for pos, step in enumerate(plan.steps):
        if step.target == stop_sign:
            return Plan(plan.steps[: pos + 1])
    return plan


def candidate_steps(mode: GenMode, trajectory: Plan, generated: Plan) -> Plan:
    """Trim a generation to what the node asked for.

    Chat models sometimes echo the accepted steps before continuing; an exact echo
    of the trajectory is dropped.
    """
    steps = generated.steps
    n = len(trajectory)
    if n and steps[:n] == trajectory.steps:
        steps = steps[n:]
    if mode.kind == "next":
        steps = steps[:1]
    elif mode.kind == "block":
        steps = steps[: mode.k]
    return Plan(steps)


class _Found(Exception):
    pass


class _OutOfBudget(Exception):
    pass


class _Search:
    def __init__(self, question: str, generator: Generator, scene: SceneGraph, config: SearchConfig) -> None:
        self.question = question
        self.generator = generator
        self.scene = scene
        self.config = config
        self.result = SearchResult()

    def expand(self, prefix: Plan, depth: int, branch: int, mode: GenMode) -> tuple[Plan, Verdict]:
        res = self.result
        if res.steps_used >= self.config.max_step:
            res.budget_exhausted = True
            raise _OutOfBudget
        text = self.generator.generate(GenRequest(self.question, prefix, mode, depth, branch))
        res.steps_used += 1
        steps = candidate_steps(mode, prefix, extract_steps_from_response(text))
        candidate = prefix + steps
        if not steps:
            verdict = Verdict.parse_failure("generation holds no step lines", len(prefix) + 1)
        else:
            verdict = evaluate_candidate(candidate, self.scene, self.config.stop_sign)
        res.trace.append(NodeEvent(depth, branch, res.steps_used, str(mode), text, verdict))
        return candidate, verdict

    def accept(self, candidate: Plan) -> None:
        plan = _truncate_at_stop(candidate, self.config.stop_sign)
        trace = execute_plan(plan, self.scene, self.config.stop_sign)
        self.result.success = True
        self.result.plan = plan
        try:
            self.result.answer = format_answer(trace.answer) if trace.answer is not None else None
        except RuntimeFailure:
            self.result.answer = None
        raise _Found

    def dfs(self, prefix: Plan, depth: int) -> None:
        for branch in range(self.config.branch):
            candidate, verdict = self.expand(prefix, depth, branch, self.config.mode_for(depth, branch))
            if not verdict.passed:
                self.result.backtracks += 1
                continue
            if detect_stop(candidate, self.config.stop_sign):
                self.accept(candidate)
            self.dfs(candidate, depth + 1)
        # every branch at this node failed
        self.result.backtracks += 1

    def one_stop(self) -> None:
        candidate, verdict = self.expand(Plan(), 1, 0, REMAINING)
        if verdict.passed and detect_stop(candidate, self.config.stop_sign):
            self.accept(candidate)
        self.result.backtracks += 1


def solve(record: Any, generator: Generator, scene: SceneGraph, config: SearchConfig) -> SearchResult:
    """Search for an executable plan that reaches the stop sign.

    ``record`` is a question record or the bare question text.
    """
    question = getattr(record, "question", record)
    search = _Search(question, generator, scene, config)
    try:
        if config.algorithm == "onestop":
            search.one_stop()
        else:
            search.dfs(Plan(), 1)
    except (_Found, _OutOfBudget):
        pass
    return search.result


def run_one_stop(record: Any, generator: Generator, scene: SceneGraph) -> SearchResult:
    return solve(record, generator, scene, SearchConfig("onestop"))
