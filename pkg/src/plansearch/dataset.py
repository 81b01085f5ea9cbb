"""Question records, the question-type taxonomy and bundled fixture data."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Any, Iterable

from .dsl import Plan, parse_plan
from .errors import (
    GoldPlanMismatch,
    MissingGoldPlan,
    ParseError,
    RuntimeFailure,
    SchemaError,
    TaxonomyError,
)
from .interpreter import execute_plan, format_answer, normalize_answer
from .scene import SceneGraph, scene_from_document

STRUCTURES = {
    "Short Rel": "Sequence",
    "Long Rel": "Sequence",
    "Sum": "Parallel",
    "Compare": "Parallel",
    "Logic": "Parallel",
    "Query Part": "Backtrack",
    "Exist": "Backtrack",
    "Count": "Backtrack",
    "Analogy": "Multi-Backtrack",
}
QUESTION_TYPES = tuple(STRUCTURES)
STRUCTURE_ORDER = ("Sequence", "Parallel", "Backtrack", "Multi-Backtrack")

SPLITS = ("library", "test")


@dataclass(frozen=True)
class QuestionRecord:
    id: str
    question: str
    answer: str
    question_type: str
    structure: str
    scene: SceneGraph
    gold_plan: Plan | None = None
    split: str = "test"
    scene_document: dict[str, Any] = field(default=None, compare=False, repr=False)

    @property
    def hops(self) -> int:
        return hop_of(self)

    def to_json(self) -> dict[str, Any]:
        doc = self.scene_document or self.scene.to_document()
        row: dict[str, Any] = {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "question_type": self.question_type,
            "structure": self.structure,
            "gold_plan": [s.render() for s in self.gold_plan.steps] if self.gold_plan else None,
            "scene": {"relationships": doc["relationships"], "objects": doc["objects"]},
        }
        if self.split != "test":
            row["split"] = self.split
        return row


@dataclass(frozen=True)
class DatasetSplit:
    library: tuple[QuestionRecord, ...] = ()
    test: tuple[QuestionRecord, ...] = ()

    def __post_init__(self) -> None:
        overlap = {r.id for r in self.library} & {r.id for r in self.test}
        if overlap:
            raise SchemaError(f"library and test share ids: {sorted(overlap)}")

    @property
    def records(self) -> tuple[QuestionRecord, ...]:
        return self.library + self.test

    def library_for(self, question_type: str) -> list[QuestionRecord]:
        return [r for r in self.library if r.question_type == question_type]

    def test_for(self, question_type: str) -> list[QuestionRecord]:
        return [r for r in self.test if r.question_type == question_type]


def hop_of(record: QuestionRecord) -> int:
    if record.gold_plan is None:
        raise MissingGoldPlan(f"record {record.id} has no gold plan")
    return len(record.gold_plan)


def check_gold_plan(record: QuestionRecord) -> str:
    """Execute the gold plan and return its formatted answer; raise on disagreement."""
    assert record.gold_plan is not None
    try:
        trace = execute_plan(record.gold_plan, record.scene)
    except RuntimeFailure as exc:
        raise GoldPlanMismatch(f"record {record.id}: gold plan fails: {exc}") from exc
    if trace.answer is None:
        raise GoldPlanMismatch(f"record {record.id}: gold plan never assigns ans")
    got = format_answer(trace.answer)
    if got != normalize_answer(record.answer):
        raise GoldPlanMismatch(f"record {record.id}: gold plan answers {got!r}, record says {record.answer!r}")
    return got


def record_from_json(row: Any, where: str = "record") -> QuestionRecord:
    if not isinstance(row, dict):
        raise SchemaError(f"{where}: expected a JSON object")
    for key in ("id", "question", "answer", "question_type", "structure", "scene"):
        if key not in row:
            raise SchemaError(f"{where}: missing {key!r}")
    qtype, structure = row["question_type"], row["structure"]
    if qtype not in STRUCTURES:
        raise TaxonomyError(f"{where}: unknown question type {qtype!r}")
    if STRUCTURES[qtype] != structure:
        raise TaxonomyError(f"{where}: {qtype} belongs to {STRUCTURES[qtype]}, not {structure!r}")
    split = row.get("split", "test")
    if split not in SPLITS:
        raise SchemaError(f"{where}: unknown split {split!r}")
    scene = scene_from_document(row["scene"])
    gold = row.get("gold_plan")
    plan = None
    if gold is not None:
        if not isinstance(gold, list) or not all(isinstance(s, str) for s in gold):
            raise SchemaError(f"{where}: gold_plan must be a list of step strings")
        try:
            plan = parse_plan("\n".join(gold))
        except ParseError as exc:
            raise SchemaError(f"{where}: gold plan does not parse: {exc}") from exc
    record = QuestionRecord(
        id=str(row["id"]),
        question=str(row["question"]),
        answer=str(row["answer"]),
        question_type=qtype,
        structure=structure,
        scene=scene,
        gold_plan=plan,
        split=split,
        scene_document=row["scene"],
    )
    if plan is not None:
        check_gold_plan(record)
    return record


def split_records(records: Iterable[QuestionRecord]) -> DatasetSplit:
    records = list(records)
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate record ids")
    return DatasetSplit(
        library=tuple(r for r in records if r.split == "library"),
        test=tuple(r for r in records if r.split == "test"),
    )


def parse_dataset(text: str) -> DatasetSplit:
    records = []
    for lineno, line in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {lineno}: invalid JSON: {exc}") from exc
        records.append(record_from_json(row, f"line {lineno}"))
    return split_records(records)


def load_dataset(path: str | Path) -> DatasetSplit:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def dump_dataset(records: Iterable[QuestionRecord]) -> str:
    return "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in records)


def bundled_fixtures() -> DatasetSplit:
    return parse_dataset(files("plansearch.data").joinpath("fixtures.jsonl").read_text(encoding="utf-8"))


def bundled_scene_document(name: str) -> dict[str, Any]:
    """Raw JSON of a bundled scene: ``"appendix_ptr"`` or ``"appendix_clevr"``."""
    return json.loads(files("plansearch.data").joinpath(f"{name}.json").read_text(encoding="utf-8"))


# -- synthetic chains ------------------------------------------------------------

_SYN_COLORS = ("gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow")
_SYN_SHAPES = ("cube", "sphere", "cylinder")
_SYN_SIZES = ("small", "large")
_SYN_MATERIALS = ("rubber", "metal")


def _synthetic_scene(rng: random.Random, n: int) -> dict[str, Any]:
    counters: dict[str, int] = {}
    objects = []
    for _ in range(n):
        shape = rng.choice(_SYN_SHAPES)
        name = f"{shape}{counters.get(shape, 0)}"
        counters[shape] = counters.get(shape, 0) + 1
        objects.append({name: [rng.choice(_SYN_COLORS), rng.choice(_SYN_SIZES), rng.choice(_SYN_MATERIALS)]})
    xs = rng.sample(range(100), n)
    ys = rng.sample(range(100), n)
    rel = {
        "left": [[j for j in range(n) if xs[j] < xs[i]] for i in range(n)],
        "right": [[j for j in range(n) if xs[j] > xs[i]] for i in range(n)],
        "front": [[j for j in range(n) if ys[j] < ys[i]] for i in range(n)],
        "behind": [[j for j in range(n) if ys[j] > ys[i]] for i in range(n)],
    }
    return {"relationships": rel, "objects": objects}


def synthetic_chain(hops: int, seed: int) -> tuple[dict[str, Any], list[str]]:
    """A scene and an executable ``hops``-step plan that narrows down a set of objects.

    Every filter keeps one chosen target object, so no step ever yields an empty set.
    """
    if hops < 2:
        raise ValueError("synthetic chains need at least two steps")
    rng = random.Random(seed)
    doc = _synthetic_scene(rng, rng.randint(5, 9))
    (target_name, (color, size, material)), = doc["objects"][rng.randrange(len(doc["objects"]))].items()
    shape = target_name.rstrip("0123456789")
    descriptors = [color, size, material, shape]

    lines: list[str] = []
    names: list[str] = []

    def emit(call: str) -> None:
        name = f"obj{len(names) + 1}"
        lines.append(f"Step {len(lines) + 1}:{name} = {call}")
        names.append(name)

    emit(f'filter_part(["{rng.choice(descriptors[:3])}"],all_obj)')
    while len(lines) < hops - 1:
        prev = names[-1]
        choice = rng.random()
        if choice < 0.4:
            picks = rng.sample(descriptors[:3], rng.randint(1, 2))
            emit("filter_part([" + ",".join(f'"{p}"' for p in picks) + f"],{prev})")
        elif choice < 0.7:
            emit(f'filter_object("{shape}",{prev})')
        else:
            other = rng.choice(names)
            emit(f"intersection({prev},{other})")
    final = rng.choice(("count_object", "exist"))
    lines.append(f"Step {hops}:ans = {final}({names[-1]})")
    return doc, lines


def synthetic_records(count: int, seed: int = 0, hops: Iterable[int] = range(2, 11)) -> list[QuestionRecord]:
    """Executable chain questions with hop counts cycling through ``hops``.

    Each record carries a nominal question type (cycling through the taxonomy) so
    reports can group it; the chains themselves are type-agnostic.
    """
    hop_cycle = list(hops)
    records = []
    for i in range(count):
        h = hop_cycle[i % len(hop_cycle)]
        doc, lines = synthetic_chain(h, seed * 1_000_003 + i)
        scene = scene_from_document(doc)
        plan = parse_plan("\n".join(lines))
        answer = format_answer(execute_plan(plan, scene).answer)
        qtype = QUESTION_TYPES[i % len(QUESTION_TYPES)]
        records.append(
            QuestionRecord(
                id=f"syn-{seed}-{i:04d}",
                question=f"synthetic {h}-hop chain question #{i}",
                answer=answer,
                question_type=qtype,
                structure=STRUCTURES[qtype],
                scene=scene,
                gold_plan=plan,
                scene_document=doc,
            )
        )
    return records

