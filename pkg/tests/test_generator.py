from pathlib import Path

import pytest

from plansearch.dsl import extract_steps_from_response, parse_plan, render_plan
from plansearch.errors import InsufficientExamples
from plansearch.evaluator import evaluate_candidate
from plansearch.generator import (
    INSTRUCTION,
    NEXT_STEP,
    REMAINING,
    ChatGenerator,
    Example,
    GenRequest,
    MockGenerator,
    block,
    build_prompt,
    sample_examples,
    tool_description_block,
    variant_dispatch,
)

GOLDEN = Path(__file__).parent / "golden"


def test_perfect_mock_next_step(gold_plans):
    plan = gold_plans["Sum"]
    gen = MockGenerator(plan, seed=1)
    out = gen.generate(GenRequest("q", plan[:2], NEXT_STEP))
    assert out == plan[2].render() + "\n"


def test_perfect_mock_remaining(gold_plans):
    plan = gold_plans["Long Rel"]
    out = MockGenerator(plan).generate(GenRequest("q", plan[:2], REMAINING, depth=2))
    steps = extract_steps_from_response(out)
    assert steps == plan[2:]
    assert steps[-1].target == "ans"


def test_block_shorter_at_end(gold_plans):
    plan = gold_plans["Long Rel"]
    assert extract_steps_from_response(MockGenerator(plan).generate(GenRequest("q", plan[:7], block(3)))) == plan[7:]


def test_mock_exhausted_plan_gives_empty_text(gold_plans):
    plan = gold_plans["Sum"]
    assert MockGenerator(plan).generate(GenRequest("q", plan, NEXT_STEP)) == ""


@pytest.mark.parametrize("seed", range(20))
def test_zero_probability_mock_is_always_rejected(records, seed):
    rec = records["count-00"]
    gen = MockGenerator(rec.gold_plan, p_step=0.0, p_full=0.0, seed=seed)
    for cut in range(len(rec.gold_plan)):
        prefix = rec.gold_plan[:cut]
        for mode in (NEXT_STEP, REMAINING, block(2)):
            steps = extract_steps_from_response(gen.generate(GenRequest("q", prefix, mode)))
            assert steps != rec.gold_plan[cut : cut + len(steps)]
            assert not evaluate_candidate(prefix + steps, rec.scene).passed


def test_mock_is_seed_deterministic(gold_plans):
    plan = gold_plans["Analogy"]

    def stream(seed):
        gen = MockGenerator(plan, 0.5, 0.5, seed)
        return [gen.generate(GenRequest("q", plan[:i], NEXT_STEP)) for i in range(len(plan))]

    assert stream(4) == stream(4)
    assert any(stream(4) != stream(s) for s in range(5, 10))


def test_mock_rejects_bad_config(gold_plans):
    with pytest.raises(ValueError):
        MockGenerator(gold_plans["Sum"], p_step=1.5)
    with pytest.raises(ValueError):
        MockGenerator(gold_plans["Sum"], corruptions=("gibberish",))


@pytest.mark.parametrize(
    "algorithm,depth,branch,expected",
    [
        ("tot-os", 2, 0, REMAINING),
        ("tot-os", 1, 0, NEXT_STEP),
        ("tot-os", 3, 1, NEXT_STEP),
        ("tot-os", 5, 0, REMAINING),
        ("tot", 4, 0, NEXT_STEP),
        ("onestop", 1, 0, REMAINING),
    ],
)
def test_variant_dispatch(algorithm, depth, branch, expected):
    assert variant_dispatch(algorithm, depth, branch, start_depth=2) == expected


@pytest.mark.parametrize("depth,branch", [(1, 0), (3, 2), (7, 4)])
def test_block_dispatch(depth, branch):
    assert variant_dispatch("tot-block", depth, branch, block_size=2) == block(2)


def _library(n):
    return [Example(f"question {i}", parse_plan(f"Step 1:ans = count_object(all_obj)")) for i in range(n)]


def test_sample_examples():
    lib = _library(20)
    assert sample_examples(lib, 4, 7) == sample_examples(lib, 4, 7)
    assert len({e.question for e in sample_examples(lib, 4, 7)}) == 4
    assert any(sample_examples(lib, 4, 7) != sample_examples(lib, 4, s) for s in range(8, 14))
    with pytest.raises(InsufficientExamples):
        sample_examples(_library(3), 4, 0)


def _analogy_examples(appendix):
    prompt = appendix["analogy_prompt"]
    examples = [Example(e["question"], parse_plan("\n".join(e["plan"])), "Analogy") for e in prompt["examples"]]
    return examples, prompt["question"]


def test_prompt_golden(appendix):
    examples, question = _analogy_examples(appendix)
    text = build_prompt(INSTRUCTION, tool_description_block(), examples, question)
    assert text == (GOLDEN / "analogy_prompt.txt").read_text(encoding="utf-8")
    assert text.endswith("Answer:\n")


def test_prompt_continues_trajectory(appendix, gold_plans):
    examples, question = _analogy_examples(appendix)
    trajectory = gold_plans["Analogy"][:2]
    text = build_prompt(INSTRUCTION, tool_description_block(), examples, question, trajectory)
    assert text.endswith("Answer:\n" + render_plan(trajectory) + "\n")


class RecordingClient:
    def __init__(self, reply):
        self.reply = reply
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        return self.reply


def test_chat_generator_resamples_per_node(appendix):
    examples, question = _analogy_examples(appendix)
    library = examples + [Example(f"extra {i}", examples[0].plan) for i in range(6)]
    client = RecordingClient("Step 1:obj1 = filter_object(\"bed\",all_obj)")
    gen = ChatGenerator(client, library, m=4, seed=3)
    for _ in range(4):
        gen.generate(GenRequest(question))
    assert gen.calls == 4 and len(client.prompts) == 4
    assert len(set(client.prompts)) > 1
    assert all("Write only the next step." in p for p in client.prompts)
    again = ChatGenerator(RecordingClient(""), library, m=4, seed=3)
    assert [again.prompt_for(GenRequest(question)) for _ in range(4)] == client.prompts


def test_chat_generator_needs_enough_examples(appendix):
    examples, _ = _analogy_examples(appendix)
    with pytest.raises(InsufficientExamples):
        ChatGenerator(RecordingClient(""), examples[:3], m=4)
