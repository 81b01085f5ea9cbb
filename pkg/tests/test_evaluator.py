import json
import random

import pytest

from defects import CLASSES, seeded_defects
from plansearch.dsl import Call, Plan, PlanStep, VarRef, parse_plan
from plansearch.evaluator import DiagnosticKind, Verdict, detect_stop, evaluate_candidate
from plansearch.interpreter import execute_plan, format_answer


def test_gold_prefix_passes(records):
    rec = records["short-rel-00"]
    assert evaluate_candidate(rec.gold_plan[:2], rec.scene).passed


def test_unknown_function(ptr):
    v = evaluate_candidate(parse_plan('Step 1:obj1 = filter_objects("chair",all_obj)'), ptr)
    assert not v.passed and DiagnosticKind.UNKNOWN_FUNCTION in v.kinds


def test_vocabulary_mismatch(ptr):
    v = evaluate_candidate(parse_plan('Step 1:obj1 = filter_part(["drawer"],all_obj)'), ptr)
    assert not v.passed and v.kinds == {DiagnosticKind.VOCABULARY_MISMATCH}


def test_number_word_above_max_count(ptr):
    v = evaluate_candidate(parse_plan('Step 1:obj1 = filter_part(["nine","leg"],all_obj)'), ptr)
    assert DiagnosticKind.VOCABULARY_MISMATCH in v.kinds


def test_synonyms_are_in_vocabulary(clevr):
    v = evaluate_candidate(parse_plan('Step 1:obj1 = filter_part(["tiny","gray","shiny","ball"],all_obj)'), clevr)
    assert v.passed


def test_empty_filter_is_hard(ptr):
    v = evaluate_candidate(parse_plan('Step 1:obj1 = filter_part(["three","blue","leg"],all_obj)\n'
                                      'Step 2:obj2 = filter_object("chair",obj1)'), ptr)
    assert not v.passed and v.kinds == {DiagnosticKind.EMPTY_RESULT}


def test_empty_exclusion_is_allowed(ptr):
    v = evaluate_candidate(parse_plan('Step 1:obj1 = filter_object("table",all_obj)\n'
                                      "Step 2:obj2 = exclude_object(obj1,obj1)\n"
                                      "Step 3:ans = exist(obj2)"), ptr)
    assert v.passed


def test_runtime_failure_reported(ptr):
    v = evaluate_candidate(parse_plan('Step 1:obj1 = filter_object("chair",all_obj)\n'
                                      "Step 2:ans = query_category(obj1)"), ptr)
    assert not v.passed and v.kinds == {DiagnosticKind.RUNTIME_FAILURE}
    assert v.diagnostics[0].step == 2


def test_soft_diagnostics_do_not_fail(ptr):
    plan = parse_plan('Step 1:obj1 = filter_object("chair",all_obj)\n'
                      'Step 5:obj1 = filter_part(["gray","leg"],obj1)\n'
                      "Step 6:ans = count_object(obj1)")
    v = evaluate_candidate(plan, ptr)
    assert v.passed
    assert v.kinds == {DiagnosticKind.NON_SEQUENTIAL_INDEX, DiagnosticKind.REBINDING}
    assert all(not d.kind.hard for d in v.diagnostics)


def test_static_hard_error_skips_execution(ptr):
    # a well-typed prefix that would also fail at runtime reports only the static error
    plan = parse_plan('Step 1:obj1 = filter_object("unicorn",all_obj)\nStep 2:ans = query_category(obj1)')
    assert evaluate_candidate(plan, ptr).kinds == {DiagnosticKind.VOCABULARY_MISMATCH}


def test_verdict_serializes():
    v = Verdict.parse_failure("no steps", 1)
    assert json.loads(v.dumps()) == v.to_json()
    assert not v.passed and v.kinds == {DiagnosticKind.PARSE_FAILURE}


def test_detect_stop(gold_plans):
    plan = gold_plans["Sum"]
    assert detect_stop(plan)
    assert not detect_stop(plan[:6])
    assert not detect_stop(Plan())


def test_every_gold_plan_passes(fixtures):
    for rec in fixtures.records:
        assert evaluate_candidate(rec.gold_plan, rec.scene).passed, rec.id


@pytest.mark.parametrize("kind", CLASSES, ids=lambda k: k.value)
def test_seeded_defects_rejected(fixtures, kind):
    seen = 0
    for rec, k, plan in seeded_defects(fixtures.records, per_record=2, seed=11):
        if k is not kind:
            continue
        v = evaluate_candidate(plan, rec.scene)
        assert not v.passed and kind in v.kinds, (rec.id, plan.render())
        seen += 1
    assert seen >= 2 * len(fixtures.records)


def test_monotonic_failure(fixtures):
    """A hard-failing prefix keeps failing however it is extended."""
    rng = random.Random(3)
    for rec, _, bad in seeded_defects(fixtures.test, per_record=1, seed=5):
        for cut in range(1, len(bad) + 1):
            prefix = bad[:cut]
            if evaluate_candidate(prefix, rec.scene).passed:
                continue
            for _ in range(3):
                extra = rec.gold_plan[rng.randrange(len(rec.gold_plan)) :]
                filler = PlanStep(99, "zz", Call("count_object", (VarRef("all_obj"),)))
                extended = prefix + extra + Plan((filler,))
                assert not evaluate_candidate(extended, rec.scene).passed
            break


def test_passing_complete_plan_executes(fixtures):
    for rec in fixtures.records:
        plan = rec.gold_plan
        if evaluate_candidate(plan, rec.scene).passed and detect_stop(plan):
            trace = execute_plan(plan, rec.scene)
            assert format_answer(trace.answer)
