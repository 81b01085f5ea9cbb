"""Acceptance criteria, one test each.

Every test prints a single ``AC<n> PASS|FAIL <detail>`` line; the lines are repeated
in the pytest terminal summary. Run ``python tests/test_acceptance.py`` to print just
the ten lines.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracle  # noqa: E402
from defects import CLASSES, seeded_defects  # noqa: E402
from plansearch.cli import main as cli_main  # noqa: E402
from plansearch.dataset import bundled_fixtures, synthetic_records  # noqa: E402
from plansearch.dsl import parse_plan  # noqa: E402
from plansearch.evaluator import evaluate_candidate  # noqa: E402
from plansearch.harness import mock_factory, pearson, render_report, rssi, run_experiment  # noqa: E402
from plansearch.interpreter import execute_plan, format_answer, normalize_answer  # noqa: E402
from plansearch.search import SearchConfig  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"
RESULTS: dict[int, str] = {}

# tolerances
RSSI_TOL = 1e-9
PEARSON_TOL = 1e-12


def report_line(n: int, ok: bool, detail: str) -> None:
    line = f"AC{n} {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def _fixtures():
    return bundled_fixtures()


def _appendix_plans():
    from importlib.resources import files

    return json.loads(files("plansearch.data").joinpath("appendix_plans.json").read_text(encoding="utf-8"))


def test_ac1_clevr_end_to_end():
    rec = next(r for r in _fixtures().records if r.id == "appendix-clevr")
    got = format_answer(execute_plan(rec.gold_plan, rec.scene).answer)
    report_line(1, got == "brown" == normalize_answer(rec.answer),
                f"CLEVR logic plan ({rec.hops} steps) -> {got!r}, expected 'brown'")


def test_ac2_ptr_end_to_end():
    rec = next(r for r in _fixtures().records if r.id == "appendix-ptr")
    got = format_answer(execute_plan(rec.gold_plan, rec.scene).answer)
    report_line(2, got == "chair" and got == normalize_answer(rec.answer),
                f"PTR analogy plan ({rec.hops} steps) -> {got!r}, gold {rec.answer!r}")


def test_ac3_appendix_gold_plans():
    by_question = {r.question: r for r in _fixtures().records}
    problems = []
    gold = _appendix_plans()["gold_plans"]
    for g in gold:
        plan = parse_plan("\n".join(g["plan"]))
        rec = by_question.get(g["question"])
        if rec is None or rec.gold_plan != plan:
            problems.append(f"{g['question_type']}: no fixture")
            continue
        verdict = evaluate_candidate(plan, rec.scene)
        got = format_answer(execute_plan(plan, rec.scene).answer)
        row = rec.to_json()
        expected, _ = oracle.run(row["gold_plan"], row["scene"])
        if not verdict.passed or got != expected or got != normalize_answer(rec.answer):
            problems.append(f"{g['question_type']}: pass={verdict.passed} got={got} oracle={expected}")
    report_line(3, len(gold) == 9 and not problems,
                f"{len(gold) - len(problems)}/{len(gold)} appendix plans pass and agree with the oracle; "
                f"disagreements={problems}")


def test_ac4_perfect_oracle_formulas():
    failures = []
    for h in range(2, 11):
        records = synthetic_records(3, seed=100 + h, hops=[h])
        configs = [SearchConfig("tot"), SearchConfig("onestop")]
        configs += [SearchConfig("tot-block", block_size=k) for k in (2, 3, 4)]
        configs += [SearchConfig("tot-os", start_depth=sn) for sn in (1, 2, 3)]
        expected = {"ToT": h, "One-Stop": 1}
        expected.update({SearchConfig("tot-block", block_size=k).label: math.ceil(h / k) for k in (2, 3, 4)})
        expected.update({SearchConfig("tot-os", start_depth=sn).label: min(sn, h) for sn in (1, 2, 3)})
        _, rows = run_experiment(records, configs, mock_factory(), repeats=1)
        for r in rows:
            if r.steps != expected[r.algorithm] or not r.correct or r.backtracks:
                failures.append((h, r.algorithm, r.steps, r.correct, r.backtracks))
    report_line(4, not failures, f"h=2..10 x 8 configs: {len(failures)} deviations from the step formulas {failures[:3]}")


def test_ac5_noisy_oracle_ordering():
    records = synthetic_records(100, seed=0)
    configs = [SearchConfig(a) for a in ("onestop", "tot", "tot-os", "tot-block")]
    report, _ = run_experiment(records, configs, mock_factory(0.7, 0.5), repeats=3, base_seed=0)
    acc = {a: report.overall[a]["accuracy"] for a in report.algorithms}
    steps = {a: report.overall[a]["mean_steps"] for a in report.algorithms}
    gain = rssi(steps["ToT"], steps["ToT-OS"])
    ok = (
        all(acc[a] > acc["One-Stop"] for a in ("ToT", "ToT-OS", "ToT-Block"))
        and steps["ToT-OS"] < steps["ToT"]
        and gain > 1
    )
    detail = ", ".join(f"{a} acc={acc[a]:.2f}" for a in report.algorithms)
    report_line(5, ok, f"{detail}; steps ToT={steps['ToT']:.2f} ToT-OS={steps['ToT-OS']:.2f}; RSSI(ToT-OS)={gain:.3f}")


def test_ac6_budget_monotonicity():
    records = synthetic_records(100, seed=0)
    previous, violations, over = None, [], 0
    for budget in (10, 20, 30):
        configs = [SearchConfig(a, max_step=budget) for a in ("onestop", "tot", "tot-os", "tot-block")]
        report, rows = run_experiment(records, configs, mock_factory(0.7, 0.5), repeats=3, base_seed=0)
        over += sum(r.steps > budget for r in rows)
        acc = {k: c.accuracy for k, c in report.cells.items()}
        if previous is not None:
            violations += [(budget, k) for k in acc if acc[k] < previous[k]]
        previous = acc
    report_line(6, not violations and over == 0,
                f"T=10,20,30 over {len(previous)} cells: {len(violations)} accuracy decreases, "
                f"{over} runs with steps > T")


def test_ac7_block_size_monotonicity():
    records = synthetic_records(90, seed=1)
    configs = [SearchConfig("tot-block", block_size=k) for k in (2, 3, 4)]
    report, _ = run_experiment(records, configs, mock_factory(), repeats=1)
    means = [report.overall[c.label]["mean_steps"] for c in configs]
    report_line(7, means[0] >= means[1] >= means[2],
                "mean steps k=2,3,4: " + ", ".join(f"{m:.3f}" for m in means))


def test_ac8_evaluator_defect_suite():
    fixtures = _fixtures()
    totals = {k: [0, 0] for k in CLASSES}
    for rec, kind, plan in seeded_defects(fixtures.records, per_record=2, seed=0):
        v = evaluate_candidate(plan, rec.scene)
        totals[kind][1] += 1
        totals[kind][0] += (not v.passed) and kind in v.kinds
    by_question = {r.question: r for r in fixtures.records}
    gold = _appendix_plans()["gold_plans"]
    accepted = sum(
        evaluate_candidate(parse_plan("\n".join(g["plan"])), by_question[g["question"]].scene).passed for g in gold
    )
    ok = all(hit == n and n > 0 for hit, n in totals.values()) and accepted == 9
    rates = ", ".join(f"{k.value} {hit}/{n}" for k, (hit, n) in totals.items())
    report_line(8, ok, f"rejected: {rates}; gold plans accepted {accepted}/9")


def test_ac9_metrics_arithmetic():
    a, b = rssi(5.48, 3.04), rssi(15.90, 9.63)
    rssi_ok = (
        abs(round(a, 4) - 1.8026) <= RSSI_TOL
        and abs(round(b, 4) - 1.6511) <= RSSI_TOL
        and abs(a - 5.48 / 3.04) <= RSSI_TOL
        and abs(b - 15.90 / 9.63) <= RSSI_TOL
    )
    cases = [(([1, 2, 3], [2, 4, 6]), 1.0), (([1, 2, 3], [3, 2, 1]), -1.0), (([1, 2, 3], [1, 3, 2]), 0.5)]
    pearson_ok = all(abs(pearson(*xy) - r) <= PEARSON_TOL for xy, r in cases)
    report, _ = run_experiment(
        _fixtures().test, [SearchConfig(x) for x in ("onestop", "tot", "tot-os", "tot-block")], mock_factory(),
        repeats=3, base_seed=0, metadata={"generator": "mock", "p_step": 1.0, "p_full": 1.0},
    )
    golden = {"table": "perfect_report.txt", "csv": "perfect_report.csv", "json": "perfect_report.json"}
    mismatched = [f for f, name in golden.items() if render_report(report, f) != (GOLDEN / name).read_text("utf-8")]
    report_line(9, rssi_ok and pearson_ok and not mismatched,
                f"rssi={a:.10f},{b:.10f} (4dp {round(a, 4)},{round(b, 4)}); pearson ok={pearson_ok}; "
                f"golden mismatches={mismatched}")


def test_ac10_determinism(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"bench{i}.json"
        code = cli_main(["bench", "--p-step", "0.7", "--p-full", "0.5", "--seed", "7", "--format", "json",
                         "--out", str(out)])
        outs.append((code, out.read_bytes()))
    mock_ok = outs[0][0] == outs[1][0] == 0 and outs[0][1] == outs[1][1]
    replay = []
    for i in range(2):
        out = tmp_path / f"replay{i}.json"
        code = cli_main(["bench", "--generator", "chat", "--model", "stub-model", "--client-mode", "replay",
                         "--cache", str(GOLDEN / "replay_cache.jsonl"), "--repeats", "1", "--format", "json",
                         "--out", str(out)])
        replay.append((code, out.read_bytes()))
    golden = (GOLDEN / "replay_report.json").read_bytes()
    replay_ok = all(code == 0 and data == golden for code, data in replay)
    report_line(10, mock_ok and replay_ok,
                f"mock bench byte-identical={mock_ok}; replay runs identical to checked-in report={replay_ok}")


if __name__ == "__main__":
    import tempfile

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_ac")]
    tests.sort(key=lambda f: int(f.__name__.split("_")[1][2:]))
    failed = 0
    for test in tests:
        try:
            if "tmp_path" in test.__code__.co_varnames[: test.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    test(Path(d))
            else:
                test()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
