"""Experiment runner, efficiency metrics and report rendering."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .dataset import QUESTION_TYPES, STRUCTURES, QuestionRecord
from .errors import DegenerateInput
from .generator import ChatGenerator, Example, Generator, MockGenerator
from .interpreter import normalize_answer
from .search import SearchConfig, SearchResult, solve

GeneratorFactory = Callable[[QuestionRecord, int], Generator]


def mock_factory(p_step: float = 1.0, p_full: float = 1.0) -> GeneratorFactory:
    """Mock generators replaying each record's gold plan."""

    def make(record: QuestionRecord, seed: int) -> MockGenerator:
        if record.gold_plan is None:
            raise ValueError(f"record {record.id} has no gold plan for the mock generator")
        return MockGenerator(record.gold_plan, p_step, p_full, seed)

    return make


def chat_factory(client: Any, library: Iterable[QuestionRecord], m: int = 4) -> GeneratorFactory:
    """Chat generators drawing demonstrations from same-type library records."""
    by_type: dict[str, list[Example]] = {}
    for rec in library:
        if rec.gold_plan is not None:
            by_type.setdefault(rec.question_type, []).append(Example(rec.question, rec.gold_plan, rec.question_type))

    def make(record: QuestionRecord, seed: int) -> ChatGenerator:
        return ChatGenerator(client, by_type.get(record.question_type, []), m=m, seed=seed)

    return make


def rssi(mean_steps_tot: float, mean_steps_variant: float) -> float:
    """Reasoning step saving index: how many ToT steps one variant step replaces."""
    if mean_steps_variant == 0:
        raise ZeroDivisionError("variant mean steps is zero")
    return mean_steps_tot / mean_steps_variant


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    if len(x) != len(y) or len(x) < 2:
        raise DegenerateInput("pearson needs two equally long sequences of length >= 2")
    try:
        return statistics.correlation(x, y)
    except statistics.StatisticsError as exc:
        raise DegenerateInput(str(exc)) from exc


@dataclass(frozen=True)
class RunRow:
    record_id: str
    question_type: str
    hops: int
    algorithm: str
    repeat: int
    success: bool
    correct: bool
    steps: int
    backtracks: int
    answer: str | None

    @property
    def no_back(self) -> bool:
        return self.backtracks == 0


def inconsistency_count(results: Iterable[RunRow]) -> int:
    """Runs whose plan was accepted as executable and complete but answered wrongly."""
    return sum(1 for r in results if r.success and not r.correct)


def seed_for(base_seed: int, repeat: int, record_id: str) -> int:
    digest = hashlib.sha256(f"{base_seed}:{repeat}:{record_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class CellStats:
    question_type: str
    algorithm: str
    n: int
    accuracy: float
    mean_steps: float
    no_back: float
    backtracked: float
    inconsistency: float


@dataclass
class Report:
    algorithms: list[str] = field(default_factory=list)
    types: list[str] = field(default_factory=list)
    avg_hops: dict[str, float] = field(default_factory=dict)
    cells: dict[tuple[str, str], CellStats] = field(default_factory=dict)
    rssi: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)
    rssi_overall: dict[str, dict[str, float]] = field(default_factory=dict)
    correlations: dict[str, dict[str, float | None]] = field(default_factory=dict)
    overall: dict[str, dict[str, float]] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def cell(self, question_type: str, algorithm: str) -> CellStats:
        return self.cells[(question_type, algorithm)]

    def to_json(self) -> dict[str, Any]:
        return {
            "algorithms": self.algorithms,
            "types": self.types,
            "avg_hops": self.avg_hops,
            "cells": [asdict(self.cells[(t, a)]) for t in self.types for a in self.algorithms],
            "rssi": self.rssi,
            "rssi_overall": self.rssi_overall,
            "correlations": self.correlations,
            "overall": self.overall,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Report:
        cells = {(c["question_type"], c["algorithm"]): CellStats(**c) for c in data["cells"]}
        return cls(
            algorithms=list(data["algorithms"]),
            types=list(data["types"]),
            avg_hops=dict(data["avg_hops"]),
            cells=cells,
            rssi=data.get("rssi", {}),
            rssi_overall=data.get("rssi_overall", {}),
            correlations=data.get("correlations", {}),
            overall=data.get("overall", {}),
            metadata=data.get("metadata", {}),
        )


def _summarize(rows: list[RunRow], repeats: int) -> dict[str, float]:
    total = len(rows)
    return {
        "accuracy": 100.0 * sum(r.correct for r in rows) / total if total else 0.0,
        "mean_steps": sum(r.steps for r in rows) / total if total else 0.0,
        "no_back": sum(r.no_back for r in rows) / repeats,
        "backtracked": sum(not r.no_back for r in rows) / repeats,
        "inconsistency": inconsistency_count(rows) / repeats,
    }


def _rssi_pair(rows_tot: list[RunRow], rows_var: list[RunRow]) -> dict[str, float]:
    tot_mean = sum(r.steps for r in rows_tot) / len(rows_tot)
    var_mean = sum(r.steps for r in rows_var) / len(rows_var)
    by_key = {(r.record_id, r.repeat): r.steps for r in rows_tot}
    ratios = [by_key[(r.record_id, r.repeat)] / r.steps for r in rows_var if (r.record_id, r.repeat) in by_key]
    return {
        "ratio_of_means": rssi(tot_mean, var_mean),
        "mean_of_ratios": sum(ratios) / len(ratios) if ratios else float("nan"),
    }


def _safe_pearson(x: list[float], y: list[float]) -> float | None:
    try:
        return pearson(x, y)
    except DegenerateInput:
        return None


def aggregate(
    rows: Iterable[RunRow],
    algorithms: Sequence[str],
    repeats: int,
    baseline: str = "ToT",
    variants: Sequence[str] = (),
    no_step_metrics: Sequence[str] = ("One-Stop",),
    metadata: dict[str, Any] | None = None,
) -> Report:
    """Build a :class:`Report` from per-run rows; the result does not depend on row order."""
    rows = sorted(rows, key=lambda r: (r.record_id, algorithms.index(r.algorithm), r.repeat))
    present = {r.question_type for r in rows}
    types = [t for t in QUESTION_TYPES if t in present]
    report = Report(algorithms=list(algorithms), types=types, metadata=dict(metadata or {}))

    hops: dict[str, dict[str, int]] = {t: {} for t in types}
    for r in rows:
        hops[r.question_type][r.record_id] = r.hops
    report.avg_hops = {t: sum(h.values()) / len(h) for t, h in hops.items()}

    grouped: dict[tuple[str, str], list[RunRow]] = {}
    for r in rows:
        grouped.setdefault((r.question_type, r.algorithm), []).append(r)
    for t in types:
        for a in algorithms:
            cell_rows = grouped.get((t, a), [])
            report.cells[(t, a)] = CellStats(t, a, len(hops[t]), **_summarize(cell_rows, repeats))

    for a in algorithms:
        arows = [r for r in rows if r.algorithm == a]
        report.overall[a] = _summarize(arows, repeats)

    if baseline in algorithms:
        for v in variants:
            if v not in algorithms:
                continue
            per_type = {}
            for t in types:
                base_rows, var_rows = grouped.get((t, baseline), []), grouped.get((t, v), [])
                if base_rows and var_rows:
                    per_type[t] = _rssi_pair(base_rows, var_rows)
            for t, value in per_type.items():
                report.rssi.setdefault(t, {})[v] = value
            all_base = [r for r in rows if r.algorithm == baseline]
            all_var = [r for r in rows if r.algorithm == v]
            if all_base and all_var:
                report.rssi_overall[v] = _rssi_pair(all_base, all_var)

    x = [report.avg_hops[t] for t in types]
    for a in algorithms:
        cells = [report.cells[(t, a)] for t in types]
        corr: dict[str, float | None] = {"accuracy": _safe_pearson(x, [c.accuracy for c in cells])}
        if a in no_step_metrics:
            corr["steps"] = None
            corr["no_back"] = None
        else:
            corr["steps"] = _safe_pearson(x, [c.mean_steps for c in cells])
            corr["no_back"] = _safe_pearson(x, [c.no_back for c in cells])
        report.correlations[a] = corr
    return report


def run_experiment(
    records: Sequence[QuestionRecord],
    configs: Sequence[SearchConfig],
    generator_factory: GeneratorFactory,
    repeats: int = 3,
    base_seed: int = 0,
    workers: int = 1,
    metadata: dict[str, Any] | None = None,
) -> tuple[Report, list[RunRow]]:
    """Solve every record under every config ``repeats`` times and aggregate.

    Generator seeds depend only on ``(base_seed, repeat, record id)``, so changing a
    config's budget never changes the generation stream it sees.
    """
    if not configs:
        labels: list[str] = []
    else:
        labels = [c.label for c in configs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate algorithm labels: {labels}")

    jobs = [(rec, cfg, rep) for rec in records for cfg in configs for rep in range(repeats)]

    def run(job: tuple[QuestionRecord, SearchConfig, int]) -> RunRow:
        rec, cfg, rep = job
        generator = generator_factory(rec, seed_for(base_seed, rep, rec.id))
        result: SearchResult = solve(rec, generator, rec.scene, cfg)
        correct = result.success and result.answer is not None and result.answer == normalize_answer(rec.answer)
        return RunRow(
            record_id=rec.id,
            question_type=rec.question_type,
            hops=rec.hops,
            algorithm=cfg.label,
            repeat=rep,
            success=result.success,
            correct=correct,
            steps=result.steps_used,
            backtracks=result.backtracks,
            answer=result.answer,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]

    meta = {
        "base_seed": base_seed,
        "repeats": repeats,
        "configs": [c.to_json() for c in configs],
        "questions": len(records),
    }
    meta.update(metadata or {})
    variants = [c.label for c in configs if c.algorithm in ("tot-os", "tot-block")]
    report = aggregate(rows, labels, repeats, variants=variants, metadata=meta)
    return report, rows


# -- rendering ---------------------------------------------------------------------


def _fmt(value: float | None, digits: int = 2) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def _rssi_cell(label: str, value: dict[str, float]) -> str:
    return f"{label}: {_fmt(value['ratio_of_means'])} | {_fmt(value['mean_of_ratios'])}"


def _render_table(report: Report) -> str:
    header = ["Structure", "Type", "avg.#hop"] + report.algorithms
    rows = [header]
    for t in report.types:
        row = [STRUCTURES[t], t, _fmt(report.avg_hops[t])]
        for a in report.algorithms:
            c = report.cells[(t, a)]
            if a == "One-Stop":
                row.append(_fmt(c.accuracy))
            else:
                row.append(f"{_fmt(c.accuracy)} ({_fmt(c.mean_steps)})")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    if not report.algorithms:
        return lines[0] + "\n"

    lines.append("")
    lines.append("NoBack / Incons / Backtracked (mean count per repeat)")
    for t in report.types:
        parts = [
            f"{a}: {_fmt(report.cells[(t, a)].no_back)}/{_fmt(report.cells[(t, a)].inconsistency)}/"
            f"{_fmt(report.cells[(t, a)].backtracked)}"
            for a in report.algorithms
        ]
        lines.append(f"{t:<11} " + "  ".join(parts))

    if report.rssi:
        lines.append("")
        lines.append("RSSI (ratio of mean steps | mean of per-question ratios)")
        for t in report.types:
            if t not in report.rssi:
                continue
            parts = [_rssi_cell(v, report.rssi[t][v]) for v in report.algorithms if v in report.rssi[t]]
            lines.append(f"{t:<11} " + "  ".join(parts))
        parts = [_rssi_cell(v, report.rssi_overall[v]) for v in report.algorithms if v in report.rssi_overall]
        lines.append(f"{'All':<11} " + "  ".join(parts))

    lines.append("")
    lines.append("Pearson correlation with avg.#hop")
    grid = [["metric"] + report.algorithms]
    for metric in ("accuracy", "steps", "no_back"):
        grid.append([metric] + [_fmt(report.correlations[a][metric], 3) for a in report.algorithms])
    widths = [max(len(r[i]) for r in grid) for i in range(len(grid[0]))]
    lines.extend("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in grid)
    return "\n".join(lines) + "\n"


CSV_FIELDS = [
    "structure",
    "question_type",
    "avg_hop",
    "algorithm",
    "n",
    "accuracy",
    "mean_steps",
    "no_back",
    "backtracked",
    "inconsistency",
]


def _render_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for t in report.types:
        for a in report.algorithms:
            c = report.cells[(t, a)]
            writer.writerow(
                [STRUCTURES[t], t, repr(report.avg_hops[t]), a, c.n, repr(c.accuracy), repr(c.mean_steps),
                 repr(c.no_back), repr(c.backtracked), repr(c.inconsistency)]
            )
    return buf.getvalue()


def render_report(report: Report, fmt: str = "table") -> str:
    if fmt == "table":
        return _render_table(report)
    if fmt == "csv":
        return _render_csv(report)
    if fmt == "json":
        return json.dumps(report.to_json(), sort_keys=True, indent=2, allow_nan=True) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
