"""Evaluation harness: timing against a literature baseline, repeated-question
accuracy, and density reporting."""

from __future__ import annotations

import json
import os
import platform
import re
import statistics
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .graph import DegenerateGraphError, Graph, density

GOLD_KINDS = ("count", "set", "boolean", "contains")


class BankFormatError(ValueError):
    pass


class BaselineFormatError(ValueError):
    pass


@dataclass(frozen=True)
class QuestionBankEntry:
    id: str
    category: str
    question: str
    gold: dict  # {"kind": ..., "value": ..., "entity_kind": ...}
    default_subset: bool = False
    note: str = ""

    @classmethod
    def from_dict(cls, obj: dict, where: str = "entry") -> "QuestionBankEntry":
        for key in ("id", "category", "question", "gold"):
            if key not in obj:
                raise BankFormatError(f"{where}: missing field {key!r}")
        gold = obj["gold"]
        if not isinstance(gold, dict) or gold.get("kind") not in GOLD_KINDS or "value" not in gold:
            raise BankFormatError(f"{where}: gold must be {{kind, value}} with kind in {', '.join(GOLD_KINDS)}")
        if gold["kind"] == "set" and not gold.get("entity_kind"):
            raise BankFormatError(f"{where}: set gold needs an entity_kind")
        return cls(
            id=str(obj["id"]),
            category=str(obj["category"]),
            question=str(obj["question"]),
            gold=dict(gold),
            default_subset=bool(obj.get("default_subset", False)),
            note=str(obj.get("note", "")),
        )


def load_bank(path: str | Path | None = None) -> list[QuestionBankEntry]:
    """Read a JSON-lines question bank; the bundled one when ``path`` is None."""
    if path is None:
        text = resources.files("soccerkg").joinpath("data/question_bank.jsonl").read_text("utf-8")
        where = "question_bank.jsonl"
    else:
        text = Path(path).read_text("utf-8")
        where = str(path)
    entries = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise BankFormatError(f"{where}:{n}: {exc}") from exc
        entries.append(QuestionBankEntry.from_dict(obj, f"{where}:{n}"))
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise BankFormatError(f"{where}: duplicate question ids")
    return entries


def default_subset(bank: list[QuestionBankEntry]) -> list[QuestionBankEntry]:
    return [e for e in bank if e.default_subset]


# -- judging -------------------------------------------------------------

# Dates, seasons and match clocks carry digits that are never the answer.
_NOT_COUNTS = re.compile(
    r"\d{4}-\d{2}-\d{2}"  # date
    r"|\d{4}\s*[-/]\s*\d{2,4}"  # season
    r"|\d+\s*-\s*\d{1,2}:\d{2}"  # game time "1 - 07:32"
    r"|\d{1,2}:\d{2}"
)
_INT = re.compile(r"(?<![\w.])\d+(?!\w|\.\d)")
_WORDS = "zero one two three four five six seven eight nine ten eleven twelve".split()
_WORD_INT = re.compile(r"\b(" + "|".join(_WORDS) + r")\b", re.IGNORECASE)


def first_count(answer: str) -> int | None:
    """First standalone integer in ``answer``, skipping dates, seasons and clocks."""
    text = _NOT_COUNTS.sub(" ", answer)
    m = _INT.search(text)
    w = _WORD_INT.search(text)
    if m and (not w or m.start() < w.start()):
        return int(m.group())
    if w:
        return _WORDS.index(w.group(1).lower())
    return None


def names_in(text: str, names: Iterable[str]) -> set[str]:
    """Names occurring in ``text`` as whole words, longest first without overlaps."""
    found: set[str] = set()
    taken: list[tuple[int, int]] = []
    for name in sorted(set(names), key=lambda s: (-len(s), s)):
        for m in re.finditer(r"(?<!\w)" + re.escape(name) + r"(?!\w)", text, re.IGNORECASE):
            if any(m.start() < b and a < m.end() for a, b in taken):
                continue
            taken.append((m.start(), m.end()))
            found.add(name)
    return found


def judge(entry: QuestionBankEntry, answer: str, entities=None) -> bool:
    """Apply the typed gold predicate of ``entry`` to a synthesized answer.

    ``entities`` (an EntityDictionary) is needed for set-valued gold answers;
    names that also occur in the question are ignored, since answers restate
    their subject.
    """
    gold = entry.gold
    kind, value = gold["kind"], gold["value"]
    if kind == "count":
        return first_count(answer) == int(value)
    if kind == "boolean":
        low = answer.strip().lower()
        said = True if re.match(r"yes\b", low) else False if re.match(r"no\b", low) else None
        return said is bool(value)
    if kind == "contains":
        low = answer.casefold()
        return all(str(v).casefold() in low for v in value)
    if kind == "set":
        if entities is None:
            raise ValueError("set-valued gold answers need the entity dictionary")
        pool = entities.names(gold["entity_kind"])
        got = names_in(answer, pool) - names_in(entry.question, pool)
        return got == set(value)
    raise ValueError(f"unknown gold kind {kind!r}")


# -- accuracy ------------------------------------------------------------


def accuracy_pct(correct: int, total: int) -> float:
    """Accuracy in percent: correct answers over all answers."""
    if total <= 0:
        raise ValueError("accuracy needs at least one answer")
    return correct / total * 100


@dataclass
class AccuracyReport:
    system: str
    matrix: dict[str, list[bool]]  # question id -> one verdict per iteration
    answers: dict[str, list[str]] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return max((len(v) for v in self.matrix.values()), default=0)

    @property
    def correct(self) -> int:
        return sum(sum(v) for v in self.matrix.values())

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.matrix.values())

    @property
    def accuracy_pct(self) -> float:
        return accuracy_pct(self.correct, self.total)

    @property
    def consistency_pct(self) -> float | None:
        """Share of questions whose answer text was identical on every iteration."""
        if not self.answers:
            return None
        same = sum(1 for a in self.answers.values() if len(set(a)) <= 1)
        return same / len(self.answers) * 100

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "iterations": self.iterations,
            "matrix": {k: [int(x) for x in v] for k, v in self.matrix.items()},
            "correct": self.correct,
            "total": self.total,
            "accuracy_pct": self.accuracy_pct,
            "consistency_pct": self.consistency_pct,
        }

    def render_text(self) -> str:
        return render_accuracy_text([self])


def render_accuracy_text(reports: list[AccuracyReport]) -> str:
    """One block of iteration columns per system (1 = correct)."""
    ids = list(dict.fromkeys(k for r in reports for k in r.matrix))
    width = max([len(i) for i in ids] + [8])
    head = " ".join(" ".join(f"{r.system[:1]}{n + 1}" for n in range(r.iterations)) for r in reports)
    lines = [f"{'question':<{width}}  {head}"]
    for qid in ids:
        cells = []
        for r in reports:
            row = r.matrix.get(qid, [])
            cells.append(" ".join(f"{int(x):>2}" for x in row))
        lines.append(f"{qid:<{width}}  {' '.join(cells)}")
    for r in reports:
        line = f"{r.system}: {r.correct}/{r.total} correct, accuracy {r.accuracy_pct:.2f}%"
        if r.consistency_pct is not None:
            line += f", self-consistency {r.consistency_pct:.2f}%"
        lines.append(line)
    return "\n".join(lines) + "\n"


def run_accuracy(
    bank: list[QuestionBankEntry],
    iterations: int,
    ask_fn: Callable[[str], str],
    entities=None,
    system: str = "ours",
) -> AccuracyReport:
    """Ask every question ``iterations`` times; exceptions count as incorrect."""
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    report = AccuracyReport(system, {}, {})
    for entry in bank:
        verdicts, answers = [], []
        for _ in range(iterations):
            try:
                answer = ask_fn(entry.question)
                ok = judge(entry, answer, entities)
            except Exception as exc:  # a failed ask is an incorrect answer
                answer, ok = f"<error: {type(exc).__name__}: {exc}>", False
            verdicts.append(ok)
            answers.append(answer)
        report.matrix[entry.id] = verdicts
        report.answers[entry.id] = answers
    return report


# -- timing --------------------------------------------------------------


def improvement_pct(baseline: float, ours: float) -> float:
    """Relative reduction of ``ours`` against ``baseline``, in percent."""
    if baseline <= 0:
        raise ValueError("baseline time must be positive")
    return (baseline - ours) / baseline * 100


BASELINE_UNITS = {"s": 1000.0, "ms": 1.0}


def load_baseline(path: str | Path | None = None) -> dict[str, float]:
    """Question id -> baseline time in milliseconds.

    ``None`` loads the bundled literature values.
    """
    try:
        if path is None:
            text = resources.files("soccerkg").joinpath("data/baselines/latency.json").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        doc = json.loads(text)
    except ValueError as exc:
        raise BaselineFormatError(f"baseline file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("rows"), list):
        raise BaselineFormatError("baseline file needs a 'rows' array")
    unit = doc.get("unit", "s")
    if unit not in BASELINE_UNITS:
        raise BaselineFormatError(f"unknown baseline unit {unit!r}")
    out: dict[str, float] = {}
    for i, row in enumerate(doc["rows"]):
        if not isinstance(row, dict) or not isinstance(row.get("id"), str):
            raise BaselineFormatError(f"rows[{i}] needs a string 'id'")
        value = row.get("baseline")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            raise BaselineFormatError(f"rows[{i}].baseline must be a positive number")
        if row["id"] in out:
            raise BaselineFormatError(f"duplicate baseline id {row['id']!r}")
        out[row["id"]] = float(value) * BASELINE_UNITS[unit]
    return out


@dataclass
class BenchRow:
    id: str
    question: str
    cold_ms: float
    ours_ms: list[float]
    baseline_ms: float | None = None

    @property
    def median_ms(self) -> float:
        return statistics.median(self.ours_ms)

    @property
    def improvement_pct(self) -> float | None:
        if self.baseline_ms is None:
            return None
        return improvement_pct(self.baseline_ms, self.median_ms)

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "question": self.question,
            "cold_ms": self.cold_ms,
            "ours_ms": list(self.ours_ms),
            "median_ms": self.median_ms,
        }
        if self.baseline_ms is not None:
            d["baseline_ms"] = self.baseline_ms
            d["improvement_pct"] = self.improvement_pct
        return d


@dataclass
class BenchReport:
    rows: list[BenchRow]
    environment: dict

    @property
    def has_baseline(self) -> bool:
        return any(r.baseline_ms is not None for r in self.rows)

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows], "environment": dict(self.environment)}

    def render_text(self) -> str:
        cols = ["question", "median_ms"]
        if self.has_baseline:
            cols += ["baseline_ms", "improvement_%"]
        table = [cols]
        for r in self.rows:
            cells = [r.id, f"{r.median_ms:.3f}"]
            if self.has_baseline:
                if r.baseline_ms is None:
                    cells += ["-", "-"]
                else:
                    cells += [f"{r.baseline_ms:.0f}", f"{r.improvement_pct:.2f}"]
            table.append(cells)
        widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
        lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))) for row in table]
        for k, v in self.environment.items():
            lines.append(f"# {k}: {v}")
        return "\n".join(lines) + "\n"


def environment_notes(**extra) -> dict:
    notes = {
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "cpus": os.cpu_count(),
        "clock": "time.perf_counter_ns",
    }
    notes.update(extra)
    return notes


def run_timing(
    bank: list[QuestionBankEntry],
    reps: int,
    ask_fn: Callable[[str], object],
    baseline: Mapping[str, float] | None = None,
    clock: Callable[[], int] = time.perf_counter_ns,
    notes: dict | None = None,
) -> BenchReport:
    """Time ``ask_fn`` serially per question.

    Each question gets one cold run (kept out of the median) followed by
    ``reps`` timed runs. ``baseline`` maps question ids to milliseconds.
    """
    if reps < 3:
        raise ValueError("reps must be at least 3")
    rows = []
    for entry in bank:
        t0 = clock()
        ask_fn(entry.question)
        cold = (clock() - t0) / 1e6
        samples = []
        for _ in range(reps):
            t0 = clock()
            ask_fn(entry.question)
            samples.append((clock() - t0) / 1e6)
        base = baseline.get(entry.id) if baseline else None
        rows.append(BenchRow(entry.id, entry.question, cold, samples, base))
    env = environment_notes(reps=reps, **(notes or {}))
    if baseline:
        env["baseline"] = "literature values measured on different hardware; improvements are illustrative"
    return BenchReport(rows, env)


# -- density -------------------------------------------------------------

SPARSE_BELOW = 1e-2


def report_density(graphs) -> dict[str, dict]:
    """|V|, |E| and density per graph, with a sparsity flag.

    ``graphs`` is a BuildOutput or a mapping of name to Graph.
    """
    if not isinstance(graphs, Mapping):
        graphs = {graphs.labels_kg.name: graphs.labels_kg, graphs.captions_kg.name: graphs.captions_kg}
    out = {}
    for name, g in graphs.items():
        g: Graph
        try:
            d = density(g)
            out[name] = {
                "nodes": g.num_nodes(),
                "edges": g.num_edges(),
                "density": d,
                "density_3sf": f"{d:.3g}",
                "sparse": d < SPARSE_BELOW,
            }
        except DegenerateGraphError:
            out[name] = {"nodes": g.num_nodes(), "edges": g.num_edges(), "density": "n/a", "density_3sf": "n/a", "sparse": None}
    return out


def render_density_text(report: Mapping[str, dict]) -> str:
    lines = []
    for name, r in report.items():
        flag = "" if r["sparse"] is None else (" (sparse)" if r["sparse"] else " (not sparse)")
        lines.append(f"{name}: |V| = {r['nodes']}, |E| = {r['edges']}, D = {r['density_3sf']}{flag}")
    return "\n".join(lines) + "\n"
