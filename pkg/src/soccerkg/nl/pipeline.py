"""Question answering: repair, translate, route, execute, synthesize."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..builder import CAPTIONS, LABELS, BuildOutput
from ..cypher import GraphSchema, ResultTable, execute, parse, plan
from .llm import LLMBackend, LLMConfig
from .repair import Repair, SurfaceIndex, repair_entities
from .schema_card import SchemaCard
from .synthesize import synthesize_answer
from .templates import NoTemplateError, RuleBackend, Translation

BACKENDS = ("rule", "llm")
KG_CHOICES = ("auto", LABELS, CAPTIONS)


@dataclass
class AskConfig:
    backend: str = "rule"
    kg: str = "auto"  # force one graph instead of the per-category route
    synthesis: str = "deterministic"  # or "llm"
    llm: LLMConfig | None = None

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {', '.join(BACKENDS)}")
        if self.kg not in KG_CHOICES:
            raise ValueError(f"unknown graph {self.kg!r}; expected one of {', '.join(KG_CHOICES)}")
        if self.backend == "llm" and self.llm is None:
            raise ValueError("the llm backend needs an endpoint configuration")


@dataclass
class AskOutcome:
    question: str
    repaired_question: str = ""
    query_text: str = ""
    context: ResultTable | None = None
    answer: str = ""
    timings: dict = field(default_factory=lambda: {"translate_ms": 0.0, "execute_ms": 0.0, "synthesize_ms": 0.0, "total_ms": 0.0})
    backend: str = "rule"
    category: str | None = None
    kg: str | None = None
    repairs: list[Repair] = field(default_factory=list)
    retry_count: int = 0
    error: dict | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "repaired_question": self.repaired_question,
            "query_text": self.query_text,
            "context": self.context.to_dict() if self.context is not None else None,
            "answer": self.answer,
            "timings": dict(self.timings),
            "backend": self.backend,
            "category": self.category,
            "kg": self.kg,
            "repairs": [r.to_dict() for r in self.repairs],
            "retry_count": self.retry_count,
            "error": self.error,
        }

    def render_text(self) -> str:
        """Three sections: generated query, full context, result."""
        ctx = self.context.render_text() if self.context is not None else "(none)\n"
        parts = [
            "Generated Cypher:",
            self.query_text or "(none)",
            "",
            "Full Context:",
            ctx.rstrip("\n"),
            "",
            "Result:",
            self.answer,
        ]
        return "\n".join(parts) + "\n"


def _ms(t0: int) -> float:
    return (time.perf_counter_ns() - t0) / 1e6


def looks_empty(t: ResultTable) -> bool:
    """No rows, or a single row of zeros/nulls/empty lists (counts over nothing)."""
    if not t.rows:
        return True
    if len(t.rows) > 1:
        return False
    return all(v is None or v == 0 or v == [] for v in t.rows[0] if not isinstance(v, bool))


def route_by_labels(query_text: str) -> str:
    """Graph for queries whose category is unknown (LLM backend)."""
    q = parse(query_text)
    labels = {n.label for p in q.patterns for n in p.nodes}
    if "Event" in labels:
        return LABELS
    if labels & {"Player", "Fact"}:
        return CAPTIONS
    return "auto"


REPRESENTATIVE = [
    ("Q1", "Is {team} in the database?"),
    ("Q2", "Give me the total home goals for {team} in the {season} season."),
    ("Q4", "How many goals did {player} score in the {season} season?"),
    ("Q7", "Give all the teams in the league {league} in the {season} season."),
    ("Q22", "How many games did {team} win in the {season} season?"),
]


class Engine:
    """Answers questions over one frozen :class:`BuildOutput`; safe to share across threads."""

    def __init__(self, graphs: BuildOutput, config: AskConfig | None = None, llm_backend=None):
        for g in (graphs.labels_kg, graphs.captions_kg):
            if not g.frozen:
                raise ValueError(f"graph {g.name!r} must be frozen before asking questions")
        self.graphs = graphs
        self.config = config or AskConfig()
        self.index = SurfaceIndex(graphs.entity_dict)
        self.rule = RuleBackend(self.index)
        self.schemas = {LABELS: GraphSchema.of(graphs.labels_kg), CAPTIONS: GraphSchema.of(graphs.captions_kg)}
        self._card: SchemaCard | None = None
        self.llm = llm_backend
        if self.llm is None and self.config.llm is not None:
            self.llm = LLMBackend(self.config.llm)

    @property
    def schema_card(self) -> SchemaCard:
        if self._card is None:
            self._card = SchemaCard.from_graphs({LABELS: self.graphs.labels_kg, CAPTIONS: self.graphs.captions_kg})
        return self._card

    def few_shots(self) -> list[tuple[str, str]]:
        d = self.graphs.entity_dict
        seasons = sorted({n.props["season"] for n in self.graphs.captions_kg.nodes if n.label == "Game"})
        values = {
            "team": (d.names("team") or ["Chelsea"])[0],
            "player": (d.names("player") or ["Eden Hazard"])[0],
            "league": (d.names("league") or ["england_epl"])[0],
            "season": seasons[0] if seasons else "2014-2015",
        }
        shots = []
        for _, pattern in REPRESENTATIVE:
            question = pattern.format(**values)
            try:
                shots.append((question, self.rule.translate(question)))
            except NoTemplateError:
                continue
        return shots

    def translate(self, question: str, backend: str) -> Translation:
        if backend == "rule":
            return self.rule.translate_full(question)
        if self.llm is None:
            raise ValueError("no LLM endpoint is configured")
        text = self.llm.translate(question, self.schema_card, self.few_shots())
        return Translation(text, category=None, kg=route_by_labels(text), backend="llm", retry_count=self.llm.last_retry_count)

    def run(self, query_text: str, kg: str) -> tuple[ResultTable, str]:
        """Execute on ``kg``; ``auto`` tries the Captions KG, then the Labels KG if that comes back empty."""
        q = parse(query_text)
        if kg != "auto":
            return execute(self.graphs.graph(kg), plan(q, self.schemas[kg])), kg
        first = execute(self.graphs.captions_kg, plan(q, self.schemas[CAPTIONS]))
        if not looks_empty(first):
            return first, CAPTIONS
        second = execute(self.graphs.labels_kg, plan(q, self.schemas[LABELS]))
        return (first, CAPTIONS) if looks_empty(second) else (second, LABELS)

    def ask(self, question: str, backend: str | None = None) -> AskOutcome:
        backend = backend or self.config.backend
        out = AskOutcome(question=question, backend=backend)
        t_total = time.perf_counter_ns()
        phase = "translate"
        try:
            t0 = time.perf_counter_ns()
            try:
                out.repaired_question, out.repairs = repair_entities(question, self.index)
                tr = self.translate(out.repaired_question, backend)
            finally:
                out.timings["translate_ms"] = _ms(t0)
            out.query_text, out.category, out.retry_count = tr.query_text, tr.category, tr.retry_count
            kg = self.config.kg if self.config.kg != "auto" else tr.kg

            phase = "execute"
            t0 = time.perf_counter_ns()
            try:
                out.context, out.kg = self.run(tr.query_text, kg)
            finally:
                out.timings["execute_ms"] = _ms(t0)

            phase = "synthesize"
            t0 = time.perf_counter_ns()
            try:
                if self.config.synthesis == "llm" and self.llm is not None:
                    out.answer = self.llm.answer(question, out.context.to_json())
                else:
                    out.answer = synthesize_answer(out.repaired_question, out.context, tr.category, tr.slots)
                out.answer += self._unrecognized_note(out.repairs)
            finally:
                out.timings["synthesize_ms"] = _ms(t0)
        except Exception as exc:  # every failure is reported in the outcome
            out.error = {"phase": phase, "type": type(exc).__name__, "message": str(exc)}
            out.answer = self._error_answer(exc, backend, out.repairs)
        out.timings["total_ms"] = _ms(t_total)
        return out

    def _unrecognized_note(self, repairs: list[Repair]) -> str:
        names = [r.original for r in repairs if not r.applied]
        if not names:
            return ""
        return " Unrecognized name(s): " + ", ".join(f"'{n}'" for n in names) + "."

    def _error_answer(self, exc: Exception, backend: str, repairs: list[Repair]) -> str:
        if isinstance(exc, NoTemplateError):
            text = "Sorry, no translation is available for this question"
            if self.llm is None:
                text += " (no LLM backend is configured)"
            text += "."
            if exc.hint:
                text += f" The closest known question type is {exc.hint}."
            return text + self._unrecognized_note(repairs)
        return f"The question could not be answered: {exc}" + self._unrecognized_note(repairs)


def ask(question: str, graphs: BuildOutput, config: AskConfig | None = None) -> AskOutcome:
    return Engine(graphs, config).ask(question)

