import json
from pathlib import Path

import jsonschema
import pytest

from soccerkg.builder import CAPTIONS, LABELS, BuildOutput
from soccerkg.graph import Graph
from soccerkg.nl import AskConfig, Engine, ask
from soccerkg.nl.pipeline import looks_empty, route_by_labels
from soccerkg.cypher import ResultTable

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"
WORKED = "Give me the total home goals for Bayern Munche in the 2014-15 season."


def raw_home_goals(fixture_dir, team: str, season_dir: str) -> int:
    """Oracle straight from the raw files: home-side Goal annotations in games hosted by ``team``."""
    total = 0
    for cap in fixture_dir.glob(f"*/{season_dir}/*/Labels-caption.json"):
        if json.loads(cap.read_text("utf-8"))["gameHomeTeam"] != team:
            continue
        labels = json.loads((cap.parent / "Labels-v2.json").read_text("utf-8"))
        total += sum(1 for a in labels["annotations"] if a["label"] == "Goal" and a["team"] == "home")
    return total


class TestWorkedExample:
    def test_answer(self, engine, fixture_dir):
        out = engine.ask(WORKED)
        want = raw_home_goals(fixture_dir, "Bayern Munich", "2014-2015")
        assert want == 5
        assert out.ok and out.context.scalar() == want
        assert out.repaired_question == WORKED.replace("Munche", "Munich")
        assert out.category == "Q2" and out.kg == LABELS

    def test_three_sections(self, engine):
        text = engine.ask(WORKED).render_text()
        heads = [line for line in text.splitlines() if line.endswith(":") and not line.startswith(" ")]
        assert heads[:3] == ["Generated Cypher:", "Full Context:", "Result:"]
        assert text.index("MATCH") < text.index("Full Context:") < text.index("(1 row)") < text.index("Result:")

    def test_schema(self, engine):
        schema = json.loads((SCHEMAS / "ask.json").read_text("utf-8"))
        jsonschema.validate(engine.ask(WORKED).to_dict(), schema)
        jsonschema.validate(engine.ask("Is Manchester United in the database?").to_dict(), schema)
        jsonschema.validate(engine.ask("What is the meaning of life?").to_dict(), schema)

    def test_timings(self, engine):
        t = engine.ask(WORKED).timings
        assert set(t) == {"translate_ms", "execute_ms", "synthesize_ms", "total_ms"}
        assert t["total_ms"] >= t["execute_ms"] >= 0


class TestOutcomes:
    def test_not_in_database(self, engine):
        out = engine.ask("Is Manchester United in the database?")
        assert out.ok and out.answer.startswith("No")
        assert "Unrecognized name(s): 'Manchester United'" in out.answer

    def test_no_template(self, engine):
        out = engine.ask("What is the meaning of life?")
        assert not out.ok and out.error["phase"] == "translate"
        assert "no LLM backend" in out.answer

    def test_forced_graph(self, built):
        e = Engine(built, AskConfig(kg=CAPTIONS))
        out = e.ask("Is Chelsea in the database?")
        assert out.kg == CAPTIONS

    def test_auto_falls_back_to_labels(self, built):
        e = Engine(built)
        t, kg = e.run("MATCH (e:Event) RETURN count(e) AS n", "auto")
        assert kg == LABELS and t.scalar() == 40

    def test_auto_keeps_captions_when_both_empty(self, engine):
        t, kg = engine.run("MATCH (t:Team {name: 'Nobody'}) RETURN count(t) AS n", "auto")
        assert kg == CAPTIONS and t.scalar() == 0

    def test_execute_error_reported(self, engine, monkeypatch):
        monkeypatch.setattr(engine, "run", lambda *a: (_ for _ in ()).throw(RuntimeError("boom")))
        out = engine.ask("Is Chelsea in the database?")
        assert out.error == {"phase": "execute", "type": "RuntimeError", "message": "boom"}

    def test_module_level_ask(self, built):
        assert ask("Is Chelsea in the database?", built).answer.startswith("Yes")


class TestConfig:
    def test_bad_backend(self):
        with pytest.raises(ValueError):
            AskConfig(backend="magic")

    def test_bad_kg(self):
        with pytest.raises(ValueError):
            AskConfig(kg="both")

    def test_llm_needs_endpoint(self):
        with pytest.raises(ValueError):
            AskConfig(backend="llm")

    def test_unfrozen_rejected(self, built):
        g = Graph(LABELS)
        with pytest.raises(ValueError):
            Engine(BuildOutput(g, built.captions_kg, built.entity_dict, {}))

    def test_llm_without_endpoint_errors(self, engine):
        out = engine.ask("Is Chelsea in the database?", backend="llm")
        assert not out.ok and "no LLM endpoint" in out.error["message"]


class TestHelpers:
    def test_looks_empty(self):
        assert looks_empty(ResultTable(["n"], []))
        assert looks_empty(ResultTable(["n", "l"], [(0, [])]))
        assert not looks_empty(ResultTable(["n"], [(3,)]))

    def test_route_by_labels(self):
        assert route_by_labels("MATCH (e:Event) RETURN e") == LABELS
        assert route_by_labels("MATCH (p:Player) RETURN p") == CAPTIONS
        assert route_by_labels("MATCH (t:Team) RETURN t") == "auto"
