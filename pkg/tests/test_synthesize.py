from hypothesis import given
from hypothesis import strategies as st

from soccerkg.cypher import ResultTable
from soccerkg.cypher.result import display
from soccerkg.evaluation import load_bank
from soccerkg.nl.synthesize import NO_DATA, enumerate_items, fabricated_numbers, plural, synthesize_answer

cells = st.one_of(
    st.none(),
    st.integers(-50, 5000),
    st.booleans(),
    st.text("abc XYZ-", max_size=8),
    st.lists(st.integers(0, 99), max_size=3),
)


@st.composite
def tables(draw):
    width = draw(st.integers(1, 3))
    rows = draw(st.lists(st.tuples(*[cells] * width), max_size=6))
    return ResultTable([f"c{i}" for i in range(width)], rows)


class TestNoFabrication:
    def test_bank(self, engine):
        for e in load_bank():
            out = engine.ask(e.question)
            if out.context is None:
                continue
            assert fabricated_numbers(out.answer, out.repaired_question, out.context) == set(), e.id

    @given(tables())
    def test_random_tables(self, t):
        answer = synthesize_answer("What happened?", t)
        assert fabricated_numbers(answer, "What happened?", t) == set()

    @given(tables())
    def test_every_row_present(self, t):
        answer = synthesize_answer("What happened?", t)
        for r in t.rows:
            for v in r:
                if v is not None:
                    assert display(v) in answer

    def test_empty(self):
        assert synthesize_answer("q", ResultTable(["n"], [])) == NO_DATA
        assert synthesize_answer("q", ResultTable(["n"], []), "Q1", {"name": "X"}) == "No, X is not in the database."

    def test_detector_notices_invention(self):
        t = ResultTable(["n"], [(5,)])
        assert fabricated_numbers("There were 7 goals.", "How many goals in 2014-15?", t) == {"7"}
        assert fabricated_numbers("5 goals in 2014-2015.", "How many goals in 2014-15?", t) == set()


class TestFormatting:
    def test_enumerate_keeps_all(self):
        items = [f"t{i}" for i in range(12)]
        text = enumerate_items(items)
        assert all(i in text for i in items)
        assert enumerate_items(["a", "b"]) == "a and b"
        assert enumerate_items([]) == ""

    def test_plural(self):
        assert plural(1, "goal") == "1 goal"
        assert plural(0, "goal") == "0 goals"
        assert plural(2, "penalty", "penalties") == "2 penalties"

    def test_categories(self):
        t = ResultTable(["total"], [(5,)])
        s = {"team": "Bayern Munich", "season": "2014-2015", "event": "Goal"}
        assert synthesize_answer("q", t, "Q2", s) == "The total number of home goals for Bayern Munich in the 2014-2015 season is 5."
        t = ResultTable(["team", "wins"], [("A", 2), ("B", 2)])
        assert synthesize_answer("q", t, "Q21", {}).endswith("A and B are tied.")
        t = ResultTable(["y", "r", "p"], [(1, 0, [])])
        assert "Nobody received a red card" in synthesize_answer("q", t, "Q13", {})
