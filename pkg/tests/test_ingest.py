import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randgen import random_dataset
from soccerkg.ingest import (
    CAPTIONS_FILE,
    LABELS_FILE,
    EventAnnotation,
    FactType,
    GameRecord,
    PlayerEntry,
    SchemaError,
    TeamSide,
    canonical_season,
    dump_captions_file,
    dump_labels_file,
    load_dataset,
    normalize_name,
    parse_captions_file,
    parse_game_time,
    parse_labels_file,
    validate_dataset,
)


def labels_bytes(*entries) -> bytes:
    return json.dumps({"annotations": list(entries)}).encode()


def ann(label="Foul", team="away", t="1 - 07:32", **kw):
    return {"gameTime": t, "label": label, "team": team, **kw}


def captions_doc(**over) -> dict:
    doc = {
        "gameHomeTeam": "Chelsea",
        "gameAwayTeam": "Crystal Palace",
        "gameScore": "2 - 1",
        "gameDate": "2014-10-18",
        "lineup": {
            "home": {"coach": "C1", "players": [{"name": "Diego Costa", "facts": []}]},
            "away": {"players": [{"name": "Mile Jedinak", "facts": [{"type": 1, "time": ["41'", "Mile Jedinak", "Foul"]}]}]},
        },
    }
    doc.update(over)
    return doc


def cap_bytes(doc) -> bytes:
    return json.dumps(doc).encode()


class TestLabelsFile:
    def test_foul_example(self):
        [ev] = parse_labels_file(labels_bytes(ann()), "g")
        assert (ev.label, ev.half, ev.clock, ev.team_side) == ("Foul", 1, 452, TeamSide.AWAY)

    def test_not_applicable(self):
        [ev] = parse_labels_file(labels_bytes(ann(team="not applicable")), "g")
        assert ev.team_side is TeamSide.NOT_APPLICABLE

    def test_team_case_insensitive(self):
        evs = parse_labels_file(labels_bytes(ann(team="HOME"), ann(team="Away"), ann(team="Not Applicable")), "g")
        assert [e.team_side for e in evs] == [TeamSide.HOME, TeamSide.AWAY, TeamSide.NOT_APPLICABLE]

    def test_empty(self):
        assert parse_labels_file(labels_bytes(), "g") == []

    def test_order_preserved_and_length(self):
        entries = [ann(label=f"E{i}", t=f"2 - {i:02d}:00") for i in range(7)]
        evs = parse_labels_file(labels_bytes(*entries), "g")
        assert [e.label for e in evs] == [f"E{i}" for i in range(7)]

    def test_missing_field_names_path(self):
        bad = ann()
        del bad["team"]
        with pytest.raises(SchemaError) as exc:
            parse_labels_file(labels_bytes(ann(), bad), "g")
        assert exc.value.path == "$.annotations[1].team"

    def test_missing_annotations(self):
        with pytest.raises(SchemaError, match=r"\$\.annotations"):
            parse_labels_file(b"{}", "g")

    def test_bad_game_time(self):
        with pytest.raises(ValueError):
            parse_labels_file(labels_bytes(ann(t="3 - 00:10")), "g")

    def test_empty_label(self):
        with pytest.raises(SchemaError):
            parse_labels_file(labels_bytes(ann(label="  ")), "g")

    def test_not_json(self):
        with pytest.raises(SchemaError):
            parse_labels_file(b"\xff\xfe", "g")


class TestCaptionsFile:
    def test_score_split(self):
        game, players = parse_captions_file(cap_bytes(captions_doc()), "g", league="england_epl", season="2014-15")
        assert (game.score_home, game.score_away) == (2, 1)
        assert game.season == "2014-2015"
        assert game.league == "england_epl"
        assert len(players) == 2

    def test_yellow_card_fact(self):
        _, players = parse_captions_file(cap_bytes(captions_doc()), "g", league="l", season="2014-2015")
        [fact] = players[1].facts
        assert fact.fact_type is FactType.YELLOW_CARD
        assert (fact.time, fact.subject_player, fact.detail) == ("41'", "Mile Jedinak", "Foul")

    def test_fact_type_5_rejected(self):
        doc = captions_doc()
        doc["lineup"]["home"]["players"][0]["facts"] = [{"type": 5, "time": ["1'", "x", "y"]}]
        with pytest.raises(ValueError, match="unknown fact type code 5"):
            parse_captions_file(cap_bytes(doc), "g", league="l", season="2014-2015")

    @pytest.mark.parametrize("score", ["2-", "two - one", "2 : 1", ""])
    def test_bad_score(self, score):
        with pytest.raises(ValueError):
            parse_captions_file(cap_bytes(captions_doc(gameScore=score)), "g", league="l", season="2014-2015")

    def test_card_needs_reason(self):
        doc = captions_doc()
        doc["lineup"]["away"]["players"][0]["facts"] = [{"type": 2, "time": ["41'", "Mile Jedinak", ""]}]
        with pytest.raises(SchemaError):
            parse_captions_file(cap_bytes(doc), "g", league="l", season="2014-2015")

    def test_body_overrides_directory(self):
        doc = captions_doc(league="spain_laliga", season="2016-2017")
        game, _ = parse_captions_file(cap_bytes(doc), "g", league="england_epl", season="2014-2015")
        assert (game.league, game.season) == ("spain_laliga", "2016-2017")

    def test_missing_lineup_side(self):
        doc = captions_doc()
        del doc["lineup"]["away"]
        with pytest.raises(SchemaError) as exc:
            parse_captions_file(cap_bytes(doc), "g", league="l", season="2014-2015")
        assert exc.value.path == "$.lineup.away"


class TestNames:
    @pytest.mark.parametrize(
        "raw,want",
        [("  bayern  munich ", "bayern munich"), ("Chelsea", "Chelsea"), ("Crystal  Palace", "Crystal Palace")],
    )
    def test_examples(self, raw, want):
        assert normalize_name(raw) == want

    def test_unicode_normalized(self):
        assert normalize_name("Müller") == "Müller"

    @given(st.text())
    def test_idempotent(self, s):
        assert normalize_name(normalize_name(s)) == normalize_name(s)

    @pytest.mark.parametrize(
        "raw,want",
        [("2014-15", "2014-2015"), ("2014/15", "2014-2015"), ("2014-2015", "2014-2015"), ("1999-00", "1999-2000"),
         ("2014-2016", None), ("2014-16", None), ("14-15", None)],
    )
    def test_season(self, raw, want):
        assert canonical_season(raw) == want

    def test_game_time(self):
        assert parse_game_time("2 - 45:00") == (2, 2700)


class TestValidation:
    def game(self, gid="a", **kw):
        base = dict(game_id=gid, home_team="H", away_team="A", score_home=0, score_away=0, date="2015-01-01",
                    venue=None, referee=None, season="2014-2015", league="l")
        base.update(kw)
        return GameRecord(**base)

    def test_consistent(self, dataset):
        assert validate_dataset(dataset.games, dataset.events, dataset.players).ok

    def test_dangling(self):
        ev = EventAnnotation("zzz", "Goal", 1, 0, TeamSide.HOME)
        r = validate_dataset([self.game()], [ev], [])
        assert [f.kind for f in r.findings] == ["dangling_reference"]

    def test_duplicate(self):
        r = validate_dataset([self.game(), self.game()], [], [])
        assert [f.kind for f in r.findings] == ["duplicate_game"]

    def test_season_and_same_team(self):
        r = validate_dataset([self.game(season="2014-16", away_team="H")], [], [])
        assert sorted(f.kind for f in r.findings) == ["same_teams", "season_format"]

    def test_report_renders(self):
        r = validate_dataset([self.game(), self.game()], [], [])
        assert "duplicate_game" in r.render_text()
        assert r.to_dict()["ok"] is False


class TestRoundTrip:
    def test_fixture_files(self, fixture_dir):
        for labels in sorted(fixture_dir.glob(f"*/*/*/{LABELS_FILE}")):
            events = parse_labels_file(labels.read_bytes(), "g")
            assert parse_labels_file(dump_labels_file(events), "g") == events
            cap = labels.parent / CAPTIONS_FILE
            game, players = parse_captions_file(cap.read_bytes(), "g", league="x", season="2014-2015")
            again = parse_captions_file(dump_captions_file(game, players), "g")
            assert again == (game, players)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000))
    def test_random_records(self, seed):
        ds = random_dataset(random.Random(seed))
        for game in ds.games:
            players = [p for p in ds.players if p.game_id == game.game_id]
            players.sort(key=lambda p: p.team_side is TeamSide.AWAY)
            assert parse_captions_file(dump_captions_file(game, players), game.game_id) == (game, players)
            events = [e for e in ds.events if e.game_id == game.game_id]
            assert parse_labels_file(dump_labels_file(events), game.game_id) == events

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000))
    def test_fact_types_valid(self, seed):
        ds = random_dataset(random.Random(seed))
        for p in ds.players:
            assert all(int(f.fact_type) in {1, 2, 3, 4, 6, 7, 8} for f in p.facts)


class TestLoadDataset:
    def test_fixture(self, dataset):
        assert len(dataset.games) == 4
        assert len(dataset.events) == 40
        assert {g.league for g in dataset.games} == {"england_epl", "germany_bundesliga"}

    def test_empty_dir(self, tmp_path):
        ds = load_dataset(tmp_path)
        assert ds.games == [] and ds.events == [] and ds.players == []

    def test_incomplete_game_dir_skipped(self, tmp_path):
        d = tmp_path / "l" / "2015-2016" / "g"
        d.mkdir(parents=True)
        (d / LABELS_FILE).write_bytes(labels_bytes())
        assert load_dataset(tmp_path).games == []

    def test_player_entry_default(self):
        assert PlayerEntry("g", "x", TeamSide.HOME).facts == ()
