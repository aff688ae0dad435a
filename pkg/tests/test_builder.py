import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GOLDEN
from invariants import check_invariants
from randgen import random_dataset
from recount import recount
from soccerkg import builder, snapshot
from soccerkg.builder import CAPTIONS, LABELS, build_all, read_build, write_build
from soccerkg.entities import EntityDictionary
from soccerkg.graph import graph_stats
from soccerkg.ingest import load_dataset


def stats_view(s: dict) -> dict:
    return {k: s[k] for k in ("nodes", "edges", "nodes_by_label", "edges_by_type", "density")}


class TestGolden:
    def test_recount_matches_frozen_golden(self, fixture_dir):
        golden = json.loads((GOLDEN / "fixture_stats.json").read_text("utf-8"))
        assert recount(fixture_dir) == golden

    def test_build_matches_golden(self, built):
        golden = json.loads((GOLDEN / "fixture_stats.json").read_text("utf-8"))
        for name in (LABELS, CAPTIONS):
            assert stats_view(built.build_stats[name]) == golden[name]

    def test_sparse(self, built):
        for name in (LABELS, CAPTIONS):
            assert built.build_stats[name]["density"] < 1e-1

    def test_invariants(self, dataset, built):
        assert check_invariants(dataset, built) == []

    def test_rebuild_byte_identical(self, fixture_dir, built):
        again = build_all(load_dataset(fixture_dir))
        for name in (LABELS, CAPTIONS):
            assert snapshot.dumps(again.graph(name)) == snapshot.dumps(built.graph(name))
        assert again.entity_dict.to_json() == built.entity_dict.to_json()


class TestWiring:
    def game(self, built, gid_part: str):
        g = built.labels_kg
        [nid] = [n.id for n in g.nodes if n.label == "Game" and gid_part in n.props["game_id"]]
        return g, nid

    def test_game_properties(self, built):
        g = built.captions_kg
        games = [n.props for n in g.nodes if n.label == "Game"]
        chelsea = [p for p in games if p["home_team"] == "Chelsea" and p["away_team"] == "Crystal Palace"]
        assert chelsea and chelsea[0]["score"] == "2 - 1"
        assert chelsea[0]["venue"] == "Stamford Bridge"

    def test_winner_loser_only_when_decided(self, built):
        g = built.labels_kg
        for n in g.nodes:
            if n.label != "Game":
                continue
            types = {g.edge(e).etype for e in g.in_edges(n.id)}
            decided = n.props["score_home"] != n.props["score_away"]
            assert ("WINNER" in types) == decided == ("LOSER" in types)

    def test_fact_player_edges(self, built):
        g = built.captions_kg
        for n in g.nodes:
            if n.label == "Fact":
                [e] = g.in_edges(n.id)
                assert g.edge(e).etype == builder.PLAYER_EDGE[n.props["type"]]
                assert g.node(g.edge(e).src).label == "Player"

    def test_participated_in_carries_side(self, built):
        sides = sorted(e.props["side"] for e in built.labels_kg.edges if e.etype == "PARTICIPATED_IN")
        assert sides == ["away"] * 4 + ["home"] * 4

    def test_team_shared_across_games(self, built):
        # Chelsea plays two fixture games in one season: one Team node
        teams = [n for n in built.labels_kg.nodes if n.label == "Team" and n.props["name"] == "Chelsea"]
        assert len(teams) == 1
        assert len(built.labels_kg.neighbors(teams[0].id, "PARTICIPATED_IN", "out")) == 2


class TestEntities:
    def test_kinds(self, built):
        ents = built.entity_dict
        assert "Chelsea" in ents.names("team")
        assert "england_epl" in ents.names("league")
        assert ents.kind_of("stamford bridge") == "venue"

    def test_case_insensitive_lookup(self, built):
        assert built.entity_dict.lookup("team", "  CHELSEA ") == "Chelsea"

    def test_league_alias(self, built):
        assert built.entity_dict.lookup("league", "Premier League") == "england_epl"

    def test_surname_alias(self, built):
        assert built.entity_dict.lookup("player", "Lewandowski") == "Robert Lewandowski"

    def test_node_ids_point_at_named_nodes(self, built):
        ents = built.entity_dict
        for name in ents.names("team"):
            for gname, ids in ents.node_ids("team", name).items():
                for nid in ids:
                    assert built.graph(gname).node(nid).props["name"] == name

    def test_json_round_trip(self, built):
        d = EntityDictionary.from_dict(json.loads(built.entity_dict.to_json()))
        assert d.to_json() == built.entity_dict.to_json()

    def test_first_spelling_wins(self):
        d = EntityDictionary()
        assert d.canonical("team", "FC Test") == "FC Test"
        assert d.canonical("team", "fc  test") == "FC Test"


class TestPersistence:
    def test_write_read(self, built, tmp_path):
        paths = write_build(built, tmp_path)
        assert sorted(p.name for p in paths) == sorted(
            list(builder.SNAPSHOT_FILES.values()) + [builder.ENTITIES_FILE, builder.STATS_FILE]
        )
        back = read_build(tmp_path)
        for name in (LABELS, CAPTIONS):
            assert back.graph(name).name == name
            assert snapshot.dumps(back.graph(name)) == snapshot.dumps(built.graph(name))
            assert back.build_stats[name] == built.build_stats[name]
        assert back.entity_dict.to_json() == built.entity_dict.to_json()

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_build(tmp_path)


class TestRandom:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10**6))
    def test_invariants_hold(self, seed):
        ds = random_dataset(random.Random(seed))
        assert check_invariants(ds, build_all(ds)) == []

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_deterministic(self, seed):
        ds = random_dataset(random.Random(seed))
        a, b = build_all(ds), build_all(ds)
        assert snapshot.dumps(a.labels_kg) == snapshot.dumps(b.labels_kg)
        assert snapshot.dumps(a.captions_kg) == snapshot.dumps(b.captions_kg)

    def test_stats_consistent(self):
        ds = random_dataset(random.Random(3))
        out = build_all(ds)
        assert out.build_stats[LABELS] == graph_stats(out.labels_kg)


class TestCheckerSensitivity:
    """The invariant checker must notice a broken builder."""

    def test_missing_loser_edge(self, monkeypatch, dataset):
        real = builder.Graph.add_edge

        def drop_loser(self, src, dst, etype, props=None):
            if etype == "LOSER":
                return -1
            return real(self, src, dst, etype, props)

        monkeypatch.setattr(builder.Graph, "add_edge", drop_loser)
        out = build_all(dataset)
        monkeypatch.undo()
        assert any("LOSER" in p for p in check_invariants(dataset, out))

    def test_wrong_fact_edge(self, monkeypatch, dataset):
        bad = dict(builder.PLAYER_EDGE)
        bad[builder.FactType.ASSIST] = "SCORED"
        monkeypatch.setattr(builder, "PLAYER_EDGE", bad)
        out = build_all(dataset)
        monkeypatch.undo()
        assert any("in-edges" in p for p in check_invariants(dataset, out))
