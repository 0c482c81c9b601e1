from __future__ import annotations

import random

import pytest
from fastapi.testclient import TestClient

from leadplan import pipeline, synth
from leadplan.model import PlanConfig
from leadplan.prioritize import rank_projects
from leadplan.service import ServiceLimits, ServingState, SnapshotStore, create_app


@pytest.fixture(scope="module")
def store():
    city = synth.generate_city(seed=21, n_streets=16)
    import tempfile

    with tempfile.TemporaryDirectory() as td:
        city.write(td)
        linked = pipeline.load_snapshot(pipeline.SnapshotPaths.from_dir(td))
        config = PlanConfig()
        plan = pipeline.score_snapshot(linked.snapshot, config)
        store = SnapshotStore(config=config,
                              limits=ServiceLimits(max_simulation_n=200,
                                                   max_iterations=50))
        store.install(ServingState.from_plan(linked.snapshot, plan, config))
        yield store


@pytest.fixture(scope="module")
def client(store):
    return TestClient(create_app(store))


class TestHealth:
    def test_healthz(self, client):
        resp = client.get("/healthz")
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"

    def test_snapshot_not_ready_503(self):
        empty = SnapshotStore()
        with TestClient(create_app(empty)) as c:
            assert c.get("/api/projects").status_code == 503
            assert c.get("/healthz").json()["status"] == "loading"

    def test_loaded_empty_snapshot_returns_empty_list(self):
        from leadplan.model import Snapshot
        from leadplan.pipeline import ScoredPlan

        snapshot, report = Snapshot.build([], [], [], [], {})
        assert report.usable
        state = ServingState.from_plan(
            snapshot, ScoredPlan([], {}, {}, []), PlanConfig()
        )
        store = SnapshotStore()
        store.install(state)
        with TestClient(create_app(store)) as c:
            resp = c.get("/api/projects")
            assert resp.status_code == 200
            assert resp.json()["projects"] == []


class TestProjects:
    def test_complete_stable_list(self, client, store):
        resp = client.get("/api/projects")
        assert resp.status_code == 200
        projects = resp.json()["projects"]
        assert len(projects) == len(store.state.projects)
        ids = [p["project_id"] for p in projects]
        assert ids == sorted(ids)
        assert client.get("/api/projects").json()["projects"] == projects

    def test_summaries_match_scoring(self, client, store):
        projects = client.get("/api/projects").json()["projects"]
        by_id = {p.project_id: p for p in store.state.projects}
        for summary in projects:
            src = by_id[summary["project_id"]]
            assert summary["value_exposure_years"] == src.value_exposure_years
            assert summary["cost_units"] == src.cost_units
            assert summary["lead_line_count"] == src.lead_line_count
            assert summary["geometry"]["type"] == "LineString"


class TestCart:
    def test_empty_cart(self, client):
        resp = client.post("/api/cart/evaluate", json={"project_ids": []})
        body = resp.json()
        assert body["total_value"] == 0.0
        assert body["total_cost"] == 0.0
        assert body["within_budget"] is True
        assert body["per_project"] == []

    def test_full_cart_additivity(self, client, store):
        ids = [p.project_id for p in store.state.projects]
        body = client.post("/api/cart/evaluate", json={"project_ids": ids}).json()
        assert body["total_value"] == pytest.approx(
            sum(p.value_exposure_years for p in store.state.projects)
        )
        assert body["total_cost"] == pytest.approx(
            sum(p.cost_units for p in store.state.projects)
        )

    def test_unknown_project_404(self, client):
        resp = client.post("/api/cart/evaluate", json={"project_ids": ["ghost"]})
        assert resp.status_code == 404

    def test_duplicate_400(self, client, store):
        pid = store.state.projects[0].project_id
        resp = client.post("/api/cart/evaluate", json={"project_ids": [pid, pid]})
        assert resp.status_code == 400

    def test_budget_flag(self, client, store):
        p = store.state.projects[0]
        over = client.post("/api/cart/evaluate", json={
            "project_ids": [p.project_id], "budget": p.cost_units / 2,
        }).json()
        assert over["within_budget"] is False
        under = client.post("/api/cart/evaluate", json={
            "project_ids": [p.project_id], "budget": p.cost_units * 2,
        }).json()
        assert under["within_budget"] is True

    def test_random_carts_match_brute_force(self, client, store):
        rng = random.Random("carts")
        ids = [p.project_id for p in store.state.projects]
        by_id = {p.project_id: p for p in store.state.projects}
        for _ in range(50):
            cart = rng.sample(ids, rng.randint(0, len(ids)))
            body = client.post("/api/cart/evaluate",
                               json={"project_ids": cart}).json()
            assert body["total_value"] == pytest.approx(
                sum(by_id[i].value_exposure_years for i in cart))
            assert body["total_cost"] == pytest.approx(
                sum(by_id[i].cost_units for i in cart))

    def test_permutation_invariant_totals(self, client, store):
        ids = [p.project_id for p in store.state.projects][:6]
        forward = client.post("/api/cart/evaluate", json={"project_ids": ids}).json()
        backward = client.post("/api/cart/evaluate",
                               json={"project_ids": ids[::-1]}).json()
        assert forward["total_value"] == backward["total_value"]
        assert forward["total_cost"] == backward["total_cost"]


class TestRankings:
    def test_by_bcr_matches_module(self, client, store):
        body = client.get("/api/rankings", params={"policy": "by_bcr"}).json()
        expected = [r.project_id for r in rank_projects(store.state.projects)]
        assert [e["project_id"] for e in body["entries"]] == expected
        assert [e["rank"] for e in body["entries"]] == list(
            range(1, len(expected) + 1))

    def test_seeded_policy_deterministic(self, client):
        first = client.get("/api/rankings",
                           params={"policy": "uniform_random", "seed": 7})
        second = client.get("/api/rankings",
                            params={"policy": "uniform_random", "seed": 7})
        assert first.content == second.content

    def test_bogus_policy_400(self, client):
        resp = client.get("/api/rankings", params={"policy": "bogus"})
        assert resp.status_code == 400


class TestSimulation:
    def test_deterministic_single_trajectory(self, client):
        body = client.get("/api/simulation", params={
            "policies": "by_value", "n": 5, "iterations": 1,
        }).json()
        assert body["n"] == 5
        assert len(body["policies"]) == 1
        assert body["policies"][0]["iterations"] == 1
        assert len(body["policies"][0]["median"]) == 5

    def test_identical_seeds_identical_bytes(self, client):
        params = {"policies": "by_value,uniform_random", "n": 8,
                  "iterations": 5, "seed": 11}
        first = client.get("/api/simulation", params=params)
        second = client.get("/api/simulation", params=params)
        assert first.content == second.content

    def test_median_between_min_and_max(self, client, store):
        params = {"policies": "uniform_random", "n": 10, "iterations": 9,
                  "seed": 3}
        body = client.get("/api/simulation", params=params).json()
        median = body["policies"][0]["median"]
        # recompute the iteration envelope with the library
        from leadplan import policysim

        outcomes = policysim.simulate(
            [policysim.Policy("uniform_random", seed=3)],
            store.state.projects, n=10, iterations=9,
            child_counts=store.state.child_counts,
        )
        runs = outcomes[0].runs
        for k, point in enumerate(median):
            values = sorted(r.per_step[k].exposure_years for r in runs)
            assert values[0] <= point["exposure_years"] <= values[-1]

    def test_limits_enforced(self, client):
        resp = client.get("/api/simulation", params={
            "policies": "by_value", "n": 10_000,
        })
        assert resp.status_code == 400
        resp = client.get("/api/simulation", params={
            "policies": "uniform_random", "n": 5, "iterations": 10_000,
        })
        assert resp.status_code == 400

    def test_read_only_service(self, client):
        before = client.get("/api/projects").content
        client.get("/api/simulation",
                   params={"policies": "uniform_random", "n": 5,
                           "iterations": 3, "seed": 1})
        client.post("/api/cart/evaluate", json={"project_ids": []})
        assert client.get("/api/projects").content == before


class TestReload:
    def test_atomic_swap(self, tmp_path):
        city = synth.generate_city(seed=30, n_streets=6)
        d1 = tmp_path / "one"
        city.write(d1)
        store = SnapshotStore()
        store.load(pipeline.SnapshotPaths.from_dir(d1))
        app = create_app(store)
        with TestClient(app) as client:
            first = client.get("/api/projects").json()["projects"]
            bigger = synth.generate_city(seed=31, n_streets=10)
            d2 = tmp_path / "two"
            bigger.write(d2)
            resp = client.post("/admin/reload", json={"directory": str(d2)})
            assert resp.status_code == 200
            second = client.get("/api/projects").json()["projects"]
            assert len(second) >= len(first)

    def test_reload_bad_directory_400(self, tmp_path):
        store = SnapshotStore()
        app = create_app(store)
        with TestClient(app) as client:
            resp = client.post("/admin/reload",
                               json={"directory": str(tmp_path / "nope")})
            assert resp.status_code == 400

    def test_reload_rejects_defective_snapshot(self, tmp_path):
        city = synth.generate_city(seed=33, n_streets=6)
        good = tmp_path / "good"
        city.write(good)
        store = SnapshotStore()
        store.load(pipeline.SnapshotPaths.from_dir(good))
        before = store.state

        bad = tmp_path / "bad"
        city.write(bad)
        # dangling reference: a line pointing at a parcel that doesn't exist
        with open(bad / "service_lines.csv", "a", encoding="utf-8") as fh:
            fh.write("ghost-parcel,lead,lead,\n")
        app = create_app(store)
        with TestClient(app) as client:
            resp = client.post("/admin/reload", json={"directory": str(bad)})
            assert resp.status_code == 400
            assert "fatal" in resp.json()["detail"]
        assert store.state is before  # old snapshot still serving
