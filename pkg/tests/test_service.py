import pytest
from fastapi.testclient import TestClient

from rispoison.service import create_app

TINY = ("run.total_steps = 250\n"
        "attack.t_warm = 20\n"
        "attack.w = 40\n"
        "sac.warm_start = 30\n"
        "env.R = 2\n"
        "run.seeds = 0,1\n")


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def run_payload(extra_overrides=None):
    return {"config": {"config_text": TINY, "overrides": extra_overrides or {}}}


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"


class TestRun:
    def test_run_returns_traces_curve_summary(self, client):
        resp = client.post("/run", json=run_payload())
        assert resp.status_code == 200
        body = resp.json()
        assert [s["seed"] for s in body["summaries"]] == [0, 1]
        assert len(body["traces"]) == 2
        header = body["traces"][0]["csv"].splitlines()[0]
        assert header == "seed,t,r_true,r_train,fired,eligible,signal,threshold,p_s,rate"
        assert body["curve_csv"].splitlines()[0] == "t,mean,std"
        assert len(body["curve"]["t"]) == 250
        assert "final_mean_rate" in body["summary_text"] or "seed" in body["summary_text"]

    def test_run_deterministic(self, client):
        a = client.post("/run", json=run_payload()).json()
        b = client.post("/run", json=run_payload()).json()
        assert a["traces"] == b["traces"]
        assert a["curve_csv"] == b["curve_csv"]

    def test_config_error(self, client):
        resp = client.post("/run", json={"config": {"config_text": "nope.key = 1\n"}})
        assert resp.status_code == 400
        assert resp.json()["detail"]["code"] == "config"

    def test_all_seeds_diverged(self, client):
        resp = client.post("/run", json=run_payload({"sac.lr": "1e300"}))
        assert resp.status_code == 422
        assert resp.json()["detail"]["code"] == "divergence"

    def test_traces_optional(self, client):
        payload = run_payload()
        payload["include_traces"] = False
        body = client.post("/run", json=payload).json()
        assert body["traces"] == []


class TestSweep:
    def test_sweep_rows_and_csv(self, client):
        resp = client.post("/sweep", json={
            "config": {"config_text": TINY}, "axis": "attack.kind",
            "values": ["none", "periodic"]})
        assert resp.status_code == 200
        body = resp.json()
        assert [r["value"] for r in body["rows"]] == ["none", "periodic"]
        assert body["csv"].splitlines()[0] == "value,final_mean,final_std,n_seeds_ok"

    def test_bad_axis(self, client):
        resp = client.post("/sweep", json={
            "config": {"config_text": TINY}, "axis": "sac.lr", "values": ["0.1"]})
        assert resp.status_code == 400
        assert resp.json()["detail"]["code"] == "config"


class TestCompare:
    def test_compare_report(self, client):
        resp = client.post("/compare", json={
            "config": {"config_text": TINY}, "kinds": ["none", "dgrp"]})
        assert resp.status_code == 200
        body = resp.json()
        assert {r["kind"] for r in body["rows"]} == {"none", "dgrp"}
        assert len(body["pairwise"]) == 1
        pw = body["pairwise"][0]
        assert pw["n_seeds"] == 2
        assert "attack comparison" in body["summary_text"]

    def test_compare_needs_two(self, client):
        resp = client.post("/compare", json={
            "config": {"config_text": TINY}, "kinds": ["dgrp"]})
        assert resp.status_code == 400


class TestAggregate:
    def test_round_trip_matches_run_curve(self, client):
        run_body = client.post("/run", json=run_payload()).json()
        traces = [t["csv"] for t in run_body["traces"]]
        agg = client.post("/aggregate", json={"traces": traces, "ma_window": 200})
        assert agg.status_code == 200
        assert agg.json()["csv"] == run_body["curve_csv"]

    def test_bad_trace_rejected(self, client):
        resp = client.post("/aggregate", json={"traces": ["garbage"], "ma_window": 10})
        assert resp.status_code == 400
