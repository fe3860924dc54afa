"""HTTP API contract suite: recorded request/response expectations."""

import json

import pytest
from fastapi.testclient import TestClient

from sqlrewrite.config import ServiceConfig
from sqlrewrite.service import create_app
from sqlrewrite.store import RuleStore

from conftest import (
    EMPLOYEE_SCHEMA,
    SELF_JOIN_QUERY,
    SELF_JOIN_REWRITTEN,
    SELF_JOIN_RULE_SRC,
    STRPOS_RULE_SRC,
    TIMESTAMP_RULE_SRC,
    TWEET_QUERY,
    TWEET_REWRITTEN,
)

STRPOS_RULE_BODY = {
    "name": "strpos-to-ilike",
    "pattern": "STRPOS(LOWER(<x>), '<y>') > 0",
    "replacement": "<x> ILIKE '%<y>%'",
}


@pytest.fixture
def client(tmp_path):
    store = RuleStore(tmp_path / "store.json")
    app = create_app(store, ServiceConfig(store_path=str(tmp_path / "store.json")))
    with TestClient(app) as test_client:
        yield test_client


def test_rewrite_with_strpos_rule(client):
    created = client.post("/api/v1/rules", json=STRPOS_RULE_BODY)
    assert created.status_code == 201
    response = client.post("/api/v1/rewrite", json={"sql": TWEET_QUERY})
    assert response.status_code == 200
    body = response.json()
    assert body["rewritten"] is True
    assert "ILIKE '%covid%'" in body["sql"]


def test_rewrite_empty_workspace_is_identity(client):
    response = client.post("/api/v1/rewrite", json={"sql": "SELECT a FROM t"})
    assert response.status_code == 200
    body = response.json()
    assert body["sql"] == "SELECT a FROM t"
    assert body["rewritten"] is False


def test_rewrite_fail_open_on_unparseable_sql(client):
    horrid = "SELEKT ?? FROM !!"
    response = client.post("/api/v1/rewrite", json={"sql": horrid})
    assert response.status_code == 200
    body = response.json()
    assert body["sql"] == horrid
    assert "warning" in body


def test_rewrite_unknown_workspace_404(client):
    response = client.post(
        "/api/v1/rewrite", json={"sql": "SELECT 1 FROM t", "workspace": "nope"}
    )
    assert response.status_code == 404
    assert "error" in response.json()


def test_rewrite_explain_returns_trace(client):
    client.post("/api/v1/rules", json=STRPOS_RULE_BODY)
    response = client.post(
        "/api/v1/rewrite", json={"sql": TWEET_QUERY, "explain": True}
    )
    trace = response.json()["trace"]
    assert trace["terminated_by"] == "fixpoint"
    assert len(trace["steps"]) == 1
    assert trace["steps"][0]["rule_id"] == 1


def test_mysql_timestamp_rule_via_workspace(client, tmp_path):
    client.post(
        "/api/v1/workspaces",
        json={"id": "mysql-app", "name": "MySQL app", "dialect": "mysql"},
    )
    client.post(
        "/api/v1/rules",
        json={
            "name": "strip-timestamp-cast",
            "pattern": "<x> = TIMESTAMP('<y>')",
            "replacement": "<x> = '<y>'",
            "workspace": "mysql-app",
        },
    )
    sql = (
        "SELECT * FROM tweets WHERE ADDDATE(DATE_FORMAT(`created_at`, "
        "'%Y-%m-01 00:00:00'), INTERVAL 0 SECOND) = "
        "TIMESTAMP('2018-04-01 00:00:00')"
    )
    response = client.post(
        "/api/v1/rewrite", json={"sql": sql, "workspace": "mysql-app"}
    )
    body = response.json()
    assert body["rewritten"] is True
    assert "TIMESTAMP(" not in body["sql"]
    assert "= '2018-04-01 00:00:00'" in body["sql"]


def test_self_join_workspace_with_schema(client, tmp_path):
    schema_path = tmp_path / "employee.json"
    schema_path.write_text(json.dumps(EMPLOYEE_SCHEMA))
    client.post(
        "/api/v1/workspaces",
        json={"id": "hr", "name": "HR", "schema_path": str(schema_path)},
    )
    response = client.post(
        "/api/v1/rules",
        json={
            "name": "remove-self-join",
            "pattern": "SELECT <<s>> FROM <t1>, <t2> WHERE <t1>.<a1> = <t2>.<a2> AND <<p>>",
            "constraints": ["SAME(t1, t2)", "SAME(a1, a2)", "UNIQUE(t1, a1)"],
            "replacement": "SELECT <<s>> FROM <t1> WHERE <<p>>",
            "actions": ["Substitute(s, t2, t1)", "Substitute(p, t2, t1)"],
            "workspace": "hr",
        },
    )
    assert response.status_code == 201
    rewritten = client.post(
        "/api/v1/rewrite", json={"sql": SELF_JOIN_QUERY, "workspace": "hr"}
    ).json()
    assert rewritten["rewritten"] is True
    assert "employee e2" not in rewritten["sql"]
    assert "e1.salary" in rewritten["sql"]


def test_workspace_isolation(client):
    client.post("/api/v1/workspaces", json={"id": "a", "name": "A"})
    client.post("/api/v1/workspaces", json={"id": "b", "name": "B"})
    client.post(
        "/api/v1/rules", json={**STRPOS_RULE_BODY, "workspace": "a"}
    )
    in_b = client.post(
        "/api/v1/rewrite", json={"sql": TWEET_QUERY, "workspace": "b"}
    ).json()
    assert in_b["rewritten"] is False
    in_a = client.post(
        "/api/v1/rewrite", json={"sql": TWEET_QUERY, "workspace": "a"}
    ).json()
    assert in_a["rewritten"] is True


# -- rule CRUD -------------------------------------------------------------------


def test_rule_crud_cycle(client):
    created = client.post("/api/v1/rules", json=STRPOS_RULE_BODY)
    assert created.status_code == 201
    rule_id = created.json()["id"]

    listing = client.get("/api/v1/rules").json()
    assert [r["id"] for r in listing] == [rule_id]

    updated = client.put(f"/api/v1/rules/{rule_id}", json={"priority": 9})
    assert updated.json()["priority"] == 9

    deleted = client.delete(f"/api/v1/rules/{rule_id}")
    assert deleted.status_code == 204
    assert client.get("/api/v1/rules").json() == []
    # The rule no longer fires.
    response = client.post("/api/v1/rewrite", json={"sql": TWEET_QUERY})
    assert response.json()["rewritten"] is False


def test_invalid_rule_rejected_400(client):
    bad = {**STRPOS_RULE_BODY, "replacement": "<zz> ILIKE '%<y>%'"}
    response = client.post("/api/v1/rules", json=bad)
    assert response.status_code == 400
    assert "error" in response.json()


def test_rule_id_conflict_409(client):
    client.post("/api/v1/rules", json={**STRPOS_RULE_BODY, "id": 5})
    response = client.post("/api/v1/rules", json={**STRPOS_RULE_BODY, "id": 5})
    assert response.status_code == 409


def test_priority_update_changes_rewrite_order(client):
    client.post(
        "/api/v1/rules",
        json={"name": "to-g", "pattern": "F(<x>)", "replacement": "G(<x>)"},
    )
    client.post(
        "/api/v1/rules",
        json={"name": "to-h", "pattern": "F(<x>)", "replacement": "H(<x>)"},
    )
    first = client.post(
        "/api/v1/rewrite", json={"sql": "SELECT F(a) FROM t", "explain": True}
    ).json()
    assert first["trace"]["steps"][0]["rule_id"] == 1

    client.put("/api/v1/rules/2", json={"priority": 10})
    second = client.post(
        "/api/v1/rewrite", json={"sql": "SELECT F(a) FROM t", "explain": True}
    ).json()
    assert second["trace"]["steps"][0]["rule_id"] == 2


def test_disable_rule_stops_it_firing(client):
    created = client.post("/api/v1/rules", json=STRPOS_RULE_BODY).json()
    client.put(f"/api/v1/rules/{created['id']}", json={"enabled": False})
    response = client.post("/api/v1/rewrite", json={"sql": TWEET_QUERY}).json()
    assert response["rewritten"] is False


def test_persistence_across_restart(client, tmp_path):
    client.post("/api/v1/rules", json=STRPOS_RULE_BODY)
    client.post("/api/v1/workspaces", json={"id": "w2", "name": "W2"})

    reloaded = RuleStore(tmp_path / "store.json")
    app = create_app(reloaded, ServiceConfig(store_path=str(tmp_path / "store.json")))
    with TestClient(app) as second:
        rules = second.get("/api/v1/rules").json()
        assert len(rules) == 1 and rules[0]["name"] == "strpos-to-ilike"
        workspaces = second.get("/api/v1/workspaces").json()
        assert {w["id"] for w in workspaces} == {"default", "w2"}


# -- suggestion endpoint ------------------------------------------------------------


def test_suggest_returns_strpos_rule(client):
    response = client.post(
        "/api/v1/suggest",
        json={
            "pairs": [{"original": TWEET_QUERY, "rewritten": TWEET_REWRITTEN}],
            "strategy": "mpn:4000",
        },
    )
    assert response.status_code == 200
    body = response.json()
    patterns = [r["pattern"] for r in body["rules"]]
    assert "STRPOS(LOWER(<v1>), '<v2>') > 0" in patterns
    stats = body["stats"]
    assert stats["candidates_explored"] > 0
    assert stats["iterations"] >= 1
    assert "wall_time_ms" in stats and "total_dl_after" in stats


def test_suggest_default_strategy_is_mpn(client):
    response = client.post(
        "/api/v1/suggest",
        json={
            "pairs": [
                {
                    "original": "SELECT a FROM t1 WHERE c1 = 5",
                    "rewritten": "SELECT a FROM t1",
                }
            ]
        },
    )
    assert response.status_code == 200
    assert response.json()["rules"]


def test_suggest_unparseable_pair_422(client):
    response = client.post(
        "/api/v1/suggest",
        json={"pairs": [{"original": "NOT SQL AT ALL !!", "rewritten": "SELECT 1 FROM t"}]},
    )
    assert response.status_code == 422


def test_suggest_empty_pairs_422(client):
    response = client.post("/api/v1/suggest", json={"pairs": []})
    assert response.status_code == 422


def test_suggested_rule_roundtrips_into_store(client):
    report = client.post(
        "/api/v1/suggest",
        json={
            "pairs": [
                {
                    "original": "SELECT a FROM t1 WHERE c1 = 5",
                    "rewritten": "SELECT a FROM t1",
                },
                {
                    "original": "SELECT a FROM t2 WHERE c2 = 5",
                    "rewritten": "SELECT a FROM t2",
                },
            ],
            "strategy": "khn:2",
        },
    ).json()
    rule = report["rules"][0]
    created = client.post(
        "/api/v1/rules",
        json={
            "name": "suggested",
            "pattern": rule["pattern"],
            "replacement": rule["replacement"],
        },
    )
    assert created.status_code == 201
    rewritten = client.post(
        "/api/v1/rewrite", json={"sql": "SELECT a FROM t9 WHERE c7 = 5"}
    ).json()
    assert rewritten["sql"] == "SELECT a FROM t9"
