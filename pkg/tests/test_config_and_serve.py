"""Service configuration loading and a live server smoke test."""

import json
import socket
import subprocess
import sys
import time

import pytest
import requests

from sqlrewrite.config import ServiceConfig, load_config

from conftest import STRPOS_RULE_SRC, TWEET_QUERY


def test_defaults():
    config = load_config(env={})
    assert config == ServiceConfig()
    assert config.port == 8080


def test_file_values(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"listen_addr": "0.0.0.0:9001", "max_steps": 16}))
    config = load_config(path, env={})
    assert config.listen_addr == "0.0.0.0:9001"
    assert config.max_steps == 16
    assert config.suggest_budget_ms == 10_000


def test_env_overrides_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"store_path": "from-file.json"}))
    config = load_config(
        path, env={"QB_STORE_PATH": "from-env.json", "QB_SUGGEST_BUDGET_MS": "250"}
    )
    assert config.store_path == "from-env.json"
    assert config.suggest_budget_ms == 250


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"shoe_size": 42}))
    with pytest.raises(ValueError):
        load_config(path, env={})


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.mark.integration
def test_serve_and_rewrite_over_http(tmp_path):
    """CLI-launched server answers a real HTTP rewrite round trip."""
    port = _free_port()
    config_path = tmp_path / "config.json"
    store_path = tmp_path / "store.json"
    config_path.write_text(
        json.dumps(
            {"listen_addr": f"127.0.0.1:{port}", "store_path": str(store_path)}
        )
    )
    process = subprocess.Popen(
        [sys.executable, "-m", "sqlrewrite.cli", "serve", "--config", str(config_path)],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                requests.get(base + "/api/v1/rules", timeout=1)
                break
            except requests.ConnectionError:
                time.sleep(0.1)
        else:
            pytest.fail("server did not come up")

        created = requests.post(
            base + "/api/v1/rules",
            json={
                "name": "strpos-to-ilike",
                "pattern": "STRPOS(LOWER(<x>), '<y>') > 0",
                "replacement": "<x> ILIKE '%<y>%'",
            },
            timeout=5,
        )
        assert created.status_code == 201

        response = requests.post(
            base + "/api/v1/rewrite", json={"sql": TWEET_QUERY}, timeout=5
        )
        assert response.status_code == 200
        assert "ILIKE '%covid%'" in response.json()["sql"]

        # CLI client mode goes through the same server.
        result = subprocess.run(
            [
                sys.executable, "-m", "sqlrewrite.cli", "rewrite",
                "--server", base,
            ],
            input=TWEET_QUERY + ";",
            capture_output=True,
            text=True,
            timeout=30,
        )
        assert result.returncode == 0
        assert "ILIKE '%covid%'" in result.stdout
    finally:
        process.terminate()
        process.wait(timeout=10)
