"""Service configuration: JSON file plus QB_-prefixed environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8080"
    store_path: str = "rules.json"
    default_dialect: str = "generic"
    suggest_budget_ms: int = 10_000
    max_steps: int = 64

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rsplit(":", 1)[1])


_ENV_PREFIX = "QB_"


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    env = os.environ if env is None else env
    values: dict = {}
    if path:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
        known = {f.name for f in fields(ServiceConfig)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(doc)
    for field in fields(ServiceConfig):
        key = _ENV_PREFIX + field.name.upper()
        if key in env:
            raw = env[key]
            values[field.name] = int(raw) if field.type == "int" else raw
    return ServiceConfig(**values)
