"""Rule and workspace persistence: one JSON file, atomic rename on save."""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

from .rules import Rule, rule_from_json, rule_to_json
from .schema import SchemaCatalog

DEFAULT_WORKSPACE = "default"


class ConflictError(Exception):
    """Identifier already taken."""


@dataclass
class Workspace:
    id: str
    name: str
    dialect: str = "generic"
    schema_path: str | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "dialect": self.dialect,
            "schema_path": self.schema_path,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Workspace":
        return cls(
            id=doc["id"],
            name=doc.get("name", doc["id"]),
            dialect=doc.get("dialect", "generic"),
            schema_path=doc.get("schema_path"),
        )


class RuleStore:
    """In-memory rule base with optional on-disk JSON persistence.

    Mutations hold a lock and swap internal maps; readers receive snapshot
    lists, so concurrent rewrites see a consistent rule set.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._lock = threading.RLock()
        self._rules: dict[int, Rule] = {}
        self._workspaces: dict[str, Workspace] = {
            DEFAULT_WORKSPACE: Workspace(DEFAULT_WORKSPACE, "Default workspace")
        }
        self._next_id = 1
        self._schema_cache: dict[str, tuple[float, SchemaCatalog]] = {}
        if self.path and self.path.exists():
            self.load()

    # -- rules ---------------------------------------------------------------

    def add_rule(self, rule: Rule) -> Rule:
        with self._lock:
            if rule.id:
                if rule.id in self._rules:
                    raise ConflictError(f"rule id {rule.id} already exists")
                rule_id = rule.id
            else:
                rule_id = self._next_id
            self._next_id = max(self._next_id, rule_id) + 1
            if rule.workspace not in self._workspaces:
                raise KeyError(f"unknown workspace {rule.workspace!r}")
            stored = rule.with_fields(id=rule_id)
            self._rules[rule_id] = stored
            self._persist()
            return stored

    def get_rule(self, rule_id: int) -> Rule:
        with self._lock:
            if rule_id not in self._rules:
                raise KeyError(f"unknown rule id {rule_id}")
            return self._rules[rule_id]

    def update_rule(self, rule_id: int, **fields) -> Rule:
        with self._lock:
            rule = self.get_rule(rule_id)
            workspace = fields.get("workspace")
            if workspace and workspace not in self._workspaces:
                raise KeyError(f"unknown workspace {workspace!r}")
            updated = rule.with_fields(**fields)
            self._rules[rule_id] = updated
            self._persist()
            return updated

    def delete_rule(self, rule_id: int) -> None:
        with self._lock:
            if rule_id not in self._rules:
                raise KeyError(f"unknown rule id {rule_id}")
            del self._rules[rule_id]
            self._persist()

    def list_rules(self, workspace: str | None = None) -> list[Rule]:
        with self._lock:
            rules = sorted(self._rules.values(), key=lambda r: r.id)
        if workspace is None:
            return rules
        return [r for r in rules if r.workspace == workspace]

    def rules_for_rewrite(self, workspace: str) -> list[Rule]:
        return [r for r in self.list_rules(workspace) if r.enabled]

    # -- workspaces ------------------------------------------------------------

    def add_workspace(self, workspace: Workspace) -> Workspace:
        with self._lock:
            if workspace.id in self._workspaces:
                raise ConflictError(f"workspace {workspace.id!r} already exists")
            self._workspaces[workspace.id] = workspace
            self._persist()
            return workspace

    def get_workspace(self, workspace_id: str) -> Workspace:
        with self._lock:
            if workspace_id not in self._workspaces:
                raise KeyError(f"unknown workspace {workspace_id!r}")
            return self._workspaces[workspace_id]

    def update_workspace(self, workspace_id: str, **fields) -> Workspace:
        with self._lock:
            current = self.get_workspace(workspace_id)
            merged = Workspace(
                id=current.id,
                name=fields.get("name", current.name),
                dialect=fields.get("dialect", current.dialect),
                schema_path=fields.get("schema_path", current.schema_path),
            )
            self._workspaces[workspace_id] = merged
            self._persist()
            return merged

    def delete_workspace(self, workspace_id: str) -> None:
        with self._lock:
            if workspace_id == DEFAULT_WORKSPACE:
                raise ConflictError("the default workspace cannot be deleted")
            self.get_workspace(workspace_id)
            if any(r.workspace == workspace_id for r in self._rules.values()):
                raise ConflictError(f"workspace {workspace_id!r} still has rules")
            del self._workspaces[workspace_id]
            self._persist()

    def list_workspaces(self) -> list[Workspace]:
        with self._lock:
            return sorted(self._workspaces.values(), key=lambda w: w.id)

    def workspace_rule_ids(self, workspace_id: str) -> list[int]:
        return [r.id for r in self.list_rules(workspace_id)]

    def schema_for(self, workspace: Workspace) -> SchemaCatalog | None:
        if not workspace.schema_path:
            return None
        path = str(workspace.schema_path)
        mtime = os.path.getmtime(path)
        cached = self._schema_cache.get(path)
        if cached and cached[0] == mtime:
            return cached[1]
        catalog = SchemaCatalog.load(path)
        self._schema_cache[path] = (mtime, catalog)
        return catalog

    # -- persistence -------------------------------------------------------------

    def to_dict(self) -> dict:
        with self._lock:
            return {
                "next_rule_id": self._next_id,
                "workspaces": [w.to_json() for w in self.list_workspaces()],
                "rules": [rule_to_json(r) for r in self.list_rules()],
            }

    def load_dict(self, doc: dict) -> None:
        with self._lock:
            self._workspaces = {
                w["id"]: Workspace.from_json(w) for w in doc.get("workspaces", [])
            }
            self._workspaces.setdefault(
                DEFAULT_WORKSPACE, Workspace(DEFAULT_WORKSPACE, "Default workspace")
            )
            self._rules = {}
            for rule_doc in doc.get("rules", []):
                rule = rule_from_json(rule_doc)
                self._rules[rule.id] = rule
            stored_next = int(doc.get("next_rule_id", 1))
            top = max(self._rules, default=0)
            self._next_id = max(stored_next, top + 1)

    def _persist(self) -> None:
        if self.path is None:
            return
        payload = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        directory = self.path.parent
        directory.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=directory, prefix=".rules-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp_name, self.path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise

    def save(self) -> None:
        self._persist()

    def load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as handle:
            self.load_dict(json.load(handle))
