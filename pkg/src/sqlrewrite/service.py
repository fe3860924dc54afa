"""HTTP face of the rewriter: rewrite, suggest, and rule-base management.

The rewrite endpoint is fail-open by contract: whatever happens, the
response carries valid SQL, falling back to the input verbatim with a
warning when it cannot be parsed or rewritten.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .config import ServiceConfig
from .engine import rewrite
from .errors import BudgetExceeded, ParseError, SqlRewriteError
from .mdl import MdlConfig
from .parser import parse_query
from .rules import parse_rule, rule_from_json, rule_to_json
from .sqlgen import serialize
from .store import ConflictError, RuleStore, Workspace
from .suggest import CostConfig, ExplorerConfig, RewritePair, suggest_rules


class RewriteRequest(BaseModel):
    sql: str
    workspace: str = "default"
    explain: bool = False


class PairBody(BaseModel):
    original: str
    rewritten: str


class SuggestRequest(BaseModel):
    pairs: list[PairBody]
    strategy: str = ""
    mdl: dict = Field(default_factory=dict)
    beta: float = 1.0
    workload: list[str] = Field(default_factory=list)


class RuleBody(BaseModel):
    id: int = 0
    name: str = ""
    pattern: str
    replacement: str
    constraints: list[str] = Field(default_factory=list)
    actions: list[str] = Field(default_factory=list)
    priority: int = 0
    workspace: str = "default"
    enabled: bool = True


class RuleUpdate(BaseModel):
    name: str | None = None
    pattern: str | None = None
    replacement: str | None = None
    constraints: list[str] | None = None
    actions: list[str] | None = None
    priority: int | None = None
    workspace: str | None = None
    enabled: bool | None = None


class WorkspaceBody(BaseModel):
    id: str
    name: str = ""
    dialect: str = "generic"
    schema_path: str | None = None


def create_app(store: RuleStore | None = None, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = store or RuleStore(config.store_path)
    app = FastAPI(title="sqlrewrite", version="0.1.0")
    app.state.store = store
    app.state.config = config
    suggest_gate = threading.Semaphore(1)

    @app.exception_handler(HTTPException)
    async def http_error(_request: Request, exc: HTTPException):
        detail = exc.detail
        if isinstance(detail, dict):
            body = detail
        else:
            body = {"error": _reason(exc.status_code), "detail": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=body)

    # -- rewriting ---------------------------------------------------------

    @app.post("/api/v1/rewrite")
    def http_rewrite(request: RewriteRequest):
        try:
            workspace = store.get_workspace(request.workspace)
        except KeyError as exc:
            raise HTTPException(404, str(exc))
        try:
            query = parse_query(request.sql, workspace.dialect)
        except ParseError as exc:
            return {"sql": request.sql, "rewritten": False, "warning": str(exc)}
        try:
            schema = store.schema_for(workspace)
        except OSError as exc:
            return {"sql": request.sql, "rewritten": False,
                    "warning": f"schema unavailable: {exc}"}
        rules = store.rules_for_rewrite(request.workspace)
        result, trace = rewrite(query, rules, schema, config.max_steps)
        body = {
            "sql": serialize(result, workspace.dialect),
            "rewritten": bool(trace.steps),
        }
        if request.explain:
            body["trace"] = trace.to_json(workspace.dialect)
        return body

    # -- suggestion ----------------------------------------------------------

    @app.post("/api/v1/suggest")
    def http_suggest(request: SuggestRequest):
        if not request.pairs:
            raise HTTPException(422, "at least one example pair is required")
        try:
            pairs = [
                RewritePair.from_text(p.original, p.rewritten, config.default_dialect)
                for p in request.pairs
            ]
            workload = tuple(
                parse_query(q, config.default_dialect) for q in request.workload
            )
        except ParseError as exc:
            raise HTTPException(422, str(exc))
        try:
            explorer = ExplorerConfig.parse(request.strategy)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        mdl_kwargs = {
            key: request.mdl[key]
            for key in ("base_length", "element_weight", "set_weight")
            if key in request.mdl
        }
        if request.beta != 1.0:
            raise HTTPException(
                422, "cost-aware suggestion needs a cost provider callback, "
                     "which the HTTP API cannot carry; beta must be 1",
            )
        if not suggest_gate.acquire(timeout=config.suggest_budget_ms / 1000.0):
            raise HTTPException(503, {"error": "busy",
                                      "detail": "another suggestion is running"})
        try:
            report = suggest_rules(
                pairs,
                explorer,
                MdlConfig(**mdl_kwargs),
                CostConfig(beta=1.0, workload=workload),
                budget_ms=config.suggest_budget_ms,
            )
        except BudgetExceeded as exc:
            raise HTTPException(
                503, {"error": "budget exceeded", "detail": str(exc),
                      "stats": exc.stats}
            )
        except (ValueError, SqlRewriteError) as exc:
            raise HTTPException(422, str(exc))
        finally:
            suggest_gate.release()
        return report.to_json(config.default_dialect)

    # -- rule management ------------------------------------------------------

    @app.get("/api/v1/rules")
    def list_rules(workspace: str | None = None):
        return [rule_to_json(r) for r in store.list_rules(workspace)]

    @app.post("/api/v1/rules", status_code=201)
    def create_rule(body: RuleBody):
        try:
            rule = rule_from_json(body.model_dump())
        except SqlRewriteError as exc:
            raise HTTPException(400, str(exc))
        try:
            stored = store.add_rule(rule)
        except ConflictError as exc:
            raise HTTPException(409, str(exc))
        except KeyError as exc:
            raise HTTPException(404, str(exc))
        return rule_to_json(stored)

    @app.get("/api/v1/rules/{rule_id}")
    def get_rule(rule_id: int):
        try:
            return rule_to_json(store.get_rule(rule_id))
        except KeyError as exc:
            raise HTTPException(404, str(exc))

    @app.put("/api/v1/rules/{rule_id}")
    def update_rule(rule_id: int, body: RuleUpdate):
        changes = {k: v for k, v in body.model_dump().items() if v is not None}
        if "pattern" in changes or "replacement" in changes:
            try:
                current = rule_to_json(store.get_rule(rule_id))
            except KeyError as exc:
                raise HTTPException(404, str(exc))
            current.update(changes)
            try:
                revalidated = rule_from_json(current)
            except SqlRewriteError as exc:
                raise HTTPException(400, str(exc))
            changes = {
                "pattern": revalidated.pattern,
                "replacement": revalidated.replacement,
                "constraints": revalidated.constraints,
                "actions": revalidated.actions,
                **{k: v for k, v in changes.items()
                   if k in ("name", "priority", "workspace", "enabled")},
            }
        elif "constraints" in changes or "actions" in changes:
            raise HTTPException(400, "constraints/actions updates require pattern and replacement")
        try:
            return rule_to_json(store.update_rule(rule_id, **changes))
        except KeyError as exc:
            raise HTTPException(404, str(exc))

    @app.delete("/api/v1/rules/{rule_id}", status_code=204)
    def delete_rule(rule_id: int):
        try:
            store.delete_rule(rule_id)
        except KeyError as exc:
            raise HTTPException(404, str(exc))

    # -- workspaces -------------------------------------------------------------

    @app.get("/api/v1/workspaces")
    def list_workspaces():
        out = []
        for workspace in store.list_workspaces():
            doc = workspace.to_json()
            doc["rule_ids"] = store.workspace_rule_ids(workspace.id)
            out.append(doc)
        return out

    @app.post("/api/v1/workspaces", status_code=201)
    def create_workspace(body: WorkspaceBody):
        workspace = Workspace(
            id=body.id, name=body.name or body.id,
            dialect=body.dialect, schema_path=body.schema_path,
        )
        try:
            return store.add_workspace(workspace).to_json()
        except ConflictError as exc:
            raise HTTPException(409, str(exc))

    @app.put("/api/v1/workspaces/{workspace_id}")
    def update_workspace(workspace_id: str, body: dict):
        allowed = {k: v for k, v in body.items()
                   if k in ("name", "dialect", "schema_path")}
        try:
            return store.update_workspace(workspace_id, **allowed).to_json()
        except KeyError as exc:
            raise HTTPException(404, str(exc))

    @app.delete("/api/v1/workspaces/{workspace_id}", status_code=204)
    def delete_workspace(workspace_id: str):
        try:
            store.delete_workspace(workspace_id)
        except ConflictError as exc:
            raise HTTPException(409, str(exc))
        except KeyError as exc:
            raise HTTPException(404, str(exc))

    _mount_ui(app)
    return app


def _reason(status: int) -> str:
    return {
        400: "invalid rule",
        404: "not found",
        409: "conflict",
        422: "unprocessable",
        503: "unavailable",
    }.get(status, "error")


def _mount_ui(app: FastAPI) -> None:
    ui_dir = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")


def run_server(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(RuleStore(config.store_path), config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
