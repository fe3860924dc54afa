"""Iterative rule application with priorities, cycle detection, and traces."""

from __future__ import annotations

from dataclasses import dataclass

from . import nodes as N
from .errors import (
    MatchComplexityError,
    MissingSchema,
    ParseError,
    ScopeNotFound,
    SqlRewriteError,
    UnboundVariable,
)
from .matching import (
    Binding,
    candidate_sites,
    instantiate_list,
    match_node,
    normalize,
)
from .nodes import NodeKind, SqlNode
from .parser import parse_query
from .rules import Rule, apply_actions, eval_constraint
from .schema import SchemaCatalog
from .sqlgen import serialize

DEFAULT_MAX_STEPS = 64


@dataclass(frozen=True)
class RewriteTrace:
    steps: tuple[tuple[int, SqlNode, SqlNode], ...]
    terminated_by: str  # fixpoint | cycle | step_limit

    def to_json(self, dialect: str = "generic") -> dict:
        return {
            "steps": [
                {
                    "rule_id": rule_id,
                    "before": serialize(before, dialect),
                    "after": serialize(after, dialect),
                }
                for rule_id, before, after in self.steps
            ],
            "terminated_by": self.terminated_by,
        }


def apply_rule(
    rule: Rule,
    query: SqlNode,
    schema: SchemaCatalog | None = None,
    diagnostics: list | None = None,
) -> SqlNode | None:
    """Apply a rule at the first matching site passing all constraints.

    Returns the rewritten query, or None when the rule does not fire.
    Constraint/action failures are recorded as diagnostics, not raised.
    """
    return _apply(rule, query, schema, diagnostics, validate=True)


def apply_rule_to_tree(
    rule: Rule, tree: SqlNode, schema: SchemaCatalog | None = None
) -> SqlNode | None:
    """Rule application without concrete-query validation; used to apply a
    rule to another rule's pattern tree (which may hold variables)."""
    return _apply(rule, tree, schema, None, validate=False)


def _apply(rule, query, schema, diagnostics, validate: bool) -> SqlNode | None:
    level = N.fragment_level(rule.pattern)
    root = N.fragment_root(rule.pattern)
    for path, site in candidate_sites(query, level):
        try:
            binding = match_node(root, site, Binding())
        except MatchComplexityError as exc:
            _record(diagnostics, rule, str(exc))
            continue
        if binding is None:
            continue
        try:
            if not all(
                eval_constraint(c, binding, schema) for c in rule.constraints
            ):
                continue
            result = _build_result(rule, query, path, site, binding)
        except (MissingSchema, UnboundVariable, ScopeNotFound, SqlRewriteError) as exc:
            _record(diagnostics, rule, str(exc))
            continue
        if result is None:
            continue
        if validate and not _valid_result(result):
            _record(diagnostics, rule, "rewrite produced an invalid tree")
            continue
        return result
    return None


def _record(diagnostics: list | None, rule: Rule, message: str) -> None:
    if diagnostics is not None:
        diagnostics.append({"rule_id": rule.id, "error": message})


def _build_result(
    rule: Rule,
    query: SqlNode,
    path: tuple[int, ...],
    site: SqlNode,
    binding: Binding,
) -> SqlNode | None:
    replacement_root = N.fragment_root(rule.replacement)
    if N.fragment_level(rule.pattern) == N.LEVEL_STATEMENT:
        new_site = _merge_statement(
            site, N.fragment_root(rule.pattern), replacement_root, binding
        )
        new_nodes = [new_site]
    else:
        new_nodes = instantiate_list(replacement_root, binding)
    if rule.actions:
        new_nodes = [apply_actions(rule.actions, node, binding) for node in new_nodes]
    return _splice(query, path, new_nodes)


def _merge_statement(
    site: SqlNode, pattern: SqlNode, replacement: SqlNode, binding: Binding
) -> SqlNode:
    """Clauses mentioned by the rule are replaced (or removed); the rest of
    the matched statement passes through unchanged."""
    instantiated = instantiate_list(replacement, binding)
    new_stmt = instantiated[0] if instantiated else N.statement([], partial=True)
    mentioned = {c.value for c in pattern.children}
    mentioned.update(c.value for c in replacement.children)
    merged = {c.value: c for c in site.children if c.value not in mentioned}
    merged.update({c.value: c for c in new_stmt.children})
    ordered = tuple(merged[c] for c in N.CLAUSE_ORDER if c in merged)
    return SqlNode(NodeKind.STATEMENT, None, ordered)


def _splice(query: SqlNode, path: tuple[int, ...], new_nodes: list) -> SqlNode | None:
    if not path:
        return new_nodes[0] if len(new_nodes) == 1 else None

    def rebuild(node: SqlNode, remaining: tuple[int, ...]) -> SqlNode:
        index = remaining[0]
        if len(remaining) == 1:
            kids = node.children[:index] + tuple(new_nodes) + node.children[index + 1 :]
        else:
            child = rebuild(node.children[index], remaining[1:])
            kids = node.children[:index] + (child,) + node.children[index + 1 :]
        return normalize(node.with_children(kids))

    return rebuild(query, path)


def _valid_result(result: SqlNode) -> bool:
    if result.kind is not NodeKind.STATEMENT:
        return False
    select = N.get_clause(result, "SELECT")
    if select is None or not any(
        c.kind is not NodeKind.KEYWORD for c in select.children
    ):
        return False
    if not N.is_concrete(result):
        return False
    try:
        return parse_query(serialize(result)) == result
    except ParseError:
        return False


def rewrite(
    query: SqlNode,
    rules: list[Rule],
    schema: SchemaCatalog | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> tuple[SqlNode, RewriteTrace]:
    """Repeatedly apply the highest-priority firing rule until fixpoint,
    a cycle (the repeated query is returned), or the step limit."""
    ordered = sorted(
        (r for r in rules if r.enabled), key=lambda r: (-r.priority, r.id)
    )
    seen = {query}
    steps: list[tuple[int, SqlNode, SqlNode]] = []
    current = query
    for _ in range(max_steps):
        fired = _first_applicable(ordered, current, schema)
        if fired is None:
            return current, RewriteTrace(tuple(steps), "fixpoint")
        rule, result = fired
        steps.append((rule.id, current, result))
        if result in seen:
            return result, RewriteTrace(tuple(steps), "cycle")
        seen.add(result)
        current = result
    if _first_applicable(ordered, current, schema) is None:
        return current, RewriteTrace(tuple(steps), "fixpoint")
    return current, RewriteTrace(tuple(steps), "step_limit")


def _first_applicable(ordered, current, schema):
    for rule in ordered:
        result = apply_rule(rule, current, schema)
        if result is not None:
            return rule, result
    return None
