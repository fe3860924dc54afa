"""Rewriting rules: pattern / constraints --> replacement / actions.

Rule source is a single line with ``-->`` between the match side and the
rewrite side.  Each side may carry a ``/``-separated procedure list:
constraints (``AND``- or ``;``-separated) on the left, actions
(``;``-separated) on the right.  Constraint and action procedures come from
fixed registries of built-ins; user extension is compile-time only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from . import nodes as N
from .errors import (
    MissingSchema,
    ParseError,
    ScopeNotFound,
    UnboundVariable,
    UnknownProcedure,
)
from .nodes import NodeKind, SqlNode
from .parser import parse_pattern
from .schema import SchemaCatalog
from .sqlgen import serialize


@dataclass(frozen=True)
class ConstraintExpr:
    procedure: str
    args: tuple[str, ...]

    def source(self) -> str:
        return f"{self.procedure}({', '.join(self.args)})"


@dataclass(frozen=True)
class ActionExpr:
    procedure: str
    args: tuple[str, ...]

    def source(self) -> str:
        return f"{self.procedure}({', '.join(self.args)})"


@dataclass(frozen=True)
class Rule:
    """One rewriting rule; immutable and safe to share between threads."""

    pattern: SqlNode
    replacement: SqlNode
    constraints: tuple[ConstraintExpr, ...] = ()
    actions: tuple[ActionExpr, ...] = ()
    id: int = 0
    name: str = ""
    priority: int = 0
    workspace: str = "default"
    enabled: bool = True

    def source(self) -> str:
        return serialize_rule(self)

    def with_fields(self, **kwargs) -> "Rule":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# Registries

CONSTRAINT_REGISTRY: dict[str, int] = {
    "UNIQUE": 2,
    "NOT_NULL": 2,
    "IS_COLUMN": 1,
    "IS_LITERAL": 1,
    "IS_STRING": 1,
    "SAME": 2,
}

ACTION_REGISTRY: dict[str, int] = {
    "SUBSTITUTE": 3,
}

_ACTION_CANONICAL = {"SUBSTITUTE": "Substitute"}


# ---------------------------------------------------------------------------
# Rule source parsing

_PROC_LIST_RE = re.compile(
    r"^\s*[A-Za-z_][A-Za-z0-9_]*\s*\([^()]*\)"
    r"(\s*(;|\bAND\b|\band\b)\s*[A-Za-z_][A-Za-z0-9_]*\s*\([^()]*\))*\s*;?\s*$"
)
_PROC_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\)")


def parse_rule(source: str, dialect: str = "generic", **fields) -> Rule:
    """Parse one-line rule source into a validated Rule."""
    arrow = _find_top_level(source, "-->")
    if arrow < 0:
        raise ParseError("rule source must contain '-->'")
    left, right = source[:arrow], source[arrow + 3 :]
    pattern_text, constraints_text = _split_procedures(left)
    replacement_text, actions_text = _split_procedures(right)

    pattern = parse_pattern(pattern_text, dialect)
    replacement = parse_pattern(replacement_text, dialect)
    constraints = tuple(
        ConstraintExpr(name.upper(), args)
        for name, args in _parse_procedure_list(constraints_text)
    )
    actions = tuple(
        ActionExpr(name.upper(), args)
        for name, args in _parse_procedure_list(actions_text)
    )
    rule = Rule(pattern=pattern, replacement=replacement, constraints=constraints,
                actions=actions, **fields)
    validate_rule(rule)
    return rule


def serialize_rule(rule: Rule, dialect: str = "generic") -> str:
    text = serialize(rule.pattern, dialect)
    if rule.constraints:
        text += " / " + " AND ".join(c.source() for c in rule.constraints)
    text += " --> " + serialize(rule.replacement, dialect)
    if rule.actions:
        apretty = [
            ActionExpr(_ACTION_CANONICAL.get(a.procedure, a.procedure), a.args).source()
            for a in rule.actions
        ]
        text += " / " + "; ".join(apretty)
    return text


def validate_rule(rule: Rule) -> None:
    pattern_vars = N.variable_names(rule.pattern)
    for vname in sorted(N.variable_names(rule.replacement)):
        if vname not in pattern_vars:
            raise UnboundVariable(vname, "replacement")
    pattern_level = N.fragment_level(rule.pattern)
    replacement_level = N.fragment_level(rule.replacement)
    if pattern_level != replacement_level and not _level_polymorphic(rule.replacement):
        raise ParseError(
            f"pattern is {pattern_level}-level but replacement "
            f"is {replacement_level}-level"
        )
    for expr in rule.constraints:
        _check_procedure(expr, CONSTRAINT_REGISTRY, pattern_vars)
    for expr in rule.actions:
        _check_procedure(expr, ACTION_REGISTRY, pattern_vars)


def _level_polymorphic(replacement: SqlNode) -> bool:
    """TRUE/FALSE and bare variables serve at either expression or
    predicate level (e.g. ``<a> > 0 --> TRUE``)."""
    root = N.fragment_root(replacement)
    if root.kind in (NodeKind.VAR_ELEM, NodeKind.VAR_SET):
        return True
    return root.kind is NodeKind.LITERAL and root.value in ("TRUE", "FALSE")


def _check_procedure(expr, registry: dict[str, int], pattern_vars: set[str]) -> None:
    arity = registry.get(expr.procedure)
    if arity is None:
        raise UnknownProcedure(f"unknown procedure {expr.procedure}")
    if len(expr.args) != arity:
        raise ParseError(
            f"{expr.procedure} takes {arity} arguments, got {len(expr.args)}"
        )
    for arg in expr.args:
        if _is_variable_arg(arg) and arg not in pattern_vars:
            raise UnboundVariable(arg, expr.procedure)


def _is_variable_arg(arg: str) -> bool:
    return bool(re.match(r"^[A-Za-z][A-Za-z0-9_]*$", arg)) and arg.upper() not in (
        "TRUE", "FALSE", "NULL",
    )


def _find_top_level(text: str, needle: str) -> int:
    """Index of needle outside quotes, or -1."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "'":
            j = i + 1
            while j < n:
                if text[j] == "'" and not text.startswith("''", j):
                    break
                j += 2 if text.startswith("''", j) else 1
            i = j + 1
        elif ch in ('"', "`"):
            j = text.find(ch, i + 1)
            i = (j if j >= 0 else n) + 1
        elif text.startswith(needle, i):
            return i
        else:
            i += 1
    return -1


def _split_procedures(side: str) -> tuple[str, str]:
    """Split '<sql> / <procedure list>'; the procedure part must look like one."""
    best = None
    offset = 0
    text = side
    while True:
        idx = _find_top_level(text, "/")
        if idx < 0:
            break
        candidate = side[offset + idx + 1 :]
        if _PROC_LIST_RE.match(candidate):
            best = offset + idx
        offset += idx + 1
        text = side[offset:]
    if best is None:
        return side.strip(), ""
    return side[:best].strip(), side[best + 1 :].strip()


def _parse_procedure_list(text: str) -> list[tuple[str, tuple[str, ...]]]:
    if not text.strip():
        return []
    out = []
    for match in _PROC_RE.finditer(text):
        name = match.group(1)
        raw_args = match.group(2).strip()
        args = tuple(a.strip() for a in raw_args.split(",")) if raw_args else ()
        out.append((name, args))
    if not out:
        raise ParseError(f"malformed procedure list: {text!r}")
    return out


# ---------------------------------------------------------------------------
# Rule JSON (external interface)


def rule_to_json(rule: Rule, dialect: str = "generic") -> dict:
    return {
        "id": rule.id,
        "name": rule.name,
        "pattern": serialize(rule.pattern, dialect),
        "constraints": [c.source() for c in rule.constraints],
        "replacement": serialize(rule.replacement, dialect),
        "actions": [
            ActionExpr(_ACTION_CANONICAL.get(a.procedure, a.procedure), a.args).source()
            for a in rule.actions
        ],
        "priority": rule.priority,
        "workspace": rule.workspace,
        "enabled": rule.enabled,
    }


def rule_from_json(doc: dict, dialect: str = "generic") -> Rule:
    constraints = tuple(
        ConstraintExpr(name.upper(), args)
        for name, args in _parse_procedure_list("; ".join(doc.get("constraints", [])))
    )
    actions = tuple(
        ActionExpr(name.upper(), args)
        for name, args in _parse_procedure_list("; ".join(doc.get("actions", [])))
    )
    rule = Rule(
        pattern=parse_pattern(doc["pattern"], dialect),
        replacement=parse_pattern(doc["replacement"], dialect),
        constraints=constraints,
        actions=actions,
        id=int(doc.get("id") or 0),
        name=doc.get("name", ""),
        priority=int(doc.get("priority", 0)),
        workspace=doc.get("workspace", "default"),
        enabled=bool(doc.get("enabled", True)),
    )
    validate_rule(rule)
    return rule


# ---------------------------------------------------------------------------
# Constraint evaluation


def eval_constraint(expr: ConstraintExpr, binding, schema: SchemaCatalog | None) -> bool:
    """Evaluate one constraint against a match binding.  Pure."""
    values = [_resolve_arg(arg, binding) for arg in expr.args]
    proc = expr.procedure
    if proc == "UNIQUE":
        info = _schema_column(values, schema, proc)
        return info is not None and info.is_unique
    if proc == "NOT_NULL":
        info = _schema_column(values, schema, proc)
        return info is not None and info.is_not_null
    if proc == "IS_COLUMN":
        node = values[0]
        return isinstance(node, SqlNode) and node.kind in (NodeKind.COLUMN_REF, NodeKind.NAME)
    if proc == "IS_LITERAL":
        node = values[0]
        return isinstance(node, str) or (
            isinstance(node, SqlNode) and node.kind is NodeKind.LITERAL
        )
    if proc == "IS_STRING":
        node = values[0]
        if isinstance(node, str):
            return True
        return (
            isinstance(node, SqlNode)
            and node.kind is NodeKind.LITERAL
            and N.string_content(node) is not None
        )
    if proc == "SAME":
        return _same_identity(values[0]) == _same_identity(values[1])
    raise UnknownProcedure(f"unknown constraint {proc}")


def _resolve_arg(arg: str, binding):
    if not _is_variable_arg(arg):
        if arg.startswith("'") and arg.endswith("'"):
            return arg[1:-1]
        return N.literal(arg)
    value = binding.lookup(arg)
    if value is None:
        raise UnboundVariable(arg, "constraint")
    return value


def _schema_column(values, schema: SchemaCatalog | None, proc: str):
    if schema is None:
        raise MissingSchema(f"{proc} requires a schema catalog")
    table = _table_name(values[0])
    column = _column_name(values[1])
    if table is None or column is None:
        return None
    return schema.column(table, column)


def _table_name(value) -> str | None:
    if isinstance(value, str):
        return value
    if not isinstance(value, SqlNode):
        return None
    if value.kind is NodeKind.TABLE_REF:
        head = value.children[0]
        return head.value if head.kind is NodeKind.NAME else None
    if value.kind is NodeKind.NAME:
        return value.value
    return None


def _column_name(value) -> str | None:
    if isinstance(value, str):
        return value
    if not isinstance(value, SqlNode):
        return None
    if value.kind is NodeKind.NAME:
        return value.value
    if value.kind is NodeKind.COLUMN_REF:
        tail = value.children[-1]
        return tail.value if tail.kind is NodeKind.NAME else None
    return None


def _same_identity(value):
    """Comparison key for SAME: tables compare by table name, ignoring alias."""
    if isinstance(value, str):
        return ("str", value)
    if isinstance(value, SqlNode):
        if value.kind is NodeKind.TABLE_REF:
            head = value.children[0]
            if head.kind is NodeKind.NAME and not head.quote:
                return ("name", head.value.casefold())
            return ("node", head)
        if value.kind is NodeKind.NAME and not value.quote:
            return ("name", value.value.casefold())
        return ("node", value)
    return ("other", value)


# ---------------------------------------------------------------------------
# Action application


def apply_action(expr: ActionExpr, tree: SqlNode, binding) -> SqlNode:
    """Apply one action to an instantiated replacement tree."""
    scope_name, from_name, to_name = _action_parts(expr, binding)
    region = binding.lookup(scope_name)
    if isinstance(region, tuple):
        if not region:
            return tree
        new_tree, found = _rewrite_region_list(tree, list(region), from_name, to_name)
    else:
        new_tree, found = _rewrite_region_node(tree, region, from_name, to_name)
    if not found:
        raise ScopeNotFound(f"scope {scope_name} not present in replacement")
    return new_tree


def substitute_binding(expr: ActionExpr, binding):
    """Rewrite the scope variable's bound value the way apply_action rewrites
    the tree, so chained actions see the current region."""
    scope_name, from_name, to_name = _action_parts(expr, binding)
    region = binding.lookup(scope_name)
    if isinstance(region, tuple):
        new_value = tuple(_swap_qualifier(n, from_name, to_name) for n in region)
        new_sets = dict(binding.set)
        new_sets[scope_name] = new_value
        return type(binding)(binding.element, new_sets, binding.string_parts)
    new_elems = dict(binding.element)
    new_elems[scope_name] = _swap_qualifier(region, from_name, to_name)
    return type(binding)(new_elems, binding.set, binding.string_parts)


def apply_actions(actions, tree: SqlNode, binding) -> SqlNode:
    """Apply actions left to right, keeping scope bindings in sync."""
    for action in actions:
        tree = apply_action(action, tree, binding)
        binding = substitute_binding(action, binding)
    return tree


def _action_parts(expr: ActionExpr, binding):
    if expr.procedure != "SUBSTITUTE":
        raise UnknownProcedure(f"unknown action {expr.procedure}")
    scope_name, from_arg, to_arg = expr.args
    if binding.lookup(scope_name) is None:
        raise UnboundVariable(scope_name, "Substitute")
    from_name = _qualifier_name(_resolve_arg(from_arg, binding))
    to_name = _qualifier_name(_resolve_arg(to_arg, binding))
    if from_name is None or to_name is None:
        raise ScopeNotFound(
            f"Substitute arguments {from_arg}/{to_arg} are not table-like"
        )
    return scope_name, from_name, to_name


def _qualifier_name(value) -> SqlNode | None:
    if isinstance(value, str):
        return N.name(value)
    if not isinstance(value, SqlNode):
        return None
    if value.kind in (NodeKind.TABLE_REF, NodeKind.ALIAS):
        return N.effective_name_node(value)
    if value.kind is NodeKind.NAME:
        return value
    return None


def _swap_qualifier(node: SqlNode, from_name: SqlNode, to_name: SqlNode) -> SqlNode:
    if node.kind is NodeKind.COLUMN_REF and len(node.children) == 2:
        qualifier = node.children[0]
        if qualifier.kind is NodeKind.NAME and N.names_equal(qualifier, from_name):
            node = SqlNode(node.kind, node.value, (to_name, node.children[1]))
    if not node.children:
        return node
    return node.with_children(
        tuple(_swap_qualifier(c, from_name, to_name) for c in node.children)
    )


def _rewrite_region_node(tree, region, from_name, to_name):
    if tree == region:
        return _swap_qualifier(tree, from_name, to_name), True
    found = False
    kids = []
    for child in tree.children:
        new_child, hit = _rewrite_region_node(child, region, from_name, to_name)
        found = found or hit
        kids.append(new_child)
    return (tree.with_children(tuple(kids)) if found else tree), found


def _rewrite_region_list(tree, region: list, from_name, to_name):
    kids = list(tree.children)
    found = False
    span = len(region)
    for start in range(0, len(kids) - span + 1):
        if kids[start : start + span] == region:
            for offset in range(span):
                kids[start + offset] = _swap_qualifier(
                    kids[start + offset], from_name, to_name
                )
            found = True
            break
    rebuilt = []
    for child in kids:
        if not found:
            child, hit = _rewrite_region_list(child, region, from_name, to_name)
            found = found or hit
        rebuilt.append(child)
    return tree.with_children(tuple(rebuilt)), found
