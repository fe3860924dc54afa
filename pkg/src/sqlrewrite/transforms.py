"""Generalizing transformations over rules.

Each transformation maps a rule to strictly more general child rules:

* ``leaf``     - replace one instantiated table/column/value (all of its
                 occurrences on both sides) with a fresh element variable;
                 string values variablize inside literals, producing
                 templates like ``'%<v1>%'``.
* ``subtree``  - replace one complex element appearing identically in
                 pattern and replacement with a fresh element variable.
* ``merge``    - collapse a run of sibling element variables in a
                 spliceable list into one set variable.
* ``drop``     - remove a clause present identically on both sides (or
                 unwrap the last clause), lowering the fragment level.

The last three fire only when the variables they displace are not
referenced anywhere else in the rule.
"""

from __future__ import annotations

from itertools import chain

from . import nodes as N
from .nodes import NodeKind, SqlNode
from .rules import Rule

TRANSFORM_KINDS = ("leaf", "subtree", "merge", "drop")

_COMPLEX_KINDS = frozenset(
    {NodeKind.FUNC_CALL, NodeKind.BINARY_OP, NodeKind.UNARY_OP,
     NodeKind.SUBQUERY, NodeKind.CONJUNCTION, NodeKind.EXPR_LIST}
)

_LIST_PARENTS = frozenset({NodeKind.CLAUSE, NodeKind.CONJUNCTION})


# ---------------------------------------------------------------------------
# Canonical variable naming


def canonicalize_variables(rule: Rule) -> Rule:
    """Rename variables v1, v2, ... in order of first occurrence so that
    structurally identical rules from different seeds deduplicate."""
    mapping: dict[str, str] = {}
    for node in chain(rule.pattern.walk(), rule.replacement.walk()):
        if node.kind in (NodeKind.VAR_ELEM, NodeKind.VAR_SET):
            mapping.setdefault(node.value, f"v{len(mapping) + 1}")
    if all(old == new for old, new in mapping.items()):
        return rule
    return rule.with_fields(
        pattern=_rename(rule.pattern, mapping),
        replacement=_rename(rule.replacement, mapping),
    )


def _rename(tree: SqlNode, mapping: dict[str, str]) -> SqlNode:
    if tree.kind in (NodeKind.VAR_ELEM, NodeKind.VAR_SET):
        return SqlNode(tree.kind, mapping.get(tree.value, tree.value))
    if not tree.children:
        return tree
    return tree.with_children(tuple(_rename(c, mapping) for c in tree.children))


def rule_key(rule: Rule) -> tuple[SqlNode, SqlNode]:
    canonical = canonicalize_variables(rule)
    return (canonical.pattern, canonical.replacement)


def _fresh_name(rule: Rule) -> str:
    used = N.variable_names(rule.pattern) | N.variable_names(rule.replacement)
    index = len(used) + 1
    while f"v{index}" in used:
        index += 1
    return f"v{index}"


# ---------------------------------------------------------------------------
# Leaf targets


def leaf_targets(rule: Rule) -> list[tuple]:
    """Distinct instantiated table/column/value leaves, pattern order."""
    seen = set()
    targets = []
    for node in N.fragment_root(rule.pattern).walk():
        key = target = None
        if node.kind is NodeKind.TABLE_REF and N.is_concrete(node):
            key, target = ("table", node), ("table", node)
        elif node.kind is NodeKind.COLUMN_REF and N.is_concrete(node):
            key, target = ("column", node), ("node", node)
        elif node.kind is NodeKind.LITERAL:
            content = N.string_content(node)
            if content is not None:
                if content:
                    key, target = ("string", content), ("string", content)
            else:
                key, target = ("value", node), ("node", node)
        if key is not None and key not in seen:
            seen.add(key)
            targets.append(target)
    return targets


def variablize_leaf(rule: Rule, target: tuple, canonical: bool = True) -> Rule | None:
    replacer = leaf_replacer(target, _fresh_name(rule))
    return _finish(
        rule, replacer(rule.pattern), replacer(rule.replacement), canonical
    )


def leaf_replacer(target: tuple, var_name: str):
    """Tree transformer performing one leaf variablization."""
    var = N.var_elem(var_name)
    kind, payload = target
    if kind == "table":
        return lambda tree: _replace_table(tree, payload, var)
    if kind == "node":
        return lambda tree: _replace_exact(tree, payload, var)
    return lambda tree: _replace_string(tree, payload, var_name)


def _replace_exact(tree: SqlNode, target: SqlNode, var: SqlNode) -> SqlNode:
    if tree == target:
        return var
    if not tree.children:
        return tree
    return tree.with_children(
        tuple(_replace_exact(c, target, var) for c in tree.children)
    )


def _replace_table(tree: SqlNode, table: SqlNode, var: SqlNode) -> SqlNode:
    effective = N.effective_name_node(table)

    def go(node: SqlNode) -> SqlNode:
        if node == table:
            return var
        if (
            node.kind is NodeKind.COLUMN_REF
            and len(node.children) == 2
            and node.children[0].kind is NodeKind.NAME
            and N.names_equal(node.children[0], effective)
        ):
            return node.with_children((var, node.children[1]))
        if not node.children:
            return node
        return node.with_children(tuple(go(c) for c in node.children))

    return go(tree)


def _replace_string(tree: SqlNode, content: str, var_name: str) -> SqlNode:
    def go(node: SqlNode) -> SqlNode:
        if node.kind is NodeKind.LITERAL:
            full = N.string_content(node)
            if full is not None and content in full:
                segments: list[SqlNode] = []
                pieces = full.split(content)
                for index, piece in enumerate(pieces):
                    if index:
                        segments.append(N.var_elem(var_name))
                    if piece:
                        segments.append(N.text_segment(piece))
                return N.string_template(segments)
            return node
        if not node.children:
            return node
        return node.with_children(tuple(go(c) for c in node.children))

    return go(tree)


# ---------------------------------------------------------------------------
# Subtree targets


def subtree_targets(rule: Rule) -> list[SqlNode]:
    pattern_root = N.fragment_root(rule.pattern)
    replacement_nodes = set(N.fragment_root(rule.replacement).walk())
    occurrences = _variable_occurrences(rule)
    seen = set()
    targets = []
    for node in pattern_root.walk():
        if node.kind not in _COMPLEX_KINDS or node is pattern_root:
            continue
        if node in seen or node == pattern_root:
            continue
        seen.add(node)
        if node not in replacement_nodes:
            continue
        if not _variables_contained(rule, node, occurrences):
            continue
        targets.append(node)
    return targets


def _variable_occurrences(rule: Rule) -> dict[str, int]:
    counts: dict[str, int] = {}
    for node in chain(rule.pattern.walk(), rule.replacement.walk()):
        if node.kind in (NodeKind.VAR_ELEM, NodeKind.VAR_SET):
            counts[node.value] = counts.get(node.value, 0) + 1
    return counts


def _variables_contained(rule: Rule, subtree: SqlNode, total: dict[str, int]) -> bool:
    """No variable inside the subtree may also occur outside it."""
    inner: dict[str, int] = {}
    for node in subtree.walk():
        if node.kind in (NodeKind.VAR_ELEM, NodeKind.VAR_SET):
            inner[node.value] = inner.get(node.value, 0) + 1
    if not inner:
        return True
    copies = _count_occurrences(rule.pattern, subtree) + _count_occurrences(
        rule.replacement, subtree
    )
    return all(total[name] == count * copies for name, count in inner.items())


def _count_occurrences(tree: SqlNode, target: SqlNode) -> int:
    return sum(1 for node in tree.walk() if node == target)


def variablize_subtree(rule: Rule, subtree: SqlNode, canonical: bool = True) -> Rule | None:
    var = N.var_elem(_fresh_name(rule))
    return _finish(
        rule,
        _replace_exact(rule.pattern, subtree, var),
        _replace_exact(rule.replacement, subtree, var),
        canonical,
    )


# ---------------------------------------------------------------------------
# Merge targets


def merge_targets(rule: Rule) -> list[tuple[str, ...]]:
    """Runs (length >= 2) of sibling element variables eligible to merge."""
    occurrences = _variable_occurrences(rule)
    runs = []
    seen = set()
    for run in _find_runs(N.fragment_root(rule.pattern)):
        names = tuple(node.value for node in run)
        if names in seen or len(set(names)) != len(names):
            continue
        seen.add(names)
        pattern_count = sum(
            _count_var(rule.pattern, name) for name in names
        )
        if pattern_count != len(names):
            continue  # some run variable occurs elsewhere in the pattern
        replacement_counts = [_count_var(rule.replacement, name) for name in names]
        if all(c == 0 for c in replacement_counts):
            runs.append(names)
        elif all(c == 1 for c in replacement_counts) and _find_run_in(
            N.fragment_root(rule.replacement), names
        ):
            runs.append(names)
    return runs


def _count_var(tree: SqlNode, name: str) -> int:
    return sum(
        1
        for node in tree.walk()
        if node.kind in (NodeKind.VAR_ELEM, NodeKind.VAR_SET) and node.value == name
    )


def _find_runs(tree: SqlNode):
    for node in tree.walk():
        if node.kind not in _LIST_PARENTS:
            continue
        run: list[SqlNode] = []
        for child in node.children:
            if child.kind is NodeKind.VAR_ELEM:
                run.append(child)
            else:
                if len(run) >= 2:
                    yield tuple(run)
                run = []
        if len(run) >= 2:
            yield tuple(run)


def _find_run_in(tree: SqlNode, names: tuple[str, ...]) -> bool:
    target = tuple(N.var_elem(name) for name in names)
    for node in tree.walk():
        if node.kind in _LIST_PARENTS:
            kids = node.children
            for start in range(len(kids) - len(target) + 1):
                if kids[start : start + len(target)] == target:
                    return True
    return False


def merge_variables(rule: Rule, names: tuple[str, ...], canonical: bool = True) -> Rule | None:
    var = N.var_set(_fresh_name(rule))
    target = tuple(N.var_elem(name) for name in names)

    def go(node: SqlNode) -> SqlNode:
        if node.kind in _LIST_PARENTS:
            kids = list(node.children)
            for start in range(len(kids) - len(target) + 1):
                if tuple(kids[start : start + len(target)]) == target:
                    kids[start : start + len(target)] = [var]
                    return node.with_children(
                        tuple(go(c) for c in kids)
                    )
        if not node.children:
            return node
        return node.with_children(tuple(go(c) for c in node.children))

    return _finish(rule, go(rule.pattern), go(rule.replacement), canonical)


# ---------------------------------------------------------------------------
# Drop targets


def drop_targets(rule: Rule) -> list[str]:
    """Clause names droppable from both sides, plus '<unwrap>' when both
    sides are down to one clause of the same kind."""
    p_root = N.fragment_root(rule.pattern)
    r_root = N.fragment_root(rule.replacement)
    if p_root.kind is not NodeKind.STATEMENT or r_root.kind is not NodeKind.STATEMENT:
        return []
    p_clauses = {c.value: c for c in p_root.children}
    r_clauses = {c.value: c for c in r_root.children}
    targets = []
    for cname in N.CLAUSE_ORDER:
        if cname not in p_clauses or cname not in r_clauses:
            continue
        if p_clauses[cname] != r_clauses[cname]:
            continue
        if len(p_clauses) <= 1:
            continue
        clause_vars = N.variable_names(p_clauses[cname])
        outside = set()
        for other, clause in chain(p_clauses.items(), r_clauses.items()):
            if other != cname:
                outside |= N.variable_names(clause)
        if clause_vars & outside:
            continue
        targets.append(cname)
    if _unwrappable(p_root, r_root):
        targets.append("<unwrap>")
    return targets


def _unwrappable(p_root: SqlNode, r_root: SqlNode) -> bool:
    if len(p_root.children) != 1 or len(r_root.children) != 1:
        return False
    p_clause, r_clause = p_root.children[0], r_root.children[0]
    if p_clause.value != r_clause.value:
        return False
    if p_clause.value in ("WHERE", "HAVING"):
        return True
    if p_clause.value == "SELECT":
        return (
            len(p_clause.children) == 1
            and len(r_clause.children) == 1
            and p_clause.children[0].kind
            not in (NodeKind.KEYWORD, NodeKind.STAR, NodeKind.ALIAS, NodeKind.VAR_SET)
            and r_clause.children[0].kind
            not in (NodeKind.KEYWORD, NodeKind.STAR, NodeKind.ALIAS, NodeKind.VAR_SET)
        )
    return False


def drop_branch(rule: Rule, target: str, canonical: bool = True) -> Rule | None:
    p_root = N.fragment_root(rule.pattern)
    r_root = N.fragment_root(rule.replacement)
    if target == "<unwrap>":
        p_inner = p_root.children[0].children[0]
        r_inner = r_root.children[0].children[0]
        level = N.classify_expression_level(p_inner)
        return _finish(
            rule, N.fragment(level, p_inner), N.fragment(level, r_inner), canonical
        )
    new_p = tuple(c for c in p_root.children if c.value != target)
    new_r = tuple(c for c in r_root.children if c.value != target)
    return _finish(
        rule,
        N.fragment(N.LEVEL_STATEMENT, SqlNode(NodeKind.STATEMENT, None, new_p)),
        N.fragment(N.LEVEL_STATEMENT, SqlNode(NodeKind.STATEMENT, None, new_r)),
        canonical,
    )


# ---------------------------------------------------------------------------
# Entry points


def _finish(
    rule: Rule, pattern: SqlNode, replacement: SqlNode, canonical: bool = True
) -> Rule | None:
    if N.fragment_root(pattern).kind is NodeKind.VAR_ELEM:
        return None  # a bare-variable pattern matches anything
    child = rule.with_fields(pattern=pattern, replacement=replacement)
    if not _has_concrete_element(child):
        return None
    return canonicalize_variables(child) if canonical else child


def _has_concrete_element(rule: Rule) -> bool:
    from .mdl import rule_counts

    return rule_counts(rule)[2] >= 1


def transform(rule: Rule, kind: str) -> list[Rule]:
    """All distinct one-hop children under one transformation kind."""
    if kind == "leaf":
        children = (variablize_leaf(rule, t) for t in leaf_targets(rule))
    elif kind == "subtree":
        children = (variablize_subtree(rule, t) for t in subtree_targets(rule))
    elif kind == "merge":
        children = (merge_variables(rule, t) for t in merge_targets(rule))
    elif kind == "drop":
        children = (drop_branch(rule, t) for t in drop_targets(rule))
    else:
        raise ValueError(f"unknown transformation {kind!r}")
    out = []
    seen = set()
    for child in children:
        if child is None:
            continue
        key = rule_key(child)
        if key in seen or key == rule_key(rule):
            continue
        seen.add(key)
        out.append(child)
    return out


def all_children(rule: Rule) -> list[tuple[str, Rule]]:
    """One-hop fan-out across all four transformation kinds."""
    out = []
    seen = set()
    for kind in TRANSFORM_KINDS:
        for child in transform(rule, kind):
            key = rule_key(child)
            if key in seen:
                continue
            seen.add(key)
            out.append((kind, child))
    return out
