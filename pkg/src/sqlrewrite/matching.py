"""Pattern matching and replacement instantiation.

The matcher compares a pattern tree node by node against a query tree.
Element variables bind single nodes, set variables absorb sibling lists,
string templates match literal content with fixed-text anchors, and
commutative lists (FROM tables, AND conjuncts) are matched with
backtracking over assignments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from . import nodes as N
from .errors import MatchComplexityError, UnboundVariable
from .nodes import NodeKind, SqlNode

# Node kinds an element variable may bind to.
_NOT_BINDABLE = frozenset(
    {NodeKind.KEYWORD, NodeKind.CLAUSE, NodeKind.STATEMENT, NodeKind.STAR,
     NodeKind.VAR_SET, NodeKind.TEXT, NodeKind.FRAGMENT}
)

_COMMUTATIVE_CAP = 12


@dataclass(frozen=True)
class Binding:
    """Variable assignments produced by a successful match."""

    element: dict[str, SqlNode] = field(default_factory=dict)
    set: dict[str, tuple[SqlNode, ...]] = field(default_factory=dict)
    string_parts: dict[str, object] = field(default_factory=dict)

    def lookup(self, name: str):
        if name in self.element:
            return self.element[name]
        if name in self.set:
            return self.set[name]
        return self.string_parts.get(name)

    def bind_element(self, name: str, node: SqlNode) -> "Binding | None":
        if name in self.set or name in self.string_parts:
            return None
        existing = self.element.get(name)
        if existing is not None:
            merged = _unify(existing, node)
            if merged is None:
                return None
            if merged is existing:
                return self
            node = merged
        new = dict(self.element)
        new[name] = node
        return Binding(new, self.set, self.string_parts)

    def bind_set(self, name: str, items: tuple[SqlNode, ...]) -> "Binding | None":
        if name in self.element or name in self.string_parts:
            return None
        existing = self.set.get(name)
        if existing is not None:
            return self if existing == items else None
        new = dict(self.set)
        new[name] = items
        return Binding(self.element, new, self.string_parts)

    def bind_string(self, name: str, value) -> "Binding | None":
        if name in self.element or name in self.set:
            return None
        existing = self.string_parts.get(name)
        if existing is not None:
            return self if existing == value else None
        new = dict(self.string_parts)
        new[name] = value
        return Binding(self.element, self.set, new)


def _unify(existing: SqlNode, new: SqlNode) -> SqlNode | None:
    """Merge two bindings of one variable; table refs unify with their
    effective name so ``<t>`` can appear both in FROM and as a qualifier."""
    if existing == new:
        return existing
    if existing.kind is NodeKind.TABLE_REF and new.kind is NodeKind.NAME:
        if N.names_equal(N.effective_name_node(existing), new):
            return existing
        return None
    if existing.kind is NodeKind.NAME and new.kind is NodeKind.TABLE_REF:
        if N.names_equal(existing, N.effective_name_node(new)):
            return new
        return None
    return None


# ---------------------------------------------------------------------------
# Node matching


def match_node(pattern: SqlNode, query: SqlNode, binding: Binding) -> Binding | None:
    pk = pattern.kind
    if pk is NodeKind.FRAGMENT:
        return match_node(pattern.children[0], query, binding)
    if pk is NodeKind.VAR_ELEM:
        if query.kind in _NOT_BINDABLE:
            return None
        return binding.bind_element(pattern.value, query)
    if pk is NodeKind.STRING_TEMPLATE:
        return _match_template(pattern, query, binding)

    qk = query.kind
    if pk is NodeKind.STATEMENT and qk is NodeKind.STATEMENT:
        return _match_statement(pattern, query, binding)
    if pk is NodeKind.CONJUNCTION and qk is not NodeKind.CONJUNCTION:
        # An AND-pattern can match a single predicate as a one-item list.
        if pattern.value == "AND" and _is_predicate_node(query):
            return _match_list(
                pattern.children, (query,), binding, commutative=True
            )
        return None
    if pk is not qk:
        return None
    if pk is NodeKind.NAME:
        return binding if N.names_equal(pattern, query) else None
    if pattern.value != query.value and pk is not NodeKind.CLAUSE:
        return None
    if pk is NodeKind.CLAUSE:
        if pattern.value != query.value:
            return None
        return _match_clause(pattern, query, binding)
    if pk is NodeKind.COLUMN_REF or pk is NodeKind.TABLE_REF:
        return _match_name_parts(pattern, query, binding)
    if pk is NodeKind.CONJUNCTION:
        return _match_list(
            pattern.children, query.children, binding,
            commutative=pattern.value == "AND",
        )
    if pk in (NodeKind.LITERAL, NodeKind.KEYWORD, NodeKind.RAW, NodeKind.TEXT):
        return binding  # value already compared
    if pk is NodeKind.FUNC_CALL or pk is NodeKind.EXPR_LIST:
        return _match_list(pattern.children, query.children, binding, commutative=False)
    # Fixed-arity nodes: BINARY_OP, UNARY_OP, SUBQUERY, ALIAS, JOIN, SORT, STAR
    if len(pattern.children) != len(query.children):
        return None
    for p_child, q_child in zip(pattern.children, query.children):
        binding = match_node(p_child, q_child, binding)
        if binding is None:
            return None
    return binding


def _is_predicate_node(node: SqlNode) -> bool:
    return N.classify_expression_level(node) == N.LEVEL_PREDICATE or node.kind in (
        NodeKind.VAR_ELEM,
    )


def _match_name_parts(pattern: SqlNode, query: SqlNode, binding: Binding) -> Binding | None:
    if len(pattern.children) != len(query.children):
        return None
    for p_part, q_part in zip(pattern.children, query.children):
        if p_part.kind is NodeKind.VAR_ELEM:
            binding = binding.bind_element(p_part.value, q_part)
        elif p_part.kind is NodeKind.NAME and q_part.kind is NodeKind.NAME:
            binding = binding if N.names_equal(p_part, q_part) else None
        elif p_part.kind is q_part.kind and p_part == q_part:
            binding = binding
        else:
            return None
        if binding is None:
            return None
    return binding


def _match_statement(pattern: SqlNode, query: SqlNode, binding: Binding) -> Binding | None:
    # A statement pattern constrains the clauses it mentions; clauses the
    # pattern leaves out pass through the rewrite untouched.
    q_clauses = {c.value: c for c in query.children}
    for p_clause in pattern.children:
        q_clause = q_clauses.get(p_clause.value)
        if q_clause is None:
            binding = _bind_clause_empty(p_clause, binding)
        else:
            binding = _match_clause(p_clause, q_clause, binding)
        if binding is None:
            return None
    return binding


def _bind_clause_empty(p_clause: SqlNode, binding: Binding) -> Binding | None:
    """A clause whose items are all set variables may match an absent clause."""
    if not p_clause.children:
        return binding
    if all(c.kind is NodeKind.VAR_SET for c in p_clause.children):
        for item in p_clause.children:
            binding = binding.bind_set(item.value, ())
            if binding is None:
                return None
        return binding
    return None


def _match_clause(pattern: SqlNode, query: SqlNode, binding: Binding) -> Binding | None:
    commutative = query.commutative
    if pattern.value == "SELECT" and any(
        c.kind is NodeKind.VAR_SET for c in pattern.children
    ):
        commutative = True
    return _match_list(pattern.children, query.children, binding, commutative)


# ---------------------------------------------------------------------------
# List matching


def _match_list(
    p_items: tuple[SqlNode, ...],
    q_items: tuple[SqlNode, ...],
    binding: Binding,
    commutative: bool,
) -> Binding | None:
    has_set = any(p.kind is NodeKind.VAR_SET for p in p_items)
    if not commutative:
        if has_set:
            return _match_sequence_with_sets(p_items, q_items, binding)
        if len(p_items) != len(q_items):
            return None
        for p, q in zip(p_items, q_items):
            binding = match_node(p, q, binding)
            if binding is None:
                return None
        return binding
    return _match_commutative(p_items, q_items, binding)


def _match_sequence_with_sets(p_items, q_items, binding) -> Binding | None:
    """Ordered list with set variables absorbing contiguous spans."""

    def go(pi: int, qi: int, bnd: Binding) -> Binding | None:
        if pi == len(p_items):
            return bnd if qi == len(q_items) else None
        head = p_items[pi]
        if head.kind is NodeKind.VAR_SET:
            for take in range(0, len(q_items) - qi + 1):
                nxt = bnd.bind_set(head.value, tuple(q_items[qi : qi + take]))
                if nxt is None:
                    continue
                result = go(pi + 1, qi + take, nxt)
                if result is not None:
                    return result
            return None
        if qi >= len(q_items):
            return None
        nxt = match_node(head, q_items[qi], bnd)
        if nxt is None:
            return None
        return go(pi + 1, qi + 1, nxt)

    return go(0, 0, binding)


def _match_commutative(p_items, q_items, binding) -> Binding | None:
    fixed = [p for p in p_items if p.kind is not NodeKind.VAR_SET]
    sets = [p for p in p_items if p.kind is NodeKind.VAR_SET]
    if len(fixed) >= 2 and len(q_items) > _COMMUTATIVE_CAP:
        raise MatchComplexityError(
            f"commutative list of {len(q_items)} items exceeds the cap of "
            f"{_COMMUTATIVE_CAP}"
        )
    if not sets and len(fixed) != len(q_items):
        return None
    if len(fixed) > len(q_items):
        return None

    used = [False] * len(q_items)

    def go(fi: int, bnd: Binding) -> Binding | None:
        if fi == len(fixed):
            leftover = tuple(q for q, taken in zip(q_items, used) if not taken)
            if not sets:
                return bnd if not leftover else None
            nxt = bnd.bind_set(sets[0].value, leftover)
            if nxt is None:
                return None
            for extra in sets[1:]:
                nxt = nxt.bind_set(extra.value, ())
                if nxt is None:
                    return None
            return nxt
        for qi in range(len(q_items)):
            if used[qi]:
                continue
            nxt = match_node(fixed[fi], q_items[qi], bnd)
            if nxt is None:
                continue
            used[qi] = True
            result = go(fi + 1, nxt)
            if result is not None:
                return result
            used[qi] = False
        return None

    return go(0, binding)


# ---------------------------------------------------------------------------
# String templates


def _match_template(pattern: SqlNode, query: SqlNode, binding: Binding) -> Binding | None:
    if query.kind is NodeKind.STRING_TEMPLATE:
        return _match_template_atoms(pattern, query, binding)
    content = N.string_content(query)
    if content is None:
        return None
    return _match_template_text(pattern.children, content, binding)


def _match_template_atoms(pattern, query, binding) -> Binding | None:
    if len(pattern.children) != len(query.children):
        return None
    for p_seg, q_seg in zip(pattern.children, query.children):
        if p_seg.kind is NodeKind.TEXT:
            if q_seg.kind is not NodeKind.TEXT or p_seg.value != q_seg.value:
                return None
        else:
            value = q_seg if q_seg.kind is NodeKind.VAR_ELEM else q_seg.value
            binding = binding.bind_string(p_seg.value, value)
            if binding is None:
                return None
    return binding


def _match_template_text(segments, content: str, binding: Binding) -> Binding | None:
    """Greedy left-to-right anchor matching of template segments."""

    def go(si: int, pos: int, bnd: Binding) -> Binding | None:
        if si == len(segments):
            return bnd if pos == len(content) else None
        seg = segments[si]
        if seg.kind is NodeKind.TEXT:
            if content.startswith(seg.value, pos):
                return go(si + 1, pos + len(seg.value), bnd)
            return None
        # Variable segment: consume greedily, backing off until the rest fits.
        for end in range(len(content), pos - 1, -1):
            nxt = bnd.bind_string(seg.value, content[pos:end])
            if nxt is None:
                continue
            result = go(si + 1, end, nxt)
            if result is not None:
                return result
        return None

    return go(0, 0, binding)


# ---------------------------------------------------------------------------
# Site enumeration


def candidate_sites(query: SqlNode, level: str) -> Iterator[tuple[tuple[int, ...], SqlNode]]:
    """Yield (path, node) pairs at the requested syntactic level, pre-order."""

    def visit(node: SqlNode, path: tuple[int, ...], role: str | None):
        if role == level:
            yield path, node
        for index, child in enumerate(node.children):
            child_role = _child_role(node, index, child)
            yield from visit(child, path + (index,), child_role)

    if query.kind is NodeKind.STATEMENT:
        root_role = N.LEVEL_STATEMENT
    elif query.kind in (NodeKind.CLAUSE, NodeKind.FRAGMENT):
        root_role = None
    else:
        # Fragment roots (rule patterns used as match subjects) are
        # themselves sites at their own level.
        root_role = N.classify_expression_level(query)
    yield from visit(query, (), root_role)


def _child_role(node: SqlNode, index: int, child: SqlNode) -> str | None:
    kind = node.kind
    if kind is NodeKind.SUBQUERY:
        return N.LEVEL_STATEMENT
    if kind is NodeKind.CLAUSE:
        if node.value in ("WHERE", "HAVING"):
            return N.LEVEL_PREDICATE
        if node.value in ("GROUP BY", "ORDER BY", "LIMIT"):
            return N.LEVEL_EXPRESSION
        if node.value == "SELECT":
            return N.LEVEL_EXPRESSION if child.kind not in (
                NodeKind.KEYWORD, NodeKind.STAR, NodeKind.ALIAS,
            ) else None
        return None  # FROM items are table references
    if kind is NodeKind.CONJUNCTION:
        return N.LEVEL_PREDICATE
    if kind is NodeKind.UNARY_OP:
        if node.value == "NOT":
            return N.LEVEL_PREDICATE
        if node.value == "EXISTS":
            return None
        return N.LEVEL_EXPRESSION
    if kind is NodeKind.BINARY_OP:
        return N.LEVEL_EXPRESSION
    if kind is NodeKind.FUNC_CALL:
        return N.LEVEL_EXPRESSION if child.kind is not NodeKind.KEYWORD else None
    if kind is NodeKind.ALIAS:
        return N.LEVEL_EXPRESSION if index == 0 else None
    if kind is NodeKind.SORT:
        return N.LEVEL_EXPRESSION
    if kind is NodeKind.EXPR_LIST:
        return N.LEVEL_EXPRESSION
    if kind is NodeKind.JOIN:
        return N.LEVEL_PREDICATE if index == 2 else None
    return None


def find_match(pattern: SqlNode, query: SqlNode) -> tuple[tuple[int, ...], Binding] | None:
    """First (site path, binding) for the pattern, top-down leftmost-first."""
    level = N.fragment_level(pattern)
    root = N.fragment_root(pattern)
    for path, site in candidate_sites(query, level):
        binding = match_node(root, site, Binding())
        if binding is not None:
            return path, binding
    return None


def match(pattern: SqlNode, query: SqlNode) -> Binding | None:
    """Binding of the first matching site, or None."""
    found = find_match(pattern, query)
    return found[1] if found else None


# ---------------------------------------------------------------------------
# Instantiation


def instantiate(replacement: SqlNode, binding: Binding) -> SqlNode:
    """Concrete tree from a replacement pattern and a binding."""
    parts = instantiate_list(replacement, binding)
    if len(parts) == 1:
        return parts[0]
    if not parts:
        raise UnboundVariable("<empty>", "replacement instantiated to nothing")
    return normalize(N.conjunction("AND", parts))


def instantiate_list(node: SqlNode, binding: Binding) -> list[SqlNode]:
    """Instantiate; set variables splice, so a node may become 0..n nodes."""
    kind = node.kind
    if kind is NodeKind.FRAGMENT:
        return instantiate_list(node.children[0], binding)
    if kind is NodeKind.VAR_ELEM:
        value = binding.element.get(node.value)
        if value is None:
            raise UnboundVariable(node.value, "replacement")
        return [value]
    if kind is NodeKind.VAR_SET:
        values = binding.set.get(node.value)
        if values is None:
            raise UnboundVariable(node.value, "replacement")
        return list(values)
    if kind is NodeKind.STRING_TEMPLATE:
        return [_instantiate_template(node, binding)]
    if kind is NodeKind.COLUMN_REF:
        return [_instantiate_column_ref(node, binding)]
    if not node.children:
        return [node]
    kids: list[SqlNode] = []
    for child in node.children:
        kids.extend(instantiate_list(child, binding))
    return [normalize(node.with_children(tuple(kids)))]


def _instantiate_template(node: SqlNode, binding: Binding) -> SqlNode:
    parts: list[str] = []
    segments: list[SqlNode] = []
    concrete = True
    for seg in node.children:
        if seg.kind is NodeKind.TEXT:
            parts.append(seg.value)
            segments.append(seg)
            continue
        value = binding.string_parts.get(seg.value)
        if value is None:
            raise UnboundVariable(seg.value, "string template")
        if isinstance(value, str):
            parts.append(value)
            segments.append(N.text_segment(value))
        else:
            concrete = False
            segments.append(value)
    if concrete:
        return N.make_string_literal("".join(parts))
    return N.string_template(_merge_text_segments(segments))


def _merge_text_segments(segments: list[SqlNode]) -> list[SqlNode]:
    merged: list[SqlNode] = []
    for seg in segments:
        if (
            seg.kind is NodeKind.TEXT
            and merged
            and merged[-1].kind is NodeKind.TEXT
        ):
            merged[-1] = N.text_segment(merged[-1].value + seg.value)
        else:
            merged.append(seg)
    return merged


def _instantiate_column_ref(node: SqlNode, binding: Binding) -> SqlNode:
    parts: list[SqlNode] = []
    for index, part in enumerate(node.children):
        if part.kind is NodeKind.VAR_ELEM:
            value = binding.element.get(part.value)
            if value is None:
                raise UnboundVariable(part.value, "column reference")
            if index == 0 and len(node.children) == 2 and value.kind in (
                NodeKind.TABLE_REF, NodeKind.ALIAS,
            ):
                value = N.effective_name_node(value)
            elif value.kind is NodeKind.COLUMN_REF and len(value.children) == 1:
                value = value.children[0]
            parts.append(value)
        else:
            parts.append(part)
    return node.with_children(tuple(parts))


# ---------------------------------------------------------------------------
# Post-splice normalization


def normalize(node: SqlNode) -> SqlNode:
    """Flatten nested conjunctions, unwrap singletons, drop empty clauses."""
    if node.kind is NodeKind.CLAUSE and node.value in ("WHERE", "HAVING"):
        # These clauses hold exactly one predicate; spliced lists AND-join.
        if len(node.children) > 1:
            return node.with_children(
                (normalize(N.conjunction("AND", node.children)),)
            )
        return node
    if node.kind is NodeKind.CONJUNCTION:
        flat: list[SqlNode] = []
        for child in node.children:
            if child.kind is NodeKind.CONJUNCTION and child.value == node.value:
                flat.extend(child.children)
            else:
                flat.append(child)
        if len(flat) == 1:
            return flat[0]
        return node.with_children(tuple(flat))
    if node.kind is NodeKind.STATEMENT:
        keep = tuple(
            c for c in node.children
            if c.children or c.value not in ("WHERE", "HAVING", "GROUP BY",
                                             "ORDER BY", "LIMIT", "FROM")
        )
        if len(keep) != len(node.children):
            return node.with_children(keep)
    return node


def deep_normalize(node: SqlNode) -> SqlNode:
    kids = tuple(deep_normalize(c) for c in node.children)
    if kids != node.children:
        node = node.with_children(kids)
    return normalize(node)
