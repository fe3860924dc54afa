"""Canonical SQL syntax tree.

Every query, rule pattern, and rule replacement in the system is an immutable
``SqlNode`` tree.  Queries parsed from plain SQL are *concrete* trees; pattern
trees may additionally contain element variables (``<x>``), set variables
(``<<x>>``), and string templates (``'%<y>%'``).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator


class NodeKind(Enum):
    STATEMENT = "statement"
    CLAUSE = "clause"
    TABLE_REF = "table_ref"
    COLUMN_REF = "column_ref"
    NAME = "name"
    LITERAL = "literal"
    FUNC_CALL = "func_call"
    BINARY_OP = "binary_op"
    UNARY_OP = "unary_op"
    CONJUNCTION = "conjunction"
    SUBQUERY = "subquery"
    STAR = "star"
    KEYWORD = "keyword"
    ALIAS = "alias"
    JOIN = "join"
    SORT = "sort"
    EXPR_LIST = "expr_list"
    RAW = "raw"
    VAR_ELEM = "var_elem"
    VAR_SET = "var_set"
    STRING_TEMPLATE = "string_template"
    TEXT = "text"
    FRAGMENT = "fragment"


# Canonical statement clause order; also the serialization order.
CLAUSE_ORDER = ("SELECT", "FROM", "WHERE", "GROUP BY", "HAVING", "ORDER BY", "LIMIT")

VARIABLE_KINDS = frozenset(
    {NodeKind.VAR_ELEM, NodeKind.VAR_SET, NodeKind.STRING_TEMPLATE}
)

# Fragment levels, most enclosing first.
LEVEL_STATEMENT = "statement"
LEVEL_PREDICATE = "predicate"
LEVEL_EXPRESSION = "expression"

PREDICATE_OPS = frozenset(
    {
        "=", "<>", "!=", "<", "<=", ">", ">=",
        "LIKE", "NOT LIKE", "ILIKE", "NOT ILIKE", "IN", "NOT IN",
        "IS DISTINCT FROM", "IS NOT DISTINCT FROM",
    }
)
PREDICATE_UNARY_OPS = frozenset({"NOT", "IS NULL", "IS NOT NULL", "EXISTS"})


@dataclass(frozen=True, eq=False, repr=False)
class SqlNode:
    """One node of the canonical tree.

    ``value`` carries the node's token payload (identifier text, operator
    symbol, raw lexeme, clause name, variable name).  ``quote`` is set on NAME
    nodes quoted in the source (``"`` or `` ` ``); unquoted names compare
    case-insensitively, quoted names compare exactly.
    """

    kind: NodeKind
    value: str | None = None
    children: tuple["SqlNode", ...] = ()
    quote: str | None = None

    def _structural_key(self):
        cached = self.__dict__.get("_key")
        if cached is None:
            value = self.value
            if self.kind is NodeKind.NAME and self.quote is None and value:
                value = value.casefold()
            cached = (
                self.kind,
                value,
                self.quote,
                tuple(child._structural_key() for child in self.children),
            )
            object.__setattr__(self, "_key", cached)
        return cached

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, SqlNode):
            return NotImplemented
        return self._structural_key() == other._structural_key()

    def __hash__(self) -> int:
        cached = self.__dict__.get("_hash")
        if cached is None:
            cached = hash(self._structural_key())
            object.__setattr__(self, "_hash", cached)
        return cached

    def __repr__(self) -> str:
        bits = [self.kind.value]
        if self.value is not None:
            bits.append(repr(self.value))
        if self.children:
            bits.append(f"[{', '.join(repr(c) for c in self.children)}]")
        return f"({' '.join(bits)})"

    @property
    def commutative(self) -> bool:
        """Whether this node's child list matches order-insensitively."""
        if self.kind is NodeKind.CONJUNCTION:
            return self.value == "AND"
        if self.kind is NodeKind.CLAUSE:
            return self.value == "FROM"
        return False

    def walk(self) -> Iterator["SqlNode"]:
        """Pre-order traversal of this subtree."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def with_children(self, children: tuple["SqlNode", ...]) -> "SqlNode":
        return SqlNode(self.kind, self.value, children, self.quote)


def is_concrete(node: SqlNode) -> bool:
    """True when the tree contains no variable or fragment nodes."""
    return all(
        n.kind not in VARIABLE_KINDS and n.kind is not NodeKind.FRAGMENT
        for n in node.walk()
    )


def variable_names(node: SqlNode) -> set[str]:
    return {
        n.value
        for n in node.walk()
        if n.kind in (NodeKind.VAR_ELEM, NodeKind.VAR_SET) and n.value
    }


# ---------------------------------------------------------------------------
# Constructors


def statement(clauses: Iterator[SqlNode] | tuple | list) -> SqlNode:
    """Statement from clauses; a statement pattern constrains only the
    clauses it mentions, so any clause subset is representable."""
    ordered = sorted(clauses, key=lambda c: CLAUSE_ORDER.index(c.value))
    return SqlNode(NodeKind.STATEMENT, None, tuple(ordered))


def clause(name: str, items) -> SqlNode:
    return SqlNode(NodeKind.CLAUSE, name, tuple(items))


def table_ref(name_node: SqlNode, alias_node: SqlNode | None = None) -> SqlNode:
    kids = (name_node,) if alias_node is None else (name_node, alias_node)
    return SqlNode(NodeKind.TABLE_REF, None, kids)


def column_ref(name_node: SqlNode, qualifier: SqlNode | None = None) -> SqlNode:
    kids = (name_node,) if qualifier is None else (qualifier, name_node)
    return SqlNode(NodeKind.COLUMN_REF, None, kids)


def name(text: str, quote: str | None = None) -> SqlNode:
    return SqlNode(NodeKind.NAME, text, (), quote)


def literal(lexeme: str) -> SqlNode:
    return SqlNode(NodeKind.LITERAL, lexeme)


def func_call(fname: str, args) -> SqlNode:
    return SqlNode(NodeKind.FUNC_CALL, fname.upper(), tuple(args))


def binary_op(op: str, left: SqlNode, right: SqlNode) -> SqlNode:
    return SqlNode(NodeKind.BINARY_OP, op.upper(), (left, right))


def unary_op(op: str, operand: SqlNode) -> SqlNode:
    return SqlNode(NodeKind.UNARY_OP, op.upper(), (operand,))


def conjunction(connective: str, parts) -> SqlNode:
    return SqlNode(NodeKind.CONJUNCTION, connective.upper(), tuple(parts))


def subquery(stmt: SqlNode) -> SqlNode:
    return SqlNode(NodeKind.SUBQUERY, None, (stmt,))


def star() -> SqlNode:
    return SqlNode(NodeKind.STAR)


def keyword(token: str) -> SqlNode:
    return SqlNode(NodeKind.KEYWORD, token.upper())


def alias(expr: SqlNode, name_node: SqlNode) -> SqlNode:
    return SqlNode(NodeKind.ALIAS, None, (expr, name_node))


def join(kind: str, left: SqlNode, right: SqlNode, condition: SqlNode | None = None) -> SqlNode:
    kids = (left, right) if condition is None else (left, right, condition)
    return SqlNode(NodeKind.JOIN, kind.upper(), kids)


def sort_item(expr: SqlNode, direction: str) -> SqlNode:
    return SqlNode(NodeKind.SORT, direction.upper(), (expr,))


def expr_list(items) -> SqlNode:
    return SqlNode(NodeKind.EXPR_LIST, None, tuple(items))


def raw(text: str) -> SqlNode:
    return SqlNode(NodeKind.RAW, " ".join(text.split()))


def var_elem(vname: str) -> SqlNode:
    return SqlNode(NodeKind.VAR_ELEM, vname)


def var_set(vname: str) -> SqlNode:
    return SqlNode(NodeKind.VAR_SET, vname)


def text_segment(text: str) -> SqlNode:
    return SqlNode(NodeKind.TEXT, text)


def string_template(segments) -> SqlNode:
    return SqlNode(NodeKind.STRING_TEMPLATE, None, tuple(segments))


def fragment(level: str, root: SqlNode) -> SqlNode:
    return SqlNode(NodeKind.FRAGMENT, level, (root,))


# ---------------------------------------------------------------------------
# Accessors


def fragment_level(pattern: SqlNode) -> str:
    """Syntactic level a pattern tree matches at."""
    if pattern.kind is NodeKind.FRAGMENT:
        return pattern.value
    if pattern.kind is NodeKind.STATEMENT:
        return LEVEL_STATEMENT
    return classify_expression_level(pattern)


def fragment_root(pattern: SqlNode) -> SqlNode:
    return pattern.children[0] if pattern.kind is NodeKind.FRAGMENT else pattern


def classify_expression_level(node: SqlNode) -> str:
    """Predicate vs. expression classification for a non-statement tree."""
    if node.kind is NodeKind.CONJUNCTION:
        return LEVEL_PREDICATE
    if node.kind is NodeKind.BINARY_OP and node.value in PREDICATE_OPS:
        return LEVEL_PREDICATE
    if node.kind is NodeKind.UNARY_OP and node.value in PREDICATE_UNARY_OPS:
        return LEVEL_PREDICATE
    return LEVEL_EXPRESSION


def get_clause(stmt: SqlNode, name_: str) -> SqlNode | None:
    for child in stmt.children:
        if child.kind is NodeKind.CLAUSE and child.value == name_:
            return child
    return None


def replace_clauses(stmt: SqlNode, updates: dict[str, SqlNode | None]) -> SqlNode:
    """New statement with clauses added, replaced, or removed (None drops)."""
    remaining = {c.value: c for c in stmt.children}
    for cname, node in updates.items():
        if node is None:
            remaining.pop(cname, None)
        else:
            remaining[cname] = node
    ordered = tuple(remaining[c] for c in CLAUSE_ORDER if c in remaining)
    return SqlNode(NodeKind.STATEMENT, stmt.value, ordered)


def effective_name_node(table: SqlNode) -> SqlNode:
    """Alias when present, else the table name (for qualifier resolution)."""
    if table.kind is NodeKind.TABLE_REF:
        return table.children[-1] if len(table.children) == 2 else table.children[0]
    if table.kind is NodeKind.ALIAS:
        return table.children[1]
    return table


def names_equal(a: SqlNode, b: SqlNode) -> bool:
    """Identifier equality: case-insensitive unless either side is quoted."""
    if a.kind is not NodeKind.NAME or b.kind is not NodeKind.NAME:
        return a == b
    if a.quote or b.quote:
        return a.value == b.value
    return a.value.casefold() == b.value.casefold()


def string_content(lit: SqlNode) -> str | None:
    """Content of a string literal (quotes stripped, '' unescaped)."""
    if lit.kind is not NodeKind.LITERAL or not lit.value:
        return None
    lex = lit.value
    if len(lex) >= 2 and lex[0] == "'" and lex[-1] == "'":
        return lex[1:-1].replace("''", "'")
    return None


def make_string_literal(content: str) -> SqlNode:
    return literal("'" + content.replace("'", "''") + "'")


def is_number_literal(lit: SqlNode) -> bool:
    if lit.kind is not NodeKind.LITERAL or not lit.value:
        return False
    head = lit.value[0]
    return head.isdigit() or (head in "+-." and len(lit.value) > 1)
