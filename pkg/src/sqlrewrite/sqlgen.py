"""Tree back to SQL text.

Output uses single-space token separation and is deterministic for equal
trees; re-parsing the output yields a structurally equal tree.
"""

from __future__ import annotations

from . import nodes as N
from .nodes import NodeKind

_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_ADD = 5
_PREC_MUL = 6
_PREC_UNARY = 7
_PREC_ATOM = 9

_COMPARISONS = N.PREDICATE_OPS


def _precedence(node: N.SqlNode) -> int:
    if node.kind is NodeKind.CONJUNCTION:
        return _PREC_OR if node.value == "OR" else _PREC_AND
    if node.kind is NodeKind.BINARY_OP:
        if node.value in _COMPARISONS:
            return _PREC_CMP
        if node.value in ("+", "-", "||"):
            return _PREC_ADD
        return _PREC_MUL
    if node.kind is NodeKind.UNARY_OP:
        if node.value == "NOT":
            return _PREC_NOT
        if node.value in ("IS NULL", "IS NOT NULL"):
            return _PREC_CMP
        return _PREC_UNARY
    return _PREC_ATOM


def serialize(node: N.SqlNode, dialect: str = "generic") -> str:
    return _ser(node)


def _ser(node: N.SqlNode) -> str:
    kind = node.kind
    if kind is NodeKind.FRAGMENT:
        return _ser(node.children[0])
    if kind is NodeKind.STATEMENT:
        return " ".join(_ser(c) for c in node.children)
    if kind is NodeKind.CLAUSE:
        return _ser_clause(node)
    if kind is NodeKind.TABLE_REF:
        return " ".join(_ser(c) for c in node.children)
    if kind is NodeKind.COLUMN_REF:
        return ".".join(_ser(c) for c in node.children)
    if kind is NodeKind.NAME:
        if node.quote:
            return f"{node.quote}{node.value}{node.quote}"
        return node.value
    if kind in (NodeKind.LITERAL, NodeKind.KEYWORD, NodeKind.RAW, NodeKind.TEXT):
        return node.value
    if kind is NodeKind.FUNC_CALL:
        return _ser_func(node)
    if kind is NodeKind.BINARY_OP:
        left = _operand(node.children[0], _precedence(node))
        right = _operand(node.children[1], _precedence(node), right_side=True, op=node.value)
        return f"{left} {node.value} {right}"
    if kind is NodeKind.UNARY_OP:
        return _ser_unary(node)
    if kind is NodeKind.CONJUNCTION:
        sep = f" {node.value} "
        return sep.join(_operand(c, _precedence(node)) for c in node.children)
    if kind is NodeKind.SUBQUERY:
        return f"({_ser(node.children[0])})"
    if kind is NodeKind.STAR:
        return "*"
    if kind is NodeKind.ALIAS:
        return f"{_ser(node.children[0])} AS {_ser(node.children[1])}"
    if kind is NodeKind.JOIN:
        text = f"{_ser(node.children[0])} {node.value} {_ser(node.children[1])}"
        if len(node.children) == 3:
            text += f" ON {_ser(node.children[2])}"
        return text
    if kind is NodeKind.SORT:
        return f"{_ser(node.children[0])} {node.value}"
    if kind is NodeKind.EXPR_LIST:
        return "(" + ", ".join(_ser(c) for c in node.children) + ")"
    if kind is NodeKind.VAR_ELEM:
        return f"<{node.value}>"
    if kind is NodeKind.VAR_SET:
        return f"<<{node.value}>>"
    if kind is NodeKind.STRING_TEMPLATE:
        return _ser_template(node)
    raise ValueError(f"cannot serialize node kind {kind}")


def _ser_clause(node: N.SqlNode) -> str:
    items = list(node.children)
    prefix = node.value
    if node.value == "SELECT" and items and items[0].kind is NodeKind.KEYWORD:
        prefix = f"SELECT {items[0].value}"
        items = items[1:]
    if not items:
        return prefix
    return f"{prefix} " + ", ".join(_ser(c) for c in items)


def _ser_func(node: N.SqlNode) -> str:
    args = list(node.children)
    if node.value == "CAST" and len(args) == 2:
        return f"CAST({_ser(args[0])} AS {_ser(args[1])})"
    prefix = ""
    if args and args[0].kind is NodeKind.KEYWORD:
        prefix = f"{args[0].value} "
        args = args[1:]
    return f"{node.value}({prefix}" + ", ".join(_ser(a) for a in args) + ")"


def _ser_unary(node: N.SqlNode) -> str:
    operand = node.children[0]
    if node.value in ("IS NULL", "IS NOT NULL"):
        return f"{_operand(operand, _PREC_CMP)} {node.value}"
    if node.value in ("-", "+"):
        return f"{node.value}{_operand(operand, _PREC_UNARY)}"
    return f"{node.value} {_operand(operand, _precedence(node))}"


def _operand(node: N.SqlNode, parent_prec: int, right_side: bool = False, op: str = "") -> str:
    prec = _precedence(node)
    text = _ser(node)
    if prec < parent_prec:
        return f"({text})"
    if right_side and prec == parent_prec and op in ("-", "/", "%"):
        return f"({text})"
    return text


def _ser_template(node: N.SqlNode) -> str:
    parts = []
    for seg in node.children:
        if seg.kind is NodeKind.TEXT:
            parts.append(seg.value.replace("'", "''"))
        else:
            parts.append(f"<{seg.value}>")
    return "'" + "".join(parts) + "'"
