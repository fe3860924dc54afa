"""Description-length scoring for rewriting rules.

A rule's length is a constant base plus variable mass diluted by the number
of non-variable elements: more variables mean a longer (worse) description,
so concrete rules score the base length and over-generalized rules pay for
every variable they introduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import nodes as N
from .errors import DegenerateRule
from .nodes import NodeKind, SqlNode


@dataclass(frozen=True)
class MdlConfig:
    base_length: Fraction = Fraction(10)
    element_weight: Fraction = Fraction(1)
    set_weight: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "base_length", Fraction(self.base_length))
        object.__setattr__(self, "element_weight", Fraction(self.element_weight))
        object.__setattr__(self, "set_weight", Fraction(self.set_weight))
        if self.base_length <= 0 or self.element_weight <= 0 or self.set_weight <= 0:
            raise ValueError("MDL weights must be positive")
        if self.set_weight < self.element_weight:
            raise ValueError("a set variable must weigh at least an element variable")


def rule_counts(rule) -> tuple[int, int, int]:
    """(element-variable, set-variable, non-variable element) occurrence
    counts over pattern and replacement combined."""
    elems = sets = others = 0
    for tree in (rule.pattern, rule.replacement):
        for node in tree.walk():
            kind = node.kind
            if kind is NodeKind.VAR_ELEM:
                elems += 1
            elif kind is NodeKind.VAR_SET:
                sets += 1
            else:
                others += _own_units(node)
    return elems, sets, others


def _own_units(node: SqlNode) -> int:
    """Countable tokens contributed by the node itself (children excluded).

    Delimiters (commas, parens, dots, AS) are glue, not elements; compound
    operators and clause keywords count once.
    """
    kind = node.kind
    if kind in (NodeKind.NAME, NodeKind.LITERAL, NodeKind.STAR, NodeKind.KEYWORD):
        return 1
    if kind in (NodeKind.FUNC_CALL, NodeKind.BINARY_OP, NodeKind.UNARY_OP,
                NodeKind.CLAUSE, NodeKind.SORT):
        return 1
    if kind is NodeKind.CONJUNCTION:
        return max(len(node.children) - 1, 0)
    if kind is NodeKind.JOIN:
        return 1 + (1 if len(node.children) == 3 else 0)  # join kind + ON
    if kind is NodeKind.RAW:
        return len(node.value.split())
    if kind is NodeKind.TEXT:
        return 1 if node.value else 0
    return 0


def description_length(rule, cfg: MdlConfig | None = None) -> Fraction:
    """Exact rational rule length under the given weights."""
    cfg = cfg or MdlConfig()
    elems, sets, others = rule_counts(rule)
    if others < 1:
        raise DegenerateRule("rule has no non-variable element")
    return cfg.base_length + Fraction(
        cfg.element_weight * elems + cfg.set_weight * sets, others
    )


def total_length(rules, cfg: MdlConfig | None = None) -> Fraction:
    cfg = cfg or MdlConfig()
    return sum((description_length(r, cfg) for r in rules), Fraction(0))
