"""Rule-source parsing, constraint evaluation, and actions."""

import pytest

from sqlrewrite import nodes as N
from sqlrewrite.errors import (
    MissingSchema,
    ParseError,
    UnboundVariable,
    UnknownProcedure,
)
from sqlrewrite.matching import Binding
from sqlrewrite.nodes import NodeKind
from sqlrewrite.parser import parse_query
from sqlrewrite.rules import (
    ActionExpr,
    ConstraintExpr,
    apply_action,
    eval_constraint,
    parse_rule,
    rule_from_json,
    rule_to_json,
    serialize_rule,
)
from sqlrewrite.schema import SchemaCatalog

from conftest import SELF_JOIN_RULE_SRC, STRPOS_RULE_SRC


def test_parse_strpos_rule(strpos_rule):
    assert strpos_rule.constraints == ()
    assert strpos_rule.actions == ()
    assert N.fragment_level(strpos_rule.pattern) == N.LEVEL_PREDICATE
    assert N.fragment_level(strpos_rule.replacement) == N.LEVEL_PREDICATE


def test_parse_self_join_rule(self_join_rule):
    assert len(self_join_rule.constraints) >= 1
    assert len(self_join_rule.actions) == 2
    assert self_join_rule.actions[0] == ActionExpr("SUBSTITUTE", ("s", "t2", "t1"))
    names = {c.procedure for c in self_join_rule.constraints}
    assert "UNIQUE" in names


def test_unbound_replacement_variable():
    with pytest.raises(UnboundVariable):
        parse_rule("<x> --> <y>")


def test_unknown_procedure():
    with pytest.raises(UnknownProcedure):
        parse_rule("<x> > 0 / FROBNICATE(x) --> <x> > 1")


def test_wrong_arity():
    with pytest.raises(ParseError):
        parse_rule("<x> > 0 / UNIQUE(x) --> <x> > 1")


def test_constraint_variable_must_come_from_pattern():
    with pytest.raises(UnboundVariable):
        parse_rule("<x> > 0 / IS_COLUMN(z) --> <x> > 1")


def test_level_mismatch_rejected():
    with pytest.raises(ParseError):
        parse_rule("SELECT <<s>> FROM <t> --> LOWER(<t>)")


def test_boolean_literal_replacement_allowed_for_predicates():
    rule = parse_rule("<a> = <a> --> TRUE")
    assert N.fragment_level(rule.pattern) == N.LEVEL_PREDICATE


def test_rule_round_trip(strpos_rule, self_join_rule, timestamp_rule):
    for rule in (strpos_rule, self_join_rule, timestamp_rule):
        again = parse_rule(serialize_rule(rule), id=rule.id, name=rule.name)
        assert again.pattern == rule.pattern
        assert again.replacement == rule.replacement
        assert again.constraints == rule.constraints
        assert again.actions == rule.actions


def test_rule_json_round_trip(self_join_rule):
    doc = rule_to_json(self_join_rule)
    again = rule_from_json(doc)
    assert again == self_join_rule


def test_division_in_pattern_is_not_a_separator():
    rule = parse_rule("<a> / <b> > 1 --> <a> > <b>")
    assert rule.constraints == ()
    root = N.fragment_root(rule.pattern)
    assert root.value == ">"


# -- constraints --------------------------------------------------------------


def _tref(table, alias=None):
    return N.table_ref(N.name(table), N.name(alias) if alias else None)


def test_unique_true_for_primary_key(employee_schema):
    binding = Binding(element={"t1": _tref("employee", "e1"), "a1": N.name("id")})
    expr = ConstraintExpr("UNIQUE", ("t1", "a1"))
    assert eval_constraint(expr, binding, employee_schema) is True


def test_unique_false_when_column_not_unique(employee_schema):
    binding = Binding(element={"t1": _tref("employee", "e1"), "a1": N.name("age")})
    expr = ConstraintExpr("UNIQUE", ("t1", "a1"))
    assert eval_constraint(expr, binding, employee_schema) is False


def test_unique_requires_schema():
    binding = Binding(element={"t1": _tref("employee"), "a1": N.name("id")})
    with pytest.raises(MissingSchema):
        eval_constraint(ConstraintExpr("UNIQUE", ("t1", "a1")), binding, None)


def test_not_null_follows_primary_key(employee_schema):
    binding = Binding(element={"t": _tref("employee"), "a": N.name("id")})
    assert eval_constraint(ConstraintExpr("NOT_NULL", ("t", "a")), binding, employee_schema)
    binding2 = Binding(element={"t": _tref("employee"), "a": N.name("name")})
    assert not eval_constraint(ConstraintExpr("NOT_NULL", ("t", "a")), binding2, employee_schema)


def test_is_literal():
    binding = Binding(element={"x": N.literal("0")})
    assert eval_constraint(ConstraintExpr("IS_LITERAL", ("x",)), binding, None)
    binding2 = Binding(element={"x": N.column_ref(N.name("a"))})
    assert not eval_constraint(ConstraintExpr("IS_LITERAL", ("x",)), binding2, None)


def test_is_string():
    binding = Binding(element={"x": N.literal("'covid'")})
    assert eval_constraint(ConstraintExpr("IS_STRING", ("x",)), binding, None)
    binding2 = Binding(element={"x": N.literal("0")})
    assert not eval_constraint(ConstraintExpr("IS_STRING", ("x",)), binding2, None)


def test_is_column():
    binding = Binding(element={"x": N.column_ref(N.name("content"))})
    assert eval_constraint(ConstraintExpr("IS_COLUMN", ("x",)), binding, None)


def test_same_compares_table_names_not_aliases():
    binding = Binding(
        element={"t1": _tref("employee", "e1"), "t2": _tref("employee", "e2")}
    )
    assert eval_constraint(ConstraintExpr("SAME", ("t1", "t2")), binding, None)
    binding2 = Binding(
        element={"t1": _tref("employee", "e1"), "t2": _tref("orders", "o")}
    )
    assert not eval_constraint(ConstraintExpr("SAME", ("t1", "t2")), binding2, None)


def test_constraint_purity(employee_schema):
    binding = Binding(element={"t1": _tref("employee"), "a1": N.name("id")})
    expr = ConstraintExpr("UNIQUE", ("t1", "a1"))
    results = {eval_constraint(expr, binding, employee_schema) for _ in range(5)}
    assert results == {True}


def test_unbound_constraint_variable():
    with pytest.raises(UnboundVariable):
        eval_constraint(ConstraintExpr("IS_LITERAL", ("x",)), Binding(), None)


# -- actions ------------------------------------------------------------------


def _selection_list():
    items = parse_query(
        "SELECT e1.name, e1.age, e2.salary FROM t"
    )
    return N.get_clause(items, "SELECT").children


def test_substitute_rewrites_qualifiers():
    items = _selection_list()
    tree = N.clause("SELECT", items)
    binding = Binding(
        element={"t1": _tref("employee", "e1"), "t2": _tref("employee", "e2")},
        set={"s": items},
    )
    action = ActionExpr("SUBSTITUTE", ("s", "t2", "t1"))
    result = apply_action(action, tree, binding)
    texts = [N.SqlNode.__repr__(c) for c in result.children]
    from sqlrewrite.sqlgen import serialize

    assert serialize(result) == "SELECT e1.name, e1.age, e1.salary"
    # Input tree is untouched (value semantics).
    assert serialize(tree) == "SELECT e1.name, e1.age, e2.salary"


def test_substitute_no_op_when_scope_has_no_references():
    items = tuple(parse_query("SELECT e1.name FROM t").children[0].children)
    tree = N.clause("SELECT", items)
    binding = Binding(
        element={"t1": _tref("employee", "e1"), "t2": _tref("employee", "e2")},
        set={"s": items},
    )
    result = apply_action(ActionExpr("SUBSTITUTE", ("s", "t2", "t1")), tree, binding)
    assert result == tree


def test_chained_substitutes_apply_left_to_right():
    # Three-column list; rewrite a->b then b->c.  Order matters: the first
    # substitution feeds the second.
    from sqlrewrite.rules import apply_actions
    from sqlrewrite.sqlgen import serialize

    items = tuple(
        N.get_clause(parse_query("SELECT a.x, b.y, a.z FROM t"), "SELECT").children
    )
    tree = N.clause("SELECT", items)
    binding = Binding(
        element={
            "ta": _tref("alpha", "a"),
            "tb": _tref("beta", "b"),
            "tc": _tref("gamma", "c"),
        },
        set={"s": items},
    )
    ab = ActionExpr("SUBSTITUTE", ("s", "ta", "tb"))
    bc = ActionExpr("SUBSTITUTE", ("s", "tb", "tc"))
    assert serialize(apply_actions([ab, bc], tree, binding)) == "SELECT c.x, c.y, c.z"
    assert serialize(apply_actions([bc, ab], tree, binding)) == "SELECT b.x, c.y, b.z"


def test_substitute_unbound_scope():
    tree = N.clause("SELECT", (N.star(),))
    with pytest.raises(UnboundVariable):
        apply_action(ActionExpr("SUBSTITUTE", ("s", "t2", "t1")), tree, Binding())
