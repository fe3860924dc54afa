"""Pattern matching and instantiation."""

import pytest

from sqlrewrite import nodes as N
from sqlrewrite.errors import MatchComplexityError, UnboundVariable
from sqlrewrite.matching import Binding, instantiate, match, match_node
from sqlrewrite.nodes import NodeKind
from sqlrewrite.parser import parse_pattern, parse_query
from sqlrewrite.sqlgen import serialize

from conftest import SELF_JOIN_QUERY, TWEET_QUERY


def test_strpos_pattern_binds_column_and_string(strpos_rule):
    query = parse_query(TWEET_QUERY)
    binding = match(strpos_rule.pattern, query)
    assert binding is not None
    assert binding.element["x"] == N.column_ref(N.name("content", quote='"'))
    assert binding.string_parts["y"] == "covid"


def test_self_join_pattern_bindings(self_join_rule):
    query = parse_query(SELF_JOIN_QUERY)
    binding = match(self_join_rule.pattern, query)
    assert binding is not None
    t1, t2 = binding.element["t1"], binding.element["t2"]
    assert serialize(t1) == "employee e1"
    assert serialize(t2) == "employee e2"
    assert binding.element["a1"] == N.name("id")
    assert binding.element["a2"] == N.name("id")
    assert [serialize(n) for n in binding.set["s"]] == [
        "e1.name", "e1.age", "e2.salary",
    ]
    assert [serialize(n) for n in binding.set["p"]] == [
        "e1.age > 17", "e2.salary > 35000",
    ]


def test_commutative_from_prefers_document_order():
    pattern = parse_pattern("SELECT * FROM <t1>, <t2>")
    query = parse_query("SELECT * FROM customers, orders")
    binding = match(pattern, query)
    assert binding is not None
    assert serialize(binding.element["t1"]) == "customers"
    assert serialize(binding.element["t2"]) == "orders"


def test_commutative_conjunct_matching():
    pattern = parse_pattern("WHERE <a> = 5 AND <<rest>>")
    query = parse_query("SELECT x FROM t WHERE p > 0 AND q = 5 AND r < 9")
    binding = match(pattern, query)
    assert binding is not None
    assert serialize(binding.element["a"]) == "q"
    assert [serialize(n) for n in binding.set["rest"]] == ["p > 0", "r < 9"]


def test_variable_consistency_same_fragment_everywhere():
    pattern = parse_pattern("<x> = <x>")
    assert match(pattern, parse_query("SELECT a FROM t WHERE b = b")) is not None
    assert match(pattern, parse_query("SELECT a FROM t WHERE b = c")) is None


def test_no_match_is_none(strpos_rule):
    query = parse_query("SELECT a FROM t WHERE b = 1")
    assert match(strpos_rule.pattern, query) is None


def test_predicate_pattern_matches_inside_subquery(strpos_rule):
    query = parse_query(
        "SELECT n FROM (SELECT n FROM t WHERE STRPOS(LOWER(c), 'x') > 0) AS s"
    )
    assert match(strpos_rule.pattern, query) is not None


def test_keyword_must_match_exactly():
    pattern = parse_pattern("SELECT DISTINCT <<s>> FROM <t>")
    assert match(pattern, parse_query("SELECT DISTINCT a FROM t")) is not None
    assert match(pattern, parse_query("SELECT a FROM t")) is None


def test_statement_pattern_constrains_mentioned_clauses_only():
    pattern = parse_pattern("SELECT <<s>> FROM <t>")
    assert match(pattern, parse_query("SELECT a FROM t")) is not None
    # Unmentioned clauses are unconstrained and survive the rewrite.
    assert match(pattern, parse_query("SELECT a FROM t WHERE x = 1")) is not None


def test_pure_set_clause_matches_absent_clause():
    pattern = parse_pattern("SELECT <<s>> FROM <t> WHERE <<p>>")
    binding = match(pattern, parse_query("SELECT a FROM t"))
    assert binding is not None
    assert binding.set["p"] == ()


def test_string_template_greedy_anchor_match():
    pattern = parse_pattern("<x> ILIKE '%<y>%'")
    query = parse_query("SELECT a FROM t WHERE c ILIKE '%a%b%'")
    binding = match(pattern, query)
    assert binding is not None
    assert binding.string_parts["y"] == "a%b"


def test_template_requires_anchors():
    pattern = parse_pattern("<x> ILIKE '%<y>%'")
    assert match(pattern, parse_query("SELECT a FROM t WHERE c ILIKE 'covid'")) is None


def test_commutative_cap_raises():
    pattern = N.fragment(
        N.LEVEL_PREDICATE,
        N.conjunction(
            "AND",
            [parse_pattern("<a> = 1").children[0], parse_pattern("<b> = 2").children[0]],
        ),
    )
    conjuncts = " AND ".join(f"c{i} = {i}" for i in range(14))
    query = parse_query(f"SELECT a FROM t WHERE {conjuncts}")
    with pytest.raises(MatchComplexityError):
        match_node(N.fragment_root(pattern), N.get_clause(query, "WHERE").children[0], Binding())


# -- instantiate ---------------------------------------------------------------


def test_instantiate_strpos_replacement(strpos_rule):
    query = parse_query(TWEET_QUERY)
    binding = match(strpos_rule.pattern, query)
    result = instantiate(strpos_rule.replacement, binding)
    assert serialize(result) == "\"content\" ILIKE '%covid%'"


def test_identity_rule_reproduces_matched_region(strpos_rule, self_join_rule):
    # Soundness: instantiating the pattern with its own match binding
    # reproduces the matched region.
    for rule, sql in (
        (strpos_rule, TWEET_QUERY),
        (self_join_rule, SELF_JOIN_QUERY),
    ):
        query = parse_query(sql)
        level = N.fragment_level(rule.pattern)
        from sqlrewrite.matching import candidate_sites, find_match

        found = find_match(rule.pattern, query)
        assert found is not None
        path, binding = found
        site = query
        for index in path:
            site = site.children[index]
        rebuilt = instantiate(rule.pattern, binding)
        assert rebuilt == site


def test_instantiate_empty_set_drops_where():
    pattern = parse_pattern("SELECT <<s>> FROM <t> WHERE <<p>>")
    replacement = parse_pattern("SELECT <<s>> FROM <t> WHERE <<p>>")
    binding = match(pattern, parse_query("SELECT a FROM t"))
    result = instantiate(replacement, binding)
    assert serialize(result) == "SELECT a FROM t"
    assert result == parse_query("SELECT a FROM t")


def test_instantiate_partial_set_leaves_clean_conjunction():
    pattern = parse_pattern("WHERE <a> > 0 AND <<p>>")
    replacement = parse_pattern("WHERE <<p>>")
    query = parse_query("SELECT x FROM t WHERE n > 0 AND m = 2")
    binding = match(pattern, query)
    assert binding is not None
    # Splicing one remaining predicate must not leave a dangling AND.
    from sqlrewrite.matching import instantiate_list

    nodes = instantiate_list(N.fragment_root(replacement), binding)
    stmt = nodes[0]
    where = N.get_clause(stmt, "WHERE")
    assert serialize(where.children[0]) == "m = 2"


def test_unbound_variable_raises():
    with pytest.raises(UnboundVariable):
        instantiate(parse_pattern("<zz>"), Binding())


def test_match_does_not_mutate_binding_inputs(strpos_rule):
    query = parse_query(TWEET_QUERY)
    binding = Binding()
    match_node(N.fragment_root(strpos_rule.pattern),
               N.get_clause(query, "WHERE").children[0], binding)
    assert binding.element == {} and binding.set == {} and binding.string_parts == {}
