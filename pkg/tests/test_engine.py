"""Rule application and the iterative rewrite loop."""

import random

from sqlrewrite import nodes as N
from sqlrewrite.engine import apply_rule, rewrite
from sqlrewrite.parser import parse_query
from sqlrewrite.rules import parse_rule
from sqlrewrite.schema import SchemaCatalog
from sqlrewrite.sqlgen import serialize

from conftest import (
    EMPLOYEE_SCHEMA,
    SELF_JOIN_QUERY,
    SELF_JOIN_REWRITTEN,
    TWEET_QUERY,
    TWEET_REWRITTEN,
)


def test_strpos_rule_rewrites_fig_query(strpos_rule):
    query = parse_query(TWEET_QUERY)
    result = apply_rule(strpos_rule, query)
    assert result == parse_query(TWEET_REWRITTEN)


def test_strpos_rule_no_match_returns_none(strpos_rule):
    assert apply_rule(strpos_rule, parse_query("SELECT a FROM t")) is None


def test_self_join_removed_with_unique_schema(self_join_rule, employee_schema):
    query = parse_query(SELF_JOIN_QUERY)
    result = apply_rule(self_join_rule, query, employee_schema)
    assert result == parse_query(SELF_JOIN_REWRITTEN)


def test_self_join_kept_when_not_unique(self_join_rule):
    # Mutated catalog: employee.id no longer unique; the rule must not fire.
    mutated = {
        "tables": {
            "employee": {
                "columns": {
                    "id": {"type": "integer"},
                    "name": {"type": "text"},
                    "age": {"type": "integer"},
                    "salary": {"type": "integer"},
                }
            }
        }
    }
    schema = SchemaCatalog.from_dict(mutated)
    query = parse_query(SELF_JOIN_QUERY)
    assert apply_rule(self_join_rule, query, schema) is None


def test_self_join_without_schema_is_diagnosed(self_join_rule):
    query = parse_query(SELF_JOIN_QUERY)
    diagnostics = []
    assert apply_rule(self_join_rule, query, None, diagnostics) is None
    assert diagnostics and "schema" in diagnostics[0]["error"]


def test_timestamp_rule_on_mysql_predicate(timestamp_rule):
    query = parse_query(
        "SELECT * FROM tweets WHERE ADDDATE(DATE_FORMAT(`created_at`, "
        "'%Y-%m-01 00:00:00'), INTERVAL 0 SECOND) = "
        "TIMESTAMP('2018-04-01 00:00:00')",
        dialect="mysql",
    )
    result = apply_rule(timestamp_rule, query)
    expected = parse_query(
        "SELECT * FROM tweets WHERE ADDDATE(DATE_FORMAT(`created_at`, "
        "'%Y-%m-01 00:00:00'), INTERVAL 0 SECOND) = '2018-04-01 00:00:00'",
        dialect="mysql",
    )
    assert result == expected


def test_rewrite_single_step_fixpoint(strpos_rule):
    query = parse_query(TWEET_QUERY)
    result, trace = rewrite(query, [strpos_rule])
    assert result == parse_query(TWEET_REWRITTEN)
    assert trace.terminated_by == "fixpoint"
    assert len(trace.steps) == 1
    assert trace.steps[0][0] == strpos_rule.id


def test_rewrite_cycle_returns_repeated_query():
    a_to_b = parse_rule("F(<x>) --> G(<x>)", id=1)
    b_to_a = parse_rule("G(<x>) --> F(<x>)", id=2)
    query = parse_query("SELECT F(a) FROM t")
    result, trace = rewrite(query, [a_to_b, b_to_a])
    assert trace.terminated_by == "cycle"
    # The repeated query appears earlier in the chain.
    assert result == query
    chain = [query] + [after for _, _, after in trace.steps]
    assert chain.count(result) >= 2


def test_rewrite_applies_rule_at_both_sites(strpos_rule):
    query = parse_query(
        "SELECT a FROM t WHERE STRPOS(LOWER(c), 'x') > 0 "
        "AND STRPOS(LOWER(d), 'y') > 0"
    )
    result, trace = rewrite(query, [strpos_rule])
    assert len(trace.steps) == 2
    assert result == parse_query(
        "SELECT a FROM t WHERE c ILIKE '%x%' AND d ILIKE '%y%'"
    )
    assert trace.terminated_by == "fixpoint"


def test_trace_steps_chain(strpos_rule):
    query = parse_query(
        "SELECT a FROM t WHERE STRPOS(LOWER(c), 'x') > 0 "
        "AND STRPOS(LOWER(d), 'y') > 0"
    )
    _, trace = rewrite(query, [strpos_rule])
    for (first, second) in zip(trace.steps, trace.steps[1:]):
        assert first[2] == second[1]


def test_step_limit():
    growing = parse_rule("F(<x>) --> F(F(<x>))", id=1)
    query = parse_query("SELECT F(a) FROM t")
    result, trace = rewrite(query, [growing], max_steps=5)
    assert trace.terminated_by == "step_limit"
    assert len(trace.steps) == 5


def test_priority_order():
    low = parse_rule("F(<x>) --> G(<x>)", id=1, priority=0)
    high = parse_rule("F(<x>) --> H(<x>)", id=2, priority=5)
    query = parse_query("SELECT F(a) FROM t")
    result, trace = rewrite(query, [low, high])
    assert trace.steps[0][0] == high.id
    assert serialize(result) == "SELECT H(a) FROM t"


def test_equal_priority_breaks_ties_by_id():
    one = parse_rule("F(<x>) --> G(<x>)", id=7)
    two = parse_rule("F(<x>) --> H(<x>)", id=3)
    query = parse_query("SELECT F(a) FROM t")
    _, trace = rewrite(query, [one, two])
    assert trace.steps[0][0] == 3


def test_disabled_rules_do_not_fire(strpos_rule):
    disabled = strpos_rule.with_fields(enabled=False)
    query = parse_query(TWEET_QUERY)
    result, trace = rewrite(query, [disabled])
    assert result == query
    assert trace.steps == ()


def test_rewrite_deterministic(strpos_rule, timestamp_rule):
    query = parse_query(TWEET_QUERY)
    runs = [rewrite(query, [strpos_rule, timestamp_rule]) for _ in range(3)]
    texts = {serialize(result) for result, _ in runs}
    assert len(texts) == 1
    traces = {tuple(t.terminated_by for _, t in runs)}
    assert len(traces) == 1


def test_trace_json(strpos_rule):
    query = parse_query(TWEET_QUERY)
    _, trace = rewrite(query, [strpos_rule])
    doc = trace.to_json()
    assert doc["terminated_by"] == "fixpoint"
    assert doc["steps"][0]["rule_id"] == strpos_rule.id
    assert "ILIKE" in doc["steps"][0]["after"]


def test_rewrite_is_pure(strpos_rule):
    query = parse_query(TWEET_QUERY)
    before = serialize(query)
    rewrite(query, [strpos_rule])
    assert serialize(query) == before


# -- randomized termination property (smoke version; the full 1000-case run
#    lives in the acceptance suite) -------------------------------------------


def test_randomized_termination_smoke():
    rng = random.Random(20240201)
    rule_pool = [
        parse_rule("F(<x>) --> G(<x>)", id=1),
        parse_rule("G(<x>) --> F(<x>)", id=2),
        parse_rule("F(<x>) --> F(F(<x>))", id=3),
        parse_rule("<a> = <a> --> TRUE", id=4),
        parse_rule("H(<x>) --> H(<x>)", id=5),
    ]
    functions = ["F", "G", "H", "LOWER"]
    for _ in range(50):
        rules = rng.sample(rule_pool, rng.randint(1, len(rule_pool)))
        fn = rng.choice(functions)
        query = parse_query(f"SELECT {fn}(c{rng.randint(0, 3)}) FROM t WHERE a = a")
        result, trace = rewrite(query, rules, max_steps=16)
        assert trace.terminated_by in ("fixpoint", "cycle", "step_limit")
        if trace.terminated_by == "cycle":
            chain = [query] + [after for _, _, after in trace.steps]
            assert chain.count(result) >= 2
