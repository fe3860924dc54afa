import pytest

from sqlrewrite.rules import parse_rule
from sqlrewrite.schema import SchemaCatalog

STRPOS_RULE_SRC = "STRPOS(LOWER(<x>), '<y>') > 0 --> <x> ILIKE '%<y>%'"

SELF_JOIN_RULE_SRC = (
    "SELECT <<s>> FROM <t1>, <t2> WHERE <t1>.<a1> = <t2>.<a2> AND <<p>> "
    "/ SAME(t1, t2) AND SAME(a1, a2) AND UNIQUE(t1, a1) "
    "--> SELECT <<s>> FROM <t1> WHERE <<p>> "
    "/ Substitute(s, t2, t1); Substitute(p, t2, t1)"
)

TIMESTAMP_RULE_SRC = "<x> = TIMESTAMP('<y>') --> <x> = '<y>'"

TWEET_QUERY = (
    'SELECT SUM(1) AS "cnt:tweets", "state_name" AS "state_name" '
    'FROM "tweets" '
    "WHERE STRPOS(LOWER(\"content\"), 'covid') > 0 "
    "GROUP BY 2"
)

TWEET_REWRITTEN = (
    'SELECT SUM(1) AS "cnt:tweets", "state_name" AS "state_name" '
    'FROM "tweets" '
    "WHERE \"content\" ILIKE '%covid%' "
    "GROUP BY 2"
)

SELF_JOIN_QUERY = (
    "SELECT e1.name, e1.age, e2.salary FROM employee e1, employee e2 "
    "WHERE e1.id = e2.id AND e1.age > 17 AND e2.salary > 35000"
)

SELF_JOIN_REWRITTEN = (
    "SELECT e1.name, e1.age, e1.salary FROM employee e1 "
    "WHERE e1.age > 17 AND e1.salary > 35000"
)

EMPLOYEE_SCHEMA = {
    "tables": {
        "employee": {
            "columns": {
                "id": {"type": "integer", "primary_key": True},
                "name": {"type": "text"},
                "age": {"type": "integer"},
                "salary": {"type": "integer", "not_null": True},
            }
        }
    }
}


@pytest.fixture
def strpos_rule():
    return parse_rule(STRPOS_RULE_SRC, id=1, name="strpos-to-ilike")


@pytest.fixture
def self_join_rule():
    return parse_rule(SELF_JOIN_RULE_SRC, id=2, name="remove-self-join")


@pytest.fixture
def timestamp_rule():
    return parse_rule(TIMESTAMP_RULE_SRC, id=3, name="strip-timestamp-cast")


@pytest.fixture
def employee_schema():
    return SchemaCatalog.from_dict(EMPLOYEE_SCHEMA)
