"""Rule-based SQL query rewriting middleware with example-driven rule suggestion.

The pipeline: parse SQL into a canonical tree (`parse_query`), define rules in
the variablized-SQL rule language (`parse_rule`), apply them deterministically
(`rewrite`), or derive them from example pairs (`suggest_rules`).  A FastAPI
service (`create_app`) and a CLI (`sqlrewrite`) wrap the same engine.
"""

from .config import ServiceConfig, load_config
from .engine import RewriteTrace, apply_rule, rewrite
from .errors import (
    BudgetExceeded,
    DegenerateRule,
    ExplosionGuard,
    MalformedVariable,
    MatchComplexityError,
    MissingSchema,
    ParseError,
    ScopeNotFound,
    SqlRewriteError,
    StepLimitExceeded,
    UnboundVariable,
    UnknownProcedure,
    UnsupportedStatement,
)
from .matching import Binding, instantiate, match
from .mdl import MdlConfig, description_length, total_length
from .nodes import NodeKind, SqlNode, fragment_level, is_concrete
from .parser import parse_pattern, parse_query, split_statements
from .rules import (
    ActionExpr,
    ConstraintExpr,
    Rule,
    apply_action,
    apply_actions,
    eval_constraint,
    parse_rule,
    rule_from_json,
    rule_to_json,
    serialize_rule,
)
from .schema import ColumnInfo, SchemaCatalog
from .sqlgen import serialize
from .store import RuleStore, Workspace
from .suggest import (
    CandidateRule,
    CostConfig,
    ExplorerConfig,
    RewritePair,
    SuggestionReport,
    covers,
    distance,
    explore_candidates,
    promisingness,
    rule_set_covers,
    suggest_rules,
)
from .transforms import canonicalize_variables, rule_key, transform

__version__ = "0.1.0"

__all__ = [
    "ActionExpr",
    "Binding",
    "BudgetExceeded",
    "CandidateRule",
    "ColumnInfo",
    "ConstraintExpr",
    "CostConfig",
    "DegenerateRule",
    "ExplorerConfig",
    "ExplosionGuard",
    "MalformedVariable",
    "MatchComplexityError",
    "MdlConfig",
    "MissingSchema",
    "NodeKind",
    "ParseError",
    "RewritePair",
    "RewriteTrace",
    "Rule",
    "RuleStore",
    "SchemaCatalog",
    "ScopeNotFound",
    "ServiceConfig",
    "SqlNode",
    "SqlRewriteError",
    "StepLimitExceeded",
    "SuggestionReport",
    "UnboundVariable",
    "UnknownProcedure",
    "UnsupportedStatement",
    "Workspace",
    "apply_action",
    "apply_actions",
    "apply_rule",
    "canonicalize_variables",
    "covers",
    "description_length",
    "distance",
    "eval_constraint",
    "explore_candidates",
    "fragment_level",
    "instantiate",
    "is_concrete",
    "load_config",
    "match",
    "parse_pattern",
    "parse_query",
    "parse_rule",
    "promisingness",
    "rewrite",
    "rule_from_json",
    "rule_key",
    "rule_set_covers",
    "rule_to_json",
    "serialize",
    "serialize_rule",
    "split_statements",
    "suggest_rules",
    "total_length",
    "transform",
]
