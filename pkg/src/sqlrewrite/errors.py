"""Exception types shared across the toolkit."""

from __future__ import annotations


class SqlRewriteError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SqlRewriteError):
    """Invalid SQL or rule text."""

    def __init__(self, message: str, position: int = -1):
        self.position = position
        self.message = message
        suffix = f" (at offset {position})" if position >= 0 else ""
        super().__init__(f"{message}{suffix}")


class UnsupportedStatement(ParseError):
    """Statement family outside the SELECT subset (INSERT/UPDATE/DDL)."""


class MalformedVariable(ParseError):
    """Variable token that does not follow the <name> / <<name>> shape."""


class UnknownProcedure(SqlRewriteError):
    """Constraint or action name missing from the registry."""


class UnboundVariable(SqlRewriteError):
    """A variable was referenced without a binding or pattern occurrence."""

    def __init__(self, name: str, context: str = ""):
        self.name = name
        detail = f" in {context}" if context else ""
        super().__init__(f"unbound variable '{name}'{detail}")


class MissingSchema(SqlRewriteError):
    """Schema-dependent constraint evaluated without a catalog."""


class ScopeNotFound(SqlRewriteError):
    """Action scope variable does not occur in the replacement tree."""


class DegenerateRule(SqlRewriteError):
    """Rule without any non-variable element; description length undefined."""


class MatchComplexityError(SqlRewriteError):
    """Commutative list too long for permutation backtracking."""


class ExplosionGuard(SqlRewriteError):
    """Brute-force exploration exceeded the candidate ceiling."""


class StepLimitExceeded(SqlRewriteError):
    """Rewrite loop hit the configured step limit."""


class BudgetExceeded(SqlRewriteError):
    """Suggestion run exceeded its wall-clock budget."""

    def __init__(self, message: str, stats: dict | None = None):
        self.stats = stats or {}
        super().__init__(message)
