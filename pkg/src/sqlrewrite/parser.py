"""SQL text to canonical tree.

``parse_query`` accepts a single SELECT-family statement; ``parse_pattern``
additionally accepts clause/predicate/expression fragments and variable
tokens.  The grammar is deliberately a dialect-tolerant subset: constructs
outside it (CASE, INTERVAL phrases) degrade to opaque RAW leaves that match
only by exact text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import nodes as N
from .errors import MalformedVariable, ParseError, UnsupportedStatement

DIALECTS = ("postgres", "mysql", "generic")

KEYWORDS = {
    "SELECT", "DISTINCT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER",
    "LIMIT", "OFFSET", "AS", "AND", "OR", "NOT", "IN", "IS", "NULL", "LIKE",
    "ILIKE", "TRUE", "FALSE", "CAST", "JOIN", "LEFT", "RIGHT", "FULL",
    "INNER", "OUTER", "CROSS", "ON", "EXISTS", "INTERVAL", "CASE", "END",
    "ASC", "DESC", "UNION", "BETWEEN",
}

# Words that terminate an implicit alias or table alias.
ALIAS_STOPWORDS = {
    "FROM", "WHERE", "GROUP", "HAVING", "ORDER", "LIMIT", "OFFSET", "AND",
    "OR", "ON", "JOIN", "LEFT", "RIGHT", "FULL", "INNER", "CROSS", "OUTER",
    "UNION", "AS", "ASC", "DESC", "BY", "END",
}

INTERVAL_UNITS = {
    "SECOND", "MINUTE", "HOUR", "DAY", "WEEK", "MONTH", "QUARTER", "YEAR",
    "SECONDS", "MINUTES", "HOURS", "DAYS", "WEEKS", "MONTHS", "YEARS",
}

WRITE_STATEMENTS = {
    "INSERT", "UPDATE", "DELETE", "CREATE", "DROP", "ALTER", "TRUNCATE",
    "MERGE", "GRANT", "REVOKE", "SET", "EXPLAIN", "WITH",
}

VAR_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
TEMPLATE_VAR_RE = re.compile(r"<([A-Za-z][A-Za-z0-9_]*)>")

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_BODY = _IDENT_START | set("0123456789$#")


@dataclass
class Token:
    type: str  # IDENT QIDENT STRING NUMBER OP PUNCT VAR SETVAR EOF
    text: str
    pos: int
    quote: str | None = None

    @property
    def upper(self) -> str:
        return self.text.upper()


def tokenize(sql: str, pattern_mode: bool = False) -> list[Token]:
    out: list[Token] = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _IDENT_START:
            j = i + 1
            while j < n and sql[j] in _IDENT_BODY:
                j += 1
            out.append(Token("IDENT", sql[i:j], i))
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and sql[i + 1].isdigit()):
            j = i
            while j < n and (sql[j].isdigit() or sql[j] == "."):
                j += 1
            if j < n and sql[j] in "eE":
                k = j + 1
                if k < n and sql[k] in "+-":
                    k += 1
                if k < n and sql[k].isdigit():
                    j = k
                    while j < n and sql[j].isdigit():
                        j += 1
            out.append(Token("NUMBER", sql[i:j], i))
            i = j
            continue
        if ch == "'":
            j = i + 1
            while j < n:
                if sql[j] == "'":
                    if j + 1 < n and sql[j + 1] == "'":
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", i)
            out.append(Token("STRING", sql[i : j + 1], i))
            i = j + 1
            continue
        if ch in ('"', "`"):
            j = sql.find(ch, i + 1)
            if j < 0:
                raise ParseError("unterminated quoted identifier", i)
            out.append(Token("QIDENT", sql[i + 1 : j], i, quote=ch))
            i = j + 1
            continue
        if ch == "<":
            if pattern_mode:
                var = _scan_variable(sql, i)
                if var is not None:
                    out.append(var)
                    i = var.pos + len(var.text)
                    continue
            for op in ("<>", "<="):
                if sql.startswith(op, i):
                    out.append(Token("OP", op, i))
                    i += 2
                    break
            else:
                out.append(Token("OP", "<", i))
                i += 1
            continue
        for op in (">=", "!=", "||"):
            if sql.startswith(op, i):
                out.append(Token("OP", op, i))
                i += 2
                break
        else:
            if ch in "=><+-*/%":
                out.append(Token("OP", ch, i))
                i += 1
            elif ch in "(),.;":
                out.append(Token("PUNCT", ch, i))
                i += 1
            else:
                raise ParseError(f"unexpected character {ch!r}", i)
    out.append(Token("EOF", "", n))
    return out


def _scan_variable(sql: str, i: int) -> Token | None:
    """Scan ``<name>`` / ``<<name>>`` at position i, else None."""
    double = sql.startswith("<<", i)
    j = i + (2 if double else 1)
    k = j
    n = len(sql)
    while k < n and (sql[k].isalnum() or sql[k] == "_"):
        k += 1
    closer = ">>" if double else ">"
    if not sql.startswith(closer, k):
        return None
    name = sql[j:k]
    if not name:
        return None  # '<>' is the not-equal operator
    if not VAR_NAME_RE.match(name):
        raise MalformedVariable(f"malformed variable token {sql[i:k + len(closer)]!r}", i)
    text = sql[i : k + len(closer)]
    return Token("SETVAR" if double else "VAR", text, i)


def split_statements(text: str) -> list[str]:
    """Split a script on top-level semicolons (quote-aware)."""
    parts, buf, i, n = [], [], 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "'":
            j = i + 1
            while j < n:
                if text[j] == "'" and not text.startswith("''", j):
                    break
                j += 2 if text.startswith("''", j) else 1
            buf.append(text[i : j + 1])
            i = j + 1
        elif ch in ('"', "`"):
            j = text.find(ch, i + 1)
            j = n - 1 if j < 0 else j
            buf.append(text[i : j + 1])
            i = j + 1
        elif ch == ";":
            parts.append("".join(buf))
            buf = []
            i += 1
        else:
            buf.append(ch)
            i += 1
    parts.append("".join(buf))
    return [p.strip() for p in parts if p.strip()]


class _Parser:
    def __init__(self, sql: str, pattern_mode: bool, dialect: str):
        if dialect not in DIALECTS:
            raise ParseError(f"unknown dialect {dialect!r}")
        self.sql = sql
        self.pattern_mode = pattern_mode
        self.dialect = dialect
        self.tokens = tokenize(sql, pattern_mode)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.type == "IDENT" and tok.upper in words

    def eat_keyword(self, *words: str) -> Token | None:
        if self.at_keyword(*words):
            return self.next()
        return None

    def expect_keyword(self, word: str) -> Token:
        tok = self.eat_keyword(word)
        if tok is None:
            raise ParseError(f"expected {word}, found {self.peek().text!r}", self.peek().pos)
        return tok

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.type == "PUNCT" and tok.text == text

    def eat_punct(self, text: str) -> bool:
        if self.at_punct(text):
            self.next()
            return True
        return False

    def expect_punct(self, text: str) -> None:
        if not self.eat_punct(text):
            raise ParseError(f"expected {text!r}, found {self.peek().text!r}", self.peek().pos)

    def fail(self, message: str) -> ParseError:
        return ParseError(message, self.peek().pos)

    # -- statements --------------------------------------------------------

    def parse_single_statement(self) -> N.SqlNode:
        stmt = self.parse_statement()
        self.eat_punct(";")
        if self.peek().type != "EOF":
            if self.at_keyword("UNION"):
                raise UnsupportedStatement("UNION queries are not supported", self.peek().pos)
            raise self.fail(f"trailing input after statement: {self.peek().text!r}")
        return stmt

    def parse_statement(self) -> N.SqlNode:
        tok = self.peek()
        if tok.type == "IDENT" and tok.upper in WRITE_STATEMENTS:
            raise UnsupportedStatement(f"{tok.upper} statements are out of scope", tok.pos)
        self.expect_keyword("SELECT")
        clauses = [self.parse_select_clause()]
        clauses.extend(self.parse_trailing_clauses())
        return N.statement(clauses)

    def parse_partial_statement(self) -> N.SqlNode:
        clauses = self.parse_trailing_clauses()
        if not clauses:
            raise self.fail("expected a clause fragment")
        return N.statement(clauses)

    def parse_select_clause(self) -> N.SqlNode:
        items: list[N.SqlNode] = []
        if self.eat_keyword("DISTINCT"):
            items.append(N.keyword("DISTINCT"))
        items.extend(self.parse_item_list(self.parse_select_item))
        return N.clause("SELECT", items)

    def parse_trailing_clauses(self) -> list[N.SqlNode]:
        clauses = []
        if self.eat_keyword("FROM"):
            clauses.append(N.clause("FROM", self.parse_item_list(self.parse_from_item)))
        if self.eat_keyword("WHERE"):
            clauses.append(N.clause("WHERE", [self.parse_or_expr()]))
        if self.at_keyword("GROUP"):
            self.next()
            self.expect_keyword("BY")
            clauses.append(N.clause("GROUP BY", self.parse_item_list(self.parse_group_item)))
        if self.eat_keyword("HAVING"):
            clauses.append(N.clause("HAVING", [self.parse_or_expr()]))
        if self.at_keyword("ORDER"):
            self.next()
            self.expect_keyword("BY")
            clauses.append(N.clause("ORDER BY", self.parse_item_list(self.parse_order_item)))
        if self.eat_keyword("LIMIT"):
            clauses.append(N.clause("LIMIT", [self.parse_additive()]))
        return clauses

    def parse_item_list(self, item_parser) -> list[N.SqlNode]:
        items = [item_parser()]
        while self.eat_punct(","):
            items.append(item_parser())
        return items

    # -- clause items --------------------------------------------------------

    def parse_select_item(self) -> N.SqlNode:
        tok = self.peek()
        if tok.type == "OP" and tok.text == "*":
            self.next()
            return N.star()
        if tok.type == "SETVAR":
            self.next()
            return N.var_set(tok.text[2:-2])
        expr = self.parse_or_expr()
        return self.maybe_alias(expr)

    def parse_group_item(self) -> N.SqlNode:
        if self.peek().type == "SETVAR":
            tok = self.next()
            return N.var_set(tok.text[2:-2])
        return self.parse_additive()

    def parse_order_item(self) -> N.SqlNode:
        if self.peek().type == "SETVAR":
            tok = self.next()
            return N.var_set(tok.text[2:-2])
        expr = self.parse_additive()
        direction = self.eat_keyword("ASC", "DESC")
        if direction:
            return N.sort_item(expr, direction.upper)
        return expr

    def parse_from_item(self) -> N.SqlNode:
        item = self.parse_from_primary()
        while True:
            join_kind = self.peek_join_kind()
            if join_kind is None:
                return item
            cross = join_kind == "CROSS JOIN"
            right = self.parse_from_primary()
            condition = None
            if not cross:
                self.expect_keyword("ON")
                condition = self.parse_or_expr()
            item = N.join(join_kind, item, right, condition)

    def peek_join_kind(self) -> str | None:
        tok = self.peek()
        if tok.type != "IDENT":
            return None
        word = tok.upper
        if word == "JOIN":
            self.next()
            return "JOIN"
        if word in ("INNER", "CROSS") and self.peek(1).upper == "JOIN":
            self.next()
            self.next()
            return f"{word} JOIN"
        if word in ("LEFT", "RIGHT", "FULL"):
            if self.peek(1).upper == "JOIN":
                self.next()
                self.next()
                return f"{word} JOIN"
            if self.peek(1).upper == "OUTER" and self.peek(2).upper == "JOIN":
                self.next()
                self.next()
                self.next()
                return f"{word} JOIN"
        return None

    def parse_from_primary(self) -> N.SqlNode:
        tok = self.peek()
        if tok.type == "VAR":
            self.next()
            var = N.var_elem(tok.text[1:-1])
            alias_node = self.parse_optional_alias_name()
            return var if alias_node is None else N.table_ref(var, alias_node)
        if tok.type == "SETVAR":
            self.next()
            return N.var_set(tok.text[2:-2])
        if self.at_punct("("):
            self.next()
            stmt = self.parse_statement()
            self.expect_punct(")")
            return self.maybe_alias(N.subquery(stmt))
        if tok.type in ("IDENT", "QIDENT"):
            name_node = self.parse_name()
            alias_node = self.parse_optional_alias_name()
            return N.table_ref(name_node, alias_node)
        raise self.fail(f"expected table reference, found {tok.text!r}")

    def maybe_alias(self, expr: N.SqlNode) -> N.SqlNode:
        alias_node = self.parse_optional_alias_name()
        if alias_node is None:
            return expr
        return N.alias(expr, alias_node)

    def parse_optional_alias_name(self) -> N.SqlNode | None:
        if self.eat_keyword("AS"):
            return self.parse_name(allow_var=True)
        tok = self.peek()
        if tok.type == "QIDENT":
            return self.parse_name()
        if tok.type == "IDENT" and tok.upper not in ALIAS_STOPWORDS and tok.upper not in KEYWORDS:
            return self.parse_name()
        return None

    def parse_name(self, allow_var: bool = False) -> N.SqlNode:
        tok = self.next()
        if tok.type == "IDENT":
            return N.name(tok.text)
        if tok.type == "QIDENT":
            return N.name(tok.text, quote=tok.quote)
        if allow_var and tok.type == "VAR":
            return N.var_elem(tok.text[1:-1])
        raise ParseError(f"expected identifier, found {tok.text!r}", tok.pos)

    # -- expressions ---------------------------------------------------------

    def parse_or_expr(self) -> N.SqlNode:
        parts = [self.parse_and_expr()]
        while self.eat_keyword("OR"):
            parts.append(self.parse_and_expr())
        return self.make_conjunction("OR", parts)

    def parse_and_expr(self) -> N.SqlNode:
        parts = [self.parse_not_expr()]
        while self.eat_keyword("AND"):
            parts.append(self.parse_not_expr())
        return self.make_conjunction("AND", parts)

    @staticmethod
    def make_conjunction(connective: str, parts: list[N.SqlNode]) -> N.SqlNode:
        if len(parts) == 1:
            return parts[0]
        flat: list[N.SqlNode] = []
        for part in parts:
            if part.kind is N.NodeKind.CONJUNCTION and part.value == connective:
                flat.extend(part.children)
            else:
                flat.append(part)
        return N.conjunction(connective, flat)

    def parse_not_expr(self) -> N.SqlNode:
        if self.eat_keyword("NOT"):
            return N.unary_op("NOT", self.parse_not_expr())
        return self.parse_comparison()

    def parse_comparison(self) -> N.SqlNode:
        left = self.parse_additive()
        tok = self.peek()
        if tok.type == "OP" and tok.text in ("=", "<", ">", "<=", ">=", "<>", "!="):
            self.next()
            return N.binary_op(tok.text, left, self.parse_additive())
        if self.at_keyword("IS"):
            return self.parse_is_suffix(left)
        negated = False
        if self.at_keyword("NOT") and self.peek(1).upper in ("LIKE", "ILIKE", "IN"):
            self.next()
            negated = True
        if self.at_keyword("LIKE", "ILIKE"):
            op = self.next().upper
            op = f"NOT {op}" if negated else op
            return N.binary_op(op, left, self.parse_additive())
        if self.at_keyword("IN"):
            self.next()
            op = "NOT IN" if negated else "IN"
            return N.binary_op(op, left, self.parse_in_operand())
        if self.at_keyword("BETWEEN"):
            raise self.fail("BETWEEN predicates are not supported")
        if negated:
            raise self.fail("dangling NOT")
        return left

    def parse_is_suffix(self, left: N.SqlNode) -> N.SqlNode:
        self.expect_keyword("IS")
        negated = bool(self.eat_keyword("NOT"))
        if self.at_keyword("NULL"):
            self.next()
            return N.unary_op("IS NOT NULL" if negated else "IS NULL", left)
        if self.at_keyword("DISTINCT"):
            self.next()
            self.expect_keyword("FROM")
            op = "IS NOT DISTINCT FROM" if negated else "IS DISTINCT FROM"
            return N.binary_op(op, left, self.parse_additive())
        raise self.fail("expected NULL or DISTINCT FROM after IS")

    def parse_in_operand(self) -> N.SqlNode:
        if self.peek().type in ("VAR", "SETVAR"):
            return self.parse_primary()
        self.expect_punct("(")
        if self.at_keyword("SELECT"):
            stmt = self.parse_statement()
            self.expect_punct(")")
            return N.subquery(stmt)
        items = self.parse_item_list(self.parse_additive)
        self.expect_punct(")")
        return N.expr_list(items)

    def parse_additive(self) -> N.SqlNode:
        left = self.parse_multiplicative()
        while True:
            tok = self.peek()
            if tok.type == "OP" and tok.text in ("+", "-", "||"):
                self.next()
                left = N.binary_op(tok.text, left, self.parse_multiplicative())
            else:
                return left

    def parse_multiplicative(self) -> N.SqlNode:
        left = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.type == "OP" and tok.text in ("*", "/", "%"):
                self.next()
                left = N.binary_op(tok.text, left, self.parse_unary())
            else:
                return left

    def parse_unary(self) -> N.SqlNode:
        tok = self.peek()
        if tok.type == "OP" and tok.text in ("-", "+"):
            self.next()
            return N.unary_op(tok.text, self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> N.SqlNode:
        tok = self.peek()
        if tok.type == "NUMBER":
            self.next()
            return N.literal(tok.text)
        if tok.type == "STRING":
            self.next()
            return self.make_string_node(tok)
        if tok.type == "VAR":
            self.next()
            node = N.var_elem(tok.text[1:-1])
            if self.at_punct("."):
                return self.parse_column_suffix(node)
            return node
        if tok.type == "SETVAR":
            self.next()
            return N.var_set(tok.text[2:-2])
        if self.at_punct("("):
            self.next()
            if self.at_keyword("SELECT"):
                stmt = self.parse_statement()
                self.expect_punct(")")
                return N.subquery(stmt)
            inner = self.parse_or_expr()
            self.expect_punct(")")
            return inner
        if tok.type == "QIDENT":
            name_node = self.parse_name()
            if self.at_punct("."):
                return self.parse_column_suffix(name_node)
            return N.column_ref(name_node)
        if tok.type == "IDENT":
            upper = tok.upper
            if upper in ("TRUE", "FALSE", "NULL"):
                self.next()
                return N.literal(upper)
            if upper == "CAST" and self.peek(1).text == "(":
                return self.parse_cast()
            if upper == "INTERVAL":
                return self.parse_interval_raw()
            if upper == "CASE":
                return self.parse_case_raw()
            if upper == "EXISTS" and self.peek(1).text == "(":
                self.next()
                self.next()
                stmt = self.parse_statement()
                self.expect_punct(")")
                return N.unary_op("EXISTS", N.subquery(stmt))
            if self.peek(1).type == "PUNCT" and self.peek(1).text == "(":
                return self.parse_func_call()
            name_node = self.parse_name()
            if self.at_punct("."):
                return self.parse_column_suffix(name_node)
            return N.column_ref(name_node)
        raise self.fail(f"unexpected token {tok.text!r}")

    def parse_column_suffix(self, qualifier: N.SqlNode) -> N.SqlNode:
        self.expect_punct(".")
        tok = self.peek()
        if tok.type == "OP" and tok.text == "*":
            self.next()
            return N.column_ref(N.star(), qualifier)
        return N.column_ref(self.parse_name(allow_var=True), qualifier)

    def parse_func_call(self) -> N.SqlNode:
        fname = self.next().text
        self.expect_punct("(")
        args: list[N.SqlNode] = []
        if self.eat_keyword("DISTINCT"):
            args.append(N.keyword("DISTINCT"))
        if not self.at_punct(")"):
            args.extend(self.parse_item_list(self.parse_func_arg))
        self.expect_punct(")")
        return N.func_call(fname, args)

    def parse_func_arg(self) -> N.SqlNode:
        tok = self.peek()
        if tok.type == "OP" and tok.text == "*":
            self.next()
            return N.star()
        if tok.type == "SETVAR":
            self.next()
            return N.var_set(tok.text[2:-2])
        return self.parse_or_expr()

    def parse_cast(self) -> N.SqlNode:
        self.next()
        self.expect_punct("(")
        expr = self.parse_additive()
        self.expect_keyword("AS")
        type_words = [self.next().text]
        while self.peek().type == "IDENT" and not self.at_punct(")"):
            type_words.append(self.next().text)
        self.expect_punct(")")
        return N.func_call("CAST", [expr, N.keyword(" ".join(type_words))])

    def parse_interval_raw(self) -> N.SqlNode:
        words = [self.next().text]
        tok = self.peek()
        if tok.type in ("NUMBER", "STRING", "IDENT"):
            words.append(self.next().text)
        if self.peek().type == "IDENT" and self.peek().upper in INTERVAL_UNITS:
            words.append(self.next().text)
        return N.raw(" ".join(words))

    def parse_case_raw(self) -> N.SqlNode:
        start = self.peek().pos
        depth = 0
        while True:
            tok = self.next()
            if tok.type == "EOF":
                raise ParseError("unterminated CASE expression", start)
            if tok.type == "IDENT" and tok.upper == "CASE":
                depth += 1
            elif tok.type == "IDENT" and tok.upper == "END":
                depth -= 1
                if depth == 0:
                    end = tok.pos + len(tok.text)
                    return N.raw(self.sql[start:end])

    def make_string_node(self, tok: Token) -> N.SqlNode:
        if not self.pattern_mode:
            return N.literal(tok.text)
        content = tok.text[1:-1]
        pieces = TEMPLATE_VAR_RE.split(content)
        if len(pieces) == 1:
            return N.literal(tok.text)
        segments: list[N.SqlNode] = []
        for index, piece in enumerate(pieces):
            if index % 2 == 1:
                segments.append(N.var_elem(piece))
            elif piece:
                segments.append(N.text_segment(piece.replace("''", "'")))
        return N.string_template(segments)


CLAUSE_START_WORDS = ("FROM", "WHERE", "GROUP", "HAVING", "ORDER", "LIMIT")


def parse_query(sql: str, dialect: str = "generic") -> N.SqlNode:
    """Parse one concrete SELECT-family statement."""
    parser = _Parser(sql, pattern_mode=False, dialect=dialect)
    return parser.parse_single_statement()


def parse_pattern(text: str, dialect: str = "generic") -> N.SqlNode:
    """Parse rule-pattern text: a statement, clause fragment, predicate,
    or expression, possibly variablized.

    Partial inputs come back wrapped in a fragment marker recording their
    syntactic level; full statements are returned bare.
    """
    if not text.strip():
        return N.fragment(N.LEVEL_STATEMENT, N.statement([]))
    parser = _Parser(text, pattern_mode=True, dialect=dialect)
    first = parser.peek()
    if first.type == "IDENT" and first.upper == "SELECT":
        return parser.parse_single_statement()
    if first.type == "IDENT" and first.upper in CLAUSE_START_WORDS:
        stmt = parser.parse_partial_statement()
        parser.eat_punct(";")
        if parser.peek().type != "EOF":
            raise parser.fail(f"trailing input: {parser.peek().text!r}")
        return N.fragment(N.LEVEL_STATEMENT, stmt)
    expr = parser.parse_or_expr()
    parser.eat_punct(";")
    if parser.peek().type != "EOF":
        raise parser.fail(f"trailing input: {parser.peek().text!r}")
    return N.fragment(N.classify_expression_level(expr), expr)
