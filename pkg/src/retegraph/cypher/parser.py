"""Recursive-descent parser producing the query AST.

Covers the supported construct set: MATCH / OPTIONAL MATCH with node-label
and edge-type patterns (including `*low..up` ranges), WHERE, WITH, UNWIND,
RETURN [DISTINCT], ORDER BY / SKIP / LIMIT.  Anything recognizably openCypher
but out of scope (CREATE, MERGE, inline property maps, ...) raises
UnsupportedFeature with a position; everything else malformed raises
SyntaxError-style diagnostics as ``line:col: message``.
"""

from __future__ import annotations

from ..errors import QuerySyntaxError, UnsupportedFeatureError
from . import ast
from .lexer import UNSUPPORTED_KEYWORDS, Token, tokenize

AGG_FUNCS = set(ast.AGGREGATE_FUNCS)


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0
        self.anon = 0

    # --- token helpers -----------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def at_end(self):
        return self.cur.kind == "EOF"

    def advance(self) -> Token:
        tok = self.cur
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.cur
        raise QuerySyntaxError(message, tok.line, tok.col)

    def unsupported(self, message, tok=None):
        tok = tok or self.cur
        raise UnsupportedFeatureError(message, tok.line, tok.col)

    def is_punct(self, text):
        return self.cur.kind == "PUNCT" and self.cur.text == text

    def is_keyword(self, word):
        return self.cur.kind == "KEYWORD" and self.cur.text.lower() == word

    def accept_punct(self, text):
        if self.is_punct(text):
            return self.advance()
        return None

    def expect_punct(self, text):
        if not self.is_punct(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def accept_keyword(self, word):
        if self.is_keyword(word):
            return self.advance()
        return None

    def expect_keyword(self, word):
        if not self.is_keyword(word):
            self.error(f"expected {word.upper()}")
        return self.advance()

    def expect_ident(self, what="identifier"):
        if self.cur.kind != "IDENT":
            if self.cur.kind == "KEYWORD":
                self.error(f"expected {what}, found keyword {self.cur.text!r}")
            self.error(f"expected {what}")
        return self.advance()

    def fresh_name(self, prefix):
        self.anon += 1
        return f"#{prefix}{self.anon}"

    def check_unsupported_keyword(self):
        if self.cur.kind == "KEYWORD" and self.cur.text.lower() in UNSUPPORTED_KEYWORDS:
            self.unsupported(f"{self.cur.text.upper()} is not supported")

    # --- query --------------------------------------------------------------

    def parse_query(self) -> ast.Query:
        clauses = []
        returned = False
        while not returned:
            self.check_unsupported_keyword()
            if self.is_keyword("match") or self.is_keyword("optional"):
                clauses.append(self.parse_match())
            elif self.is_keyword("with"):
                clauses.append(self.parse_with())
            elif self.is_keyword("unwind"):
                clauses.append(self.parse_unwind())
            elif self.is_keyword("return"):
                clauses.append(self.parse_return())
                returned = True
            elif self.is_keyword("where"):
                self.error("WHERE must immediately follow MATCH, OPTIONAL MATCH, or WITH")
            else:
                self.error("expected a clause (MATCH, OPTIONAL MATCH, WITH, UNWIND, RETURN)")
        tail = self.parse_order_skip_limit()
        if tail is not None:
            clauses.append(tail)
        if not self.at_end():
            self.check_unsupported_keyword()
            self.error("unexpected input after query")
        return ast.Query(tuple(clauses), pos=(1, 1))

    def parse_match(self) -> ast.Match:
        pos = self.cur.pos
        optional = self.accept_keyword("optional") is not None
        self.expect_keyword("match")
        patterns = [self.parse_pattern()]
        while self.accept_punct(","):
            patterns.append(self.parse_pattern())
        where = None
        if self.accept_keyword("where"):
            where = self.parse_expression()
        return ast.Match(tuple(patterns), optional=optional, where=where, pos=pos)

    def parse_with(self) -> ast.With:
        pos = self.expect_keyword("with").pos
        if self.is_punct("*"):
            self.unsupported("WITH * is not supported")
        distinct = self.accept_keyword("distinct") is not None
        items = self.parse_items()
        where = None
        if self.accept_keyword("where"):
            where = self.parse_expression()
        if self.is_keyword("order") or self.is_keyword("skip") or self.is_keyword("limit"):
            self.unsupported("ORDER BY/SKIP/LIMIT after WITH is not supported")
        return ast.With(items, distinct=distinct, where=where, pos=pos)

    def parse_unwind(self) -> ast.Unwind:
        pos = self.expect_keyword("unwind").pos
        expression = self.parse_expression()
        self.expect_keyword("as")
        alias = self.expect_ident("alias").text
        return ast.Unwind(expression, alias, pos=pos)

    def parse_return(self) -> ast.Return:
        pos = self.expect_keyword("return").pos
        if self.is_punct("*"):
            self.unsupported("RETURN * is not supported")
        distinct = self.accept_keyword("distinct") is not None
        return ast.Return(self.parse_items(), distinct=distinct, pos=pos)

    def parse_items(self):
        items = [self.parse_item()]
        while self.accept_punct(","):
            items.append(self.parse_item())
        return tuple(items)

    def parse_item(self) -> ast.ReturnItem:
        pos = self.cur.pos
        expression = self.parse_expression()
        alias = None
        if self.accept_keyword("as"):
            alias = self.expect_ident("alias").text
        return ast.ReturnItem(expression, alias, pos=pos)

    def parse_order_skip_limit(self):
        pos = self.cur.pos
        keys = []
        skip = 0
        limit = None
        seen = False
        if self.accept_keyword("order"):
            self.expect_keyword("by")
            seen = True
            while True:
                key_pos = self.cur.pos
                expression = self.parse_expression()
                ascending = True
                if self.accept_keyword("desc") or self.accept_keyword("descending"):
                    ascending = False
                elif self.accept_keyword("asc") or self.accept_keyword("ascending"):
                    ascending = True
                keys.append(ast.SortKey(expression, ascending, pos=key_pos))
                if not self.accept_punct(","):
                    break
        if self.accept_keyword("skip"):
            seen = True
            skip = self.parse_count("SKIP")
        if self.accept_keyword("limit"):
            seen = True
            limit = self.parse_count("LIMIT")
        if not seen:
            return None
        return ast.OrderSkipLimit(tuple(keys), skip, limit, pos=pos)

    def parse_count(self, what):
        tok = self.cur
        if tok.kind != "INT":
            self.error(f"{what} expects a non-negative integer literal")
        self.advance()
        return int(tok.text)

    # --- patterns --------------------------------------------------------------

    def parse_pattern(self) -> ast.Pattern:
        pos = self.cur.pos
        head = self.parse_node_pattern()
        hops = []
        while self.is_punct("<") or self.is_punct("-"):
            rel = self.parse_rel_pattern()
            node = self.parse_node_pattern()
            hops.append((rel, node))
        return ast.Pattern(head, tuple(hops), pos=pos)

    def parse_node_pattern(self) -> ast.NodePattern:
        pos = self.expect_punct("(").pos
        var = None
        if self.cur.kind == "IDENT":
            var = self.advance().text
        labels = []
        while self.accept_punct(":"):
            labels.append(self.expect_ident("label").text)
        if self.is_punct("{"):
            self.unsupported("inline property maps are not supported; use WHERE")
        self.expect_punct(")")
        anonymous = var is None
        if anonymous:
            var = self.fresh_name("v")
        return ast.NodePattern(var, tuple(labels), anonymous=anonymous, pos=pos)

    def parse_rel_pattern(self) -> ast.RelPattern:
        pos = self.cur.pos
        incoming = False
        if self.accept_punct("<"):
            incoming = True
        self.expect_punct("-")
        var = None
        types = []
        rng = None
        if self.accept_punct("["):
            if self.cur.kind == "IDENT":
                var = self.advance().text
            if self.accept_punct(":"):
                types.append(self.expect_ident("edge type").text)
                while self.accept_punct("|"):
                    self.accept_punct(":")  # tolerate [:T1|:T2]
                    types.append(self.expect_ident("edge type").text)
            if self.is_punct("*"):
                rng = self.parse_range()
            if self.is_punct("{"):
                self.unsupported("inline property maps are not supported; use WHERE")
            self.expect_punct("]")
        self.expect_punct("-")
        outgoing = self.accept_punct(">") is not None
        if incoming and outgoing:
            self.error("a relationship cannot point both ways")
        direction = "in" if incoming else ("out" if outgoing else "both")
        anonymous = var is None
        if anonymous:
            var = self.fresh_name("e")
        return ast.RelPattern(var, tuple(types), direction, rng, anonymous=anonymous, pos=pos)

    def parse_range(self):
        tok = self.expect_punct("*")
        low, up = 1, None
        if self.cur.kind == "INT":
            low = int(self.advance().text)
            up = low  # "*n" alone means exactly n hops
        if self.accept_punct(".."):
            up = None
            if self.cur.kind == "INT":
                up = int(self.advance().text)
        if up is not None and up < low:
            self.error(f"range upper bound {up} below lower bound {low}", tok)
        return (low, up)

    # --- expressions --------------------------------------------------------------

    def parse_expression(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while True:
            tok = self.accept_keyword("or")
            if not tok:
                return left
            left = ast.BoolOp("or", left, self.parse_and(), pos=tok.pos)

    def parse_and(self):
        left = self.parse_not()
        while True:
            tok = self.accept_keyword("and")
            if not tok:
                return left
            left = ast.BoolOp("and", left, self.parse_not(), pos=tok.pos)

    def parse_not(self):
        tok = self.accept_keyword("not")
        if tok:
            return ast.Not(self.parse_not(), pos=tok.pos)
        return self.parse_comparison()

    _COMPARISONS = ("=", "<>", "<=", ">=", "<", ">")

    def parse_comparison(self):
        left = self.parse_additive()
        if self.cur.kind == "PUNCT" and self.cur.text in self._COMPARISONS:
            tok = self.advance()
            right = self.parse_additive()
            if self.cur.kind == "PUNCT" and self.cur.text in self._COMPARISONS:
                self.error("chained comparisons are not supported")
            return ast.Comparison(tok.text, left, right, pos=tok.pos)
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.cur.kind == "PUNCT" and self.cur.text in ("+", "-"):
            tok = self.advance()
            left = ast.Arithmetic(tok.text, left, self.parse_multiplicative(), pos=tok.pos)
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.cur.kind == "PUNCT" and self.cur.text in ("*", "/"):
            tok = self.advance()
            left = ast.Arithmetic(tok.text, left, self.parse_unary(), pos=tok.pos)
        return left

    def parse_unary(self):
        if self.is_punct("-"):
            tok = self.advance()
            return ast.Negate(self.parse_unary(), pos=tok.pos)
        if self.is_punct("+"):
            self.advance()
            return self.parse_unary()
        return self.parse_primary()

    def parse_primary(self):
        tok = self.cur
        if tok.kind == "INT":
            self.advance()
            return ast.Literal(int(tok.text), pos=tok.pos)
        if tok.kind == "FLOAT":
            self.advance()
            return ast.Literal(float(tok.text), pos=tok.pos)
        if tok.kind == "STRING":
            self.advance()
            return ast.Literal(tok.text, pos=tok.pos)
        if tok.kind == "KEYWORD":
            word = tok.text.lower()
            if word == "true":
                self.advance()
                return ast.Literal(True, pos=tok.pos)
            if word == "false":
                self.advance()
                return ast.Literal(False, pos=tok.pos)
            if word == "null":
                self.advance()
                return ast.Literal(None, pos=tok.pos)
            self.check_unsupported_keyword()
            self.error("expected an expression")
        if tok.kind == "IDENT":
            self.advance()
            if self.is_punct("("):
                return self.parse_call(tok)
            if self.is_punct("."):
                self.advance()
                key = self.expect_ident("property key").text
                if self.is_punct("."):
                    self.unsupported("nested property access is not supported")
                return ast.PropAccess(tok.text, key, pos=tok.pos)
            if self.is_punct(":"):
                labels = []
                while self.accept_punct(":"):
                    labels.append(self.expect_ident("label").text)
                return ast.LabelPredicate(tok.text, tuple(labels), pos=tok.pos)
            return ast.Var(tok.text, pos=tok.pos)
        if tok.kind == "PUNCT" and tok.text == "(":
            pattern = self.try_parse_pattern_predicate()
            if pattern is not None:
                return pattern
            self.expect_punct("(")
            inner = self.parse_expression()
            self.expect_punct(")")
            return inner
        if tok.kind == "PUNCT" and tok.text == "[":
            self.unsupported("list literals are not supported")
        if tok.kind == "PUNCT" and tok.text == "{":
            self.unsupported("map literals are not supported")
        self.error("expected an expression")

    def parse_call(self, name_tok):
        func = name_tok.text.lower()
        self.expect_punct("(")
        if func not in AGG_FUNCS:
            self.unsupported(f"unknown function {name_tok.text!r}", name_tok)
        if self.is_punct("*"):
            self.unsupported("count(*) is not supported; aggregate an expression")
        if self.accept_keyword("distinct"):
            self.unsupported("DISTINCT inside aggregates is not supported", name_tok)
        argument = self.parse_expression()
        self.expect_punct(")")
        return ast.AggregateCall(func, argument, pos=name_tok.pos)

    def try_parse_pattern_predicate(self):
        """Attempt to read a pattern with at least one hop; roll back on failure."""
        saved_i, saved_anon = self.i, self.anon
        try:
            pattern = self.parse_pattern()
        except (QuerySyntaxError, UnsupportedFeatureError):
            self.i, self.anon = saved_i, saved_anon
            return None
        if not pattern.hops:
            self.i, self.anon = saved_i, saved_anon
            return None
        return ast.PatternPredicate(pattern, pos=pattern.pos)


def parse_query(text: str) -> ast.Query:
    """Parse query text into an AST; raises QuerySyntaxError or
    UnsupportedFeatureError with a line:col position."""
    return _Parser(text).parse_query()
