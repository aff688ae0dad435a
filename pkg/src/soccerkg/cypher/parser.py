"""Recursive-descent parser for the query subset (grammar in docs/grammar.md)."""

from __future__ import annotations

from .ast import (
    And,
    Case,
    Compare,
    Expr,
    FuncCall,
    IsNull,
    ListLit,
    Literal,
    NodePattern,
    Not,
    Or,
    PathPattern,
    Prop,
    Query,
    RelPattern,
    ReturnItem,
    SortItem,
    Var,
)
from .lexer import Token, tokenize

_CMP_TOKENS = {"EQ": "=", "NE": "<>", "LT": "<", "LE": "<=", "GT": ">", "GE": ">="}


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")
        self.offset = offset
        self.expected = expected


INT64_MIN, INT64_MAX = -(2**63), 2**63 - 1


def _int64(value: int, offset: int) -> int:
    if not INT64_MIN <= value <= INT64_MAX:
        raise ParseError("integer literal does not fit in 64 bits", offset)
    return value


class _Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind != "EOF":
            last = tokens[-1].offset if tokens else 0
            tokens = [*tokens, Token("EOF", None, last)]
        self.toks = tokens
        self.i = 0

    # -- token helpers --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, kind: str, value: object = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def at_kw(self, *words: str) -> bool:
        return self.tok.kind == "KEYWORD" and self.tok.value in words

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def fail(self, expected: set[str] | frozenset[str], what: str | None = None) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.value)
        return ParseError(what or f"unexpected {found}", t.offset, frozenset(expected))

    def expect(self, kind: str, label: str | None = None) -> Token:
        if not self.at(kind):
            raise self.fail({label or kind})
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            raise self.fail({word})
        return self.advance()

    def name(self, what: str) -> str:
        # keywords are allowed as labels, types and property keys
        if self.tok.kind in ("IDENT", "KEYWORD"):
            t = self.advance()
            return t.value if t.kind == "IDENT" else _keyword_spelling(t)
        raise self.fail({what})

    # -- query ---------------------------------------------------------------

    def query(self) -> Query:
        if not self.at_kw("MATCH"):
            raise self.fail({"MATCH"})
        self.advance()
        patterns = [self.path()]
        while self.at("COMMA"):
            self.advance()
            patterns.append(self.path())
        where = None
        if self.at_kw("WHERE"):
            self.advance()
            where = self.expr()
        if not self.at_kw("RETURN"):
            raise self.fail({"WHERE", "RETURN", ","} if where is None else {"RETURN"})
        self.advance()
        distinct = False
        if self.at_kw("DISTINCT"):
            self.advance()
            distinct = True
        items = [self.return_item()]
        while self.at("COMMA"):
            self.advance()
            items.append(self.return_item())
        order: list[SortItem] = []
        if self.at_kw("ORDER"):
            self.advance()
            self.expect_kw("BY")
            order.append(self.sort_item())
            while self.at("COMMA"):
                self.advance()
                order.append(self.sort_item())
        limit = None
        if self.at_kw("LIMIT"):
            self.advance()
            t = self.tok
            if t.kind != "INT":
                raise self.fail({"positive integer"})
            self.advance()
            if t.value <= 0:
                raise ParseError("LIMIT must be a positive integer", t.offset, frozenset({"positive integer"}))
            limit = t.value
        if not self.at("EOF"):
            expected = {"end of input"}
            if limit is None:
                expected.add("LIMIT")
                if not order:
                    expected.update({"ORDER", ","})
            raise self.fail(expected)
        return Query(
            patterns=tuple(patterns),
            items=tuple(items),
            where=where,
            distinct=distinct,
            order_by=tuple(order),
            limit=limit,
        )

    def return_item(self) -> ReturnItem:
        e = self.expr()
        alias = None
        if self.at_kw("AS"):
            self.advance()
            alias = self.name("alias")
        return ReturnItem(e, alias)

    def sort_item(self) -> SortItem:
        e = self.expr()
        desc = False
        if self.at_kw("ASC", "ASCENDING"):
            self.advance()
        elif self.at_kw("DESC", "DESCENDING"):
            self.advance()
            desc = True
        return SortItem(e, desc)

    # -- patterns ------------------------------------------------------------

    def path(self) -> PathPattern:
        nodes = [self.node()]
        rels = []
        while self.at("DASH") or (self.at("LT") and self.peek().kind == "DASH"):
            rels.append(self.rel())
            nodes.append(self.node())
        return PathPattern(tuple(nodes), tuple(rels))

    def node(self) -> NodePattern:
        self.expect("LPAREN", "(")
        var = label = None
        if self.at("IDENT"):
            var = self.advance().value
        if self.at("COLON"):
            self.advance()
            label = self.name("label")
        props = self.prop_map() if self.at("LBRACE") else ()
        if not self.at("RPAREN"):
            raise self.fail({")"} | ({"{"} if not props else set()) | ({":"} if label is None else set()))
        self.advance()
        return NodePattern(var, label, props)

    def rel(self) -> RelPattern:
        start = self.tok.offset
        left_arrow = False
        if self.at("LT"):
            self.advance()
            left_arrow = True
        self.expect("DASH", "-")
        self.expect("LBRACKET", "[")
        var = None
        if self.at("IDENT"):
            var = self.advance().value
        if not self.at("COLON"):
            raise self.fail({":"}, "relationship type is required")
        self.advance()
        etype = self.name("relationship type")
        props = self.prop_map() if self.at("LBRACE") else ()
        self.expect("RBRACKET", "]")
        self.expect("DASH", "-")
        right_arrow = False
        if self.at("GT"):
            self.advance()
            right_arrow = True
        if left_arrow and right_arrow:
            raise ParseError("relationship cannot point both ways", start)
        direction = "in" if left_arrow else "out" if right_arrow else "both"
        return RelPattern(etype=etype, var=var, direction=direction, props=props)

    def prop_map(self) -> tuple[tuple[str, Literal], ...]:
        self.expect("LBRACE", "{")
        entries: list[tuple[str, Literal]] = []
        seen = set()
        if not self.at("RBRACE"):
            while True:
                at = self.tok.offset
                key = self.name("property key")
                if key in seen:
                    raise ParseError(f"duplicate key {key!r} in property map", at)
                seen.add(key)
                self.expect("COLON", ":")
                lit = self.literal()
                if lit is None or lit.kind == "null":
                    raise self.fail({"string", "number", "true", "false"})
                entries.append((key, lit))
                if not self.at("COMMA"):
                    break
                self.advance()
        self.expect("RBRACE", "}")
        return tuple(entries)

    def literal(self) -> Literal | None:
        t = self.tok
        if t.kind == "STRING":
            self.advance()
            return Literal("str", t.value)
        if t.kind == "INT":
            self.advance()
            return Literal("int", _int64(t.value, t.offset))
        if t.kind == "FLOAT":
            self.advance()
            return Literal("float", t.value)
        if t.kind == "DASH" and self.peek().kind in ("INT", "FLOAT"):
            self.advance()
            n = self.advance()
            if n.kind == "INT":
                return Literal("int", _int64(-n.value, t.offset))
            return Literal("float", -n.value)
        if self.at_kw("TRUE", "FALSE"):
            self.advance()
            return Literal("bool", t.value == "TRUE")
        if self.at_kw("NULL"):
            self.advance()
            return Literal("null", None)
        return None

    # -- expressions ---------------------------------------------------------

    def expr(self) -> Expr:
        items = [self.and_expr()]
        while self.at_kw("OR"):
            self.advance()
            items.append(self.and_expr())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def and_expr(self) -> Expr:
        items = [self.not_expr()]
        while self.at_kw("AND"):
            self.advance()
            items.append(self.not_expr())
        return items[0] if len(items) == 1 else And(tuple(items))

    def not_expr(self) -> Expr:
        if self.at_kw("NOT"):
            self.advance()
            return Not(self.not_expr())
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.atom()
        t = self.tok
        if t.kind in _CMP_TOKENS:
            self.advance()
            return Compare(_CMP_TOKENS[t.kind], left, self.atom())
        if self.at_kw("CONTAINS", "IN"):
            self.advance()
            return Compare(t.value, left, self.atom())
        if self.at_kw("STARTS", "ENDS"):
            self.advance()
            self.expect_kw("WITH")
            return Compare(f"{t.value}_WITH", left, self.atom())
        if self.at_kw("IS"):
            self.advance()
            negated = False
            if self.at_kw("NOT"):
                self.advance()
                negated = True
            self.expect_kw("NULL")
            return IsNull(left, negated)
        return left

    def atom(self) -> Expr:
        t = self.tok
        lit = self.literal()
        if lit is not None:
            return lit
        if t.kind == "LPAREN":
            self.advance()
            e = self.expr()
            self.expect("RPAREN", ")")
            return e
        if t.kind == "LBRACKET":
            self.advance()
            items = []
            if not self.at("RBRACKET"):
                items.append(self.expr())
                while self.at("COMMA"):
                    self.advance()
                    items.append(self.expr())
            self.expect("RBRACKET", "]")
            return ListLit(tuple(items))
        if self.at_kw("CASE"):
            return self.case()
        if t.kind == "IDENT":
            self.advance()
            if self.at("LPAREN"):
                return self.call(t.value)
            if self.at("DOT"):
                self.advance()
                return Prop(t.value, self.name("property key"))
            return Var(t.value)
        raise self.fail({"expression"})

    def call(self, name: str) -> FuncCall:
        self.expect("LPAREN", "(")
        fname = name.lower()
        if self.at("STAR"):
            if fname != "count":
                raise self.fail({"expression"}, "'*' is only allowed in count(*)")
            self.advance()
            self.expect("RPAREN", ")")
            return FuncCall("count", (), star=True)
        distinct = False
        if self.at_kw("DISTINCT"):
            self.advance()
            distinct = True
        args = []
        if not self.at("RPAREN"):
            args.append(self.expr())
            while self.at("COMMA"):
                self.advance()
                args.append(self.expr())
        self.expect("RPAREN", ")")
        return FuncCall(fname, tuple(args), distinct=distinct)

    def case(self) -> Case:
        self.expect_kw("CASE")
        whens = []
        while self.at_kw("WHEN"):
            self.advance()
            cond = self.expr()
            self.expect_kw("THEN")
            whens.append((cond, self.expr()))
        if not whens:
            raise self.fail({"WHEN"})
        default = None
        if self.at_kw("ELSE"):
            self.advance()
            default = self.expr()
        self.expect_kw("END")
        return Case(tuple(whens), default)


def _keyword_spelling(t: Token) -> str:
    return t.text or str(t.value)


def parse_tokens(tokens: list[Token]) -> Query:
    return _Parser(tokens).query()


def parse(text: str) -> Query:
    """Tokenize and parse; raises LexError or ParseError with an offset."""
    return parse_tokens(tokenize(text))
