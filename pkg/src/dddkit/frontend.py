"""Textual DSL frontend: lexing, parsing with source spans, printing.

Keywords are contextual -- the lexer only produces identifiers, strings and
punctuation, and the parser matches expected words.  That keeps names like
``list`` or ``value`` usable as identifiers where the grammar allows.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .model import (
    INTERNAL,
    LIST,
    ONE,
    PRIMITIVES,
    PUBLIC,
    Aggregate,
    DomainEvent,
    DomainModel,
    DomainService,
    EntityDecl,
    FieldDecl,
    MethodDecl,
    OverrideAnnotation,
    Repository,
    ROOT_CODES,
    Span,
    TypeRef,
    ValueObject,
    canonical_print,
    wf_check,
)

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")

T_IDENT = "ident"
T_STRING = "string"
T_PUNCT = "punct"
T_EOF = "eof"

_PUNCT = ("{", "}", "(", ")", "<", ">", ":", ",", ".", "@")


@dataclass
class Token:
    kind: str
    value: str
    span: Span


@dataclass
class ParseError:
    span: Span
    message: str
    expected: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"span": self.span.to_json(), "message": self.message, "expected": self.expected}


class ParseFailure(Exception):
    """Raised when parsing produced errors; carries the error list."""

    def __init__(self, errors: list[ParseError]):
        super().__init__("; ".join(e.message for e in errors) or "parse failed")
        self.errors = errors


def _lex(text: str, filename: str) -> tuple[list[Token], list[ParseError]]:
    tokens: list[Token] = []
    errors: list[ParseError] = []
    line, col, i, n = 1, 1, 0, len(text)

    def span(l1, c1, l2, c2):
        return Span(filename, l1, c1, l2, c2)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group(0)
            tokens.append(Token(T_IDENT, word, span(line, col, line, col + len(word) - 1)))
            i = m.end()
            col += len(word)
            continue
        if ch == '"':
            l1, c1 = line, col
            i += 1
            col += 1
            buf = []
            closed = False
            while i < n:
                c = text[i]
                if c == "\\" and i + 1 < n:
                    nxt = text[i + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(nxt, nxt))
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    closed = True
                    i += 1
                    col += 1
                    break
                if c == "\n":
                    break
                buf.append(c)
                i += 1
                col += 1
            if not closed:
                errors.append(ParseError(span(l1, c1, line, col), "unterminated string literal", ['"']))
            tokens.append(Token(T_STRING, "".join(buf), span(l1, c1, line, col - 1)))
            continue
        if ch in _PUNCT:
            tokens.append(Token(T_PUNCT, ch, span(line, col, line, col)))
            i += 1
            col += 1
            continue
        errors.append(ParseError(span(line, col, line, col), f"unexpected character {ch!r}"))
        i += 1
        col += 1

    tokens.append(Token(T_EOF, "", span(line, col, line, col)))
    return tokens, errors


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.errors: list[ParseError] = []
        self.filename = filename

    # -- token helpers ----------------------------------------------------
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def at_word(self, *words: str) -> bool:
        t = self.peek()
        return t.kind == T_IDENT and t.value in words

    def at_punct(self, p: str) -> bool:
        t = self.peek()
        return t.kind == T_PUNCT and t.value == p

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != T_EOF:
            self.pos += 1
        return t

    def error(self, message: str, expected: Optional[list[str]] = None, span: Optional[Span] = None):
        self.errors.append(ParseError(span or self.peek().span, message, expected or []))

    def expect_word(self, word: str) -> Optional[Token]:
        if self.at_word(word):
            return self.advance()
        self.error(f"expected '{word}'", [word])
        return None

    def expect_punct(self, p: str) -> Optional[Token]:
        if self.at_punct(p):
            return self.advance()
        self.error(f"expected '{p}'", [p])
        return None

    def expect_ident(self, what: str) -> Optional[Token]:
        t = self.peek()
        if t.kind == T_IDENT:
            return self.advance()
        self.error(f"expected {what}", ["identifier"])
        return None

    def skip_to_close_brace(self):
        """Panic-mode recovery: skip to the matching '}' of the current block."""
        depth = 0
        while True:
            t = self.peek()
            if t.kind == T_EOF:
                return
            if t.kind == T_PUNCT and t.value == "{":
                depth += 1
            elif t.kind == T_PUNCT and t.value == "}":
                if depth == 0:
                    self.advance()
                    return
                depth -= 1
            self.advance()

    # -- grammar -----------------------------------------------------------
    def parse_model(self) -> Optional[DomainModel]:
        self.expect_word("domain")
        name = self.expect_ident("domain name")
        if name is None:
            return None
        model = DomainModel(name.value, span=name.span)
        if self.expect_punct("{") is None:
            return None
        while not self.at_punct("}") and self.peek().kind != T_EOF:
            start = self.pos
            self.parse_top_element(model)
            if self.pos == start:
                self.error(f"unexpected token {self.peek().value!r}")
                self.advance()
        if self.peek().kind == T_EOF and not self.at_punct("}"):
            self.error("unexpected end of input", ["}"])
        else:
            self.expect_punct("}")
        return model

    def parse_annotations(self) -> tuple[list[OverrideAnnotation], Optional[str]]:
        annotations: list[OverrideAnnotation] = []
        was: Optional[str] = None
        while self.at_punct("@"):
            at = self.advance()
            kind = self.expect_ident("annotation name")
            if kind is None:
                break
            if kind.value == "allow":
                self.expect_punct("(")
                rule = self.expect_ident("rule id")
                self.expect_punct(",")
                self.expect_word("reason")
                self.expect_punct(":")
                reason_tok = self.peek()
                if reason_tok.kind == T_STRING:
                    self.advance()
                else:
                    self.error("expected reason string", ["string"])
                    reason_tok = None
                self.expect_punct(")")
                if rule is not None:
                    annotations.append(
                        OverrideAnnotation(
                            rule.value,
                            reason_tok.value if reason_tok else "",
                            at.span,
                        )
                    )
            elif kind.value == "was":
                self.expect_punct("(")
                old = self.peek()
                if old.kind == T_STRING:
                    self.advance()
                    was = old.value
                else:
                    self.error("expected old name string", ["string"])
                self.expect_punct(")")
            else:
                self.error(f"unknown annotation '@{kind.value}'", ["allow", "was"], kind.span)
        return annotations, was

    def parse_top_element(self, model: DomainModel):
        annotations, was = self.parse_annotations()
        if self.at_word("aggregate"):
            agg = self.parse_aggregate()
            if agg is not None:
                agg.annotations = annotations
                agg.was = was
                model.aggregates.append(agg)
        elif self.at_word("value"):
            vo = self.parse_value_object()
            if vo is not None:
                vo.annotations = annotations
                vo.was = was
                model.value_objects.append(vo)
        elif self.at_word("repository"):
            self.advance()
            name = self.expect_ident("repository name")
            self.expect_word("for")
            target = self.expect_ident("aggregate name")
            if name is not None and target is not None:
                model.repositories.append(Repository(name.value, target.value, annotations, name.span))
        elif self.at_word("service"):
            self.advance()
            name = self.expect_ident("service name")
            svc = DomainService(name.value if name else "?", annotations=annotations, span=name.span if name else None)
            if self.expect_punct("{") is None:
                self.skip_to_close_brace()
                return
            while not self.at_punct("}") and self.peek().kind != T_EOF:
                start = self.pos
                vis = PUBLIC
                if self.at_word("public", "internal"):
                    vis = self.advance().value
                if self.at_word("method"):
                    m = self.parse_method(vis)
                    if m is not None:
                        svc.methods.append(m)
                else:
                    self.error("expected method", ["method"])
                if self.pos == start:
                    self.advance()
            self.expect_punct("}")
            if name is not None:
                model.services.append(svc)
        else:
            self.error(
                f"unexpected token {self.peek().value!r}",
                ["aggregate", "value", "repository", "service"],
            )
            self.advance()
            self.skip_to_close_brace()

    def parse_aggregate(self) -> Optional[Aggregate]:
        self.expect_word("aggregate")
        name = self.expect_ident("aggregate name")
        if name is None or self.expect_punct("{") is None:
            self.skip_to_close_brace()
            return None
        agg = Aggregate(name.value, span=name.span)
        while not self.at_punct("}") and self.peek().kind != T_EOF:
            start = self.pos
            annotations, was = self.parse_annotations()
            if self.at_word("root", "entity"):
                ent = self.parse_entity()
                if ent is not None:
                    ent.annotations = annotations
                    ent.was = was
                    agg.entities.append(ent)
            elif self.at_word("value"):
                vo = self.parse_value_object()
                if vo is not None:
                    vo.annotations = annotations
                    vo.was = was
                    agg.value_objects.append(vo)
            elif self.at_word("event"):
                ev = self.parse_event()
                if ev is not None:
                    agg.events.append(ev)
            else:
                self.error(
                    f"unexpected token {self.peek().value!r} in aggregate",
                    ["entity", "root", "value", "event"],
                )
                self.advance()
            if self.pos == start:
                self.advance()
        if self.peek().kind == T_EOF:
            self.error("unexpected end of input", ["}"])
        else:
            self.expect_punct("}")
        return agg

    def parse_entity(self) -> Optional[EntityDecl]:
        is_root = False
        if self.at_word("root"):
            self.advance()
            is_root = True
        self.expect_word("entity")
        name = self.expect_ident("entity name")
        if name is None or self.expect_punct("{") is None:
            self.skip_to_close_brace()
            return None
        ent = EntityDecl(name.value, is_root, span=name.span)
        id_tok = self.expect_word("id")
        self.expect_punct(":")
        id_type = self.expect_ident("identifier type")
        if id_type is not None:
            ent.id_field = FieldDecl(
                "id", TypeRef(id_type.value, span=id_type.span), ONE, id_tok.span if id_tok else None
            )
        self.parse_members(ent.fields, ent.methods)
        self.expect_punct("}")
        return ent

    def parse_value_object(self) -> Optional[ValueObject]:
        self.expect_word("value")
        name = self.expect_ident("value object name")
        if name is None or self.expect_punct("{") is None:
            self.skip_to_close_brace()
            return None
        vo = ValueObject(name.value, span=name.span)
        self.parse_members(vo.fields, vo.methods)
        self.expect_punct("}")
        return vo

    def parse_event(self) -> Optional[DomainEvent]:
        self.expect_word("event")
        name = self.expect_ident("event name")
        if name is None or self.expect_punct("{") is None:
            self.skip_to_close_brace()
            return None
        ev = DomainEvent(name.value, span=name.span)
        while self.at_word("field"):
            f = self.parse_field()
            if f is not None:
                ev.fields.append(f)
        self.expect_punct("}")
        return ev

    def parse_members(self, fields: list[FieldDecl], methods: list[MethodDecl]):
        while True:
            if self.at_word("field"):
                f = self.parse_field()
                if f is not None:
                    fields.append(f)
            elif self.at_word("public", "internal", "method"):
                vis = PUBLIC
                if self.at_word("public", "internal"):
                    vis = self.advance().value
                m = self.parse_method(vis)
                if m is not None:
                    methods.append(m)
            else:
                return

    def parse_field(self) -> Optional[FieldDecl]:
        self.expect_word("field")
        name = self.expect_ident("field name")
        self.expect_punct(":")
        ref, mult = self.parse_type()
        if name is None or ref is None:
            return None
        return FieldDecl(name.value, ref, mult, name.span)

    def parse_type(self) -> tuple[Optional[TypeRef], str]:
        if self.at_word("list"):
            # lookahead: 'list' is a type constructor only when followed by '<'
            if self.tokens[self.pos + 1].kind == T_PUNCT and self.tokens[self.pos + 1].value == "<":
                self.advance()
                self.expect_punct("<")
                inner = self.parse_simple_type()
                self.expect_punct(">")
                return inner, LIST
        return self.parse_simple_type(), ONE

    def parse_simple_type(self) -> Optional[TypeRef]:
        if self.at_word("ref"):
            ref_tok = self.advance()
            agg = self.expect_ident("aggregate name")
            self.expect_punct(".")
            ent = self.expect_ident("entity name")
            if agg is None or ent is None:
                return None
            return TypeRef(agg.value, ent.value, ref_tok.span)
        tok = self.expect_ident("type name")
        if tok is None:
            return None
        return TypeRef(tok.value, span=tok.span)

    def parse_method(self, visibility: str) -> Optional[MethodDecl]:
        self.expect_word("method")
        name = self.expect_ident("method name")
        if name is None:
            return None
        m = MethodDecl(name.value, visibility=visibility, span=name.span)
        self.expect_punct("(")
        if not self.at_punct(")"):
            while True:
                pname = self.expect_ident("parameter name")
                self.expect_punct(":")
                ptype, pmult = self.parse_type()
                if pname is not None and ptype is not None:
                    m.params.append(FieldDecl(pname.value, ptype, pmult, pname.span))
                if self.at_punct(","):
                    self.advance()
                    continue
                break
        self.expect_punct(")")
        if self.at_punct(":"):
            self.advance()
            ret, mult = self.parse_type()
            if mult == LIST and ret is not None:
                # return multiplicity is not part of the surface language
                self.error("list return types are not supported", span=ret.span)
            m.return_type = ret
        if self.at_word("mutates"):
            self.advance()
            m.mutates = True
        return m


def parse(text: str, filename: str = "<input>") -> DomainModel:
    """Parse DSL text into a model.

    Raises :class:`ParseFailure` on syntax errors and on well-formedness
    failures other than root-count problems (those are left for the verifier,
    which reports them as S2 diagnostics).
    """
    tokens, lex_errors = _lex(text, filename)
    parser = _Parser(tokens, filename)
    model = parser.parse_model()
    errors = lex_errors + parser.errors
    if errors or model is None:
        raise ParseFailure(errors or [ParseError(Span(filename, 1, 1, 1, 1), "no model found")])
    wf_errors = [e for e in wf_check(model) if e.code not in ROOT_CODES]
    if wf_errors:
        raise ParseFailure([ParseError(e.span, e.message, []) for e in wf_errors])
    return model


def try_parse(text: str, filename: str = "<input>") -> tuple[Optional[DomainModel], list[ParseError]]:
    try:
        return parse(text, filename), []
    except ParseFailure as exc:
        return None, exc.errors


def print_model(model: DomainModel) -> str:
    return canonical_print(model)
