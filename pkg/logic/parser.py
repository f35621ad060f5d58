"""
Tokenizer and recursive-descent parser for the formula language.

    formula := iff ; iff := imp ("<->" imp)* ; imp := or ("->" imp)?
    or := and ("|" and)* ; and := unary ("&" unary)*
    unary := "!" unary | ("E"|"A") var "." formula | "(" formula ")" | atom
    atom := term cmp term | term "%" nat "=" integer
    term := prod (("+"|"-") prod)* ; prod := int "*" var | "-" prod | int | var

A quantifier body extends to the end of the enclosing parenthesis.
"""
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from errors import FormulaSyntaxError, InvalidModulusError, NonlinearTermError
from logic.formula import (
    And, Compare, Congruence, Const, Difference, Exists, Forall, Formula, Iff,
    Implies, Neg, Not, Or, Scale, Sum, Term, Var, fresh_name,
)


class Tok(Enum):
    INT = "int"
    IDENT = "ident"
    EXISTS = "E"
    FORALL = "A"
    IFF = "<->"
    IMPLIES = "->"
    LE = "<="
    GE = ">="
    NE = "!="
    LT = "<"
    GT = ">"
    EQ = "="
    NOT = "!"
    AND = "&"
    OR = "|"
    LPAREN = "("
    RPAREN = ")"
    DOT = "."
    PLUS = "+"
    MINUS = "-"
    STAR = "*"
    PERCENT = "%"
    EOF = "end of input"


@dataclass(frozen=True)
class Token:
    kind: Tok
    text: str
    line: int
    column: int


# longest operators first
_SYMBOLS = sorted(
    (t for t in Tok if t not in (Tok.INT, Tok.IDENT, Tok.EXISTS, Tok.FORALL, Tok.EOF)),
    key=lambda t: -len(t.value),
)
_IDENT = re.compile(r"[a-z][a-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_COMPARE_TOKENS = {Tok.LT: "<", Tok.LE: "<=", Tok.EQ: "=", Tok.NE: "!=", Tok.GE: ">=", Tok.GT: ">"}


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch.isspace():
            pos += 1
            continue
        column = pos - line_start + 1
        if ch == "#":
            end = text.find("\n", pos)
            pos = len(text) if end < 0 else end
            continue
        if ch in "EA" and not (pos + 1 < len(text) and (text[pos + 1].isalnum() or text[pos + 1] == "_")):
            tokens.append(Token(Tok.EXISTS if ch == "E" else Tok.FORALL, ch, line, column))
            pos += 1
            continue
        match = _IDENT.match(text, pos)
        if match:
            tokens.append(Token(Tok.IDENT, match.group(), line, column))
            pos = match.end()
            continue
        match = _INT.match(text, pos)
        if match:
            tokens.append(Token(Tok.INT, match.group(), line, column))
            pos = match.end()
            continue
        for kind in _SYMBOLS:
            if text.startswith(kind.value, pos):
                tokens.append(Token(kind, kind.value, line, column))
                pos += len(kind.value)
                break
        else:
            raise FormulaSyntaxError(f"unexpected character {ch!r}", line, column)
    tokens.append(Token(Tok.EOF, "", line, pos - line_start + 1))
    return tokens


class FormulaParser:
    """Parses one formula; bound variables get fresh internal names"""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.scopes: List[Dict[str, str]] = []

    # -------------------------------------------------------------- token helpers
    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind is not Tok.EOF:
            self.pos += 1
        return token

    def expect(self, kind: Tok) -> Token:
        token = self.peek()
        if token.kind is not kind:
            self.fail(f"expected {kind.value!r}, found {token.text or token.kind.value!r}", token)
        return self.advance()

    def fail(self, message: str, token: Optional[Token] = None):
        token = token or self.peek()
        raise FormulaSyntaxError(message, token.line, token.column)

    # ------------------------------------------------------------------- entry
    def parse(self) -> Formula:
        formula = self.parse_formula()
        if self.peek().kind is not Tok.EOF:
            self.fail(f"unexpected {self.peek().text!r}")
        return formula

    # ----------------------------------------------------------------- formulas
    def parse_formula(self) -> Formula:
        left = self.parse_implication()
        while self.peek().kind is Tok.IFF:
            self.advance()
            left = Iff(left, self.parse_implication())
        return left

    def parse_implication(self) -> Formula:
        left = self.parse_or()
        if self.peek().kind is Tok.IMPLIES:
            self.advance()
            return Implies(left, self.parse_implication())
        return left

    def parse_or(self) -> Formula:
        left = self.parse_and()
        while self.peek().kind is Tok.OR:
            self.advance()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Formula:
        left = self.parse_unary()
        while self.peek().kind is Tok.AND:
            self.advance()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self) -> Formula:
        token = self.peek()
        if token.kind is Tok.NOT:
            self.advance()
            return Not(self.parse_unary())
        if token.kind in (Tok.EXISTS, Tok.FORALL):
            self.advance()
            name = self.expect(Tok.IDENT).text
            self.expect(Tok.DOT)
            internal = fresh_name(name)
            self.scopes.append({name: internal})
            try:
                body = self.parse_formula()
            finally:
                self.scopes.pop()
            node = Exists if token.kind is Tok.EXISTS else Forall
            return node(Var(internal, name), body)
        if token.kind is Tok.LPAREN:
            self.advance()
            inner = self.parse_formula()
            self.expect(Tok.RPAREN)
            return inner
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        lhs = self.parse_term()
        token = self.peek()
        if token.kind is Tok.PERCENT:
            self.advance()
            modulus_token = self.expect(Tok.INT)
            modulus = int(modulus_token.text)
            if modulus == 0:
                raise InvalidModulusError("modulus must be positive", modulus_token.line, modulus_token.column)
            self.expect(Tok.EQ)
            sign = 1
            if self.peek().kind is Tok.MINUS:
                self.advance()
                sign = -1
            residue = sign * int(self.expect(Tok.INT).text)
            return Congruence(lhs, modulus, residue)
        if token.kind in _COMPARE_TOKENS:
            self.advance()
            return Compare(lhs, _COMPARE_TOKENS[token.kind], self.parse_term())
        self.fail(f"expected a comparison, found {token.text or token.kind.value!r}")

    # -------------------------------------------------------------------- terms
    def parse_term(self) -> Term:
        left = self.parse_product()
        while self.peek().kind in (Tok.PLUS, Tok.MINUS):
            op = self.advance()
            right = self.parse_product()
            left = Sum(left, right) if op.kind is Tok.PLUS else Difference(left, right)
        return left

    def parse_product(self) -> Term:
        token = self.peek()
        if token.kind is Tok.MINUS:
            self.advance()
            if self.peek().kind is Tok.INT:
                value = -int(self.advance().text)
                return self._maybe_scaled(value)
            return Neg(self.parse_product())
        if token.kind is Tok.LPAREN:
            self.advance()
            inner = self.parse_term()
            self.expect(Tok.RPAREN)
            return inner
        if token.kind is Tok.INT:
            value = int(self.advance().text)
            return self._maybe_scaled(value)
        if token.kind is Tok.IDENT:
            var = self.resolve(self.advance())
            if self.peek().kind is Tok.STAR:
                star = self.advance()
                other = self.peek()
                if other.kind is Tok.IDENT:
                    raise NonlinearTermError("product of variables is not linear", star.line, star.column)
                self.fail("scalar multiples are written as int*var", star)
            return var
        self.fail(f"expected a term, found {token.text or token.kind.value!r}")

    def _maybe_scaled(self, value: int) -> Term:
        if self.peek().kind is not Tok.STAR:
            return Const(value)
        self.advance()
        token = self.peek()
        if token.kind is not Tok.IDENT:
            self.fail("expected a variable after '*'", token)
        var = self.resolve(self.advance())
        if self.peek().kind is Tok.STAR:
            star = self.peek()
            raise NonlinearTermError("product of variables is not linear", star.line, star.column)
        return Scale(value, var)

    def resolve(self, token: Token) -> Var:
        for scope in reversed(self.scopes):
            if token.text in scope:
                return Var(scope[token.text], token.text)
        return Var(token.text, token.text)


def parse(text: str) -> Formula:
    return FormulaParser(text).parse()


def parse_file(path) -> Formula:
    return parse(Path(path).read_text(encoding="utf-8"))
