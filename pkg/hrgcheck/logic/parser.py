import logging
import re
from typing import Iterable, List, NamedTuple, Optional

from hrgcheck.logic import (
    FormulaSyntaxError,
    UndeclaredAtomError,
    UnsupportedBoundError,
)
from hrgcheck.logic.formula import (
    And,
    Atom,
    Const,
    Exists,
    Finally,
    ForAll,
    Formula,
    Globally,
    Implies,
    Next,
    Not,
    Or,
    Prob,
    Release,
    Until,
    atoms,
)

logger = logging.getLogger("hrgcheck")

TOKEN_REGEX = re.compile(
    r"""
    (?P<space>\s+)
    |(?P<prob>P\s*(?P<op>>=|<=|>|<|=)\s*(?P<value>[0-9]*\.?[0-9]+)\s*\[)
    |(?P<arrow>->)
    |(?P<symbol>[!&|()\]])
    |(?P<word>@?[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

UNARY_KEYWORDS = {
    "X": Next,
    "F": Finally,
    "G": Globally,
    "A": ForAll,
    "E": Exists,
}
BINARY_TEMPORAL = {"U": Until, "R": Release}
QUALITATIVE_BOUNDS = {(">", 0.0): ">0", ("=", 1.0): "=1"}


class Token(NamedTuple):
    kind: str
    text: str
    position: int
    bound: Optional[str] = None


def tokenize(text: "str") -> "List[Token]":
    tokens = []
    position = 0
    while position < len(text):
        match = TOKEN_REGEX.match(text, position)
        if match is None:
            raise FormulaSyntaxError(
                f"Unexpected character {text[position]!r}", position
            )
        kind = match.lastgroup
        if match.group("prob"):
            kind = "prob"
        if kind != "space":
            bound = None
            if kind == "prob":
                key = (match.group("op"), float(match.group("value")))
                bound = QUALITATIVE_BOUNDS.get(key)
                if bound is None:
                    raise UnsupportedBoundError(
                        f"Only the qualitative bounds >0 and =1 are supported, "
                        f"got {match.group('op')}{match.group('value')} "
                        f"at position {position}."
                    )
            tokens.append(Token(kind, match.group(0), position, bound))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class FormulaParser:
    """Recursive descent, loosest first: ->, |, &, U/R, then the unary operators."""

    def __init__(self, text: "str") -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> "Token":
        return self.tokens[self.index]

    def _advance(self) -> "Token":
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _accept(self, text: "str") -> "bool":
        if self.current.kind != "end" and self.current.text == text:
            self.index += 1
            return True
        return False

    def _expect(self, text: "str"):
        if not self._accept(text):
            raise FormulaSyntaxError(
                f"Expected {text!r}, found {self.current.text or 'end of input'!r}",
                self.current.position,
            )

    def parse(self) -> "Formula":
        formula = self._implies()
        if self.current.kind != "end":
            raise FormulaSyntaxError(
                f"Unexpected {self.current.text!r}", self.current.position
            )
        return formula

    def _implies(self) -> "Formula":
        left = self._or()
        if self._accept("->"):
            return Implies(left, self._implies())
        return left

    def _or(self) -> "Formula":
        left = self._and()
        while self._accept("|"):
            left = Or(left, self._and())
        return left

    def _and(self) -> "Formula":
        left = self._until()
        while self._accept("&"):
            left = And(left, self._until())
        return left

    def _until(self) -> "Formula":
        left = self._unary()
        token = self.current
        if token.kind == "word" and token.text in BINARY_TEMPORAL:
            self._advance()
            return BINARY_TEMPORAL[token.text](left, self._until())
        return left

    def _unary(self) -> "Formula":
        token = self._advance()
        if token.kind == "end":
            raise FormulaSyntaxError("Unexpected end of input", token.position)
        if token.text == "!":
            return Not(self._unary())
        if token.text == "(":
            inner = self._implies()
            self._expect(")")
            return inner
        if token.kind == "prob":
            path = self._implies()
            self._expect("]")
            if not isinstance(path, (Next, Until, Finally, Globally)):
                raise FormulaSyntaxError(
                    "A probabilistic quantifier needs an X, U, F or G path formula",
                    token.position,
                )
            return Prob(token.bound, path)
        if token.kind == "word":
            if token.text in UNARY_KEYWORDS:
                return UNARY_KEYWORDS[token.text](self._unary())
            if token.text in BINARY_TEMPORAL:
                raise FormulaSyntaxError(
                    f"{token.text} needs a left operand", token.position
                )
            if token.text == "true":
                return Const(True)
            if token.text == "false":
                return Const(False)
            return Atom(token.text)
        raise FormulaSyntaxError(f"Unexpected {token.text!r}", token.position)


def parse_formula(text: "str", colors: "Optional[Iterable[str]]" = None) -> "Formula":
    """Parse a formula; with a color universe every atom must be declared in it."""
    formula = FormulaParser(text).parse()
    if colors is not None:
        undeclared = atoms(formula) - set(colors)
        if undeclared:
            raise UndeclaredAtomError(
                f"Formula {text!r} uses undeclared colors: {sorted(undeclared)}"
            )
    logger.debug(f"Parsed formula {text!r} into {formula}")
    return formula
