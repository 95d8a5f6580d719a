"""Formula trees shared by LTL, CTL* and qualitative PCTL."""

from dataclasses import dataclass
from typing import FrozenSet


class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Finally(Formula):
    operand: Formula


@dataclass(frozen=True)
class Globally(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForAll(Formula):
    path: Formula


@dataclass(frozen=True)
class Exists(Formula):
    path: Formula


@dataclass(frozen=True)
class Prob(Formula):
    """Qualitative probabilistic quantifier, bound is ">0" or "=1"."""

    bound: str
    path: Formula


TRUE = Const(True)
FALSE = Const(False)

TEMPORAL = (Next, Finally, Globally, Until, Release)
QUANTIFIED = (ForAll, Exists, Prob)


def is_state_formula(formula: "Formula") -> "bool":
    """True when no temporal operator occurs outside a path quantifier."""
    match formula:
        case Atom() | Const() | ForAll() | Exists() | Prob():
            return True
        case Not(operand):
            return is_state_formula(operand)
        case And(left, right) | Or(left, right) | Implies(left, right):
            return is_state_formula(left) and is_state_formula(right)
        case _:
            return False


def atoms(formula: "Formula") -> "FrozenSet[str]":
    match formula:
        case Atom(name):
            return frozenset([name])
        case Const():
            return frozenset()
        case Not(operand) | Next(operand) | Finally(operand) | Globally(operand):
            return atoms(operand)
        case ForAll(path) | Exists(path) | Prob(_, path):
            return atoms(path)
        case (
            And(left, right)
            | Or(left, right)
            | Implies(left, right)
            | Until(left, right)
            | Release(left, right)
        ):
            return atoms(left) | atoms(right)
    raise TypeError(f"Not a formula: {formula!r}")


def to_text(formula: "Formula") -> "str":
    """Render in the concrete syntax accepted by the parser, fully parenthesized."""
    match formula:
        case Atom(name):
            return name
        case Const(value):
            return "true" if value else "false"
        case Not(operand):
            return f"!{_wrap(operand)}"
        case Next(operand):
            return f"X {_wrap(operand)}"
        case Finally(operand):
            return f"F {_wrap(operand)}"
        case Globally(operand):
            return f"G {_wrap(operand)}"
        case ForAll(path):
            return f"A {_wrap(path)}"
        case Exists(path):
            return f"E {_wrap(path)}"
        case Prob(bound, path):
            return f"P{bound}[{to_text(path)}]"
        case And(left, right):
            return f"{_wrap(left)} & {_wrap(right)}"
        case Or(left, right):
            return f"{_wrap(left)} | {_wrap(right)}"
        case Implies(left, right):
            return f"{_wrap(left)} -> {_wrap(right)}"
        case Until(left, right):
            return f"{_wrap(left)} U {_wrap(right)}"
        case Release(left, right):
            return f"{_wrap(left)} R {_wrap(right)}"
    raise TypeError(f"Not a formula: {formula!r}")


def _wrap(formula: "Formula") -> "str":
    if isinstance(formula, (Atom, Const, Prob)):
        return to_text(formula)
    return f"({to_text(formula)})"


def negate(formula: "Formula") -> "Formula":
    """Negation that cancels an outer negation instead of stacking another."""
    if isinstance(formula, Not):
        return formula.operand
    if isinstance(formula, Const):
        return Const(not formula.value)
    return Not(formula)


def simplify_negations(formula: "Formula") -> "Formula":
    """Remove double negations everywhere."""
    match formula:
        case Not(Not(operand)):
            return simplify_negations(operand)
        case Not(operand):
            return Not(simplify_negations(operand))
        case Atom() | Const():
            return formula
        case Next(operand) | Finally(operand) | Globally(operand):
            return type(formula)(simplify_negations(operand))
        case ForAll(path) | Exists(path):
            return type(formula)(simplify_negations(path))
        case Prob(bound, path):
            return Prob(bound, simplify_negations(path))
        case (
            And(left, right)
            | Or(left, right)
            | Implies(left, right)
            | Until(left, right)
            | Release(left, right)
        ):
            return type(formula)(simplify_negations(left), simplify_negations(right))
    raise TypeError(f"Not a formula: {formula!r}")


def nnf(formula: "Formula") -> "Formula":
    """Negation normal form over atoms, constants, X, U, R, and/or.

    F and G are rewritten through U and R; state quantifiers are not allowed here.
    """
    match formula:
        case Atom() | Const():
            return formula
        case And(left, right):
            return And(nnf(left), nnf(right))
        case Or(left, right):
            return Or(nnf(left), nnf(right))
        case Implies(left, right):
            return Or(nnf(Not(left)), nnf(right))
        case Next(operand):
            return Next(nnf(operand))
        case Finally(operand):
            return Until(Const(True), nnf(operand))
        case Globally(operand):
            return Release(Const(False), nnf(operand))
        case Until(left, right):
            return Until(nnf(left), nnf(right))
        case Release(left, right):
            return Release(nnf(left), nnf(right))
        case Not(operand):
            return _nnf_negated(operand)
    raise TypeError(f"Formula {to_text(formula)} is not a path formula over atoms.")


def _nnf_negated(formula: "Formula") -> "Formula":
    match formula:
        case Atom():
            return Not(formula)
        case Const(value):
            return Const(not value)
        case Not(operand):
            return nnf(operand)
        case And(left, right):
            return Or(_nnf_negated(left), _nnf_negated(right))
        case Or(left, right):
            return And(_nnf_negated(left), _nnf_negated(right))
        case Implies(left, right):
            return And(nnf(left), _nnf_negated(right))
        case Next(operand):
            return Next(_nnf_negated(operand))
        case Finally(operand):
            return Release(Const(False), _nnf_negated(operand))
        case Globally(operand):
            return Until(Const(True), _nnf_negated(operand))
        case Until(left, right):
            return Release(_nnf_negated(left), _nnf_negated(right))
        case Release(left, right):
            return Until(_nnf_negated(left), _nnf_negated(right))
    raise TypeError(f"Formula {to_text(formula)} is not a path formula over atoms.")
