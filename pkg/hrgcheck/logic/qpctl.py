import logging

from hrgcheck.logic import UnsupportedBoundError
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
    to_text,
)

logger = logging.getLogger("hrgcheck")


def qpctl_to_ctlstar(formula: "Formula") -> "Formula":
    """Rewrite every qualitative probabilistic quantifier as a CTL* formula.

    Over finite Markov chains only the graph matters for bounds >0 and =1.
    """
    match formula:
        case Atom() | Const():
            return formula
        case Not(operand):
            return Not(qpctl_to_ctlstar(operand))
        case And(left, right) | Or(left, right) | Implies(left, right):
            return type(formula)(qpctl_to_ctlstar(left), qpctl_to_ctlstar(right))
        case Next(operand) | Finally(operand) | Globally(operand):
            return type(formula)(qpctl_to_ctlstar(operand))
        case Until(left, right) | Release(left, right):
            return type(formula)(qpctl_to_ctlstar(left), qpctl_to_ctlstar(right))
        case ForAll(path) | Exists(path):
            return type(formula)(qpctl_to_ctlstar(path))
        case Prob(bound, path):
            return _embed(bound, qpctl_to_ctlstar(path))
    raise TypeError(f"Not a formula: {formula!r}")


def _embed(bound: "str", path: "Formula") -> "Formula":
    if bound not in (">0", "=1"):
        raise UnsupportedBoundError(f"Bound {bound} is not qualitative.")
    positive = bound == ">0"
    match path:
        case Next(phi):
            return Exists(Next(phi)) if positive else ForAll(Next(phi))
        case Until(phi, psi):
            if positive:
                return Exists(Until(phi, psi))
            return Not(Exists(Until(And(phi, Not(psi)), Not(Exists(Until(phi, psi))))))
        case Finally(phi):
            if positive:
                return Exists(Finally(phi))
            return Not(Exists(Until(Not(phi), Not(Exists(Finally(phi))))))
        case Globally(phi):
            if positive:
                return Exists(Until(phi, ForAll(Globally(phi))))
            return ForAll(Globally(phi))
    raise UnsupportedBoundError(
        f"P{bound}[{to_text(path)}] needs an X, U, F or G path formula."
    )
