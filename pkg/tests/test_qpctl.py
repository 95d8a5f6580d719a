import random

import pytest

from hrgcheck.graph.hypergraph import Hypergraph
from hrgcheck.logic import UnsupportedBoundError
from hrgcheck.logic.formula import (
    And,
    Atom,
    Exists,
    Finally,
    ForAll,
    Globally,
    Next,
    Not,
    Prob,
    Release,
    Until,
)
from hrgcheck.logic.parser import parse_formula
from hrgcheck.logic.qpctl import qpctl_to_ctlstar
from hrgcheck.oracle import check_ctlstar, check_qpctl

red, blue = Atom("red"), Atom("blue")

FORMULAS = [
    "P>0[X red]",
    "P=1[X red]",
    "P>0[F blue]",
    "P=1[F blue]",
    "P>0[G red]",
    "P=1[G !blue]",
    "P>0[red U blue]",
    "P=1[red U blue]",
    "P=1[G P>0[F red]]",
    "P>0[F P>0[G blue]]",
    "P>0[X P>0[X blue]] & !red",
]


def random_chain(rng: "random.Random", size: "int") -> "Hypergraph":
    """Every node gets one to three successors, so the graph is a Markov chain skeleton."""
    nodes = [f"n{i}" for i in range(size)]
    edges = set()
    for node in nodes:
        for target in rng.sample(nodes, rng.randint(1, min(3, size))):
            edges.add((node, "a", target))
    colors = {
        node: {c for c in ("red", "blue") if rng.random() < 0.4} for node in nodes
    }
    return Hypergraph(nodes=nodes, edges=edges, colors=colors)


class TestTranslation:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("P>0[X red]", Exists(Next(red))),
            ("P=1[X red]", ForAll(Next(red))),
            ("P>0[red U blue]", Exists(Until(red, blue))),
            (
                "P=1[red U blue]",
                Not(Exists(Until(And(red, Not(blue)), Not(Exists(Until(red, blue)))))),
            ),
            ("P>0[F red]", Exists(Finally(red))),
            ("P=1[F red]", Not(Exists(Until(Not(red), Not(Exists(Finally(red))))))),
            ("P>0[G blue]", Exists(Until(blue, ForAll(Globally(blue))))),
            ("P=1[G blue]", ForAll(Globally(blue))),
        ],
    )
    def test_qualitative_operators(self, text, expected):
        assert qpctl_to_ctlstar(parse_formula(text)) == expected

    def test_nested(self):
        formula = parse_formula("P=1[G P>0[F red]] & !blue")
        assert qpctl_to_ctlstar(formula) == And(
            ForAll(Globally(Exists(Finally(red)))), Not(blue)
        )

    def test_ctlstar_is_untouched(self):
        formula = parse_formula("A G E F red")
        assert qpctl_to_ctlstar(formula) == formula

    def test_quantitative_bound(self):
        with pytest.raises(UnsupportedBoundError):
            qpctl_to_ctlstar(Prob(">0.5", Finally(red)))

    def test_release_path(self):
        with pytest.raises(UnsupportedBoundError):
            qpctl_to_ctlstar(Prob(">0", Release(red, blue)))


class TestAgainstGraphAlgorithms:
    @pytest.mark.slow
    def test_random_chains(self):
        rng = random.Random(99)
        for _ in range(1000):
            lts = random_chain(rng, rng.randint(2, 5))
            for text in FORMULAS:
                formula = parse_formula(text)
                translated = qpctl_to_ctlstar(formula)
                for node in sorted(lts.nodes):
                    assert check_qpctl(lts, node, formula) == check_ctlstar(
                        lts, node, translated
                    ), f"{text} at {node}"
