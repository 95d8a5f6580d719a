import random
from collections import Counter

import pytest

from hrgcheck.checker.minimize import minimize
from hrgcheck.checker.refine import annotate, strip_annotations
from hrgcheck.grammar_file import parse_grammar
from hrgcheck.graph.grammar import count_trees, iter_members
from hrgcheck.graph.hypergraph import isomorphism_invariant

TWINS = """
colors red;
nt S/0;
nt A/1;
nt B/1;
start S;

rule R1 : S {
  node u;
  he e1 = A(u);
  he e2 = B(u);
}
rule RA : A { node x {red}; edge $1 -a-> x; }
rule RB : B { node x {red}; edge $1 -a-> x; }
"""


def members(g, depth):
    return Counter(graph for _, graph in iter_members(g, depth))


def shapes(g, depth):
    return Counter(isomorphism_invariant(graph) for _, graph in iter_members(g, depth))


class TestMinimize:
    def test_refined_list_grammar(self, dll, eventually_blue):
        refined = strip_annotations(annotate(dll, eventually_blue))
        minimized = minimize(refined)
        assert len(refined.rules) == 11
        assert len(minimized.rules) == 7
        assert len(minimized.nonterminals) == 4
        assert members(minimized, 6) == members(dll, 6)

    def test_annotations_are_stripped(self, dll, eventually_blue):
        minimized = minimize(annotate(dll, eventually_blue))
        assert all("[" not in str(nt) for nt in minimized.nonterminals)

    def test_merges_equal_nonterminals(self):
        g = parse_grammar(TWINS)
        minimized = minimize(g)
        assert len(minimized.nonterminals) == 2
        assert len(minimized.rules) == 2
        (body,) = [rule.body for rule in minimized.rules if str(rule.lhs) == "S"]
        assert body.label("e1") == body.label("e2")
        assert members(minimized, 3) == members(g, 3)

    def test_already_minimal(self, dll):
        minimized = minimize(dll)
        assert len(minimized.rules) == len(dll.rules)
        assert str(count_trees(minimized)) == "INF"

    def test_start_symbols_stay_apart(self, benchmark):
        g = benchmark("empty.hrg")
        minimized = minimize(g)
        assert [str(nt) for nt in minimized.start] == ["S"]
        assert not minimized.rules

    def test_merges_bodies_that_differ_in_names(self):
        renamed = TWINS.replace(
            "rule RB : B { node x {red}; edge $1 -a-> x; }",
            "rule RB : B { node y {red}; edge $1 -a-> y; }",
        )
        assert renamed != TWINS
        g = parse_grammar(renamed)
        minimized = minimize(g)
        assert len(minimized.nonterminals) == 2
        assert len(minimized.rules) == 2
        assert str(count_trees(minimized)) == "1"

    def test_derivation_counts_survive(self):
        g = parse_grammar(
            "colors red;\nactions a;\nnt S/0;\nnt A/1;\nstart S;\n"
            "rule R1 : S { node u; he e1 = A(u); }\n"
            "rule RA : A { node x {red}; edge $1 -a-> x; }\n"
            "rule RB : A { node y {red}; edge $1 -a-> y; }\n"
        )
        minimized = minimize(g)
        assert str(count_trees(minimized)) == str(count_trees(g)) == "2"


class TestRandomGrammars:
    @pytest.mark.slow
    def test_language_survives(self, random_grammar):
        rng = random.Random(1999)
        for _ in range(1000):
            g = random_grammar(rng)
            for by_base in (False, True):
                minimized = minimize(g, by_base=by_base)
                assert len(minimized.nonterminals) <= len(g.nonterminals)
                assert str(count_trees(minimized)) == str(count_trees(g))
                assert shapes(minimized, 4) == shapes(g, 4)

    @pytest.mark.slow
    def test_refined_language_survives(self, random_grammar, eventually_blue):
        rng = random.Random(6)
        for _ in range(100):
            g = random_grammar(rng)
            minimized = minimize(annotate(g, eventually_blue))
            assert shapes(minimized, 4) == shapes(g, 4)
