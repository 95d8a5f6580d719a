import random
from collections import Counter

import pytest

from hrgcheck.checker.behaviour import (
    InterfaceBehaviour,
    behaviour_of,
    language_class,
    restrict_to,
)
from hrgcheck.checker.refine import (
    AnnotatedNonterminal,
    annotate,
    annotate1,
    annotate2,
    strip_annotations,
)
from hrgcheck.graph.grammar import Leaf, Node, assemble, iter_members, validate


def members(g, depth):
    return Counter(graph for _, graph in iter_members(g, depth))


class TestLanguageClasses:
    def test_classes_of_the_list_grammar(self, dll, eventually_blue):
        g1 = annotate1(dll, eventually_blue)
        assert len(g1.rules) == 7
        assert sorted(str(nt) for nt in g1.nonterminals) == ["A[1]", "A[2]", "A[3]", "S[1]"]
        assert [str(nt) for nt in g1.start] == ["S[1]"]

    def test_base_case_class(self, dll, eventually_blue):
        g1 = annotate1(dll, eventually_blue)
        a1 = g1.nonterminal("A[1]")
        assert [rule.origin for rule in g1.rules_for(a1)] == ["R1"]
        assert not a1.lang_class.omega_edges

    def test_long_lists_have_red_loops(self, dll, eventually_blue):
        g1 = annotate1(dll, eventually_blue)
        a3 = g1.nonterminal("A[3]")
        assert {i for i, _ in a3.lang_class.omega_edges} == {1, 2}
        assert sorted(rule.name for rule in g1.rules_for(a3)) == ["R2.2", "R2.3"]


class TestContextClasses:
    def test_rule_count(self, dll, eventually_blue):
        refined = annotate(dll, eventually_blue)
        assert len(refined.rules) == 11
        assert len(refined.nonterminals) == 7

    def test_start_has_empty_context(self, dll, eventually_blue):
        refined = annotate(dll, eventually_blue)
        (start,) = refined.start
        assert isinstance(start, AnnotatedNonterminal)
        assert start.ctx_class == InterfaceBehaviour.empty(0)
        assert start.name == "S[1,1]"

    def test_two_contexts_per_list_class(self, dll, eventually_blue):
        refined = annotate2(annotate1(dll, eventually_blue), eventually_blue)
        contexts = Counter(nt.lang_id for nt in refined.nonterminals if str(nt.base) == "A")
        assert contexts == {1: 2, 2: 2, 3: 2}

    def test_bodies_keep_their_base_rule(self, dll, eventually_blue):
        refined = annotate(dll, eventually_blue)
        for rule in refined.rules:
            base = dll.rule(rule.origin)
            plain = rule.body.relabel({he: label.base for he, label in rule.children()})
            assert plain == base.body
            assert rule.lhs.base == base.lhs


class TestLanguage:
    def test_members_are_kept(self, dll, eventually_blue):
        refined = annotate(dll, eventually_blue)
        assert members(refined, 6) == members(dll, 6)

    def test_stripped_names(self, dll, eventually_blue):
        stripped = strip_annotations(annotate(dll, eventually_blue))
        names = {str(nt) for nt in stripped.nonterminals}
        assert "S_1_1" in names
        assert {"A_1_1", "A_1_2", "A_3_2"} <= names
        assert validate(stripped) == []
        assert members(stripped, 5) == members(dll, 5)


def positioned(tree, path=()):
    yield path, tree
    for hyperedge, child in tree.children:
        yield from positioned(child, path + (hyperedge,))


def cut(tree, path):
    """The tree with the subtree at path replaced by a leaf."""
    if not path:
        return Leaf(tree.rule.lhs)
    return Node(
        tree.rule,
        tuple(
            (hyperedge, cut(child, path[1:]) if hyperedge == path[0] else child)
            for hyperedge, child in tree.children
        ),
    )


class TestDecomposition:
    @pytest.mark.slow
    def test_annotations_match_the_derived_graphs(self, random_grammar, eventually_blue):
        rng = random.Random(31)
        checked = 0
        while checked < 1000:
            refined = annotate(random_grammar(rng), eventually_blue)
            for tree, _ in iter_members(refined, 4):
                for path, subtree in positioned(tree):
                    nonterminal = subtree.rule.lhs
                    inside = assemble(subtree)
                    assert language_class(inside, eventually_blue) == nonterminal.lang_class

                    context = assemble(cut(tree, path))
                    (hole,) = context.hyperedges
                    outside = restrict_to(
                        behaviour_of(context, eventually_blue), context.attachment(hole)
                    )
                    assert outside == nonterminal.ctx_class, f"{nonterminal} at {path}"
                    checked += 1

    def test_refinement_keeps_random_languages(self, random_grammar, eventually_blue):
        rng = random.Random(8)
        for _ in range(5):
            g = random_grammar(rng)
            assert members(annotate(g, eventually_blue), 4) == members(g, 4)
