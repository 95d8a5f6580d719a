import random
from collections import Counter

import pytest

from hrgcheck.grammar_file import parse_grammar
from hrgcheck.graph import TreeShapeError
from hrgcheck.graph.grammar import (
    CountKind,
    GrammarStats,
    Leaf,
    Node,
    assemble,
    count_trees,
    enumerate_members,
    grammar_stats,
    iter_members,
    iter_trees,
    prune,
    shortest_tree,
    tree_height,
    tree_size,
    tree_term,
    validate,
)

NINE_MEMBERS = """
colors red blue green;
actions a;
nt S/0;
nt D/1;
start S;

rule R1 : S {
  node u;
  he e1 = D(u);
  he e2 = D(u);
}
rule D1 : D { node x {red}; edge $1 -a-> x; }
rule D2 : D { node x {blue}; edge $1 -a-> x; }
rule D3 : D { node x {green}; edge $1 -a-> x; }
"""

WITH_JUNK = """
colors red;
nt S/0;
nt A/1;
nt U/1;
nt N/1;
start S;

rule R1 : S { node u; he e1 = A(u); }
rule R2 : S { node u; he e1 = N(u); }
rule R3 : A { node x {red}; }
rule R4 : U { node x; }
rule R5 : N { node x; he e1 = N(x); }
"""


def rule_names(tree):
    return {tree.rule.name}.union(*(rule_names(child) for _, child in tree.children))


class TestCounting:
    def test_recursive_grammar_is_infinite(self, dll):
        assert count_trees(dll).kind is CountKind.INFINITE
        assert str(count_trees(dll)) == "INF"

    def test_allowed_rules(self, dll):
        base = [rule for rule in dll.rules if rule.name != "R2"]
        count = count_trees(dll, base)
        assert count.kind is CountKind.FINITE
        assert str(count) == "1"
        assert count_trees(dll, [dll.rule("R1")]).kind is CountKind.ZERO

    def test_finite_product(self):
        g = parse_grammar(NINE_MEMBERS)
        count = count_trees(g)
        assert (count.kind, count.count, count.capped) == (CountKind.FINITE, 9, False)
        assert count.short == "FIN"

    def test_cap(self):
        count = count_trees(parse_grammar(NINE_MEMBERS), cap=5)
        assert str(count) == ">5"
        assert count.short == "FIN"

    def test_empty_language(self, benchmark):
        assert str(count_trees(benchmark("empty.hrg"))) == "0"


class TestPrune:
    def test_drops_unproductive_and_unreachable(self):
        g = parse_grammar(WITH_JUNK)
        pruned = prune(g)
        assert [rule.name for rule in pruned.rules] == ["R1", "R3"]
        assert {str(nt) for nt in pruned.nonterminals} == {"S", "A"}

    def test_start_symbol_survives(self, benchmark):
        pruned = prune(benchmark("empty.hrg"))
        assert not pruned.rules
        assert [str(nt) for nt in pruned.start] == ["S"]

    @pytest.mark.slow
    def test_keeps_the_trees_over_allowed_rules(self, random_grammar):
        rng = random.Random(404)
        for _ in range(1000):
            g = random_grammar(rng)
            allowed = [rule for rule in g.rules if rng.random() < 0.7]
            names = {rule.name for rule in allowed}
            expected = Counter(
                graph for tree, graph in iter_members(g, 4) if rule_names(tree) <= names
            )
            assert Counter(graph for _, graph in iter_members(prune(g, allowed), 4)) == expected


class TestEnumeration:
    def test_members_by_height(self, dll):
        members = enumerate_members(dll, max_depth=3)
        assert [tree_term(tree) for tree, _ in members] == [
            "R3(e1=R1)",
            "R3(e1=R2(e1=R1))",
        ]
        _, longer = members[1]
        assert longer.nodes == {"u", "v", "w", "e1.x"}
        assert longer.color("e1.x") == {"red"}
        assert ("u", "a", "e1.x") in longer.edges
        assert ("e1.x", "a", "v") in longer.edges

    def test_limit(self, dll):
        assert len(enumerate_members(dll, max_depth=10, limit=4)) == 4

    def test_iter_trees_heights(self, dll):
        trees = list(iter_trees(dll, dll.nonterminal("A"), 4))
        assert [tree_height(tree) for tree in trees] == [1, 2, 3, 4]

    def test_shortest_tree(self, dll):
        tree = shortest_tree(dll)
        assert tree_term(tree) == "R3(e1=R1)"
        assert tree_size(tree) == 2
        assert shortest_tree(dll, [dll.rule("R1")]) is None


class TestTrees:
    def test_leaf_is_a_handle(self, dll):
        a = dll.nonterminal("A")
        graph = assemble(Leaf(a))
        assert graph.abstract_count == 2
        assert dict(graph.hyperedges) == {"e": (a, (1, 2))}
        assert tree_term(Leaf(a)) == "A"

    def test_partial_tree(self, dll):
        a = dll.nonterminal("A")
        tree = Node(dll.rule("R3"), (("e1", Leaf(a)),))
        graph = assemble(tree)
        assert list(graph.hyperedges) == ["e1.e"]
        assert graph.attachment("e1.e") == ("u", "v")

    def test_child_of_the_wrong_nonterminal(self, dll):
        tree = Node(dll.rule("R3"), (("e1", Node(dll.rule("R3"))),))
        with pytest.raises(TreeShapeError):
            assemble(tree)

    def test_missing_child(self, dll):
        with pytest.raises(TreeShapeError):
            assemble(Node(dll.rule("R3")))


class TestValidate:
    def test_benchmarks_are_valid(self, dll, benchmark):
        assert validate(dll) == []
        for name in ("ipv4.hrg", "trees.hrg", "spg.hrg", "sierpinski.hrg", "empty.hrg"):
            assert validate(benchmark(name)) == [], name

    def test_violations(self):
        g = parse_grammar(
            """
            colors red;
            actions a;
            nt S/0;
            nt A/2;
            nt B/1;
            start S B;
            rule R1 : S {
              node u {purple};
              he e1 = A(u);
              edge u -b-> u;
            }
            """
        )
        violations = validate(g)
        assert len(violations) == 4
        assert "Start symbol B has arity 1, expected 0." in violations
        assert any("hyperedge e1 has 1 attached nodes" in v for v in violations)
        assert any("undeclared colors ['purple']" in v for v in violations)
        assert any("undeclared actions ['b']" in v for v in violations)

    def test_stats(self, dll):
        assert grammar_stats(dll) == GrammarStats(
            nonterminals=2, rules=3, max_hyperedges=1, max_arity=2
        )
