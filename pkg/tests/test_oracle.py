import pytest

from hrgcheck.checker.recolor import Recolorer
from hrgcheck.graph import NodeNotFoundError
from hrgcheck.graph.hypergraph import Hypergraph
from hrgcheck.logic.buchi import ltl_to_buchi
from hrgcheck.logic.formula import ForAll
from hrgcheck.logic.parser import parse_formula
from hrgcheck.oracle import (
    DeadlockError,
    DifferentialReport,
    ExplicitChecker,
    Mismatch,
    NotAnLTSError,
    check_buchi,
    check_ctlstar,
    check_qpctl,
    compare_coloring,
    compare_language,
    differential,
    label_ctlstar,
)

# a -> b -> c -> c, a -> d -> d
FORK = Hypergraph(
    nodes={"a", "b", "c", "d"},
    edges=[("a", "x", "b"), ("b", "x", "c"), ("c", "x", "c"), ("a", "x", "d"), ("d", "x", "d")],
    colors={"a": {"red"}, "b": {"blue"}, "d": {"red"}},
)


def holds(text, node, lts=FORK):
    return check_ctlstar(lts, node, parse_formula(text))


class TestExplicitChecking:
    def test_buchi(self):
        m = ltl_to_buchi(parse_formula("F blue"))
        assert not check_buchi(FORK, "a", m)
        assert check_buchi(FORK, "b", m)
        assert not check_buchi(FORK, "c", m)

    @pytest.mark.parametrize(
        "text, node, expected",
        [
            ("E F blue", "a", True),
            ("A F blue", "a", False),
            ("E X blue", "a", True),
            ("A X (blue | red)", "a", True),
            ("A G red", "d", True),
            ("E G red", "a", True),
            ("A G !blue", "c", True),
            ("A G E F blue", "a", False),
            ("E(red U blue)", "a", True),
            ("A(red U blue)", "a", False),
            ("E X E X !red", "a", True),
            ("A F A G !blue", "a", True),
        ],
    )
    def test_ctlstar(self, text, node, expected):
        assert holds(text, node) == expected

    def test_labels(self):
        assert label_ctlstar(FORK, parse_formula("E F blue")) == {
            "a": True,
            "b": True,
            "c": False,
            "d": False,
        }
        assert ExplicitChecker(FORK).label(parse_formula("A G red")) == {"d"}

    def test_qpctl(self):
        assert check_qpctl(FORK, "a", parse_formula("P>0[F blue]"))
        assert not check_qpctl(FORK, "a", parse_formula("P=1[F blue]"))
        assert check_qpctl(FORK, "a", parse_formula("P>0[G red]"))
        assert check_qpctl(FORK, "b", parse_formula("P=1[X !blue]"))

    def test_deadlock(self):
        lts = Hypergraph(nodes={"u", "v"}, edges=[("u", "x", "v")])
        with pytest.raises(DeadlockError):
            check_qpctl(lts, "u", parse_formula("P>0[F true]"))

    def test_not_an_lts(self):
        graph = Hypergraph(nodes={"u"}, hyperedges={"e": ("A", ("u",))})
        with pytest.raises(NotAnLTSError):
            holds("E F blue", "u", graph)

    def test_unknown_node(self):
        with pytest.raises(NodeNotFoundError):
            holds("E F blue", "z")


class TestDifferential:
    def test_list_grammar(self, dll):
        report = differential(dll, parse_formula("A F blue"), depth=4)
        assert report.ok
        assert report.members_checked == 3
        assert report.nodes_checked == 12
        assert report.to_dict()["ok"] is True

    def test_path_formula(self, dll):
        report = differential(dll, parse_formula("F blue"), depth=3)
        assert report.formula == "A (F blue)"
        assert report.ok

    def test_wrong_coloring_is_reported(self, dll):
        report = compare_coloring(dll, "blue", parse_formula("E F blue"), depth=3)
        assert not report.ok
        assert report.members_checked == 2
        assert report.nodes_checked == 7
        assert len(report.mismatches) == 5
        assert Mismatch("R3(e1=R1)", "u", False, True) in report.mismatches

    def test_language_is_kept(self, dll):
        recolored, _ = Recolorer(dll).recolor(ForAll(parse_formula("G (red | blue)")))
        assert compare_language(dll, recolored, 4) == (0, 0)

    def test_report_dict(self):
        report = DifferentialReport("E F red", 3)
        report.mismatches.append(Mismatch("R1", "u", True, False))
        data = report.to_dict()
        assert data["ok"] is False
        assert data["mismatches"] == [
            {"member": "R1", "node": "u", "recolored": True, "oracle": False}
        ]

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "grammar, formula",
        [
            ("dll.hrg", "A(red U blue)"),
            ("dll.hrg", "E F blue"),
            ("dll.hrg", "A G (red | blue)"),
            ("dll.hrg", "E X blue"),
            ("ipv4.hrg", "P=1[G P>0[F red]]"),
            ("ipv4.hrg", "A G E X red"),
            ("ipv4.hrg", "E F G blue"),
            ("ipv4.hrg", "P>0[X (!blue & P>0[F blue])]"),
            ("trees.hrg", "!A G (E F blue & E X !blue)"),
            ("trees.hrg", "!E(blue U !blue)"),
            ("trees.hrg", "A G (red | !blue)"),
            ("spg.hrg", "E X !blue"),
            ("spg.hrg", "E F blue & E X !blue"),
            ("spg.hrg", "A G !red"),
            ("sierpinski.hrg", "E X blue & E X green"),
            ("sierpinski.hrg", "A G E F green"),
            ("sierpinski.hrg", "E F E G blue"),
        ],
    )
    def test_benchmarks(self, benchmark, grammar, formula):
        g = benchmark(grammar)
        report = differential(g, parse_formula(formula, g.all_colors), depth=5, number_jobs=2)
        assert report.ok, report.to_dict()
