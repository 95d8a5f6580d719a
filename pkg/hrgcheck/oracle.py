"""Explicit-state checking of single LTSs, independent of the grammar pipeline."""

import asyncio
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, List, Optional, Set, Tuple

import networkx as nx
from tqdm import tqdm

from hrgcheck import HrgcheckError
from hrgcheck.checker.recolor import Recolorer, delete_color
from hrgcheck.graph import NodeNotFoundError
from hrgcheck.graph.grammar import HRG, iter_members, tree_term
from hrgcheck.graph.hypergraph import Hypergraph, sorted_nodes
from hrgcheck.logic.buchi import BuchiAutomaton, ltl_to_buchi
from hrgcheck.logic.formula import (
    QUANTIFIED,
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
    Until,
    is_state_formula,
    to_text,
)
from hrgcheck.utils.config import (
    NUMBER_JOBS,
    ORACLE_DEPTH,
    ORACLE_MEMBER_CAP,
    TRANSLATION,
)

logger = logging.getLogger("hrgcheck")

Relation = FrozenSet[Tuple[Hashable, Hashable, bool]]
ExplicitResult = Dict[str, bool]


class NotAnLTSError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class DeadlockError(HrgcheckError):
    def __init__(self, message: str) -> None:
        super().__init__(message)


def _require_lts(lts: "Hypergraph"):
    if not lts.is_lts:
        raise NotAnLTSError(
            f"{lts!r} has hyperedges or abstract nodes, the oracle needs an LTS."
        )


class LassoSearch:
    """Finds rejected lassos by enumerating run relations of prefixes and cycles.

    The relation of a path holds (p, q, saw_final) when the automaton can move from p
    to q reading the path's colors. A lasso with prefix relation f and cycle relation
    g is rejected when no initial state reaches, through f, a state accepting g forever.
    """

    def __init__(self, lts: "Hypergraph", m: "BuchiAutomaton") -> None:
        _require_lts(lts)
        self.lts = lts
        self.m = m
        self.letters = {
            node: frozenset(
                (p, q, q in m.final)
                for p in m.states
                for q in m.successors(p, lts.color(node))
            )
            for node in lts.nodes
        }
        self._cycles: "Dict[str, Set[Relation]]" = {}
        self._accepting: "Dict[Relation, FrozenSet[Hashable]]" = {}

    @staticmethod
    def _then(f: "Relation", g: "Relation") -> "Relation":
        result = set()
        for p, r, b1 in f:
            for r2, q, b2 in g:
                if r == r2:
                    result.add((p, q, b1 or b2))
        return frozenset(result)

    def _paths_from(self, start: "str") -> "Set[Tuple[str, Relation]]":
        """(node, relation) pairs over nonempty paths leaving start, start's color excluded."""
        seen = set()
        stack = [(succ, self.letters[succ]) for succ in self.lts.successors(start)]
        seen.update(stack)
        while stack:
            node, relation = stack.pop()
            for succ in self.lts.successors(node):
                pair = (succ, self._then(relation, self.letters[succ]))
                if pair not in seen:
                    seen.add(pair)
                    stack.append(pair)
        return seen

    def cycles(self, node: "str") -> "Set[Relation]":
        if node not in self._cycles:
            self._cycles[node] = {
                relation for end, relation in self._paths_from(node) if end == node
            }
        return self._cycles[node]

    def accepting(self, g: "Relation") -> "FrozenSet[Hashable]":
        """States from which repeating g forever visits a final state infinitely often."""
        if g not in self._accepting:
            graph = nx.DiGraph()
            graph.add_nodes_from(self.m.states)
            flagged = set()
            for p, q, b in g:
                graph.add_edge(p, q)
                if b:
                    flagged.add((p, q))
            good = set()
            for component in nx.strongly_connected_components(graph):
                if any(p in component and q in component for p, q in flagged):
                    good |= component
            result = set(good)
            for state in good:
                result |= nx.ancestors(graph, state)
            self._accepting[g] = frozenset(result)
        return self._accepting[g]

    def all_traces_accepted(self, v: "str") -> "bool":
        if not self.lts.has_node(v):
            raise NodeNotFoundError(f"Node {v!r} is not part of the LTS.")
        prefixes = {(v, self.letters[v])}
        prefixes |= {
            (node, self._then(self.letters[v], relation))
            for node, relation in self._paths_from(v)
        }
        for node, f in prefixes:
            for g in self.cycles(node):
                accepting = self.accepting(g)
                if not any(
                    p in self.m.initial and q in accepting for p, q, _ in f
                ):
                    return False
        return True


def check_buchi(lts: "Hypergraph", v: "str", m: "BuchiAutomaton") -> "bool":
    """Whether every infinite trace from v is accepted by m."""
    return LassoSearch(lts, m).all_traces_accepted(v)


def _exists_until(
    lts: "Hypergraph", left: "Set[str]", right: "Set[str]"
) -> "Set[str]":
    predecessors: "Dict[str, Set[str]]" = {}
    for u, _, w in lts.edges:
        predecessors.setdefault(w, set()).add(u)
    result = set(right)
    stack = list(right)
    while stack:
        node = stack.pop()
        for pred in predecessors.get(node, ()):
            if pred in left and pred not in result:
                result.add(pred)
                stack.append(pred)
    return result


class ExplicitChecker:
    """Labels the nodes of one LTS with the state formulas they satisfy."""

    def __init__(self, lts: "Hypergraph") -> None:
        _require_lts(lts)
        self.lts = lts
        self._fresh = itertools.count(1)

    def label(self, formula: "Formula") -> "Set[str]":
        nodes = set(self.lts.nodes)
        match formula:
            case Atom(name):
                return {v for v in nodes if name in self.lts.color(v)}
            case Const(value):
                return nodes if value else set()
            case Not(operand):
                return nodes - self.label(operand)
            case And(left, right):
                return self.label(left) & self.label(right)
            case Or(left, right):
                return self.label(left) | self.label(right)
            case Implies(left, right):
                return (nodes - self.label(left)) | self.label(right)
            case ForAll(path):
                return self._all_paths(path)
            case Exists(path):
                return nodes - self._all_paths(Not(path))
            case Prob(bound, path):
                return self._probabilistic(bound, path)
        raise TypeError(f"{to_text(formula)} is not a state formula.")

    def _all_paths(self, path: "Formula") -> "Set[str]":
        lts = self.lts
        atoms_for: "Dict[Formula, str]" = {}

        def abstract(formula: "Formula") -> "Formula":
            nonlocal lts
            if isinstance(formula, QUANTIFIED):
                if formula not in atoms_for:
                    name = f"@o{next(self._fresh)}"
                    lts = lts.add_color(self.label(formula), name)
                    atoms_for[formula] = name
                return Atom(atoms_for[formula])
            if isinstance(formula, (Atom, Const)):
                return formula
            return type(formula)(
                **{
                    key: abstract(value) if isinstance(value, Formula) else value
                    for key, value in vars(formula).items()
                }
            )

        ltl = abstract(path)
        search = LassoSearch(lts, ltl_to_buchi(ltl))
        return {v for v in lts.nodes if search.all_traces_accepted(v)}

    def _probabilistic(self, bound: "str", path: "Formula") -> "Set[str]":
        nodes = set(self.lts.nodes)
        for v in nodes:
            if not self.lts.successors(v):
                raise DeadlockError(
                    f"Node {v} has no successor, the LTS is not a Markov chain."
                )
        positive = bound == ">0"
        match path:
            case Next(operand):
                inner = self.label(operand)
                if positive:
                    return {v for v in nodes if self.lts.successors(v) & inner}
                return {v for v in nodes if self.lts.successors(v) <= inner}
            case Until(left, right):
                return self._until(bound, self.label(left), self.label(right))
            case Finally(operand):
                return self._until(bound, nodes, self.label(operand))
            case Globally(operand):
                inner = self.label(operand)
                if not positive:
                    return nodes - _exists_until(self.lts, nodes, nodes - inner)
                graph = nx.DiGraph()
                graph.add_nodes_from(nodes)
                graph.add_edges_from((u, w) for u, _, w in self.lts.edges)
                condensed = nx.condensation(graph)
                targets = set()
                for component in condensed.nodes:
                    members = condensed.nodes[component]["members"]
                    if condensed.out_degree(component) == 0 and members <= inner:
                        targets |= members
                return _exists_until(self.lts, inner, targets)
        raise TypeError(f"P{bound}[{to_text(path)}] is not a qualitative path formula.")

    def _until(self, bound: "str", left: "Set[str]", right: "Set[str]") -> "Set[str]":
        reach = _exists_until(self.lts, left, right)
        if bound == ">0":
            return reach
        nodes = set(self.lts.nodes)
        never = nodes - reach
        return nodes - _exists_until(self.lts, left - right, never)


def label_ctlstar(lts: "Hypergraph", formula: "Formula") -> "ExplicitResult":
    satisfied = ExplicitChecker(lts).label(formula)
    return {v: v in satisfied for v in sorted_nodes(lts.nodes)}


def check_ctlstar(lts: "Hypergraph", v: "str", formula: "Formula") -> "bool":
    if not lts.has_node(v):
        raise NodeNotFoundError(f"Node {v!r} is not part of the LTS.")
    return label_ctlstar(lts, formula)[v]


def check_qpctl(lts: "Hypergraph", v: "str", formula: "Formula") -> "bool":
    """Qualitative PCTL at v, probabilistic operators decided on the graph."""
    return check_ctlstar(lts, v, formula)


@dataclass
class Mismatch:
    member: str
    node: str
    recolored: bool
    oracle: bool

    def to_dict(self) -> "dict":
        return {
            "member": self.member,
            "node": self.node,
            "recolored": self.recolored,
            "oracle": self.oracle,
        }


@dataclass
class DifferentialReport:
    formula: str
    depth: int
    members_checked: int = 0
    nodes_checked: int = 0
    mismatches: List[Mismatch] = field(default_factory=list)
    missing_members: int = 0
    extra_members: int = 0

    @property
    def ok(self) -> "bool":
        return not self.mismatches and not self.missing_members and not self.extra_members

    def to_dict(self) -> "dict":
        return {
            "formula": self.formula,
            "depth": self.depth,
            "members_checked": self.members_checked,
            "nodes_checked": self.nodes_checked,
            "mismatches": [mismatch.to_dict() for mismatch in self.mismatches],
            "missing_members": self.missing_members,
            "extra_members": self.extra_members,
            "ok": self.ok,
        }


def create_new_event_loop():
    """Return a new event loop, set as the current one of this thread."""
    loop = asyncio.new_event_loop()
    asyncio.set_event_loop(loop)
    return loop


def _compare_member(tree, graph, color: "str", formula: "Formula") -> "tuple":
    expected = label_ctlstar(graph, formula)
    found = []
    for node, oracle in expected.items():
        recolored = color in graph.color(node)
        if recolored != oracle:
            found.append(Mismatch(tree_term(tree), node, recolored, oracle))
    return len(expected), found


def compare_coloring(
    recolored: "HRG",
    color: "str",
    formula: "Formula",
    depth: "int" = ORACLE_DEPTH,
    cap: "int" = ORACLE_MEMBER_CAP,
    number_jobs: "int" = NUMBER_JOBS,
    progress: "bool" = False,
) -> "DifferentialReport":
    """Check the color of every member node against explicit checking of the formula."""
    report = DifferentialReport(to_text(formula), depth)
    members = list(itertools.islice(iter_members(recolored, depth), cap))
    batch_size = max(number_jobs, 1)
    bar = tqdm(total=len(members), disable=not progress, desc=TRANSLATION["progress_members"])

    async def check_batch(batch):
        loop = asyncio.get_running_loop()
        return await asyncio.gather(
            *(
                loop.run_in_executor(None, _compare_member, tree, graph, color, formula)
                for tree, graph in batch
            )
        )

    loop = create_new_event_loop()
    try:
        for start in range(0, len(members), batch_size):
            batch = members[start : start + batch_size]
            for nodes_checked, found in loop.run_until_complete(check_batch(batch)):
                report.members_checked += 1
                report.nodes_checked += nodes_checked
                report.mismatches.extend(found)
            bar.update(len(batch))
    finally:
        bar.close()
        loop.close()
        asyncio.set_event_loop(None)

    logger.info(
        f"Checked {report.members_checked} members of {report.formula}: "
        f"{len(report.mismatches)} mismatches."
    )
    return report


def compare_language(
    base: "HRG", recolored: "HRG", depth: "int", cap: "int" = ORACLE_MEMBER_CAP
) -> "Tuple[int, int]":
    """Members missing from and extra in the recolored grammar once formula colors are gone."""
    decolored = recolored
    for color in list(recolored.registry):
        if color not in base.registry:
            decolored = delete_color(decolored, color)
    expected = {graph for _, graph in itertools.islice(iter_members(base, depth), cap)}
    actual = {graph for _, graph in itertools.islice(iter_members(decolored, depth), cap)}
    return len(expected - actual), len(actual - expected)


def differential(
    g: "HRG",
    formula: "Formula",
    depth: "int" = ORACLE_DEPTH,
    cap: "int" = ORACLE_MEMBER_CAP,
    number_jobs: "int" = NUMBER_JOBS,
    progress: "bool" = False,
    recolorer: "Optional[Recolorer]" = None,
) -> "DifferentialReport":
    """Recolor g for the formula and compare with explicit checking member by member."""
    if not is_state_formula(formula):
        formula = ForAll(formula)
    recolorer = recolorer or Recolorer(g)
    recolored, color = recolorer.recolor(formula)
    report = compare_coloring(
        recolored, color, formula, depth, cap, number_jobs, progress
    )
    report.missing_members, report.extra_members = compare_language(
        g, recolored, depth, cap
    )
    return report
