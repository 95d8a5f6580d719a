"""Automaton behaviours of graphs.

A step summary u -> v records, as (p, q, saw_final) triples, what the automaton can do
while reading the colors strictly after u up to and including v. The letter of an
abstract target is left out, it gets added once the node is glued to a concrete one.
An omega summary at u is the set of states from which the rest of an infinite trace
leaving u is accepted.
"""

import logging
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import (
    Deque,
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import natsort

from hrgcheck.graph import NodeNotFoundError, ReplacementArityError
from hrgcheck.graph.hypergraph import (
    Hypergraph,
    HypergraphWithView,
    NodeId,
    node_key,
)
from hrgcheck.logic.buchi import BuchiAutomaton

logger = logging.getLogger("hrgcheck")

STAR = "⋆"

Triple = Tuple[Hashable, Hashable, bool]
StepSummary = FrozenSet[Triple]
OmegaSummary = FrozenSet[Hashable]


def step_summary(m: "BuchiAutomaton", letter: "Iterable[str]") -> "StepSummary":
    letter = m.letter(letter)
    return frozenset(
        (p, q, q in m.final) for p in m.states for q in m.successors(p, letter)
    )


def identity_summary(m: "BuchiAutomaton") -> "StepSummary":
    return frozenset((p, p, False) for p in m.states)


@lru_cache(maxsize=1 << 16)
def compose(f: "StepSummary", g: "StepSummary") -> "StepSummary":
    """Relational composition, the final-state flags are or-ed."""
    by_source: "Dict[Hashable, list]" = {}
    for r, q, b2 in g:
        by_source.setdefault(r, []).append((q, b2))
    return frozenset(
        (p, q, b1 or b2) for p, r, b1 in f for q, b2 in by_source.get(r, ())
    )


@lru_cache(maxsize=1 << 14)
def clos(f: "StepSummary") -> "StepSummary":
    """Least superset of f closed under composition with f."""
    result = f
    frontier = f
    while frontier:
        extended = compose(frontier, f)
        frontier = extended - result
        result = result | frontier
    return result


def omega_extend(f: "StepSummary", h: "OmegaSummary") -> "OmegaSummary":
    return frozenset(p for p, q, _ in f if q in h)


def loop_omega(g: "StepSummary") -> "OmegaSummary":
    """States from which repeating g forever has an accepting run."""
    closure = clos(g)
    seeds = frozenset(p for p, q, b in closure if p == q and b)
    return seeds | omega_extend(closure, seeds)


class MBehaviour:
    """Saturated summary edges over the nodes of a graph, omega edges lead to STAR."""

    def __init__(
        self,
        automaton: "BuchiAutomaton",
        node_summary: "Mapping[Hashable, Optional[StepSummary]]",
        step_edges: "Mapping[Tuple[Hashable, Hashable], Set[StepSummary]]",
        omega_edges: "Mapping[Hashable, Set[OmegaSummary]]",
        hyperedges: "Optional[Mapping[str, Tuple[Hashable, tuple]]]" = None,
    ) -> None:
        self.automaton = automaton
        self.node_summary = dict(node_summary)
        self.nodes = frozenset(self.node_summary)
        self.step_edges = {key: frozenset(value) for key, value in step_edges.items()}
        self.omega_edges = {key: frozenset(value) for key, value in omega_edges.items()}
        self.hyperedges = dict(hyperedges or {})

    def is_concrete(self, node: "Hashable") -> "bool":
        return self.node_summary.get(node) is not None

    def steps(self, u: "Hashable", v: "Hashable") -> "FrozenSet[StepSummary]":
        return self.step_edges.get((u, v), frozenset())

    def omegas(self, u: "Hashable") -> "FrozenSet[OmegaSummary]":
        return self.omega_edges.get(u, frozenset())

    def sorted_nodes(self) -> "list":
        return sorted(self.nodes, key=node_key)

    @property
    def edge_count(self) -> "int":
        return sum(len(v) for v in self.step_edges.values()) + sum(
            len(v) for v in self.omega_edges.values()
        )

    def __repr__(self) -> "str":
        return (
            f"<{self.__class__.__name__} "
            f"nodes={len(self.nodes)}, "
            f"edges={self.edge_count}>"
        )


def saturate(
    m: "BuchiAutomaton",
    node_summary: "Mapping[Hashable, Optional[StepSummary]]",
    steps: "Iterable[Tuple[Hashable, Hashable, StepSummary]]",
    omegas: "Iterable[Tuple[Hashable, OmegaSummary]]" = (),
    hyperedges: "Optional[Mapping]" = None,
) -> "MBehaviour":
    """Close the summary edges under path concatenation through concrete nodes,
    cycle repetition and prefixing of omega edges."""
    concrete = {node: summary is not None for node, summary in node_summary.items()}
    step_edges: "Dict[Tuple[Hashable, Hashable], Set[StepSummary]]" = {}
    omega_edges: "Dict[Hashable, Set[OmegaSummary]]" = {}
    out_nodes: "Dict[Hashable, Set[Hashable]]" = {}
    in_nodes: "Dict[Hashable, Set[Hashable]]" = {}
    worklist: "Deque[tuple]" = deque()

    def add_step(u, v, f):
        labels = step_edges.setdefault((u, v), set())
        if f not in labels:
            labels.add(f)
            out_nodes.setdefault(u, set()).add(v)
            in_nodes.setdefault(v, set()).add(u)
            worklist.append((u, v, f))

    def add_omega(u, h):
        labels = omega_edges.setdefault(u, set())
        if h not in labels:
            labels.add(h)
            worklist.append((u, h))

    for u, v, f in steps:
        add_step(u, v, f)
    for u, h in omegas:
        add_omega(u, h)

    processed = 0
    while worklist:
        item = worklist.popleft()
        processed += 1
        if len(item) == 2:
            u, h = item
            if concrete[u]:
                for t in list(in_nodes.get(u, ())):
                    for g in list(step_edges[(t, u)]):
                        add_omega(t, omega_extend(g, h))
            continue

        u, v, f = item
        if concrete[v]:
            for w in list(out_nodes.get(v, ())):
                for g in list(step_edges[(v, w)]):
                    add_step(u, w, compose(f, g))
            for h in list(omega_edges.get(v, ())):
                add_omega(u, omega_extend(f, h))
        if concrete[u]:
            for t in list(in_nodes.get(u, ())):
                for g in list(step_edges[(t, u)]):
                    add_step(t, v, compose(g, f))
            if u == v:
                add_omega(u, loop_omega(f))

    logger.debug(f"Saturated {len(node_summary)} nodes after {processed} worklist items.")
    return MBehaviour(m, node_summary, step_edges, omega_edges, hyperedges)


def _edge_label(
    m: "BuchiAutomaton", summary: "Optional[StepSummary]"
) -> "StepSummary":
    return identity_summary(m) if summary is None else summary


def behaviour_of(graph: "Hypergraph", m: "BuchiAutomaton") -> "MBehaviour":
    """M-behaviour of a graph; hyperedges are kept for display only."""
    node_summary = {node: None for node in graph.abstract_nodes}
    for node in graph.nodes:
        node_summary[node] = step_summary(m, graph.color(node))
    steps = [
        (u, v, _edge_label(m, node_summary[v])) for u, _, v in sorted(graph.edges, key=str)
    ]
    return saturate(m, node_summary, steps, hyperedges=graph.hyperedges)


@dataclass(frozen=True)
class InterfaceBehaviour:
    """A behaviour restricted to an ordered list of interface positions 1..arity.

    aliases[i - 1] is the first position holding the same node as position i.
    node_summaries[i - 1] is None for a position that is an abstract node.
    """

    arity: int
    node_summaries: Tuple[Optional[StepSummary], ...]
    aliases: Tuple[int, ...]
    step_edges: FrozenSet[Tuple[int, int, StepSummary]]
    omega_edges: FrozenSet[Tuple[int, OmegaSummary]]

    @classmethod
    def empty(cls, arity: "int" = 0) -> "InterfaceBehaviour":
        return cls(
            arity=arity,
            node_summaries=(None,) * arity,
            aliases=tuple(range(1, arity + 1)),
            step_edges=frozenset(),
            omega_edges=frozenset(),
        )

    def __repr__(self) -> "str":
        return (
            f"<{self.__class__.__name__} "
            f"{self.arity=}, "
            f"steps={len(self.step_edges)}, "
            f"omegas={len(self.omega_edges)}>"
        )


def restrict_to(b: "MBehaviour", nodes: "Sequence[Hashable]") -> "InterfaceBehaviour":
    nodes = tuple(nodes)
    for node in nodes:
        if node not in b.nodes:
            raise NodeNotFoundError(f"Interface node {node!r} is not in the behaviour.")
    first = {}
    aliases = []
    for position, node in enumerate(nodes, start=1):
        aliases.append(first.setdefault(node, position))

    step_edges = frozenset(
        (i, j, f)
        for i, u in enumerate(nodes, start=1)
        for j, v in enumerate(nodes, start=1)
        for f in b.steps(u, v)
    )
    omega_edges = frozenset(
        (i, h) for i, u in enumerate(nodes, start=1) for h in b.omegas(u)
    )
    return InterfaceBehaviour(
        arity=len(nodes),
        node_summaries=tuple(b.node_summary[node] for node in nodes),
        aliases=tuple(aliases),
        step_edges=step_edges,
        omega_edges=omega_edges,
    )


def restrict(b: "MBehaviour", view: "HypergraphWithView") -> "InterfaceBehaviour":
    """Keep the interface nodes of the view, in canonical interface order."""
    return restrict_to(b, view.interface_order())


def language_class(graph: "Hypergraph", m: "BuchiAutomaton") -> "InterfaceBehaviour":
    """Class of (graph, no view), the representation used for plugged languages."""
    return restrict(behaviour_of(graph, m), HypergraphWithView(graph))


def glue(
    host: "Hypergraph", context: "Optional[InterfaceBehaviour]"
) -> "Dict[NodeId, Hashable]":
    """Behaviour node of every host node; with a context, abstract node i is glued
    onto the context position that first holds its node."""
    mapping: "Dict[NodeId, Hashable]" = {node: node for node in host.nodes}
    for i in host.abstract_nodes:
        mapping[i] = context.aliases[i - 1] if context is not None else i
    return mapping


def plug(
    host: "Hypergraph",
    assignment: "Mapping[str, InterfaceBehaviour]",
    m: "BuchiAutomaton",
    context: "Optional[InterfaceBehaviour]" = None,
    hole: "Optional[str]" = None,
) -> "MBehaviour":
    """Behaviour of host with every hyperedge but the hole replaced by a class.

    A context glues the host's abstract nodes onto the surrounding graph and
    contributes the paths running outside of it.
    """
    if context is not None and context.arity != host.abstract_count:
        raise ReplacementArityError(
            f"Context has {context.arity} positions, host has "
            f"{host.abstract_count} abstract nodes."
        )
    mapping = glue(host, context)

    node_summary: "Dict[Hashable, Optional[StepSummary]]" = {}
    for node in host.nodes:
        node_summary[node] = step_summary(m, host.color(node))
    for i in host.abstract_nodes:
        alias = mapping[i]
        node_summary[alias] = (
            context.node_summaries[alias - 1] if context is not None else None
        )

    def label_into(node: "Hashable") -> "StepSummary":
        return _edge_label(m, node_summary[node])

    steps = [
        (mapping[u], mapping[v], label_into(mapping[v]))
        for u, _, v in sorted(host.edges, key=str)
    ]
    omegas = []

    expected = set(host.hyperedges) - ({hole} if hole is not None else set())
    if set(assignment) != expected:
        raise ReplacementArityError(
            f"Classes given for {natsort.natsorted(assignment)}, "
            f"expected {natsort.natsorted(expected)}."
        )
    for hyperedge in natsort.natsorted(expected):
        attach = [mapping[node] for node in host.attachment(hyperedge)]
        cls = assignment[hyperedge]
        if cls.arity != len(attach):
            raise ReplacementArityError(
                f"Hyperedge {hyperedge} has {len(attach)} attached nodes, "
                f"its class has arity {cls.arity}."
            )
        for i, j, f in cls.step_edges:
            target = attach[j - 1]
            steps.append((attach[i - 1], target, compose(f, label_into(target))))
        for i, h in cls.omega_edges:
            omegas.append((attach[i - 1], h))

    if context is not None:
        for i, j, f in context.step_edges:
            steps.append((context.aliases[i - 1], context.aliases[j - 1], f))
        for i, h in context.omega_edges:
            omegas.append((context.aliases[i - 1], h))

    return saturate(m, node_summary, steps, omegas, hyperedges=host.hyperedges)


def satisfies(b: "MBehaviour", v: "Hashable", m: "BuchiAutomaton") -> "bool":
    """Whether every infinite trace starting at v is accepted by m."""
    if v not in b.nodes:
        raise NodeNotFoundError(f"Node {v!r} is not in the behaviour.")
    own = _edge_label(m, b.node_summary[v])
    return all(omega_extend(own, h) & m.initial for h in b.omegas(v))
