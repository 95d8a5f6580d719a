import logging
from collections import Counter
from types import MappingProxyType
from typing import (
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Mapping,
    Optional,
    Set,
    Tuple,
    Union,
)

import natsort
import networkx as nx

from hrgcheck.graph import (
    IncompleteAssignmentError,
    InvalidPinningError,
    InvalidViewError,
    NodeNotFoundError,
    ReplacementArityError,
)

logger = logging.getLogger("hrgcheck")

NodeId = Union[str, int]
Edge = Tuple[NodeId, str, NodeId]
Trace = Tuple[FrozenSet[str], ...]

_natural_key = natsort.natsort_keygen()


def node_key(node: "NodeId"):
    """Sort abstract nodes first by number, then concrete nodes in natural order."""
    if isinstance(node, int):
        return (0, node, ())
    return (1, 0, _natural_key(node))


def sorted_nodes(nodes: "Iterable[NodeId]") -> "list":
    return sorted(nodes, key=node_key)


def _fresh(candidate: "str", used: "Set[str]") -> "str":
    while candidate in used:
        candidate = f"{candidate}'"
    used.add(candidate)
    return candidate


class Hypergraph:
    """Concrete nodes, abstract nodes 1..n, action-labeled edges and labeled hyperedges.

    Concrete node ids are strings and abstract nodes are the integers 1..n.
    Values are immutable; every modifier returns a new graph.
    """

    __slots__ = (
        "_nodes",
        "_abstract_count",
        "_edges",
        "_hyperedges",
        "_colors",
        "_succ",
        "_hash",
    )

    def __init__(
        self,
        nodes: "Iterable[str]" = (),
        abstract_count: "int" = 0,
        edges: "Iterable[Edge]" = (),
        hyperedges: "Optional[Mapping[str, Tuple[Hashable, Iterable[NodeId]]]]" = None,
        colors: "Optional[Mapping[str, Iterable[str]]]" = None,
    ) -> None:
        self._nodes = frozenset(nodes)
        for node in self._nodes:
            if not isinstance(node, str):
                raise NodeNotFoundError(
                    f"Concrete node ids must be strings, got {node!r}."
                )
        if abstract_count < 0:
            raise NodeNotFoundError(f"Negative abstract node count {abstract_count}.")
        self._abstract_count = abstract_count

        colors = colors or {}
        for node in colors:
            if node not in self._nodes:
                raise NodeNotFoundError(f"Colored node {node!r} is not a concrete node.")
        self._colors = {
            node: frozenset(colors.get(node, ())) for node in self._nodes
        }

        self._edges = frozenset((u, a, v) for u, a, v in edges)
        for u, _, v in self._edges:
            self._check_node(u)
            self._check_node(v)

        self._hyperedges: "Dict[str, Tuple[Hashable, Tuple[NodeId, ...]]]" = {}
        for hyperedge, (label, attach) in (hyperedges or {}).items():
            attach = tuple(attach)
            for node in attach:
                self._check_node(node)
            self._hyperedges[hyperedge] = (label, attach)

        self._succ = None
        self._hash = None

    def _check_node(self, node: "NodeId"):
        if not self.has_node(node):
            raise NodeNotFoundError(f"Node {node!r} is not part of the graph.")

    @property
    def nodes(self) -> "FrozenSet[str]":
        return self._nodes

    @property
    def abstract_count(self) -> "int":
        return self._abstract_count

    @property
    def abstract_nodes(self) -> "range":
        return range(1, self._abstract_count + 1)

    @property
    def all_nodes(self) -> "FrozenSet[NodeId]":
        return self._nodes | frozenset(self.abstract_nodes)

    @property
    def edges(self) -> "FrozenSet[Edge]":
        return self._edges

    @property
    def hyperedges(self) -> "Mapping[str, Tuple[Hashable, Tuple[NodeId, ...]]]":
        return MappingProxyType(self._hyperedges)

    @property
    def colors(self) -> "Mapping[str, FrozenSet[str]]":
        return MappingProxyType(self._colors)

    def has_node(self, node: "NodeId") -> "bool":
        if isinstance(node, int) and not isinstance(node, bool):
            return 1 <= node <= self._abstract_count
        return node in self._nodes

    def is_concrete(self, node: "NodeId") -> "bool":
        return node in self._nodes

    def color(self, node: "NodeId") -> "FrozenSet[str]":
        """Colors of a node, abstract nodes are uncolored."""
        self._check_node(node)
        return self._colors.get(node, frozenset())

    def label(self, hyperedge: "str") -> "Hashable":
        return self._hyperedges[hyperedge][0]

    def attachment(self, hyperedge: "str") -> "Tuple[NodeId, ...]":
        return self._hyperedges[hyperedge][1]

    def sorted_hyperedges(self) -> "list":
        return natsort.natsorted(self._hyperedges)

    @property
    def attached_nodes(self) -> "FrozenSet[NodeId]":
        return frozenset(
            node for _, attach in self._hyperedges.values() for node in attach
        )

    @property
    def unattached(self) -> "FrozenSet[str]":
        """Concrete nodes that appear in no attachment sequence."""
        return self._nodes - self.attached_nodes

    @property
    def is_lts(self) -> "bool":
        return not self._hyperedges and self._abstract_count == 0

    def successors(self, node: "NodeId") -> "FrozenSet[NodeId]":
        if self._succ is None:
            succ: "Dict[NodeId, Set[NodeId]]" = {}
            for u, _, v in self._edges:
                succ.setdefault(u, set()).add(v)
            self._succ = {u: frozenset(vs) for u, vs in succ.items()}
        self._check_node(node)
        return self._succ.get(node, frozenset())

    def used_colors(self) -> "FrozenSet[str]":
        return frozenset(c for cs in self._colors.values() for c in cs)

    def _rebuild(self, **changes) -> "Hypergraph":
        fields = dict(
            nodes=self._nodes,
            abstract_count=self._abstract_count,
            edges=self._edges,
            hyperedges=self._hyperedges,
            colors=self._colors,
        )
        fields.update(changes)
        return Hypergraph(**fields)

    def add_color(self, nodes: "Iterable[str]", color: "str") -> "Hypergraph":
        nodes = set(nodes)
        colors = {
            node: cs | {color} if node in nodes else cs
            for node, cs in self._colors.items()
        }
        return self._rebuild(colors=colors)

    def remove_color(self, color: "str") -> "Hypergraph":
        colors = {node: cs - {color} for node, cs in self._colors.items()}
        return self._rebuild(colors=colors)

    def project_colors(self, keep: "Iterable[str]") -> "Hypergraph":
        keep = frozenset(keep)
        colors = {node: cs & keep for node, cs in self._colors.items()}
        return self._rebuild(colors=colors)

    def rename_color(self, old: "str", new: "str") -> "Hypergraph":
        colors = {
            node: (cs - {old}) | {new} if old in cs else cs
            for node, cs in self._colors.items()
        }
        return self._rebuild(colors=colors)

    def relabel(self, labels: "Mapping[str, Hashable]") -> "Hypergraph":
        """Swap hyperedge labels, hyperedges missing from the map keep theirs."""
        hyperedges = {
            hyperedge: (labels.get(hyperedge, label), attach)
            for hyperedge, (label, attach) in self._hyperedges.items()
        }
        return self._rebuild(hyperedges=hyperedges)

    def _key(self):
        return (
            self._nodes,
            self._abstract_count,
            self._edges,
            frozenset(self._hyperedges.items()),
            frozenset(self._colors.items()),
        )

    def __eq__(self, other) -> "bool":
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> "int":
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self) -> "str":
        return (
            f"<{self.__class__.__name__} "
            f"nodes={len(self._nodes)}, "
            f"abstract={self._abstract_count}, "
            f"edges={len(self._edges)}, "
            f"hyperedges={len(self._hyperedges)}>"
        )


def handle(label: "Hashable", arity: "int", hyperedge: "str" = "e") -> "Hypergraph":
    """One hyperedge attached to the abstract nodes 1..arity."""
    return Hypergraph(
        abstract_count=arity,
        hyperedges={hyperedge: (label, tuple(range(1, arity + 1)))},
    )


def _replace(
    host: "Hypergraph", assignment: "Mapping[str, Hypergraph]"
) -> "Tuple[Hypergraph, Dict[str, Dict[NodeId, NodeId]]]":
    unknown = set(assignment) - set(host.hyperedges)
    if unknown:
        raise IncompleteAssignmentError(
            f"Assignment names hyperedges the host doesn't have: {sorted(unknown)}"
        )
    missing = set(host.hyperedges) - set(assignment)
    if missing:
        raise IncompleteAssignmentError(
            f"Assignment is missing hyperedges: {natsort.natsorted(missing)}"
        )

    used_nodes = set(host.nodes)
    used_hyperedges: "Set[str]" = set()
    colors = dict(host.colors)
    edges = set(host.edges)
    hyperedges = {}
    node_maps = {}

    for hyperedge in host.sorted_hyperedges():
        attach = host.attachment(hyperedge)
        plugged = assignment[hyperedge]
        if len(attach) != plugged.abstract_count:
            raise ReplacementArityError(
                f"Hyperedge {hyperedge} has {len(attach)} attached nodes but the "
                f"plugged graph has {plugged.abstract_count} abstract nodes."
            )

        mapping: "Dict[NodeId, NodeId]" = {
            i: attach[i - 1] for i in plugged.abstract_nodes
        }
        for node in sorted_nodes(plugged.nodes):
            new_node = _fresh(f"{hyperedge}.{node}", used_nodes)
            mapping[node] = new_node
            colors[new_node] = plugged.color(node)

        for u, action, v in plugged.edges:
            edges.add((mapping[u], action, mapping[v]))

        for inner in plugged.sorted_hyperedges():
            label, inner_attach = plugged.hyperedges[inner]
            new_hyperedge = _fresh(f"{hyperedge}.{inner}", used_hyperedges)
            hyperedges[new_hyperedge] = (
                label,
                tuple(mapping[node] for node in inner_attach),
            )
        node_maps[hyperedge] = mapping

    graph = Hypergraph(
        nodes=used_nodes,
        abstract_count=host.abstract_count,
        edges=edges,
        hyperedges=hyperedges,
        colors=colors,
    )
    return graph, node_maps


def replace(host: "Hypergraph", assignment: "Mapping[str, Hypergraph]") -> "Hypergraph":
    """Replace every hyperedge of the host by its assigned graph.

    The i-th attached node of a hyperedge is identified with abstract node i of the
    plugged graph. Plugged nodes are renamed to "<hyperedge>.<node>".
    """
    graph, _ = _replace(host, assignment)
    return graph


class HypergraphWithView:
    """A hypergraph with a set of additionally exposed unattached nodes."""

    __slots__ = ("graph", "view")

    def __init__(self, graph: "Hypergraph", view: "Iterable[str]" = ()) -> None:
        view = frozenset(view)
        outside = view - graph.unattached
        if outside:
            raise InvalidViewError(
                f"View nodes must be unattached concrete nodes: {sorted(outside)}"
            )
        self.graph = graph
        self.view = view

    @property
    def exposed(self) -> "FrozenSet[NodeId]":
        return (
            self.view
            | frozenset(self.graph.abstract_nodes)
            | self.graph.attached_nodes
        )

    def interface_order(self) -> "Tuple[NodeId, ...]":
        """Abstract nodes by number, attached nodes by hyperedge and position, then the view."""
        order = list(self.graph.abstract_nodes)
        seen = set(order)
        for hyperedge in self.graph.sorted_hyperedges():
            for node in self.graph.attachment(hyperedge):
                if node not in seen:
                    seen.add(node)
                    order.append(node)
        order.extend(sorted_nodes(self.view))
        return tuple(order)

    def __eq__(self, other) -> "bool":
        if not isinstance(other, HypergraphWithView):
            return NotImplemented
        return self.graph == other.graph and self.view == other.view

    def __hash__(self) -> "int":
        return hash((self.graph, self.view))

    def __repr__(self) -> "str":
        return f"<{self.__class__.__name__} {self.graph!r} view={sorted(self.view)}>"


def replace_view(
    host: "HypergraphWithView",
    assignment: "Mapping[str, HypergraphWithView]",
) -> "HypergraphWithView":
    """Replacement lifted to views: the resulting view joins all views."""
    graph, node_maps = _replace(
        host.graph, {hyperedge: hgv.graph for hyperedge, hgv in assignment.items()}
    )
    view = set(host.view)
    for hyperedge, hgv in assignment.items():
        view.update(node_maps[hyperedge][node] for node in hgv.view)
    return HypergraphWithView(graph, view)


class Coupling:
    """Bijections between the views and the hyperedges of two HGVs.

    The induced node map nu fixes abstract nodes, extends eta and aligns
    attachment positions; an inconsistent coupling is rejected.
    """

    def __init__(
        self,
        source: "HypergraphWithView",
        target: "HypergraphWithView",
        eta: "Mapping[str, str]",
        mu: "Mapping[str, str]",
    ) -> None:
        self.source = source
        self.target = target
        self.eta = dict(eta)
        self.mu = dict(mu)
        self._check_bijection(self.eta, source.view, target.view, "view")
        self._check_bijection(
            self.mu,
            set(source.graph.hyperedges),
            set(target.graph.hyperedges),
            "hyperedge",
        )
        self.nu = self._induce()

    @staticmethod
    def _check_bijection(mapping: "dict", domain, codomain, what: "str"):
        if set(mapping) != set(domain) or set(mapping.values()) != set(codomain):
            raise InvalidPinningError(f"The {what} map is not a bijection.")
        if len(set(mapping.values())) != len(mapping):
            raise InvalidPinningError(f"The {what} map is not injective.")

    def _induce(self) -> "Dict[NodeId, NodeId]":
        source, target = self.source.graph, self.target.graph
        if source.abstract_count != target.abstract_count:
            raise InvalidPinningError("Coupled graphs differ in abstract node count.")

        nu: "Dict[NodeId, NodeId]" = {}
        inverse: "Dict[NodeId, NodeId]" = {}

        def bind(a: "NodeId", b: "NodeId"):
            if nu.get(a, b) != b or inverse.get(b, a) != a:
                raise InvalidPinningError(f"Coupling binds {a!r} inconsistently.")
            nu[a] = b
            inverse[b] = a

        for i in source.abstract_nodes:
            bind(i, i)
        for a, b in self.eta.items():
            bind(a, b)
        for e, f in self.mu.items():
            attach_e, attach_f = source.attachment(e), target.attachment(f)
            if len(attach_e) != len(attach_f):
                raise InvalidPinningError(
                    f"Hyperedges {e} and {f} differ in attachment length."
                )
            for a, b in zip(attach_e, attach_f):
                bind(a, b)
        return nu


def pinned_isomorphic(
    a: "Hypergraph", b: "Hypergraph", pinning: "Mapping[NodeId, NodeId]"
) -> "bool":
    """Compare two graphs under a node pinning.

    Abstract nodes not named by the pinning are pinned to themselves. The
    remaining concrete nodes and all hyperedge ids are free: any bijection
    preserving colors, edges and labelled attachments is searched for.
    """
    pinned = list(pinning.values())
    if len(set(pinned)) != len(pinned):
        raise InvalidPinningError("Pinning maps two nodes to the same node.")
    for source, target in pinning.items():
        if not a.has_node(source) or not b.has_node(target):
            raise InvalidPinningError(f"Pinning {source!r} -> {target!r} is unknown.")
        if a.is_concrete(source) != b.is_concrete(target):
            raise InvalidPinningError(
                f"Pinning {source!r} -> {target!r} mixes abstract and concrete nodes."
            )

    if (
        a.abstract_count != b.abstract_count
        or len(a.nodes) != len(b.nodes)
        or len(a.edges) != len(b.edges)
        or len(a.hyperedges) != len(b.hyperedges)
    ):
        return False

    nu = dict(pinning)
    for i in a.abstract_nodes:
        nu.setdefault(i, i)
    if len(set(nu.values())) != len(nu):
        return False
    if isomorphism_invariant(a, nu) != isomorphism_invariant(b, {t: t for t in nu.values()}):
        return False

    return nx.is_isomorphic(
        _incidence_graph(a, nu),
        _incidence_graph(b, {t: t for t in nu.values()}),
        node_match=_match_nodes,
        edge_match=_match_edges,
    )


def _node_descriptor(graph: "Hypergraph", node: "NodeId", pins: "Mapping[NodeId, NodeId]"):
    pin = pins.get(node)
    return (
        "" if pin is None else repr(pin),
        tuple(sorted(graph.color(node))),
    )


def isomorphism_invariant(
    graph: "Hypergraph", pins: "Optional[Mapping[NodeId, NodeId]]" = None
) -> "tuple":
    """Name-free summary, equal for graphs isomorphic under the pins.

    Abstract nodes are pinned to themselves unless pins name them.
    """
    if pins is None:
        pins = {i: i for i in graph.abstract_nodes}
    describe = {node: _node_descriptor(graph, node, pins) for node in graph.all_nodes}
    return (
        graph.abstract_count,
        tuple(sorted(describe.values())),
        tuple(sorted((describe[u], action, describe[v]) for u, action, v in graph.edges)),
        tuple(
            sorted(
                (hash(label), tuple(describe[node] for node in attach))
                for label, attach in graph.hyperedges.values()
            )
        ),
    )


def _incidence_graph(graph: "Hypergraph", pins: "Mapping[NodeId, NodeId]") -> "nx.MultiDiGraph":
    """Nodes and hyperedges as vertices; attachments as position-labelled arcs."""
    incidence = nx.MultiDiGraph()
    for node in graph.all_nodes:
        incidence.add_node(("n", node), kind=_node_descriptor(graph, node, pins))
    for u, action, v in graph.edges:
        incidence.add_edge(("n", u), ("n", v), key=action, label=("edge", action))
    for hyperedge, (label, attach) in graph.hyperedges.items():
        incidence.add_node(("h", hyperedge), kind=("hyperedge", label))
        for position, node in enumerate(attach, start=1):
            incidence.add_edge(
                ("h", hyperedge), ("n", node), key=position, label=("attach", position)
            )
    return incidence


def _match_nodes(first: "dict", second: "dict") -> "bool":
    return first["kind"] == second["kind"]


def _match_edges(first: "dict", second: "dict") -> "bool":
    return Counter(data["label"] for data in first.values()) == Counter(
        data["label"] for data in second.values()
    )


class IsomorphismClasses:
    """Numbers graphs so that isomorphic graphs share a number.

    Abstract nodes stay pinned to themselves.
    """

    def __init__(self) -> None:
        self._known: "Dict[Hypergraph, int]" = {}
        self._buckets: "Dict[tuple, list]" = {}

    def class_of(self, graph: "Hypergraph") -> "int":
        number = self._known.get(graph)
        if number is not None:
            return number
        bucket = self._buckets.setdefault(isomorphism_invariant(graph), [])
        for representative, known in bucket:
            if pinned_isomorphic(graph, representative, {}):
                number = known
                break
        else:
            number = len(self._known)
            bucket.append((graph, number))
        self._known[graph] = number
        return number

    def __len__(self) -> "int":
        return len(set(self._known.values()))

    def __repr__(self) -> "str":
        return f"<{self.__class__.__name__} graphs={len(self._known)} classes={len(self)}>"


def finite_traces(
    graph: "Hypergraph", u: "NodeId", v: "NodeId", max_len: "Optional[int]"
) -> "Set[Trace]":
    """Color sequences of paths u p v with p concrete and at most max_len long.

    Abstract endpoints contribute no letter. max_len=None bounds p by the number of
    concrete nodes, which is exhaustive on acyclic graphs.
    """
    for node in (u, v):
        if not graph.has_node(node):
            raise NodeNotFoundError(f"Node {node!r} is not part of the graph.")
    if max_len is None:
        max_len = len(graph.nodes)

    def letter(node: "NodeId") -> "Trace":
        return (graph.color(node),) if graph.is_concrete(node) else ()

    traces: "Set[Trace]" = set()
    if u == v:
        traces.add(letter(u))

    stack = [(u, letter(u), 0)]
    while stack:
        node, trace, length = stack.pop()
        for succ in graph.successors(node):
            if succ == v:
                traces.add(trace + letter(v))
            if graph.is_concrete(succ) and length < max_len:
                stack.append((succ, trace + letter(succ), length + 1))
    return traces
