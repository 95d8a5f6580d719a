import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import (
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Tuple,
    Union,
)

import natsort
import networkx as nx

from hrgcheck.graph import TreeShapeError
from hrgcheck.graph.hypergraph import Hypergraph, handle, replace
from hrgcheck.utils.config import TREE_COUNT_CAP

logger = logging.getLogger("hrgcheck")


@dataclass(frozen=True)
class Nonterminal:
    name: str
    arity: int

    def __str__(self) -> "str":
        return self.name


@dataclass(frozen=True)
class Rule:
    """A production lhs -> body. origin names the base rule this one was derived from."""

    name: str
    lhs: Hashable
    body: Hypergraph = field(compare=False)
    origin: Optional[str] = None

    @property
    def base_name(self) -> "str":
        return self.origin or self.name

    def children(self) -> "List[Tuple[str, Hashable]]":
        return [(he, self.body.label(he)) for he in self.body.sorted_hyperedges()]


@dataclass(frozen=True)
class Leaf:
    nonterminal: Hashable


@dataclass(frozen=True)
class Node:
    rule: Rule
    children: Tuple[Tuple[str, "DerivationTree"], ...] = ()

    @property
    def children_map(self) -> "Dict[str, DerivationTree]":
        return dict(self.children)


DerivationTree = Union[Leaf, Node]


def tree_root(tree: "DerivationTree") -> "Hashable":
    if isinstance(tree, Leaf):
        return tree.nonterminal
    return tree.rule.lhs


def tree_height(tree: "DerivationTree") -> "int":
    if isinstance(tree, Leaf):
        return 0
    return 1 + max((tree_height(child) for _, child in tree.children), default=0)


def tree_size(tree: "DerivationTree") -> "int":
    """Number of rule applications."""
    if isinstance(tree, Leaf):
        return 0
    return 1 + sum(tree_size(child) for _, child in tree.children)


def tree_term(tree: "DerivationTree", base_names: "bool" = False) -> "str":
    """Nested rule-name term, e.g. R3(e1=R2(e1=R1))."""
    if isinstance(tree, Leaf):
        return str(tree.nonterminal)
    name = tree.rule.base_name if base_names else tree.rule.name
    if not tree.children:
        return name
    inner = ", ".join(
        f"{he}={tree_term(child, base_names)}" for he, child in tree.children
    )
    return f"{name}({inner})"


def leaves(tree: "DerivationTree") -> "int":
    if isinstance(tree, Leaf):
        return 1
    return sum(leaves(child) for _, child in tree.children)


def assemble(tree: "DerivationTree") -> "Hypergraph":
    """Build the graph of a derivation tree, leaves become handles."""
    if isinstance(tree, Leaf):
        nonterminal = tree.nonterminal
        return handle(nonterminal, nonterminal.arity)
    if not isinstance(tree, Node):
        raise TreeShapeError(f"{tree!r} is not a derivation tree.")

    body = tree.rule.body
    children = tree.children_map
    if len(children) != len(tree.children) or set(children) != set(body.hyperedges):
        raise TreeShapeError(
            f"Children of {tree.rule.name} don't match its hyperedges: "
            f"{natsort.natsorted(children)} vs {body.sorted_hyperedges()}"
        )
    for hyperedge, child in children.items():
        if tree_root(child) != body.label(hyperedge):
            raise TreeShapeError(
                f"Child at {hyperedge} of {tree.rule.name} derives "
                f"{tree_root(child)}, expected {body.label(hyperedge)}."
            )
    return replace(
        body, {hyperedge: assemble(child) for hyperedge, child in children.items()}
    )


class HRG:
    """Nonterminals, start symbols and rules, plus the declared colors and actions.

    The registry maps formula colors added by recoloring to their formula text.
    """

    def __init__(
        self,
        nonterminals: "Iterable[Hashable]",
        start: "Iterable[Hashable]",
        rules: "Iterable[Rule]",
        colors: "Iterable[str]" = (),
        actions: "Iterable[str]" = (),
        registry: "Optional[Mapping[str, str]]" = None,
    ) -> None:
        self.nonterminals = frozenset(nonterminals)
        self.start = tuple(natsort.natsorted(set(start), key=str))
        self.rules = tuple(natsort.natsorted(rules, key=lambda rule: rule.name))
        self.colors = frozenset(colors)
        self.actions = frozenset(actions)
        self.registry = dict(registry or {})

        self._by_lhs: "Dict[Hashable, List[Rule]]" = {}
        for rule in self.rules:
            self._by_lhs.setdefault(rule.lhs, []).append(rule)

    def rules_for(self, nonterminal: "Hashable") -> "List[Rule]":
        return self._by_lhs.get(nonterminal, [])

    def rule(self, name: "str") -> "Rule":
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(name)

    def nonterminal(self, name: "str") -> "Hashable":
        for nonterminal in self.nonterminals:
            if str(nonterminal) == name:
                return nonterminal
        raise KeyError(name)

    def sorted_nonterminals(self) -> "list":
        return natsort.natsorted(self.nonterminals, key=str)

    @property
    def all_colors(self) -> "FrozenSet[str]":
        return self.colors | frozenset(self.registry)

    def derive(
        self,
        nonterminals: "Optional[Iterable[Hashable]]" = None,
        start: "Optional[Iterable[Hashable]]" = None,
        rules: "Optional[Iterable[Rule]]" = None,
        colors: "Optional[Iterable[str]]" = None,
        registry: "Optional[Mapping[str, str]]" = None,
    ) -> "HRG":
        """Copy with some parts swapped out."""
        return HRG(
            nonterminals=self.nonterminals if nonterminals is None else nonterminals,
            start=self.start if start is None else start,
            rules=self.rules if rules is None else rules,
            colors=self.colors if colors is None else colors,
            actions=self.actions,
            registry=self.registry if registry is None else registry,
        )

    def map_bodies(self, function) -> "HRG":
        return self.derive(
            rules=[
                Rule(rule.name, rule.lhs, function(rule.body), rule.origin)
                for rule in self.rules
            ]
        )

    def __eq__(self, other) -> "bool":
        if not isinstance(other, HRG):
            return NotImplemented
        return (
            self.nonterminals == other.nonterminals
            and self.start == other.start
            and [(r, r.body) for r in self.rules] == [(r, r.body) for r in other.rules]
            and self.colors == other.colors
            and self.actions == other.actions
            and self.registry == other.registry
        )

    def __hash__(self) -> "int":
        return hash((self.nonterminals, self.start, self.rules))

    def __repr__(self) -> "str":
        return (
            f"<{self.__class__.__name__} "
            f"nonterminals={len(self.nonterminals)}, "
            f"rules={len(self.rules)}, "
            f"start={[str(s) for s in self.start]}>"
        )


class GrammarStats(NamedTuple):
    nonterminals: int
    rules: int
    max_hyperedges: int
    max_arity: int


def grammar_stats(g: "HRG") -> "GrammarStats":
    return GrammarStats(
        nonterminals=len(g.nonterminals),
        rules=len(g.rules),
        max_hyperedges=max((len(r.body.hyperedges) for r in g.rules), default=0),
        max_arity=max((nt.arity for nt in g.nonterminals), default=0),
    )


def validate(g: "HRG") -> "List[str]":
    """List the violations of the grammar conditions, empty when the grammar is fine."""
    violations = []
    for nonterminal in g.start:
        if nonterminal not in g.nonterminals:
            violations.append(f"Start symbol {nonterminal} is not declared.")
        if nonterminal.arity != 0:
            violations.append(
                f"Start symbol {nonterminal} has arity {nonterminal.arity}, expected 0."
            )

    known_colors = g.all_colors
    for rule in g.rules:
        body = rule.body
        if rule.lhs not in g.nonterminals:
            violations.append(f"Rule {rule.name}: lhs {rule.lhs} is not declared.")
        if body.abstract_count != rule.lhs.arity:
            violations.append(
                f"Rule {rule.name}: body has {body.abstract_count} abstract nodes "
                f"but {rule.lhs} has arity {rule.lhs.arity}."
            )
        for hyperedge in body.sorted_hyperedges():
            label, attach = body.hyperedges[hyperedge]
            if label not in g.nonterminals:
                violations.append(
                    f"Rule {rule.name}: hyperedge {hyperedge} is labeled with "
                    f"undeclared {label}."
                )
            elif len(attach) != label.arity:
                violations.append(
                    f"Rule {rule.name}: hyperedge {hyperedge} has {len(attach)} "
                    f"attached nodes but {label} has arity {label.arity}."
                )
        undeclared = body.used_colors() - known_colors
        if undeclared:
            violations.append(
                f"Rule {rule.name}: undeclared colors {natsort.natsorted(undeclared)}."
            )
        unknown_actions = {action for _, action, _ in body.edges} - g.actions
        if unknown_actions:
            violations.append(
                f"Rule {rule.name}: undeclared actions "
                f"{natsort.natsorted(unknown_actions)}."
            )
    return violations


def _productive(rules: "Iterable[Rule]") -> "set":
    rules = list(rules)
    productive = set()
    changed = True
    while changed:
        changed = False
        for rule in rules:
            if rule.lhs in productive:
                continue
            if all(label in productive for _, label in rule.children()):
                productive.add(rule.lhs)
                changed = True
    return productive


def prune(g: "HRG", allowed: "Optional[Iterable[Rule]]" = None) -> "HRG":
    """Drop unproductive and unreachable rules and nonterminals. Start symbols stay."""
    rules = list(g.rules if allowed is None else allowed)
    productive = _productive(rules)
    usable = [
        rule
        for rule in rules
        if rule.lhs in productive
        and all(label in productive for _, label in rule.children())
    ]

    reachable = set(nt for nt in g.start if nt in productive)
    stack = list(reachable)
    by_lhs: "Dict[Hashable, List[Rule]]" = {}
    for rule in usable:
        by_lhs.setdefault(rule.lhs, []).append(rule)
    while stack:
        nonterminal = stack.pop()
        for rule in by_lhs.get(nonterminal, []):
            for _, label in rule.children():
                if label not in reachable:
                    reachable.add(label)
                    stack.append(label)

    kept = [rule for rule in usable if rule.lhs in reachable]
    logger.debug(f"Pruned {len(g.rules)} rules to {len(kept)}.")
    return g.derive(nonterminals=reachable | set(g.start), rules=kept)


class CountKind(Enum):
    ZERO = "ZERO"
    FINITE = "FINITE"
    INFINITE = "INFINITE"


@dataclass(frozen=True)
class TreeCount:
    kind: CountKind
    count: int = 0
    capped: bool = False

    def __str__(self) -> "str":
        if self.kind is CountKind.ZERO:
            return "0"
        if self.kind is CountKind.INFINITE:
            return "INF"
        if self.capped:
            return f">{self.count}"
        return str(self.count)

    @property
    def short(self) -> "str":
        """The three-way class as written in verdict tables."""
        return {
            CountKind.ZERO: "0",
            CountKind.FINITE: "FIN",
            CountKind.INFINITE: "INF",
        }[self.kind]


def count_trees(
    g: "HRG",
    allowed: "Optional[Iterable[Rule]]" = None,
    cap: "int" = TREE_COUNT_CAP,
) -> "TreeCount":
    """Classify the number of complete derivation trees of the start symbols."""
    pruned = prune(g, allowed)
    if not pruned.rules:
        return TreeCount(CountKind.ZERO)

    dependencies = nx.DiGraph()
    dependencies.add_nodes_from(pruned.nonterminals)
    for rule in pruned.rules:
        for _, label in rule.children():
            dependencies.add_edge(rule.lhs, label)
    if not nx.is_directed_acyclic_graph(dependencies):
        return TreeCount(CountKind.INFINITE)

    counts: "Dict[Hashable, int]" = {}
    capped = False
    for nonterminal in reversed(list(nx.topological_sort(dependencies))):
        total = 0
        for rule in pruned.rules_for(nonterminal):
            product = 1
            for _, label in rule.children():
                product *= counts[label]
            total += product
        if total > cap:
            total, capped = cap, True
        counts[nonterminal] = total

    total = sum(counts.get(nt, 0) for nt in pruned.start)
    if total > cap:
        total, capped = cap, True
    if capped:
        logger.warning(f"Tree count hit the cap of {cap}.")
    if total == 0:
        return TreeCount(CountKind.ZERO)
    return TreeCount(CountKind.FINITE, total, capped)


def iter_trees(g: "HRG", nonterminal: "Hashable", max_depth: "int") -> "Iterator[Node]":
    """Complete derivation trees of height at most max_depth, by rule then child order."""
    cache: "Dict[Tuple[Hashable, int], List[Node]]" = {}

    def materialized(nt: "Hashable", depth: "int") -> "List[Node]":
        key = (nt, depth)
        if key not in cache:
            cache[key] = list(generate(nt, depth))
        return cache[key]

    def generate(nt: "Hashable", depth: "int") -> "Iterator[Node]":
        if depth < 1:
            return
        for rule in g.rules_for(nt):
            children = rule.children()
            options = [materialized(label, depth - 1) for _, label in children]
            for combination in itertools.product(*options):
                yield Node(
                    rule,
                    tuple((he, tree) for (he, _), tree in zip(children, combination)),
                )

    return generate(nonterminal, max_depth)


def iter_members(g: "HRG", max_depth: "int") -> "Iterator[Tuple[Node, Hypergraph]]":
    for nonterminal in g.start:
        for tree in iter_trees(g, nonterminal, max_depth):
            yield tree, assemble(tree)


def enumerate_members(
    g: "HRG", max_depth: "int", limit: "Optional[int]" = None
) -> "List[Tuple[Node, Hypergraph]]":
    """All members of derivation height at most max_depth, paired with their trees."""
    return list(itertools.islice(iter_members(g, max_depth), limit))


def shortest_tree(
    g: "HRG", allowed: "Optional[Iterable[Rule]]" = None
) -> "Optional[Node]":
    """A complete tree of a start symbol with the fewest rule applications."""
    rules = list(g.rules if allowed is None else allowed)
    best: "Dict[Hashable, Tuple[int, Rule]]" = {}
    changed = True
    while changed:
        changed = False
        for rule in rules:
            children = rule.children()
            if not all(label in best for _, label in children):
                continue
            size = 1 + sum(best[label][0] for _, label in children)
            if rule.lhs not in best or size < best[rule.lhs][0]:
                best[rule.lhs] = (size, rule)
                changed = True

    def build(nonterminal: "Hashable") -> "Node":
        rule = best[nonterminal][1]
        return Node(rule, tuple((he, build(label)) for he, label in rule.children()))

    candidates = [nt for nt in g.start if nt in best]
    if not candidates:
        return None
    return build(min(candidates, key=lambda nt: best[nt][0]))
