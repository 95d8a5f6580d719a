import itertools
import logging
from dataclasses import dataclass, field
from typing import (
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import natsort
import networkx as nx

from hrgcheck.logic.formula import (
    And,
    Atom,
    Const,
    Formula,
    Next,
    Not,
    Or,
    Release,
    Until,
    atoms,
    nnf,
    to_text,
)

logger = logging.getLogger("hrgcheck")

Letter = FrozenSet[str]
Transition = Tuple[Hashable, Letter, Hashable]


def powerset(props: "Iterable[str]") -> "List[Letter]":
    props = natsort.natsorted(props)
    return [
        frozenset(combination)
        for size in range(len(props) + 1)
        for combination in itertools.combinations(props, size)
    ]


class BuchiAutomaton:
    """A nondeterministic Büchi automaton over letters that are sets of colors.

    Letters only mention the automaton's props; inputs are projected onto them.
    """

    def __init__(
        self,
        states: "Iterable[Hashable]",
        props: "Iterable[str]",
        transitions: "Iterable[Transition]",
        initial: "Iterable[Hashable]",
        final: "Iterable[Hashable]",
    ) -> None:
        self.states = frozenset(states)
        self.props = frozenset(props)
        self.transitions = frozenset(
            (p, frozenset(letter), q) for p, letter, q in transitions
        )
        self.initial = frozenset(initial)
        self.final = frozenset(final)

        for p, letter, q in self.transitions:
            if p not in self.states or q not in self.states:
                raise ValueError(f"Transition {p!r} -> {q!r} uses undeclared states.")
            if not letter <= self.props:
                raise ValueError(f"Letter {set(letter)} is not over {set(self.props)}.")
        if not self.initial <= self.states or not self.final <= self.states:
            raise ValueError("Initial and final states must be declared states.")

        self._delta: "Dict[Tuple[Hashable, Letter], FrozenSet[Hashable]]" = {}
        grouped: "Dict[Tuple[Hashable, Letter], Set[Hashable]]" = {}
        for p, letter, q in self.transitions:
            grouped.setdefault((p, letter), set()).add(q)
        self._delta = {key: frozenset(value) for key, value in grouped.items()}

    def letter(self, colors: "Iterable[str]") -> "Letter":
        return frozenset(colors) & self.props

    def successors(self, state: "Hashable", colors: "Iterable[str]") -> "FrozenSet":
        return self._delta.get((state, self.letter(colors)), frozenset())

    def letters(self) -> "List[Letter]":
        return powerset(self.props)

    def sorted_states(self) -> "list":
        return natsort.natsorted(self.states, key=str)

    def __eq__(self, other) -> "bool":
        if not isinstance(other, BuchiAutomaton):
            return NotImplemented
        return (
            self.states == other.states
            and self.props == other.props
            and self.transitions == other.transitions
            and self.initial == other.initial
            and self.final == other.final
        )

    def __hash__(self) -> "int":
        return hash((self.states, self.transitions, self.initial, self.final))

    def __repr__(self) -> "str":
        return (
            f"<{self.__class__.__name__} "
            f"states={len(self.states)}, "
            f"transitions={len(self.transitions)}, "
            f"props={natsort.natsorted(self.props)}>"
        )


def accepts_lasso(
    m: "BuchiAutomaton",
    prefix: "Sequence[Iterable[str]]",
    loop: "Sequence[Iterable[str]]",
) -> "bool":
    """Whether some run over prefix followed by loop forever visits a final state infinitely often."""
    if not loop:
        raise ValueError("The loop of a lasso can't be empty.")
    word = [m.letter(letter) for letter in list(prefix) + list(loop)]
    length = len(word)

    def next_position(position: "int") -> "int":
        return position + 1 if position + 1 < length else len(prefix)

    product = nx.DiGraph()
    stack = [(q, 0) for q in m.initial]
    product.add_nodes_from(stack)
    while stack:
        state, position = stack.pop()
        for succ in m.successors(state, word[position]):
            target = (succ, next_position(position))
            if target not in product:
                product.add_node(target)
                stack.append(target)
            product.add_edge((state, position), target)

    for component in nx.strongly_connected_components(product):
        nontrivial = len(component) > 1 or any(
            product.has_edge(node, node) for node in component
        )
        if nontrivial and any(state in m.final for state, _ in component):
            return True
    return False


@dataclass
class _TableauNode:
    name: int
    incoming: Set[int]
    new: Set[Formula]
    old: Set[Formula] = field(default_factory=set)
    next: Set[Formula] = field(default_factory=set)


INIT = -1


def _pick(formulas: "Set[Formula]") -> "Formula":
    return min(formulas, key=to_text)


def _contradicts(literal: "Formula", old: "Set[Formula]") -> "bool":
    if isinstance(literal, Const):
        return not literal.value
    if isinstance(literal, Not):
        return literal.operand in old
    return Not(literal) in old


def _tableau(formula: "Formula") -> "List[_TableauNode]":
    """Expand the formula into tableau nodes, merging nodes with equal old and next sets."""
    nodes: "List[_TableauNode]" = []
    counter = itertools.count()

    def expand(node: "_TableauNode"):
        if not node.new:
            for other in nodes:
                if other.old == node.old and other.next == node.next:
                    other.incoming |= node.incoming
                    return
            nodes.append(node)
            expand(_TableauNode(next(counter), {node.name}, set(node.next)))
            return

        eta = _pick(node.new)
        node.new.discard(eta)
        match eta:
            case Atom() | Not() | Const():
                if _contradicts(eta, node.old):
                    return
                if eta != Const(True):
                    node.old.add(eta)
                expand(node)
            case And(left, right):
                node.old.add(eta)
                node.new |= {left, right} - node.old
                expand(node)
            case Next(operand):
                node.old.add(eta)
                node.next.add(operand)
                expand(node)
            case Or(_, _) | Until(_, _) | Release(_, _):
                first_new, first_next, second_new = _split(eta)
                first = _TableauNode(
                    next(counter),
                    set(node.incoming),
                    node.new | (first_new - node.old),
                    node.old | {eta},
                    node.next | first_next,
                )
                second = _TableauNode(
                    next(counter),
                    set(node.incoming),
                    node.new | (second_new - node.old),
                    node.old | {eta},
                    set(node.next),
                )
                expand(first)
                expand(second)

    expand(_TableauNode(next(counter), {INIT}, {formula}))
    return nodes


def _split(eta: "Formula") -> "Tuple[Set[Formula], Set[Formula], Set[Formula]]":
    match eta:
        case Or(left, right):
            return {left}, set(), {right}
        case Until(left, right):
            return {left}, {eta}, {right}
        case Release(left, right):
            return {right}, {eta}, {left, right}
    raise TypeError(eta)


def _satisfies_literals(letter: "Letter", old: "Set[Formula]") -> "bool":
    for literal in old:
        if isinstance(literal, Atom) and literal.name not in letter:
            return False
        if (
            isinstance(literal, Not)
            and isinstance(literal.operand, Atom)
            and literal.operand.name in letter
        ):
            return False
    return True


def _quotient(
    states: "List[Hashable]",
    props: "FrozenSet[str]",
    transitions: "Set[Transition]",
    initial: "Set[Hashable]",
    final: "Set[Hashable]",
) -> "BuchiAutomaton":
    """Merge bisimilar states, then number the blocks breadth-first from the initial ones."""
    outgoing: "Dict[Hashable, Set[Tuple[Letter, Hashable]]]" = {s: set() for s in states}
    for p, letter, q in transitions:
        outgoing[p].add((letter, q))

    block = {state: int(state in final) for state in states}
    while True:
        signatures = {
            state: (
                block[state],
                frozenset((letter, block[q]) for letter, q in outgoing[state]),
            )
            for state in states
        }
        numbering: "Dict[tuple, int]" = {}
        refined = {}
        for state in states:
            refined[state] = numbering.setdefault(signatures[state], len(numbering))
        if len(numbering) == len(set(block.values())):
            block = refined
            break
        block = refined

    order: "Dict[int, int]" = {}
    queue = natsort.natsorted({block[s] for s in initial})
    block_edges: "Dict[int, Set[Tuple[Letter, int]]]" = {}
    for p, letter, q in transitions:
        block_edges.setdefault(block[p], set()).add((letter, block[q]))
    while queue:
        current = queue.pop(0)
        if current in order:
            continue
        order[current] = len(order)
        successors = sorted(
            block_edges.get(current, ()),
            key=lambda edge: (sorted(edge[0]), edge[1]),
        )
        for _, target in successors:
            if target not in order:
                queue.append(target)

    new_transitions = {
        (order[block[p]], letter, order[block[q]])
        for p, letter, q in transitions
        if block[p] in order
    }
    return BuchiAutomaton(
        states=order.values(),
        props=props,
        transitions=new_transitions,
        initial={order[block[s]] for s in initial},
        final={order[block[s]] for s in final if block[s] in order},
    )


def ltl_to_buchi(
    formula: "Formula", props: "Optional[Iterable[str]]" = None
) -> "BuchiAutomaton":
    """Translate an LTL formula over color atoms into a Büchi automaton.

    Tableau expansion gives a generalized automaton, a counter degeneralizes it and
    a bisimulation quotient shrinks the result. props defaults to the formula atoms.
    """
    normal = nnf(formula)
    props = frozenset(atoms(formula) if props is None else props)
    nodes = _tableau(normal)
    letters = powerset(props)

    untils = sorted(
        {sub for node in nodes for sub in node.old if isinstance(sub, Until)},
        key=to_text,
    )
    accepting = [
        {
            node.name
            for node in nodes
            if until not in node.old
            or until.right == Const(True)
            or until.right in node.old
        }
        for until in untils
    ]
    rounds = max(len(accepting), 1)

    labels = {
        node.name: [letter for letter in letters if _satisfies_literals(letter, node.old)]
        for node in nodes
    }
    edges: "Dict[int, List[int]]" = {}
    for node in nodes:
        for source in node.incoming:
            edges.setdefault(source, []).append(node.name)

    start = (INIT, 0)
    seen = {start}
    queue = [start]
    transitions: "Set[Transition]" = set()
    while queue:
        source, counter = queue.pop()
        if accepting and source in accepting[counter]:
            successor_counter = (counter + 1) % rounds
        else:
            successor_counter = counter
        for target in edges.get(source, ()):
            state = (target, successor_counter)
            for letter in labels[target]:
                transitions.add(((source, counter), letter, state))
            if labels[target] and state not in seen:
                seen.add(state)
                queue.append(state)

    if accepting:
        final = {state for state in seen if state[1] == 0 and state[0] in accepting[0]}
    else:
        final = set(seen)

    automaton = _quotient(sorted(seen), props, transitions, {start}, final)
    logger.debug(
        f"Translated {to_text(formula)} into {len(automaton.states)} states "
        f"from {len(nodes)} tableau nodes."
    )
    return automaton
