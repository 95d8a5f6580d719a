import pytest

from hrgcheck.grammar_file import load_grammar, parse_grammar
from hrgcheck.graph.hypergraph import Hypergraph
from hrgcheck.logic.buchi import BuchiAutomaton, powerset
from hrgcheck.utils.config import package_path

BENCHMARKS = package_path.joinpath("benchmarks")

DLL_TEXT = """
colors red blue init;
actions a;
nt S/0;
nt A/2;
start S;

rule R1 : A {
  edge $1 -a-> $2;
  edge $2 -a-> $1;
}

rule R2 : A {
  node x {red};
  he e1 = A(x, $2);
  edge $1 -a-> x;
  edge x -a-> $1;
}

rule R3 : S {
  node u {init, red};
  node v {red};
  node w {blue};
  he e1 = A(u, v);
  edge v -a-> w;
  edge w -a-> v;
}
"""


@pytest.fixture
def benchmark():
    def load(name: "str"):
        return load_grammar(BENCHMARKS.joinpath(name))

    return load


@pytest.fixture
def dll():
    return parse_grammar(DLL_TEXT)


@pytest.fixture
def eventually_blue():
    """Deterministic: p waits for blue, q accepts everything after it."""
    props = {"blue"}
    transitions = []
    for letter in powerset(props):
        transitions.append(("p", letter, "q" if "blue" in letter else "p"))
        transitions.append(("q", letter, "q"))
    return BuchiAutomaton(
        states={"p", "q"},
        props=props,
        transitions=transitions,
        initial={"p"},
        final={"q"},
    )


@pytest.fixture
def red_until_blue():
    """p stays on red, moves to the accepting sink q on blue and to the rejecting sink r otherwise."""
    props = {"red", "blue", "green"}
    transitions = []
    for letter in powerset(props):
        if "blue" in letter:
            transitions.append(("p", letter, "q"))
        elif letter == frozenset({"red"}):
            transitions.append(("p", letter, "p"))
        else:
            transitions.append(("p", letter, "r"))
        transitions.append(("q", letter, "q"))
        transitions.append(("r", letter, "r"))
    return BuchiAutomaton(
        states={"p", "q", "r"},
        props=props,
        transitions=transitions,
        initial={"p"},
        final={"q"},
    )


def _both_ways(*pairs):
    return [(u, "a", v) for x, y in pairs for u, v in ((x, y), (y, x))]


@pytest.fixture
def teal_chain():
    """Two teal nodes in front of v1, v1 and v2 joined by an A hyperedge, v2 next to blue b."""
    return Hypergraph(
        nodes={"t1", "t2", "v1", "v2", "b"},
        edges=_both_ways(("t1", "t2"), ("t2", "v1"), ("v2", "b")),
        hyperedges={"e": ("A", ("v1", "v2"))},
        colors={"t1": {"teal"}, "t2": {"teal"}, "v1": {"red"}, "v2": {"red"}, "b": {"blue"}},
    )


@pytest.fixture
def teal_single():
    """Same as teal_chain with a single teal node."""
    return Hypergraph(
        nodes={"t", "v1", "v2", "b"},
        edges=_both_ways(("t", "v1"), ("v2", "b")),
        hyperedges={"e": ("A", ("v1", "v2"))},
        colors={"t": {"teal"}, "v1": {"red"}, "v2": {"red"}, "b": {"blue"}},
    )


def _random_body(rng, arity: "int", labels) -> "str":
    nodes = [f"x{i}" for i in range(rng.randint(0 if arity else 1, 2))]
    every = nodes + [f"${i}" for i in range(1, arity + 1)]
    items = []
    for node in nodes:
        colors = rng.sample(("red", "blue"), rng.randint(0, 2))
        items.append(f"node {node} {{{', '.join(colors)}}};" if colors else f"node {node};")
    for number, label in enumerate(labels, start=1):
        attach = ", ".join(rng.choice(every) for _ in range(2))
        items.append(f"he e{number} = {label}({attach});")
    edges = {(rng.choice(every), rng.choice(every)) for _ in range(rng.randint(1, 4))}
    items.extend(f"edge {source} -a-> {target};" for source, target in sorted(edges))
    return " ".join(items)


@pytest.fixture
def random_grammar():
    """Small grammars over S/0, A/2 and B/2. A and B always have a rule without
    hyperedges, so every nonterminal is productive."""

    def make(rng):
        rules = []
        for nonterminal in ("A", "B"):
            rules.append((nonterminal, []))
            for _ in range(rng.randint(1, 2)):
                rules.append((nonterminal, [rng.choice("AB")]))
        for _ in range(rng.randint(1, 2)):
            rules.append(("S", [rng.choice("AB") for _ in range(rng.randint(1, 2))]))

        lines = ["colors red blue;", "actions a;", "nt S/0;", "nt A/2;", "nt B/2;", "start S;"]
        for number, (lhs, labels) in enumerate(rules, start=1):
            body = _random_body(rng, 0 if lhs == "S" else 2, labels)
            lines.append(f"rule R{number} : {lhs} {{ {body} }}")
        return parse_grammar("\n".join(lines))

    return make
