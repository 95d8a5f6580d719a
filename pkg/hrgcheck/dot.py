"""Graphviz DOT export of grammars, refined grammars and behaviours."""

import logging
from typing import Hashable, Iterable, List, Optional

import natsort

from hrgcheck.checker.behaviour import (
    STAR,
    InterfaceBehaviour,
    MBehaviour,
    OmegaSummary,
    StepSummary,
)
from hrgcheck.checker.refine import AnnotatedNonterminal
from hrgcheck.graph.grammar import HRG
from hrgcheck.graph.hypergraph import Hypergraph, NodeId, node_key

logger = logging.getLogger("hrgcheck")


def _quote(text: "str") -> "str":
    escaped = str(text).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


def summary_text(summary: "StepSummary") -> "str":
    """{(p,q,T),(q,q,F)}, triples in natural order."""
    triples = natsort.natsorted(
        f"({p},{q},{'T' if flag else 'F'})" for p, q, flag in summary
    )
    return "{" + ",".join(triples) + "}"


def omega_text(summary: "OmegaSummary") -> "str":
    return "{" + ",".join(natsort.natsorted(str(p) for p in summary)) + "}"


def _node_label(graph: "Hypergraph", node: "NodeId") -> "str":
    if isinstance(node, int):
        return f"${node}"
    colors = natsort.natsorted(graph.color(node))
    if colors:
        return f"{node}\n{{{', '.join(colors)}}}"
    return node


def _graph_lines(graph: "Hypergraph", prefix: "str") -> "List[str]":
    lines = []

    def ident(node: "Hashable") -> "str":
        return _quote(f"{prefix}${node}" if isinstance(node, int) else f"{prefix}{node}")

    for node in sorted(graph.all_nodes, key=node_key):
        shape = "doublecircle" if isinstance(node, int) else "circle"
        lines.append(f"    {ident(node)} [label={_quote(_node_label(graph, node))}, shape={shape}];")
    for hyperedge in graph.sorted_hyperedges():
        label, attach = graph.hyperedges[hyperedge]
        box = _quote(f"{prefix}{hyperedge}")
        lines.append(f"    {box} [label={_quote(label)}, shape=box];")
        for position, node in enumerate(attach, start=1):
            lines.append(
                f"    {box} -> {ident(node)} [label={_quote(position)}, style=dashed, arrowhead=none];"
            )
    for u, action, v in sorted(graph.edges, key=lambda e: (node_key(e[0]), e[1], node_key(e[2]))):
        lines.append(f"    {ident(u)} -> {ident(v)} [label={_quote(action)}];")
    return lines


def grammar_to_dot(g: "HRG") -> "str":
    """One box per rule, abstract nodes drawn as double circles."""
    lines = ["digraph grammar {", "  rankdir=LR;"]
    for index, rule in enumerate(g.rules, start=1):
        lines.append(f"  subgraph cluster_{index} {{")
        lines.append(f"    label={_quote(f'{rule.name} : {rule.lhs}')};")
        lines.append("    style=rounded;")
        lines.extend(_graph_lines(rule.body, f"{rule.name}/"))
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _interface_edges(cls: "InterfaceBehaviour") -> "Iterable[str]":
    by_pair = {}
    for i, j, f in cls.step_edges:
        by_pair.setdefault((i, j), []).append(summary_text(f))
    for (i, j), texts in sorted(by_pair.items()):
        yield f"{i}->{j} " + " ".join(natsort.natsorted(texts))
    by_node = {}
    for i, h in cls.omega_edges:
        by_node.setdefault(i, []).append(omega_text(h))
    for i, texts in sorted(by_node.items()):
        yield f"{i}->{STAR} " + " ".join(natsort.natsorted(texts))


def interface_text(cls: "Optional[InterfaceBehaviour]") -> "str":
    if cls is None:
        return "-"
    lines = list(_interface_edges(cls))
    return "\n".join(lines) if lines else "(empty)"


def refined_to_dot(g: "HRG") -> "str":
    """Tree automaton style: states are nonterminals, every rule is a transition
    from the states of its hyperedges to the state of its left-hand side."""
    lines = ["digraph refined {", "  rankdir=BT;", "  node [fontsize=10];"]
    for nonterminal in g.sorted_nonterminals():
        if isinstance(nonterminal, AnnotatedNonterminal):
            label = (
                f"{nonterminal}\nlanguage:\n{interface_text(nonterminal.lang_class)}"
                f"\ncontext:\n{interface_text(nonterminal.ctx_class)}"
            )
        else:
            label = str(nonterminal)
        peripheries = 2 if nonterminal in g.start else 1
        lines.append(
            f"  {_quote(nonterminal)} [label={_quote(label)}, shape=box, peripheries={peripheries}];"
        )
    for rule in g.rules:
        transition = _quote(f"rule:{rule.name}")
        lines.append(f"  {transition} [label={_quote(rule.name)}, shape=point, xlabel={_quote(rule.name)}];")
        for hyperedge, label in rule.children():
            lines.append(f"  {_quote(label)} -> {transition} [label={_quote(hyperedge)}];")
        lines.append(f"  {transition} -> {_quote(rule.lhs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def behaviour_to_dot(b: "MBehaviour", name: "str" = "behaviour") -> "str":
    """Nodes of the graph plus STAR, one edge per summary."""
    lines = [f"digraph {_quote(name)} {{"]

    def ident(node: "Hashable") -> "str":
        return _quote(f"${node}" if isinstance(node, int) else node)

    for node in b.sorted_nodes():
        shape = "circle" if b.is_concrete(node) else "doublecircle"
        lines.append(f"  {ident(node)} [shape={shape}];")
    if b.omega_edges:
        lines.append(f"  {_quote(STAR)} [shape=plaintext];")
    for hyperedge in natsort.natsorted(b.hyperedges):
        label, attach = b.hyperedges[hyperedge]
        lines.append(f"  {_quote(hyperedge)} [label={_quote(label)}, shape=box];")
        for position, node in enumerate(attach, start=1):
            lines.append(
                f"  {_quote(hyperedge)} -> {ident(node)} [label={_quote(position)}, style=dashed, arrowhead=none];"
            )

    for (u, v) in sorted(b.step_edges, key=lambda pair: (node_key(pair[0]), node_key(pair[1]))):
        for text in natsort.natsorted(summary_text(f) for f in b.steps(u, v)):
            lines.append(f"  {ident(u)} -> {ident(v)} [label={_quote(text)}];")
    for u in sorted(b.omega_edges, key=node_key):
        for text in natsort.natsorted(omega_text(h) for h in b.omegas(u)):
            lines.append(f"  {ident(u)} -> {_quote(STAR)} [label={_quote(text)}, style=bold];")
    lines.append("}")
    return "\n".join(lines) + "\n"
