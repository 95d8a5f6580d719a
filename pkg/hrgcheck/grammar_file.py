"""Reading and writing grammars: a line-oriented text format and a JSON mirror.

    colors red blue init;
    actions a;
    nt S/0;
    nt A/2;
    start S;
    rule R1 : A { edge $1 -a-> $2; edge $2 -a-> $1; }

Abstract nodes are written $1..$n, '#' starts a comment. Recolored grammars add
`color @phi1 = "...";` registry lines and `from <rule>` after a rule's lhs.
"""

import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import natsort

from hrgcheck import HrgcheckError
from hrgcheck.graph.grammar import HRG, Nonterminal, Rule
from hrgcheck.graph.hypergraph import Hypergraph, NodeId

logger = logging.getLogger("hrgcheck")


class GrammarFileError(HrgcheckError):
    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"Line {line}: {message}"
        super().__init__(message)


TOKEN_REGEX = re.compile(
    r"""
    (?P<newline>\n)
    |(?P<space>[ \t\r]+)
    |(?P<comment>\#[^\n]*)
    |(?P<string>"(?:[^"\\\n]|\\.)*")
    |(?P<abstract>\$[0-9]+)
    |(?P<arrow>->)
    |(?P<symbol>[;:{}(),/=-])
    |(?P<word>[A-Za-z0-9_@.'~+\[\]]+)
    """,
    re.VERBOSE,
)

KEYWORDS = {"colors", "actions", "nt", "start", "color", "rule"}


def _tokenize(text: "str") -> "List[Tuple[str, str, int]]":
    tokens = []
    line = 1
    position = 0
    while position < len(text):
        match = TOKEN_REGEX.match(text, position)
        if match is None:
            raise GrammarFileError(f"Unexpected character {text[position]!r}", line)
        kind = match.lastgroup
        if kind == "newline":
            line += 1
        elif kind not in ("space", "comment"):
            tokens.append((kind, match.group(0), line))
        position = match.end()
    tokens.append(("end", "", line))
    return tokens


class _GrammarParser:
    def __init__(self, text: "str") -> None:
        self.tokens = _tokenize(text)
        self.index = 0
        self.colors: "List[str]" = []
        self.actions: "List[str]" = []
        self.nonterminals: "Dict[str, Nonterminal]" = {}
        self.start: "List[str]" = []
        self.registry: "Dict[str, str]" = {}
        self.rules: "Dict[str, Rule]" = {}

    @property
    def line(self) -> "int":
        return self.tokens[self.index][2]

    def _next(self) -> "Tuple[str, str, int]":
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _peek(self) -> "str":
        return self.tokens[self.index][1]

    def _expect(self, text: "str"):
        kind, value, line = self._next()
        if value != text or kind == "end":
            raise GrammarFileError(f"Expected {text!r}, found {value or 'end of file'!r}", line)

    def _word(self) -> "str":
        kind, value, line = self._next()
        if kind != "word":
            raise GrammarFileError(f"Expected a name, found {value or 'end of file'!r}", line)
        return value

    def _words_until_semicolon(self) -> "List[str]":
        words = []
        while self._peek() != ";":
            words.append(self._word())
        self._expect(";")
        return words

    def parse(self) -> "HRG":
        while self.tokens[self.index][0] != "end":
            keyword = self._word()
            if keyword == "colors":
                self.colors.extend(self._words_until_semicolon())
            elif keyword == "actions":
                self.actions.extend(self._words_until_semicolon())
            elif keyword == "nt":
                self._nonterminal()
            elif keyword == "start":
                self.start.extend(self._words_until_semicolon())
            elif keyword == "color":
                self._registry_entry()
            elif keyword == "rule":
                self._rule()
            else:
                raise GrammarFileError(f"Unknown statement {keyword!r}", self.tokens[self.index - 1][2])

        for name in self.start:
            if name not in self.nonterminals:
                raise GrammarFileError(f"Start symbol {name} is not declared.")
        return HRG(
            nonterminals=self.nonterminals.values(),
            start=[self.nonterminals[name] for name in self.start],
            rules=self.rules.values(),
            colors=self.colors,
            actions=self.actions,
            registry=self.registry,
        )

    def _nonterminal(self):
        line = self.line
        name = self._word()
        self._expect("/")
        arity = self._word()
        if not arity.isdigit():
            raise GrammarFileError(f"Arity of {name} must be a number, got {arity!r}", line)
        self._expect(";")
        if name in self.nonterminals:
            raise GrammarFileError(f"Nonterminal {name} is declared twice.", line)
        self.nonterminals[name] = Nonterminal(name, int(arity))

    def _registry_entry(self):
        color = self._word()
        self._expect("=")
        kind, value, line = self._next()
        if kind != "string":
            raise GrammarFileError("Expected a quoted formula.", line)
        self._expect(";")
        self.registry[color] = json.loads(value)

    def _lookup(self, name: "str", line: "int") -> "Nonterminal":
        if name not in self.nonterminals:
            raise GrammarFileError(f"Nonterminal {name} is not declared.", line)
        return self.nonterminals[name]

    def _node(self, arity: "int") -> "NodeId":
        kind, value, line = self._next()
        if kind == "abstract":
            number = int(value[1:])
            if not 1 <= number <= arity:
                raise GrammarFileError(
                    f"Abstract node {value} is out of range 1..{arity}.", line
                )
            return number
        if kind != "word":
            raise GrammarFileError(f"Expected a node, found {value!r}", line)
        return value

    def _rule(self):
        line = self.line
        name = self._word()
        self._expect(":")
        lhs = self._lookup(self._word(), line)
        origin = None
        if self._peek() == "from":
            self._next()
            origin = self._word()
        self._expect("{")

        nodes: "Dict[str, List[str]]" = {}
        edges = []
        hyperedges = {}
        while self._peek() != "}":
            item_line = self.line
            item = self._word()
            if item == "node":
                node = self._word()
                colors = []
                if self._peek() == "{":
                    self._next()
                    while self._peek() != "}":
                        colors.append(self._word())
                        if self._peek() == ",":
                            self._next()
                    self._expect("}")
                nodes.setdefault(node, []).extend(colors)
            elif item == "he":
                hyperedge = self._word()
                self._expect("=")
                label = self._lookup(self._word(), item_line)
                self._expect("(")
                attach = []
                while self._peek() != ")":
                    attach.append(self._node(lhs.arity))
                    if self._peek() == ",":
                        self._next()
                self._expect(")")
                if hyperedge in hyperedges:
                    raise GrammarFileError(f"Hyperedge {hyperedge} appears twice.", item_line)
                hyperedges[hyperedge] = (label, tuple(attach))
            elif item == "edge":
                source = self._node(lhs.arity)
                self._expect("-")
                action = self._word()
                self._expect("->")
                target = self._node(lhs.arity)
                edges.append((source, action, target))
            else:
                raise GrammarFileError(f"Unknown rule item {item!r}", item_line)
            self._expect(";")
        self._expect("}")

        for node in [n for edge in edges for n in (edge[0], edge[2])] + [
            n for _, attach in hyperedges.values() for n in attach
        ]:
            if isinstance(node, str) and node not in nodes:
                raise GrammarFileError(f"Rule {name} uses undeclared node {node}.", line)
        if name in self.rules:
            raise GrammarFileError(f"Rule {name} is defined twice.", line)
        body = Hypergraph(
            nodes=nodes,
            abstract_count=lhs.arity,
            edges=edges,
            hyperedges=hyperedges,
            colors=nodes,
        )
        self.rules[name] = Rule(name, lhs, body, origin)


def parse_grammar(text: "str") -> "HRG":
    return _GrammarParser(text).parse()


def _node_text(node: "NodeId") -> "str":
    return f"${node}" if isinstance(node, int) else node


def _parse_node_text(text: "str") -> "NodeId":
    return int(text[1:]) if text.startswith("$") else text


def serialize_grammar(g: "HRG") -> "str":
    """Canonical text form, everything in natural order."""
    lines = []
    lines.append(f"colors {' '.join(natsort.natsorted(g.colors))};")
    if g.actions:
        lines.append(f"actions {' '.join(natsort.natsorted(g.actions))};")
    for nt in g.sorted_nonterminals():
        lines.append(f"nt {nt}/{nt.arity};")
    lines.append(f"start {' '.join(str(s) for s in g.start)};")
    for color in natsort.natsorted(g.registry):
        lines.append(f"color {color} = {json.dumps(g.registry[color], ensure_ascii=False)};")

    for rule in g.rules:
        body = rule.body
        origin = f" from {rule.origin}" if rule.origin else ""
        lines.append("")
        lines.append(f"rule {rule.name} : {rule.lhs}{origin} {{")
        for node in natsort.natsorted(body.nodes):
            colors = natsort.natsorted(body.color(node))
            suffix = f" {{{', '.join(colors)}}}" if colors else ""
            lines.append(f"  node {node}{suffix};")
        for hyperedge in body.sorted_hyperedges():
            label, attach = body.hyperedges[hyperedge]
            nodes = ", ".join(_node_text(node) for node in attach)
            lines.append(f"  he {hyperedge} = {label}({nodes});")
        for u, action, v in natsort.natsorted(
            body.edges, key=lambda e: (_node_text(e[0]), e[1], _node_text(e[2]))
        ):
            lines.append(f"  edge {_node_text(u)} -{action}-> {_node_text(v)};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def grammar_to_json(g: "HRG") -> "dict":
    rules = []
    for rule in g.rules:
        body = rule.body
        rules.append(
            {
                "name": rule.name,
                "lhs": str(rule.lhs),
                "origin": rule.origin,
                "nodes": {
                    node: natsort.natsorted(body.color(node))
                    for node in natsort.natsorted(body.nodes)
                },
                "hyperedges": {
                    he: {
                        "label": str(body.label(he)),
                        "attach": [_node_text(n) for n in body.attachment(he)],
                    }
                    for he in body.sorted_hyperedges()
                },
                "edges": [
                    [_node_text(u), action, _node_text(v)]
                    for u, action, v in natsort.natsorted(
                        body.edges,
                        key=lambda e: (_node_text(e[0]), e[1], _node_text(e[2])),
                    )
                ],
            }
        )
    return {
        "colors": natsort.natsorted(g.colors),
        "actions": natsort.natsorted(g.actions),
        "nonterminals": {str(nt): nt.arity for nt in g.sorted_nonterminals()},
        "start": [str(s) for s in g.start],
        "registry": {c: g.registry[c] for c in natsort.natsorted(g.registry)},
        "rules": rules,
    }


def grammar_from_json(data: "dict") -> "HRG":
    try:
        nonterminals = {
            name: Nonterminal(name, arity) for name, arity in data["nonterminals"].items()
        }
        rules = []
        for entry in data["rules"]:
            lhs = nonterminals[entry["lhs"]]
            body = Hypergraph(
                nodes=entry["nodes"],
                abstract_count=lhs.arity,
                edges=[
                    (_parse_node_text(u), action, _parse_node_text(v))
                    for u, action, v in entry.get("edges", [])
                ],
                hyperedges={
                    he: (
                        nonterminals[value["label"]],
                        tuple(_parse_node_text(n) for n in value["attach"]),
                    )
                    for he, value in entry.get("hyperedges", {}).items()
                },
                colors=entry["nodes"],
            )
            rules.append(Rule(entry["name"], lhs, body, entry.get("origin")))
        return HRG(
            nonterminals=nonterminals.values(),
            start=[nonterminals[name] for name in data["start"]],
            rules=rules,
            colors=data.get("colors", []),
            actions=data.get("actions", []),
            registry=data.get("registry", {}),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise GrammarFileError(f"Malformed grammar json: {e!r}") from e
    except HrgcheckError as e:
        raise GrammarFileError(str(e)) from e


def load_grammar(path: "Union[str, Path]") -> "HRG":
    """Read a grammar file, .json files use the JSON mirror."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise GrammarFileError(f"Invalid json: {e.msg}", e.lineno) from e
        grammar = grammar_from_json(data)
    else:
        try:
            grammar = parse_grammar(text)
        except GrammarFileError:
            raise
        except HrgcheckError as e:
            raise GrammarFileError(f"{path.name}: {e}") from e
    logger.info(f"Loaded {grammar!r} from {path}")
    return grammar


def save_grammar(g: "HRG", path: "Union[str, Path]"):
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(
            json.dumps(grammar_to_json(g), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    else:
        path.write_text(serialize_grammar(g), encoding="utf-8")
    logger.info(f"Wrote {g!r} to {path}")
