import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Hashable, List, Optional, Tuple

from hrgcheck.checker.behaviour import (
    InterfaceBehaviour,
    glue,
    plug,
    restrict_to,
)
from hrgcheck.graph.grammar import HRG, Nonterminal, Rule
from hrgcheck.logic.buchi import BuchiAutomaton

logger = logging.getLogger("hrgcheck")


@dataclass(frozen=True)
class AnnotatedNonterminal:
    """A base nonterminal split by the class of its language and of its context."""

    base: Hashable
    lang_class: InterfaceBehaviour
    ctx_class: Optional[InterfaceBehaviour] = None
    lang_id: int = field(default=0, compare=False)
    ctx_id: Optional[int] = field(default=None, compare=False)

    @property
    def name(self) -> "str":
        if self.ctx_class is None:
            return f"{self.base}[{self.lang_id}]"
        return f"{self.base}[{self.lang_id},{self.ctx_id}]"

    @property
    def arity(self) -> "int":
        return self.base.arity

    def __str__(self) -> "str":
        return self.name


class _ClassTable:
    """Numbers classes per base nonterminal in the order they are found."""

    def __init__(self) -> None:
        self._ids: "Dict[Hashable, Dict[InterfaceBehaviour, int]]" = {}

    def number(self, base: "Hashable", cls: "InterfaceBehaviour") -> "Tuple[int, bool]":
        ids = self._ids.setdefault(base, {})
        if cls in ids:
            return ids[cls], False
        ids[cls] = len(ids) + 1
        return ids[cls], True

    def counts(self) -> "Dict[str, int]":
        return {str(base): len(ids) for base, ids in self._ids.items()}


def _name_rules(found: "List[Tuple[Rule, Hashable, object]]") -> "List[Rule]":
    counters: "Dict[str, itertools.count]" = {}
    rules = []
    for rule, lhs, body in found:
        counter = counters.setdefault(rule.base_name, itertools.count(1))
        rules.append(
            Rule(f"{rule.base_name}.{next(counter)}", lhs, body, rule.base_name)
        )
    return rules


def annotate1(g: "HRG", m: "BuchiAutomaton") -> "HRG":
    """Split every nonterminal by the class of the graphs it derives, bottom-up."""
    table = _ClassTable()
    derived: "Dict[Hashable, List[AnnotatedNonterminal]]" = {}
    done: "Dict[Tuple[str, tuple], Tuple[Rule, AnnotatedNonterminal, object]]" = {}

    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        for rule in g.rules:
            children = rule.children()
            options = [list(derived.get(label, [])) for _, label in children]
            for combination in itertools.product(*options):
                key = (rule.name, combination)
                if key in done:
                    continue
                assignment = {
                    he: child.lang_class for (he, _), child in zip(children, combination)
                }
                behaviour = plug(rule.body, assignment, m)
                cls = restrict_to(behaviour, list(rule.body.abstract_nodes))
                lang_id, new = table.number(rule.lhs, cls)
                lhs = AnnotatedNonterminal(rule.lhs, cls, lang_id=lang_id)
                if new:
                    derived.setdefault(rule.lhs, []).append(lhs)
                body = rule.body.relabel(
                    {he: child for (he, _), child in zip(children, combination)}
                )
                done[key] = (rule, lhs, body)
                changed = True
        logger.debug(
            f"Language classes after round {rounds}: {table.counts()}, "
            f"{len(done)} rule instances."
        )

    rules = _name_rules(list(done.values()))
    nonterminals = {nt for group in derived.values() for nt in group}
    start = [nt for nt in nonterminals if nt.base in g.start]
    return g.derive(nonterminals=nonterminals, start=start, rules=rules)


def context_class(
    rule: "Rule",
    hole: "str",
    m: "BuchiAutomaton",
    context: "InterfaceBehaviour",
) -> "InterfaceBehaviour":
    """Class of the context seen by the hyperedge hole: the rule's own context with
    the rule body and all sibling languages plugged in."""
    siblings = {
        he: label.lang_class for he, label in rule.children() if he != hole
    }
    behaviour = plug(rule.body, siblings, m, context=context, hole=hole)
    mapping = glue(rule.body, context)
    return restrict_to(behaviour, [mapping[node] for node in rule.body.attachment(hole)])


def annotate2(g1: "HRG", m: "BuchiAutomaton") -> "HRG":
    """Add context classes top-down, starting from the empty context of the start symbols."""
    table = _ClassTable()
    found: "List[Tuple[Rule, AnnotatedNonterminal, object]]" = []
    seen: "Dict[Tuple[AnnotatedNonterminal, InterfaceBehaviour], AnnotatedNonterminal]" = {}
    worklist: "Deque[AnnotatedNonterminal]" = deque()

    def full(lhs: "AnnotatedNonterminal", ctx: "InterfaceBehaviour") -> "AnnotatedNonterminal":
        key = (lhs, ctx)
        if key not in seen:
            ctx_id, _ = table.number(lhs.base, ctx)
            seen[key] = AnnotatedNonterminal(
                lhs.base, lhs.lang_class, ctx, lang_id=lhs.lang_id, ctx_id=ctx_id
            )
            worklist.append(seen[key])
        return seen[key]

    starts = [full(start, InterfaceBehaviour.empty(start.arity)) for start in g1.start]

    while worklist:
        current = worklist.popleft()
        partial = AnnotatedNonterminal(
            current.base, current.lang_class, lang_id=current.lang_id
        )
        for rule in g1.rules_for(partial):
            labels = {}
            for hyperedge, child in rule.children():
                cls = context_class(rule, hyperedge, m, current.ctx_class)
                labels[hyperedge] = full(child, cls)
            found.append((rule, current, rule.body.relabel(labels)))

    logger.debug(f"Context classes: {table.counts()}, {len(found)} refined rules.")
    rules = _name_rules(found)
    nonterminals = set(seen.values())
    return g1.derive(nonterminals=nonterminals, start=starts, rules=rules)


def annotate(g: "HRG", m: "BuchiAutomaton") -> "HRG":
    """The refined grammar: both annotation passes."""
    refined = annotate2(annotate1(g, m), m)
    logger.info(
        f"Refined {len(g.rules)} rules into {len(refined.rules)} "
        f"over {len(refined.nonterminals)} nonterminals."
    )
    return refined


def strip_annotations(g: "HRG") -> "HRG":
    """Replace annotated nonterminals by plain ones named base_lang_ctx."""
    mapping: "Dict[Hashable, Nonterminal]" = {}
    for nonterminal in g.nonterminals:
        if isinstance(nonterminal, AnnotatedNonterminal):
            suffix = f"_{nonterminal.lang_id}"
            if nonterminal.ctx_id is not None:
                suffix += f"_{nonterminal.ctx_id}"
            mapping[nonterminal] = Nonterminal(
                f"{nonterminal.base}{suffix}", nonterminal.arity
            )
        else:
            mapping[nonterminal] = nonterminal

    rules = [
        Rule(
            rule.name,
            mapping[rule.lhs],
            rule.body.relabel(
                {he: mapping[label] for he, label in rule.children()}
            ),
            rule.origin,
        )
        for rule in g.rules
    ]
    return g.derive(
        nonterminals=mapping.values(),
        start=[mapping[nt] for nt in g.start],
        rules=rules,
    )
