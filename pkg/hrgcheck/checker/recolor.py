import itertools
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Deque, Dict, Iterable, List, Optional, Tuple

import natsort

from hrgcheck.checker import UnknownColorError
from hrgcheck.checker.behaviour import plug, satisfies
from hrgcheck.checker.minimize import minimize
from hrgcheck.checker.refine import annotate
from hrgcheck.graph.grammar import HRG, Nonterminal, Rule, prune
from hrgcheck.graph.hypergraph import Hypergraph
from hrgcheck.logic.buchi import BuchiAutomaton, ltl_to_buchi
from hrgcheck.logic.formula import (
    QUANTIFIED,
    And,
    Atom,
    Const,
    Exists,
    ForAll,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Prob,
    atoms,
    simplify_negations,
    to_text,
)
from hrgcheck.logic.qpctl import qpctl_to_ctlstar
from hrgcheck.utils.config import NUMBER_JOBS, PARALLEL_SUBFORMULAE

logger = logging.getLogger("hrgcheck")

COLOR_PREFIX = "@phi"


def recolor_buchi(g: "HRG", m: "BuchiAutomaton", color: "str") -> "HRG":
    """Refine g against m and color every rule node whose traces m accepts in every member."""
    refined = annotate(g, m)
    rules = []
    for rule in refined.rules:
        classes = {he: label.lang_class for he, label in rule.children()}
        behaviour = plug(rule.body, classes, m, context=rule.lhs.ctx_class)
        accepted = [
            node for node in rule.body.nodes if satisfies(behaviour, node, m)
        ]
        rules.append(
            Rule(rule.name, rule.lhs, rule.body.add_color(accepted, color), rule.origin)
        )
    return refined.derive(rules=rules)


def recolor_ltl(g: "HRG", formula: "Formula", color: "str") -> "HRG":
    """Color the nodes all of whose infinite traces satisfy the LTL formula."""
    return recolor_buchi(g, ltl_to_buchi(formula), color)


def recolor_block(g: "HRG", formula: "Formula", color: "str") -> "Tuple[HRG, HRG]":
    """LTL recoloring of g, minimized, plus the refined grammar it came from.

    Only the colors the formula reads are refined against: the rest are
    projected away first and merged back rule by rule afterwards.
    """
    reads = atoms(formula)
    if g.all_colors <= reads:
        refined = recolor_ltl(g, formula, color)
        return minimize(refined), refined

    block = minimize(project_colors(g, reads), by_base=True)
    refined = recolor_ltl(block, formula, color)
    merged = merge_recolorings([g, minimize(refined, by_base=True)])
    logger.debug(
        f"Refined {color} on {len(block.rules)} of {len(g.rules)} rules, "
        f"merged back into {len(merged.rules)}."
    )
    return minimize(merged), refined


def delete_color(g: "HRG", color: "str") -> "HRG":
    if color not in g.colors and color not in g.registry:
        raise UnknownColorError(f"Color {color} is neither declared nor registered.")
    registry = {c: text for c, text in g.registry.items() if c != color}
    return g.map_bodies(lambda body: body.remove_color(color)).derive(
        colors=g.colors - {color}, registry=registry
    )


def project_colors(g: "HRG", keep: "Iterable[str]") -> "HRG":
    """Forget every color not in keep, declarations included."""
    keep = frozenset(keep)
    registry = {c: text for c, text in g.registry.items() if c in keep}
    return g.map_bodies(lambda body: body.project_colors(keep)).derive(
        colors=g.colors & keep, registry=registry
    )


def _color_where(g: "HRG", color: "str", predicate) -> "HRG":
    def paint(body: "Hypergraph") -> "Hypergraph":
        return body.add_color(
            [node for node in body.nodes if predicate(body.color(node))], color
        )

    return g.map_bodies(paint)


@dataclass(frozen=True)
class RecolorStep:
    color: str
    formula: str
    refined_rules: Optional[int] = None
    minimized_rules: Optional[int] = None


class Recolorer:
    """Recolors a grammar for CTL* state formulas, one color per subformula.

    Formula colors are registered as @phi<N>, quantified subformulas are handled
    innermost first and the grammar is minimized after every path quantifier.
    """

    def __init__(
        self,
        grammar: "HRG",
        parallel: "bool" = PARALLEL_SUBFORMULAE,
        number_jobs: "int" = NUMBER_JOBS,
        prefix: "str" = COLOR_PREFIX,
    ) -> None:
        self.grammar = grammar
        self.parallel = parallel
        self.number_jobs = number_jobs
        self.prefix = prefix
        self.steps: "List[RecolorStep]" = []
        self._memo: "Dict[Formula, str]" = {}

    def _fresh_color(self) -> "str":
        used = self.grammar.all_colors
        for n in itertools.count(1):
            color = f"{self.prefix}{n}"
            if color not in used:
                return color

    def _register(self, grammar: "HRG", color: "str", text: "str") -> "HRG":
        registry = dict(grammar.registry)
        registry[color] = text
        return grammar.derive(registry=registry)

    def recolor(self, formula: "Formula") -> "Tuple[HRG, str]":
        """Returns the recolored grammar and the color that marks the formula."""
        color = self._color(simplify_negations(formula))
        return self.grammar, color

    def _color(self, formula: "Formula", text: "Optional[str]" = None) -> "str":
        if formula in self._memo:
            return self._memo[formula]
        text = text or to_text(formula)

        match formula:
            case Atom(name):
                if name not in self.grammar.all_colors:
                    raise UnknownColorError(f"Color {name} is not declared.")
                return name
            case Prob():
                color = self._color(qpctl_to_ctlstar(formula), text)
            case Exists(path):
                color = self._color(Not(ForAll(Not(path))), text)
            case ForAll(path):
                color = self._recolor_path(path, text)
            case Const(value):
                color = self._local(text, lambda colors: value)
            case Not(operand):
                inner = self._color(operand)
                color = self._local(text, lambda colors: inner not in colors)
            case And(left, right) | Or(left, right) | Implies(left, right):
                first, second = self._color(left), self._color(right)
                operation = {
                    And: lambda a, b: a and b,
                    Or: lambda a, b: a or b,
                    Implies: lambda a, b: (not a) or b,
                }[type(formula)]
                color = self._local(
                    text, lambda colors: operation(first in colors, second in colors)
                )
            case _:
                raise TypeError(f"{to_text(formula)} is not a state formula.")

        self._memo[formula] = color
        return color

    def _local(self, text: "str", predicate) -> "str":
        color = self._fresh_color()
        self.grammar = self._register(
            _color_where(self.grammar, color, predicate), color, text
        )
        self.steps.append(RecolorStep(color, text))
        logger.debug(f"Colored {color} = {text} locally.")
        return color

    def _state_subformulas(self, path: "Formula") -> "List[Formula]":
        found = []

        def walk(formula: "Formula"):
            if isinstance(formula, QUANTIFIED):
                if formula not in found:
                    found.append(formula)
                return
            for value in vars(formula).values():
                if isinstance(value, Formula):
                    walk(value)

        walk(path)
        return found

    def _abstract(self, path: "Formula", colors: "Dict[Formula, str]") -> "Formula":
        if isinstance(path, QUANTIFIED):
            return Atom(colors[path])
        if isinstance(path, (Atom, Const)):
            return path
        fields = {
            name: self._abstract(value, colors) if isinstance(value, Formula) else value
            for name, value in vars(path).items()
        }
        return type(path)(**fields)

    def _recolor_path(self, path: "Formula", text: "str") -> "str":
        subformulas = [s for s in self._state_subformulas(path) if s not in self._memo]
        if self.parallel and len(subformulas) > 1:
            self._recolor_parallel(subformulas)
        colors = {sub: self._color(sub) for sub in self._state_subformulas(path)}
        ltl = self._abstract(path, colors)

        color = self._fresh_color()
        minimized, refined = recolor_block(self.grammar, ltl, color)
        self.grammar = self._register(minimized, color, text)
        self.steps.append(
            RecolorStep(color, text, len(refined.rules), len(minimized.rules))
        )
        logger.info(
            f"Colored {color} = {text}: {len(refined.rules)} refined rules, "
            f"{len(minimized.rules)} after minimizing."
        )
        return color

    def _recolor_parallel(self, subformulas: "List[Formula]"):
        """Recolor sibling subformulas on private copies, then merge the results."""
        base = self.grammar

        def work(index: "int", formula: "Formula") -> "Tuple[Recolorer, str]":
            worker = Recolorer(base, parallel=False, prefix=f"@tmp{index}_")
            _, color = worker.recolor(formula)
            return worker, color

        with ThreadPoolExecutor(max_workers=self.number_jobs) as executor:
            results = list(
                executor.map(lambda pair: work(*pair), enumerate(subformulas, start=1))
            )

        merged = merge_recolorings([worker.grammar for worker, _ in results])
        for (worker, color), formula in zip(results, subformulas):
            renames = {}
            for step in worker.steps:
                final = self._fresh_color_in(merged)
                merged = merged.map_bodies(
                    lambda body, old=step.color, new=final: body.rename_color(old, new)
                )
                registry = {
                    c: t for c, t in merged.registry.items() if c != step.color
                }
                registry[final] = step.formula
                merged = merged.derive(registry=registry)
                renames[step.color] = final
                self.steps.append(
                    RecolorStep(
                        final, step.formula, step.refined_rules, step.minimized_rules
                    )
                )
            for sub, private in worker._memo.items():
                if private in renames:
                    self._memo.setdefault(sub, renames[private])
            self._memo[formula] = renames.get(color, color)
        self.grammar = minimize(merged)

    def _fresh_color_in(self, grammar: "HRG") -> "str":
        used = grammar.all_colors
        for n in itertools.count(1):
            color = f"{self.prefix}{n}"
            if color not in used:
                return color


def merge_recolorings(grammars: "List[HRG]") -> "HRG":
    """Product of recolorings of one grammar, paired rule by rule on their base rule.

    Rule bodies keep the node ids of the base rule, so colors are merged by node.
    """
    first = grammars[0]
    registry = {}
    colors = set()
    for grammar in grammars:
        registry.update(grammar.registry)
        colors |= grammar.colors

    names: "Dict[tuple, Nonterminal]" = {}

    def product_nonterminal(parts: "tuple") -> "Nonterminal":
        if parts not in names:
            names[parts] = Nonterminal("+".join(str(p) for p in parts), parts[0].arity)
        return names[parts]

    starts = [tuple(parts) for parts in itertools.product(*(g.start for g in grammars))]
    worklist: "Deque[tuple]" = deque(starts)
    seen = set(starts)
    found = []
    while worklist:
        parts = worklist.popleft()
        by_origin = [
            {rule.base_name: [] for rule in g.rules_for(part)}
            for g, part in zip(grammars, parts)
        ]
        for by, g, part in zip(by_origin, grammars, parts):
            for rule in g.rules_for(part):
                by[rule.base_name].append(rule)
        origins = set(by_origin[0]).intersection(*by_origin[1:])
        for origin in natsort.natsorted(origins):
            for combination in itertools.product(*(by[origin] for by in by_origin)):
                body = combination[0].body
                merged_colors = {
                    node: frozenset().union(*(r.body.color(node) for r in combination))
                    for node in body.nodes
                }
                labels = {}
                for he, _ in combination[0].children():
                    child = tuple(r.body.label(he) for r in combination)
                    labels[he] = product_nonterminal(child)
                    if child not in seen:
                        seen.add(child)
                        worklist.append(child)
                merged_body = Hypergraph(
                    nodes=body.nodes,
                    abstract_count=body.abstract_count,
                    edges=body.edges,
                    hyperedges={
                        he: (labels[he], attach)
                        for he, (_, attach) in body.hyperedges.items()
                    },
                    colors=merged_colors,
                )
                found.append((origin, product_nonterminal(parts), merged_body))

    counters: "Dict[str, itertools.count]" = {}
    rules = []
    for origin, lhs, body in found:
        counter = counters.setdefault(origin, itertools.count(1))
        rules.append(Rule(f"{origin}.{next(counter)}", lhs, body, origin))

    merged = first.derive(
        nonterminals=names.values() if names else [],
        start=[product_nonterminal(parts) for parts in starts],
        rules=rules,
        colors=colors,
        registry=registry,
    )
    return prune(merged)
