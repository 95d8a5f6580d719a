import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from hrgcheck.checker import UnknownColorError
from hrgcheck.checker.recolor import Recolorer, RecolorStep, project_colors
from hrgcheck.graph.grammar import (
    HRG,
    CountKind,
    Node,
    Nonterminal,
    Rule,
    TreeCount,
    count_trees,
    shortest_tree,
)
from hrgcheck.logic.formula import ForAll, Formula, atoms, is_state_formula
from hrgcheck.utils.config import (
    NUMBER_JOBS,
    PARALLEL_SUBFORMULAE,
    PRUNE_COLORS,
    TREE_COUNT_CAP,
)

logger = logging.getLogger("hrgcheck")

INIT_COLOR = "init"


@dataclass(frozen=True)
class Verdict:
    """How many members satisfy and how many falsify the formula at their init nodes."""

    sat: TreeCount
    fal: TreeCount
    sat_witness: Optional[Node] = field(default=None, compare=False)
    fal_witness: Optional[Node] = field(default=None, compare=False)

    @property
    def holds_for_all(self) -> "bool":
        return self.fal.kind is CountKind.ZERO

    @property
    def exists_member(self) -> "bool":
        return self.sat.kind is not CountKind.ZERO

    @property
    def finitely_many_violations(self) -> "bool":
        return self.fal.kind is not CountKind.INFINITE

    def __str__(self) -> "str":
        return f"sat={self.sat} fal={self.fal}"


def good_rules(g: "HRG", init: "str", color: "str") -> "List[Rule]":
    """Rules where every init node also carries the formula color."""
    return [
        rule
        for rule in g.rules
        if all(
            color in rule.body.color(node)
            for node in rule.body.nodes
            if init in rule.body.color(node)
        )
    ]


def violation_grammar(g: "HRG", good: "List[Rule]") -> "tuple":
    """Flag product: (A, 1) derives exactly the trees of A that use a rule that isn't good.

    Returns the grammar and the map from its rule names back to the original rules.
    """
    good_names = {rule.name for rule in good}
    flagged: "Dict[tuple, Nonterminal]" = {}

    def nonterminal(base, flag: "bool") -> "Nonterminal":
        key = (base, flag)
        if key not in flagged:
            flagged[key] = Nonterminal(f"{base}~{int(flag)}", base.arity)
        return flagged[key]

    rules = []
    origins = {}
    for rule in g.rules:
        children = rule.children()
        for index, flags in enumerate(
            itertools.product((False, True), repeat=len(children))
        ):
            bad = rule.name not in good_names or any(flags)
            body = rule.body.relabel(
                {he: nonterminal(label, flag) for (he, label), flag in zip(children, flags)}
            )
            name = f"{rule.name}~{index}"
            rules.append(Rule(name, nonterminal(rule.lhs, bad), body, rule.origin))
            origins[name] = rule

    for nt in g.nonterminals:
        nonterminal(nt, False)
        nonterminal(nt, True)
    product = g.derive(
        nonterminals=flagged.values(),
        start=[nonterminal(nt, True) for nt in g.start],
        rules=rules,
    )
    return product, origins


def _unflag(tree: "Node", origins: "Dict[str, Rule]") -> "Node":
    return Node(
        origins[tree.rule.name],
        tuple((he, _unflag(child, origins)) for he, child in tree.children),
    )


def classify(
    g: "HRG", init: "str", color: "str", cap: "int" = TREE_COUNT_CAP
) -> "Verdict":
    for name in (init, color):
        if name not in g.all_colors:
            raise UnknownColorError(f"Color {name} is neither declared nor registered.")

    good = good_rules(g, init, color)
    sat = count_trees(g, good, cap)
    product, origins = violation_grammar(g, good)
    fal = count_trees(product, cap=cap)

    fal_tree = shortest_tree(product)
    verdict = Verdict(
        sat=sat,
        fal=fal,
        sat_witness=shortest_tree(g, good),
        fal_witness=_unflag(fal_tree, origins) if fal_tree is not None else None,
    )
    logger.info(f"{len(good)} of {len(g.rules)} rules are good: {verdict}")
    return verdict


@dataclass
class CheckResult:
    verdict: Verdict
    grammar: HRG
    color: str
    steps: List[RecolorStep]


def check_formula(
    g: "HRG",
    formula: "Formula",
    init: "str" = INIT_COLOR,
    prune_colors: "bool" = PRUNE_COLORS,
    parallel: "bool" = PARALLEL_SUBFORMULAE,
    number_jobs: "int" = NUMBER_JOBS,
    cap: "int" = TREE_COUNT_CAP,
) -> "CheckResult":
    """Recolor g for the formula and classify its members at their init nodes.

    A path formula is read as holding on all paths.
    """
    if not is_state_formula(formula):
        formula = ForAll(formula)
    if init not in g.all_colors:
        raise UnknownColorError(f"Color {init} is not declared.")
    if prune_colors:
        g = project_colors(g, atoms(formula) | {init})

    recolorer = Recolorer(g, parallel=parallel, number_jobs=number_jobs)
    recolored, color = recolorer.recolor(formula)
    verdict = classify(recolored, init, color, cap)
    return CheckResult(verdict, recolored, color, recolorer.steps)


def holds_for_all(g: "HRG", formula: "Formula", init: "str" = INIT_COLOR) -> "bool":
    return check_formula(g, formula, init).verdict.holds_for_all


def exists_member(g: "HRG", formula: "Formula", init: "str" = INIT_COLOR) -> "bool":
    return check_formula(g, formula, init).verdict.exists_member


def finitely_many_violations(
    g: "HRG", formula: "Formula", init: "str" = INIT_COLOR
) -> "bool":
    return check_formula(g, formula, init).verdict.finitely_many_violations
