import logging
from collections import Counter
from typing import Dict, Hashable, List

import natsort

from hrgcheck.checker.refine import AnnotatedNonterminal, strip_annotations
from hrgcheck.graph.grammar import HRG, Rule, prune
from hrgcheck.graph.hypergraph import IsomorphismClasses

logger = logging.getLogger("hrgcheck")


def _merge_partition(
    g: "HRG", bodies: "IsomorphismClasses", by_base: "bool"
) -> "Dict[Hashable, int]":
    """Greatest partition where merged nonterminals have equal rule sets under the partition.

    Rule bodies are compared up to renaming of concrete nodes and hyperedges.
    """
    start = set(g.start)
    nonterminals = g.sorted_nonterminals()
    numbering: "Dict[tuple, int]" = {}
    block = {
        nt: numbering.setdefault((nt.arity, nt in start), len(numbering))
        for nt in nonterminals
    }
    while True:
        numbering = {}
        refined = {}
        for nt in nonterminals:
            signature = (
                block[nt],
                frozenset(
                    Counter(
                        (
                            rule.base_name if by_base else rule.origin,
                            bodies.class_of(
                                rule.body.relabel(
                                    {he: block[label] for he, label in rule.children()}
                                )
                            ),
                        )
                        for rule in g.rules_for(nt)
                    ).items()
                ),
            )
            refined[nt] = numbering.setdefault(signature, len(numbering))
        stable = len(numbering) == len(set(block.values()))
        block = refined
        if stable:
            return block


def minimize(g: "HRG", by_base: "bool" = False) -> "HRG":
    """Prune, drop annotations, then merge nonterminals with the same rules.

    With by_base, merged nonterminals also agree on the base rule of every rule,
    so each base rule of g survives.
    """
    pruned = prune(g)
    if any(isinstance(nt, AnnotatedNonterminal) for nt in pruned.nonterminals):
        pruned = strip_annotations(pruned)

    bodies = IsomorphismClasses()
    block = _merge_partition(pruned, bodies, by_base)
    representative: "Dict[int, Hashable]" = {}
    for nt in pruned.sorted_nonterminals():
        representative.setdefault(block[nt], nt)
    merge = {nt: representative[block[nt]] for nt in pruned.nonterminals}

    # Merged nonterminals have the same rules up to renaming, keep the representative's
    rules: "List[Rule]" = [
        Rule(
            rule.name,
            rule.lhs,
            rule.body.relabel({he: merge[label] for he, label in rule.children()}),
            rule.origin,
        )
        for rule in pruned.rules
        if merge[rule.lhs] == rule.lhs
    ]

    minimized = pruned.derive(
        nonterminals=set(merge.values()),
        start=natsort.natsorted({merge[nt] for nt in pruned.start}, key=str),
        rules=rules,
    )
    logger.debug(
        f"Minimized {len(g.rules)} rules / {len(g.nonterminals)} nonterminals "
        f"to {len(minimized.rules)} / {len(minimized.nonterminals)}."
    )
    return minimized
