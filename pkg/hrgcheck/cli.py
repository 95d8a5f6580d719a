import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from tqdm import tqdm

import hrgcheck.utils.config as configM
from hrgcheck import HrgcheckError, __version__
from hrgcheck.checker.behaviour import plug
from hrgcheck.checker.decide import INIT_COLOR, check_formula
from hrgcheck.checker.recolor import Recolorer
from hrgcheck.checker.refine import annotate
from hrgcheck.dot import behaviour_to_dot, grammar_to_dot, refined_to_dot
from hrgcheck.grammar_file import grammar_to_json, load_grammar, save_grammar, serialize_grammar
from hrgcheck.graph.grammar import HRG, grammar_stats, tree_term, validate
from hrgcheck.logic import FormulaSyntaxError
from hrgcheck.logic.buchi import ltl_to_buchi
from hrgcheck.logic.formula import QUANTIFIED, ForAll, Formula, is_state_formula, to_text
from hrgcheck.logic.parser import parse_formula
from hrgcheck.oracle import differential
from hrgcheck.utils.config import (
    NUMBER_JOBS,
    ORACLE_DEPTH,
    ORACLE_MEMBER_CAP,
    TRANSLATION,
    config,
    package_path,
    root_path,
)
from hrgcheck.utils.logs import clear_old_logs, format_log_dir_path, setup_logs

logger = logging.getLogger("hrgcheck")

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_ERROR = 2


def benchmarks_folder() -> "Path":
    folder = Path(config["paths"]["benchmarks_folder"])
    if not folder.is_absolute():
        folder = root_path.joinpath(folder)
    if not folder.exists():
        folder = package_path.joinpath("benchmarks")
    return folder


def resolve_grammar_path(name: "str") -> "Path":
    """A path as given, or a file of the benchmarks folder."""
    path = Path(name)
    if path.exists():
        return path
    fallback = benchmarks_folder().joinpath(name)
    if fallback.exists():
        logger.debug(f"Using benchmark grammar {fallback}")
        return fallback
    return path


def open_grammar(name: "str") -> "Optional[HRG]":
    grammar = load_grammar(resolve_grammar_path(name))
    violations = validate(grammar)
    if violations:
        logger.error(f"{name} failed validation: {violations}")
        print(TRANSLATION["grammar_invalid"])
        for violation in violations:
            print(TRANSLATION["grammar_invalid_entry"].format(violation))
        return None
    if configM.VERBOSE:
        print(
            TRANSLATION["grammar_loaded"].format(
                name, len(grammar.nonterminals), len(grammar.rules)
            )
        )
    return grammar


def _formula(text: "str", grammar: "HRG") -> "Formula":
    return parse_formula(text, grammar.all_colors)


def _path_formula(formula: "Formula") -> "Formula":
    """The LTL body of A(...) or of a bare path formula."""
    if isinstance(formula, ForAll):
        formula = formula.path
    if any(isinstance(sub, QUANTIFIED) for sub in _subformulas(formula)):
        raise FormulaSyntaxError(f"{to_text(formula)} is not an LTL formula.")
    return formula


def _subformulas(formula: "Formula"):
    yield formula
    for value in vars(formula).values():
        if isinstance(value, Formula):
            yield from _subformulas(value)


def _write_or_print(text: "str", out: "Optional[str]"):
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    print(TRANSLATION["written_to"].format(out))


def cmd_check(vargs: "dict") -> "int":
    grammar = open_grammar(vargs["grammar"])
    if grammar is None:
        return EXIT_ERROR
    formula = _formula(vargs["formula"], grammar)
    result = check_formula(
        grammar,
        formula,
        init=vargs["init"],
        number_jobs=vargs["jobs"],
    )
    verdict = result.verdict
    mode = vargs["mode"]
    text = to_text(formula)

    if mode == "all":
        holds = verdict.holds_for_all
        message = "check_mode_all_true" if holds else "check_mode_all_false"
    elif mode == "some":
        holds = verdict.exists_member
        message = "check_mode_some_true" if holds else "check_mode_some_false"
    else:
        holds = True
        message = "check_mode_count"

    sat_witness = tree_term(verdict.sat_witness, base_names=True) if verdict.sat_witness else None
    fal_witness = tree_term(verdict.fal_witness, base_names=True) if verdict.fal_witness else None

    if vargs["json"]:
        report = {
            "grammar": vargs["grammar"],
            "formula": text,
            "mode": mode,
            "sat": str(verdict.sat),
            "fal": str(verdict.fal),
            "verdict": holds if mode != "count" else None,
            "finitely_many_violations": verdict.finitely_many_violations,
            "color": result.color,
            "sat_witness": sat_witness,
            "fal_witness": fal_witness,
            "registry": result.grammar.registry,
        }
        print(json.dumps(report, indent=2, ensure_ascii=False))
    else:
        print(TRANSLATION["check_counts"].format(verdict.sat, verdict.fal))
        if mode == "count":
            print(
                TRANSLATION[message].format(
                    verdict.sat.short, verdict.fal.short, verdict.finitely_many_violations
                )
            )
        else:
            print(TRANSLATION[message].format(text))
        if sat_witness:
            print(TRANSLATION["witness_sat"].format(sat_witness))
        if fal_witness:
            print(TRANSLATION["witness_fal"].format(fal_witness))
        if configM.VERBOSE:
            print(TRANSLATION["formula_color"].format(result.color))

    return EXIT_OK if holds else EXIT_FALSE


def cmd_recolor(vargs: "dict") -> "int":
    grammar = open_grammar(vargs["grammar"])
    if grammar is None:
        return EXIT_ERROR
    formula = _formula(vargs["formula"], grammar)
    if not is_state_formula(formula):
        formula = ForAll(formula)

    recolorer = Recolorer(grammar, number_jobs=vargs["jobs"])
    recolored, color = recolorer.recolor(formula)

    if vargs["json"]:
        report = {
            "color": color,
            "steps": [
                {
                    "color": step.color,
                    "formula": step.formula,
                    "refined_rules": step.refined_rules,
                    "minimized_rules": step.minimized_rules,
                }
                for step in recolorer.steps
            ],
            "grammar": grammar_to_json(recolored),
        }
        print(json.dumps(report, indent=2, ensure_ascii=False))
    else:
        for step in recolorer.steps:
            if step.refined_rules is None:
                print(TRANSLATION["recolor_step"].format(step.color, step.formula))
            else:
                print(
                    TRANSLATION["recolor_step_sizes"].format(
                        step.color, step.formula, step.refined_rules, step.minimized_rules
                    )
                )
        print(
            TRANSLATION["recolor_result"].format(
                len(recolored.nonterminals), len(recolored.rules)
            )
        )

    if vargs["out"]:
        save_grammar(recolored, vargs["out"])
        print(TRANSLATION["written_to"].format(vargs["out"]))
    elif not vargs["json"]:
        sys.stdout.write(serialize_grammar(recolored))
    return EXIT_OK


def cmd_oracle(vargs: "dict") -> "int":
    grammar = open_grammar(vargs["grammar"])
    if grammar is None:
        return EXIT_ERROR
    formula = _formula(vargs["formula"], grammar)
    report = differential(
        grammar,
        formula,
        depth=vargs["depth"],
        cap=ORACLE_MEMBER_CAP,
        number_jobs=vargs["jobs"],
        progress=not vargs["json"],
    )
    if vargs["json"]:
        print(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
    else:
        print(
            TRANSLATION["oracle_result"].format(
                len(report.mismatches), report.members_checked, report.nodes_checked
            )
        )
        for mismatch in report.mismatches:
            print(
                TRANSLATION["oracle_mismatch"].format(
                    mismatch.member, mismatch.node, mismatch.recolored, mismatch.oracle
                )
            )
        if report.missing_members or report.extra_members:
            print(
                TRANSLATION["oracle_language"].format(
                    report.missing_members, report.extra_members
                )
            )
    return EXIT_OK if report.ok else EXIT_FALSE


def cmd_dump(vargs: "dict") -> "int":
    grammar = open_grammar(vargs["grammar"])
    if grammar is None:
        return EXIT_ERROR
    kind = vargs["dot"]

    if kind is None:
        if vargs["json"]:
            text = json.dumps(grammar_to_json(grammar), indent=2, ensure_ascii=False) + "\n"
        else:
            text = serialize_grammar(grammar)
    elif kind == "grammar":
        text = grammar_to_dot(grammar)
    else:
        if not vargs["formula"]:
            print(TRANSLATION["dump_needs_formula"].format(kind))
            return EXIT_ERROR
        m = ltl_to_buchi(_path_formula(_formula(vargs["formula"], grammar)))
        refined = annotate(grammar, m)
        if kind == "refined":
            text = refined_to_dot(refined)
        else:
            text = "".join(
                behaviour_to_dot(
                    plug(
                        rule.body,
                        {he: label.lang_class for he, label in rule.children()},
                        m,
                    ),
                    name=rule.name,
                )
                for rule in refined.rules
            )
    _write_or_print(text, vargs["out"])
    return EXIT_OK


def cmd_bench(vargs: "dict") -> "int":
    folder = benchmarks_folder()
    verdicts_path = folder.joinpath("verdicts.json")
    rows = json.loads(verdicts_path.read_text(encoding="utf-8"))
    if vargs["only"]:
        rows = [row for row in rows if row["grammar"] in vargs["only"]]
    if not rows:
        print(TRANSLATION["bench_no_rows"].format(verdicts_path))
        return EXIT_ERROR

    lines = [
        TRANSLATION["bench_header"].format(
            "grammar", "formula", "#N", "#P", "#E", "#I", "R/M #P", "sat", "fal", "seconds", ""
        )
    ]
    matched = 0
    grammars = {}
    for row in tqdm(rows, desc=TRANSLATION["progress_benchmarks"], disable=vargs["json"]):
        name = row["grammar"]
        if name not in grammars:
            grammars[name] = load_grammar(folder.joinpath(name))
        grammar = grammars[name]
        formula = parse_formula(row["formula"], grammar.all_colors)

        started = time.perf_counter()
        result = check_formula(grammar, formula, init=INIT_COLOR, number_jobs=vargs["jobs"])
        seconds = time.perf_counter() - started

        verdict = result.verdict
        expected = (row["sat"], row["fal"])
        ok = (verdict.sat.short, verdict.fal.short) == expected
        matched += ok
        logger.info(f"{name} {row['formula']}: {verdict} in {seconds:.2f}s, expected {expected}")

        stats = grammar_stats(grammar)
        sized = [step for step in result.steps if step.refined_rules is not None]
        sizes = f"{max(s.refined_rules for s in sized)}/{len(result.grammar.rules)}" if sized else "-"
        lines.append(
            TRANSLATION["bench_row"].format(
                name,
                row["formula"],
                stats.nonterminals,
                stats.rules,
                stats.max_hyperedges,
                stats.max_arity,
                sizes,
                verdict.sat.short,
                verdict.fal.short,
                seconds,
                TRANSLATION["bench_ok"] if ok else TRANSLATION["bench_wrong"].format(*expected),
            )
        )

    print("\n".join(lines))
    print(TRANSLATION["bench_summary"].format(matched, len(rows)))
    return EXIT_OK if matched == len(rows) else EXIT_FALSE


COMMANDS = {
    "check": cmd_check,
    "recolor": cmd_recolor,
    "oracle": cmd_oracle,
    "dump": cmd_dump,
    "bench": cmd_bench,
}


def build_parser() -> "argparse.ArgumentParser":
    parser = argparse.ArgumentParser(
        prog="hrgcheck",
        description="Model check families of transition systems given by hyperedge replacement grammars.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--verbose",
        "-v",
        action="count",
        default=0,
        help="Log verbosity.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def common(sub: "argparse.ArgumentParser", formula_required: "bool" = True):
        sub.add_argument("grammar", help="Grammar file, .hrg text or .json.")
        sub.add_argument(
            "--formula", "-f", required=formula_required, help="Formula to check."
        )
        sub.add_argument(
            "--jobs", "-j", type=int, default=NUMBER_JOBS, help="Number of workers."
        )
        sub.add_argument(
            "--json", action="store_true", help="Print a JSON report instead of text."
        )

    check = subparsers.add_parser("check", help="Decide the formula for the family.")
    common(check)
    check.add_argument("--mode", choices=("all", "some", "count"), default="all")
    check.add_argument("--init", default=INIT_COLOR, help="Color of the initial nodes.")

    recolor = subparsers.add_parser("recolor", help="Recolor the grammar for the formula.")
    common(recolor)
    recolor.add_argument("--out", "-o", help="Write the recolored grammar here.")

    oracle = subparsers.add_parser(
        "oracle", help="Compare the recoloring with explicit checking of members."
    )
    common(oracle)
    oracle.add_argument("--depth", "-d", type=int, default=ORACLE_DEPTH)

    dump = subparsers.add_parser("dump", help="Print the grammar, or export it as DOT.")
    common(dump, formula_required=False)
    dump.add_argument("--dot", choices=("grammar", "refined", "behaviours"))
    dump.add_argument("--out", "-o", help="Write the output here.")

    bench = subparsers.add_parser("bench", help="Run the benchmark verdict table.")
    bench.add_argument("--only", nargs="*", help="Benchmark grammar files to run.")
    bench.add_argument("--jobs", "-j", type=int, default=NUMBER_JOBS)
    bench.add_argument("--json", action="store_true", help="Hide the progress bar.")
    return parser


def main(argv: "Optional[List[str]]" = None) -> "int":
    parser = build_parser()
    try:
        vargs = vars(parser.parse_args(argv))
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK

    log_folder_path = format_log_dir_path()
    setup_logs(logger_name="hrgcheck", path=log_folder_path)
    clear_old_logs(log_folder_path)

    if vargs["verbose"] == 0:
        logger.setLevel(logging.INFO)
        configM.VERBOSE = False
    else:
        configM.VERBOSE = True
        logger.setLevel(logging.DEBUG)
    logger.info(f"Running {vargs['command']} with {vargs}")

    try:
        return COMMANDS[vargs["command"]](vargs)
    except KeyboardInterrupt:
        logger.warning("Keyboard Interrupt detected.")
        print(TRANSLATION["keyboard_interrupt_exit"])
        return EXIT_ERROR
    except (HrgcheckError, OSError) as e:
        logger.exception(f"{vargs['command']} failed")
        print(TRANSLATION["error_exit"].format(e))
        print(TRANSLATION["check_file_logs"])
        return EXIT_ERROR
