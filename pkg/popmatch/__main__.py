# Copyright 2025 popmatch contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import sys
from typing import NoReturn

import click
from rich.console import Console

from .__version__ import __version__
from .common import (
    EXIT_INVALID_INPUT,
    EXIT_BUDGET_EXCEEDED,
    PopmatchError,
    BudgetExceeded,
)
from .click_common import (
    opt,
    opt_budget,
    opt_format,
    opt_input,
)
from .instance import (
    Instance,
    Matching,
    check_matching,
    format_instance,
    format_matching,
    parse_instance,
    parse_matching,
    random_instance,
)
from .solvers import Algorithm
from .votes import big_delta
from .certificate import (
    Inconclusive,
    NotPopular,
    Popular,
    Verdict,
    build_clone_graph,
    build_dual_witness,
    check_dual,
    verify_popular,
)
from .oracle import (
    EnumerationBudget,
    is_popular_bruteforce,
    popular_size_spectrum,
)
from .report import (
    RunReport,
    dual_payload,
    matching_payload,
    matching_tree,
    print_spectrum,
    print_verdict,
    spectrum_payload,
    verdict_payload,
)
from .bench import bench_cmd

err_console = Console(stderr=True)


def fail(message: object, code: int = EXIT_INVALID_INPUT) -> NoReturn:
    err_console.print(f"[red]{message}")
    sys.exit(code)


def load_instance(path: str) -> Instance:
    try:
        with click.open_file(path, encoding="utf8") as f:
            return parse_instance(f)
    except OSError as e:
        fail(f"Could not read instance: {e}")
    except PopmatchError as e:
        fail(f"{path}: {e}")


def load_matching(path: str, inst: Instance) -> Matching:
    try:
        with click.open_file(path, encoding="utf8") as f:
            m = parse_matching(f, inst)
        check_matching(inst, m)
        return m
    except OSError as e:
        fail(f"Could not read matching: {e}")
    except PopmatchError as e:
        fail(f"{path}: {e}")


@click.command("solve")
@opt_input
@opt(
    "-a",
    "--algo",
    type=click.Choice(sorted(Algorithm.by_name)),
    default="maxpop",
    help="stable: pairwise-stable matching. maxpop: max-size popular matching.",
)
@opt_format
def solve_cmd(input_path, algo, format):
    """
    Computes a matching and prints it in the matching file format, one
    '<student> <course>' pair per line.

    With --format json, the report also carries the level of every edge and,
    for maxpop, a summary of the dual certificate.
    """
    inst = load_instance(input_path)
    lm = Algorithm.by_name[algo].run(inst)
    m = lm.projection

    dual = None
    if algo == "maxpop":
        cg = build_clone_graph(inst, m)
        witness = build_dual_witness(inst, lm, cg)
        dual = dual_payload(check_dual(cg, witness), witness)

    if format == "json":
        result = matching_payload(inst, m, lm)
        result["algorithm"] = algo
        if dual is not None:
            result["dual"] = dual
        report = RunReport(
            command=["solve", f"--algo={algo}", input_path],
            instance=inst.digest(),
            result=result,
        )
        print(report.to_json())
        return

    print(format_matching(inst, m), end="")
    if sys.stderr.isatty():
        err_console.print(matching_tree(inst, m, algo, lm))
    if dual is not None:
        err_console.print(
            f"Dual certificate: objective {dual['objective']}, {'feasible' if dual['feasible'] else '[red]infeasible'}."
        )


@click.command("verify")
@opt_input
@opt(
    "-m",
    "--matching",
    "matching_path",
    required=True,
    help="Matching file: one '<student> <course>' pair per line, or the JSON output of solve.",
)
@opt(
    "--oracle-fallback/--no-oracle-fallback",
    default=False,
    help="Settle inconclusive certificates by exhaustive enumeration when the instance is within budget.",
)
@opt_budget
@opt_format
def verify_cmd(
    input_path,
    matching_path,
    oracle_fallback,
    max_edges,
    max_matchings,
    jobs,
    format,
):
    """
    Checks whether a matching is popular.

    Exits with 0 if it is, 2 if a more popular matching was found and 3 if the
    certificate was inconclusive.
    """
    inst = load_instance(input_path)
    n = load_matching(matching_path, inst)

    verdict: Verdict = verify_popular(inst, n)
    if isinstance(verdict, Inconclusive) and oracle_fallback:
        budget = EnumerationBudget(max_edges, max_matchings)
        try:
            with err_console.status("Enumerating matchings..."):
                popular, counterexample = is_popular_bruteforce(inst, n, budget, jobs)
            if popular:
                verdict = Popular(verdict.value, source="oracle")
            elif counterexample is not None:
                verdict = NotPopular(
                    counterexample,
                    big_delta(inst, n, counterexample),
                    verdict.value,
                    source="oracle",
                )
        except BudgetExceeded as e:
            err_console.print(f"[yellow]Oracle fallback skipped: {e}")

    if format == "json":
        report = RunReport(
            command=["verify", input_path, matching_path],
            instance=inst.digest(),
            result=verdict_payload(inst, verdict),
            exit_status=verdict.exit_code,
        )
        print(report.to_json())
    else:
        print_verdict(Console(), inst, verdict)
    sys.exit(verdict.exit_code)


@click.command("oracle")
@opt_input
@opt_budget
@opt_format
def oracle_cmd(input_path, max_edges, max_matchings, jobs, format):
    """
    Enumerates every matching of a small instance and reports the sizes of
    its popular and weakly popular matchings, together with the verdicts on
    the outputs of both solvers.
    """
    inst = load_instance(input_path)
    budget = EnumerationBudget(max_edges, max_matchings)
    try:
        with err_console.status("Enumerating matchings..."):
            spectrum = popular_size_spectrum(inst, budget, jobs)
            solvers = {}
            for name, algorithm in sorted(Algorithm.by_name.items()):
                m = algorithm.run(inst).projection
                popular, _ = is_popular_bruteforce(inst, m, budget, jobs)
                solvers[name] = {"size": len(m), "popular": popular}
    except BudgetExceeded as e:
        fail(e, EXIT_BUDGET_EXCEEDED)

    if format == "json":
        result = spectrum_payload(inst, spectrum)
        result["solvers"] = solvers
        report = RunReport(
            command=["oracle", input_path, f"--max-edges={max_edges}"],
            instance=inst.digest(),
            result=result,
        )
        print(report.to_json())
        return

    console = Console()
    print_spectrum(console, inst, spectrum)
    for name, outcome in solvers.items():
        status = "[green]popular" if outcome["popular"] else "[red]not popular"
        console.print(f"{name}: size {outcome['size']}, {status}")


@click.command("gen")
@opt("--students", type=click.IntRange(min=0), required=True)
@opt("--courses", type=click.IntRange(min=0), required=True)
@opt("--max-cap", type=click.IntRange(min=1), default=1)
@opt(
    "--density",
    type=click.FloatRange(0.0, 1.0),
    default=0.5,
    help="Probability that a student-course pair is mutually acceptable.",
)
@opt("--seed", type=int, default=0)
@opt("-o", "--out", "out_path", default="-", help="Output file, or '-' for stdout.")
def gen_cmd(students, courses, max_cap, density, seed, out_path):
    """Generates a random instance. The output depends only on the options."""
    try:
        inst = random_instance(students, courses, max_cap, density, seed)
    except ValueError as e:
        fail(e)
    try:
        with click.open_file(out_path, "w", encoding="utf8") as f:
            f.write(format_instance(inst))
    except OSError as e:
        fail(f"Could not write instance: {e}")


@click.group()
@click.version_option(
    __version__,
    message="""popmatch v%(version)s

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this program except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.""",
)
def cli():
    pass


cli.add_command(solve_cmd)
cli.add_command(verify_cmd)
cli.add_command(oracle_cmd)
cli.add_command(gen_cmd)
cli.add_command(bench_cmd)


if __name__ == "__main__":
    cli()
