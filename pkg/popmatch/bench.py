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
import math
import time
from dataclasses import dataclass, asdict
from typing import List, Optional, Sequence, Tuple

import click
import rich.progress
from rich.console import Console
from rich.table import Table

from .common import EXIT_INVALID_INPUT
from .click_common import opt, opt_format
from .instance import Instance, random_instance
from .report import RunReport
from .solvers import max_size_popular

LINEAR_GROWTH_LIMIT = 3.0
DEFAULT_SIZES = "100000,200000,400000"


@dataclass
class BenchRow(object):
    target_edges: int
    edges: int
    students: int
    courses: int
    matched: int
    seconds: float


def ladder_shape(edges: int) -> Tuple[int, int]:
    """Near-square complete bipartite shape with at least ``edges`` edges."""
    students = max(1, math.isqrt(edges))
    courses = max(1, -(-edges // students))
    return students, courses


def replicate(block: Instance, copies: int) -> Instance:
    """
    ``copies`` disjoint copies of ``block``. Copy ``k`` renames every
    vertex ``name`` to ``name.k``.
    """
    n_students = len(block.students)
    n_courses = len(block.courses)
    return Instance(
        students=tuple(f"{s}.{k}" for k in range(copies) for s in block.students),
        courses=tuple(f"{c}.{k}" for k in range(copies) for c in block.courses),
        student_caps=block.student_caps * copies,
        course_caps=block.course_caps * copies,
        student_prefs=tuple(
            tuple(b + k * n_courses for b in prefs)
            for k in range(copies)
            for prefs in block.student_prefs
        ),
        course_prefs=tuple(
            tuple(a + k * n_students for a in prefs)
            for k in range(copies)
            for prefs in block.course_prefs
        ),
    )


def growth_factors(rows: List[BenchRow]) -> List[Optional[float]]:
    """
    Wall-time growth normalized per doubling of the edge count, for each
    consecutive pair of rows.
    """
    factors: List[Optional[float]] = []
    for previous, current in zip(rows, rows[1:]):
        if previous.seconds <= 0 or current.edges <= previous.edges:
            factors.append(None)
            continue
        doublings = math.log2(current.edges / previous.edges)
        factors.append((current.seconds / previous.seconds) ** (1 / doublings))
    return factors


def bench(
    sizes: Sequence[int],
    seed: int,
    max_cap: int = 3,
    repeat: int = 3,
    output: Console = Console(stderr=True),
) -> List[BenchRow]:
    """
    Times the 2-level algorithm on a ladder of instances built from one
    generated complete-preference block, the size of the smallest rung.
    Every rung is a number of disjoint copies of that block, so the work
    per edge is the same across the ladder. Each rung reports the best of
    ``repeat`` runs.
    """
    if repeat < 1:
        raise ValueError(f"repeat must be at least 1, got {repeat}.")
    rows: List[BenchRow] = []
    if len(sizes) == 0:
        return rows
    students, courses = ladder_shape(min(sizes))
    block = random_instance(students, courses, max_cap, 1.0, seed)
    block_edges = max(1, len(block.edges))
    with rich.progress.Progress(console=output, transient=True) as progress:
        task = progress.add_task("Benchmarking...", total=len(sizes) * repeat)
        for target in sizes:
            copies = max(1, round(target / block_edges))
            progress.update(
                task, description=f"Replicating the block {copies} times..."
            )
            inst = replicate(block, copies)
            progress.update(task, description=f"Solving {len(inst.edges)} edges...")
            timings: List[float] = []
            for _ in range(repeat):
                start = time.perf_counter()
                lm = max_size_popular(inst)
                timings.append(time.perf_counter() - start)
                progress.advance(task)
            rows.append(
                BenchRow(
                    target_edges=target,
                    edges=len(inst.edges),
                    students=len(inst.students),
                    courses=len(inst.courses),
                    matched=len(lm),
                    seconds=min(timings),
                )
            )
    return rows


def _parse_sizes(ctx: click.Context, param: click.Parameter, value: str) -> List[int]:
    try:
        sizes = [int(size) for size in value.split(",") if size.strip() != ""]
    except ValueError:
        raise click.BadParameter("expected a comma-separated list of integers")
    if len(sizes) == 0 or any(size <= 0 for size in sizes):
        raise click.BadParameter("sizes must be positive")
    return sizes


@click.command("bench")
@opt(
    "--sizes",
    default=DEFAULT_SIZES,
    callback=_parse_sizes,
    help="Comma-separated edge counts to time.",
)
@opt("--seed", default=0, type=int, help="Seed of the generated block.")
@opt(
    "--repeat",
    default=3,
    type=click.IntRange(min=1),
    help="Runs per rung; the fastest one is reported.",
)
@opt(
    "--max-cap",
    default=3,
    type=click.IntRange(min=1),
    help="Capacities are drawn uniformly from [1, max-cap].",
)
@opt_format
def bench_cmd(sizes, seed, repeat, max_cap, format):
    """
    Times the maxpop solver on a ladder of generated instances and checks
    that the running time grows about linearly with the number of edges.
    """
    console = Console()
    err_console = Console(stderr=True)
    try:
        rows = bench(sizes, seed, max_cap, repeat, output=err_console)
    except ValueError as e:
        err_console.print(f"[red]{e}")
        sys.exit(EXIT_INVALID_INPUT)

    factors = growth_factors(rows)
    linear = all(f is None or f <= LINEAR_GROWTH_LIMIT for f in factors)

    if format == "json":
        report = RunReport(
            command=[
                "bench",
                "--sizes=" + ",".join(str(s) for s in sizes),
                f"--seed={seed}",
                f"--repeat={repeat}",
            ],
            instance={},
            result={
                "runs": [asdict(row) for row in rows],
                "growth_per_doubling": factors,
                "linear": linear,
            },
        )
        print(report.to_json())
        return

    table = Table("edges", "students", "courses", "matched", "seconds", "growth")
    shifted: List[Optional[float]] = [None, *factors]
    for row, factor in zip(rows, shifted):
        table.add_row(
            str(row.edges),
            str(row.students),
            str(row.courses),
            str(row.matched),
            f"{row.seconds:.3f}",
            "" if factor is None else f"{factor:.2f}x",
        )
    console.print(table)
    if linear:
        console.print("[green]Running time grows linearly with the edge count.")
    else:
        console.print(
            f"[yellow]Running time grew by more than {LINEAR_GROWTH_LIMIT}x per doubling."
        )
