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
import json
from collections import Counter
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, List, Optional

import rich.tree
from rich.console import Console

from .common import EXIT_OK
from .instance import Instance, Matching
from .solvers import LevelMatching
from .certificate import (
    DualCheck,
    DualWitness,
    Inconclusive,
    NotPopular,
    Popular,
    Verdict,
)
from .oracle import SizeSpectrum


@dataclass
class RunReport(object):
    """
    The machine-readable result of one command. Serialization is
    byte-stable for fixed inputs and seeds.
    """

    command: List[str]
    instance: Dict[str, int]
    result: Dict[str, Any] = field(default_factory=dict)
    exit_status: int = EXIT_OK

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


# -- Payloads
def matching_payload(
    inst: Instance,
    m: Matching,
    lm: Optional[LevelMatching] = None,
) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "size": len(m),
        "matching": [[inst.students[a], inst.courses[b]] for a, b in m],
    }
    if lm is not None:
        payload["levels"] = [
            [inst.students[a], level, inst.courses[b]]
            for a, level, b in sorted(lm.edges)
        ]
    return payload


def dual_payload(check: DualCheck, w: DualWitness) -> Dict[str, Any]:
    parts = Counter(part.value for part in w.partition.values())
    return {
        "objective": check.objective,
        "feasible": check.feasible,
        "partition": {part: parts[part] for part in sorted(parts)},
        "violated": [[str(u), str(v)] for u, v in check.violated],
    }


def verdict_payload(inst: Instance, verdict: Verdict) -> Dict[str, Any]:
    payload: Dict[str, Any] = {"verdict": verdict.name, "value": verdict.value}
    if isinstance(verdict, (Popular, NotPopular)):
        payload["source"] = verdict.source
    if isinstance(verdict, NotPopular):
        payload["delta"] = verdict.delta
        payload["witness"] = matching_payload(inst, verdict.witness)["matching"]
    return payload


def spectrum_payload(inst: Instance, spectrum: SizeSpectrum) -> Dict[str, Any]:
    return {
        "max_popular": spectrum.max_popular,
        "min_popular": spectrum.min_popular,
        "max_weakly_popular": spectrum.max_weakly_popular,
        "min_weakly_popular": spectrum.min_weakly_popular,
        "matchings": spectrum.n_matchings,
        "popular": spectrum.n_popular,
        "weakly_popular": spectrum.n_weakly_popular,
        "all_max_popular": [
            matching_payload(inst, m)["matching"] for m in spectrum.all_max_popular
        ],
    }


# -- Console output
def matching_tree(
    inst: Instance,
    m: Matching,
    title: str,
    lm: Optional[LevelMatching] = None,
) -> rich.tree.Tree:
    tree = rich.tree.Tree(f"{title} (size {len(m)}):")
    for a in range(len(inst.students)):
        student = inst.student(a)
        courses = sorted(m.partners(student), key=lambda b: inst.rank(student, b))
        if len(courses) == 0:
            tree.add(f"[dim]{student.name}: unmatched")
            continue
        entries = []
        for b in courses:
            entry = inst.courses[b]
            if lm is not None:
                entry += f" [cyan](level {lm.level_of(a, b)})"
            entries.append(entry)
        tree.add(f"{student.name}: " + ", ".join(entries))
    return tree


def print_verdict(console: Console, inst: Instance, verdict: Verdict):
    if isinstance(verdict, Popular):
        console.print(
            f"[green]Popular[/green] (certified by {verdict.source}, clone optimum {verdict.value})."
        )
    elif isinstance(verdict, NotPopular):
        console.print(
            f"[red]Not popular[/red] (found by {verdict.source}): the witness below wins by {-verdict.delta}."
        )
        console.print(matching_tree(inst, verdict.witness, "Witness"))
    elif isinstance(verdict, Inconclusive):
        console.print(
            f"[yellow]Inconclusive[/yellow]: the clone optimum is {verdict.value} but it does not project to a more popular matching."
        )
        console.print("Run with --oracle-fallback or use 'popmatch oracle' to decide.")


def print_spectrum(console: Console, inst: Instance, spectrum: SizeSpectrum):
    tree = rich.tree.Tree(f"Enumerated {spectrum.n_matchings} matchings:")
    tree.add(
        f"popular: {spectrum.n_popular}, sizes {spectrum.min_popular}..{spectrum.max_popular}"
    )
    tree.add(
        f"weakly popular: {spectrum.n_weakly_popular}, sizes {spectrum.min_weakly_popular}..{spectrum.max_weakly_popular}"
    )
    best = tree.add(f"max-size popular matchings: {len(spectrum.all_max_popular)}")
    for m in spectrum.all_max_popular:
        best.add(
            "{" + ", ".join(f"({inst.students[a]}, {inst.courses[b]})" for a, b in m) + "}"
        )
    console.print(tree)
