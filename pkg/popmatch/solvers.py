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
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Deque, Dict, FrozenSet, List, Tuple

from .common import Side
from .instance import Instance, Matching

Triple = Tuple[int, int, int]
"""``(student, level, course)``"""


@dataclass(frozen=True)
class LevelMatching(object):
    """
    The output of the proposal algorithms: matched edges tagged by the level
    of the student copy that holds them.
    """

    edges: FrozenSet[Triple]
    residual: Tuple[int, ...]

    @cached_property
    def projection(self) -> Matching:
        return project(self)

    @cached_property
    def levels(self) -> Dict[Tuple[int, int], int]:
        return {(a, b): level for a, level, b in self.edges}

    def level_of(self, a: int, b: int) -> int:
        return self.levels[(a, b)]

    def __len__(self) -> int:
        return len(self.edges)


def project(lm: LevelMatching) -> Matching:
    """
    Drops the level tags.

    :raises InvalidMatching: if a pair is held at both levels.
    """
    return Matching.from_pairs((a, b) for a, _, b in sorted(lm.edges))


class ProposalState(object):
    """
    Array-based bookkeeping for student-proposing deferred acceptance with
    ``levels`` copies per student (one for the classical algorithm, two for
    the 2-level variant).

    A course ``b`` orders its proposers by position: level ``i`` copy of the
    student at rank ``r`` sits at ``r + (levels - 1 - i) * deg(b)``, so every
    level 1 copy precedes every level 0 copy. One flag per position marks
    the current partners. Once ``b`` is full its worst partner's position is
    ``max_rank[b]``, found by a pointer that only ever moves left.
    """

    INFINITY: ClassVar[int] = 1 << 62

    def __init__(self, inst: Instance, levels: int):
        self.inst = inst
        self.levels = levels
        n_students = len(inst.students)
        n_courses = len(inst.courses)

        self.deg = [len(prefs) for prefs in inst.course_prefs]
        self.course_cap = list(inst.course_caps)

        # For every student, the rank each listed course gives it back.
        student_ranks = inst.rank_tables(Side.Student)
        self.cross_rank: List[List[int]] = [
            [0] * len(prefs) for prefs in inst.student_prefs
        ]
        for b, prefs in enumerate(inst.course_prefs):
            for r, a in enumerate(prefs):
                self.cross_rank[a][student_ranks[a][b]] = r

        self.residual = list(inst.student_caps)
        self.cursor = [0] * (n_students * levels)
        self.in_queue = bytearray(n_students * levels)
        self.queue: Deque[Tuple[int, int]] = deque()
        for a in range(n_students):
            self._enqueue(a, 0)

        self.flags = [bytearray(levels * d) for d in self.deg]
        self.count = [0] * n_courses
        self.pointer = [levels * d - 1 for d in self.deg]
        self.max_rank = [self.INFINITY] * n_courses

    def _enqueue(self, a: int, level: int):
        slot = a * self.levels + level
        if not self.in_queue[slot]:
            self.in_queue[slot] = 1
            self.queue.append((a, level))

    def _position(self, b: int, r: int, level: int) -> int:
        return r + (self.levels - 1 - level) * self.deg[b]

    def _holder(self, b: int, position: int) -> Tuple[int, int]:
        deg = self.deg[b]
        level = self.levels - 1 - position // deg
        return self.inst.course_prefs[b][position % deg], level

    def _refresh_max_rank(self, b: int):
        flags = self.flags[b]
        p = self.pointer[b]
        while not flags[p]:
            p -= 1
        self.pointer[b] = p
        self.max_rank[b] = p

    def run(self) -> LevelMatching:
        inst = self.inst
        queue = self.queue
        residual = self.residual
        while len(queue) != 0:
            a, level = queue.popleft()
            slot = a * self.levels + level
            self.in_queue[slot] = 0
            prefs = inst.student_prefs[a]
            ranks = self.cross_rank[a]
            c = self.cursor[slot]
            while residual[a] > 0 and c < len(prefs):
                b = prefs[c]
                r = ranks[c]
                c += 1
                position = self._position(b, r, level)
                if position >= self.max_rank[b]:
                    # The edge is no longer in the graph.
                    continue
                self._propose(a, level, b, r, position)
            self.cursor[slot] = c
            if level == 0 and self.levels == 2 and residual[a] > 0:
                self._enqueue(a, 1)

        edges = set()
        for b, flags in enumerate(self.flags):
            for position, flag in enumerate(flags):
                if flag:
                    student, level = self._holder(b, position)
                    edges.add((student, level, b))
        return LevelMatching(frozenset(edges), tuple(residual))

    def _propose(self, a: int, level: int, b: int, r: int, position: int):
        flags = self.flags[b]
        if level == 1 and flags[r + self.deg[b]]:
            # a^1 takes over the edge held by a^0.
            flags[r + self.deg[b]] = 0
            flags[r] = 1
            if self.count[b] == self.course_cap[b]:
                self._refresh_max_rank(b)
            return

        flags[position] = 1
        self.count[b] += 1
        self.residual[a] -= 1
        if self.count[b] > self.course_cap[b]:
            worst = self.pointer[b]
            while not flags[worst]:
                worst -= 1
            flags[worst] = 0
            self.count[b] -= 1
            self.pointer[b] = worst
            v, j = self._holder(b, worst)
            self.residual[v] += 1
            self._enqueue(v, j)
        if self.count[b] == self.course_cap[b]:
            self._refresh_max_rank(b)


@dataclass
class Algorithm(object):
    by_name: ClassVar[Dict[str, "Algorithm"]] = {}

    name: str
    description: str
    levels: int

    def run(self, inst: Instance) -> LevelMatching:
        return ProposalState(inst, self.levels).run()


Algorithm.by_name = {}
Algorithm.by_name["stable"] = Algorithm(
    name="stable",
    description="Student-proposing deferred acceptance (pairwise-stable)",
    levels=1,
)
Algorithm.by_name["maxpop"] = Algorithm(
    name="maxpop",
    description="2-level deferred acceptance (max-size popular)",
    levels=2,
)


def stable_matching(inst: Instance) -> Matching:
    """
    Student-proposing deferred acceptance. Students enter a FIFO queue in
    input order and propose down their lists; a course over capacity rejects
    its worst partner.
    """
    return Algorithm.by_name["stable"].run(inst).projection


def max_size_popular(inst: Instance) -> LevelMatching:
    """
    The 2-level Gale-Shapley algorithm.

    Every student has a level 0 and a level 1 copy and courses prefer any
    level 1 proposer to any level 0 proposer. A student's level 1 copy only
    becomes active once its level 0 copy has gone through its whole list and
    the student still has room. The projection of the result is a
    maximum-size popular matching.
    """
    return Algorithm.by_name["maxpop"].run(inst)

