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
"""
Popularity certificates.

A matching ``N`` is checked on its clone graph: every vertex ``u`` is split
into ``cap(u)`` clones, each ``N`` edge is pinned to one clone pair, every
other edge is present between all clone pairs, and each clone may also fall
back to a private last-resort vertex. Edge weights are the votes the two
endpoints cast for that edge against what they hold in ``N``. ``N`` is
popular whenever no clone-complete matching has positive weight.
"""
from collections import deque
from enum import Enum
from dataclasses import dataclass
from functools import cached_property
from typing import (
    ClassVar,
    Deque,
    Dict,
    FrozenSet,
    Iterator,
    List,
    Optional,
    Set,
    Tuple,
    Union,
)

import numpy as np
from scipy.optimize import linear_sum_assignment

from .common import (
    EXIT_OK,
    EXIT_NOT_POPULAR,
    EXIT_INCONCLUSIVE,
    Side,
    VertexId,
    CertificateError,
    InvalidMatching,
)
from .instance import Instance, Matching, check_matching
from .solvers import LevelMatching
from .votes import big_delta, compare_sets, vote

ClonePair = Tuple[int, int]
"""``(student clone id, course clone id)``"""


class CloneKind(str, Enum):
    Real = "real"
    LastResort = "last_resort"


class Part(str, Enum):
    A0 = "A0"
    A1 = "A1"
    B0 = "B0"
    B1 = "B1"


@dataclass(frozen=True)
class CloneVertex(object):
    original: VertexId
    copy_index: int
    kind: CloneKind = CloneKind.Real

    def last_resort(self) -> "CloneVertex":
        return CloneVertex(self.original, self.copy_index, CloneKind.LastResort)

    def __str__(self) -> str:
        name = f"{self.original}_{self.copy_index}"
        if self.kind is CloneKind.LastResort:
            return f"last({name})"
        return name


@dataclass(frozen=True)
class CloneMatching(object):
    """
    A matching on the clone graph given by its clone-to-clone pairs. Every
    clone not in a pair is matched to its last-resort vertex, so the
    matching is complete on all real clones by construction.
    """

    pairs: FrozenSet[ClonePair]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[ClonePair]:
        return iter(sorted(self.pairs))

    @cached_property
    def student_side(self) -> Dict[int, int]:
        return {sc: cc for sc, cc in self.pairs}

    @cached_property
    def course_side(self) -> Dict[int, int]:
        return {cc: sc for sc, cc in self.pairs}


@dataclass(frozen=True)
class CloneGraph(object):
    inst: Instance
    n: Matching
    student_clones: Tuple[CloneVertex, ...]
    course_clones: Tuple[CloneVertex, ...]
    student_offset: Tuple[int, ...]
    course_offset: Tuple[int, ...]
    n_prime: Dict[Tuple[int, int], ClonePair]
    weights: Dict[ClonePair, int]
    student_last_resort: Tuple[int, ...]
    course_last_resort: Tuple[int, ...]

    @cached_property
    def n_star(self) -> CloneMatching:
        return CloneMatching(frozenset(self.n_prime.values()))

    def student_clone(self, a: int, copy_index: int) -> int:
        return self.student_offset[a] + copy_index - 1

    def course_clone(self, b: int, copy_index: int) -> int:
        return self.course_offset[b] + copy_index - 1

    def clones(self) -> Iterator[CloneVertex]:
        yield from self.student_clones
        yield from self.course_clones

    def weight(self, sc: int, cc: int) -> int:
        """:raises KeyError: if the clones are not adjacent."""
        return self.weights[(sc, cc)]

    @cached_property
    def student_adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        adjacency: List[List[int]] = [[] for _ in self.student_clones]
        for sc, cc in sorted(self.weights):
            adjacency[sc].append(cc)
        return tuple(tuple(row) for row in adjacency)


# -- Verdicts
@dataclass(frozen=True)
class Popular(object):
    name: ClassVar[str] = "popular"
    exit_code: ClassVar[int] = EXIT_OK

    value: int
    source: str = "certificate"


@dataclass(frozen=True)
class NotPopular(object):
    name: ClassVar[str] = "not_popular"
    exit_code: ClassVar[int] = EXIT_NOT_POPULAR

    witness: Matching
    delta: int
    value: int
    source: str = "certificate"


@dataclass(frozen=True)
class Inconclusive(object):
    name: ClassVar[str] = "inconclusive"
    exit_code: ClassVar[int] = EXIT_INCONCLUSIVE

    value: int
    witness: CloneMatching


Verdict = Union[Popular, NotPopular, Inconclusive]


# -- Dual witnesses
@dataclass(frozen=True)
class DualWitness(object):
    alpha: Dict[CloneVertex, int]
    partition: Dict[CloneVertex, Part]

    @property
    def objective(self) -> int:
        return sum(self.alpha.values())


@dataclass(frozen=True)
class DualCheck(object):
    feasible: bool
    objective: int
    violated: List[Tuple[CloneVertex, CloneVertex]]


def build_clone_graph(inst: Instance, n: Matching) -> CloneGraph:
    """
    Builds the clone graph of ``n``.

    ``N`` edges are pinned in ``(student, course)`` order to the lowest
    clone index still free on either side.

    :raises InvalidMatching: if ``n`` is not valid for ``inst``.
    """
    check_matching(inst, n)

    student_offset: List[int] = []
    student_clones: List[CloneVertex] = []
    for a in range(len(inst.students)):
        student_offset.append(len(student_clones))
        v = inst.student(a)
        student_clones += [CloneVertex(v, i) for i in range(1, inst.cap(v) + 1)]
    course_offset: List[int] = []
    course_clones: List[CloneVertex] = []
    for b in range(len(inst.courses)):
        course_offset.append(len(course_clones))
        v = inst.course(b)
        course_clones += [CloneVertex(v, j) for j in range(1, inst.cap(v) + 1)]

    student_star: List[Optional[int]] = [None] * len(student_clones)
    course_star: List[Optional[int]] = [None] * len(course_clones)
    next_student = [0] * len(inst.students)
    next_course = [0] * len(inst.courses)
    n_prime: Dict[Tuple[int, int], ClonePair] = {}
    for a, b in n:
        sc = student_offset[a] + next_student[a]
        cc = course_offset[b] + next_course[b]
        next_student[a] += 1
        next_course[b] += 1
        n_prime[(a, b)] = (sc, cc)
        student_star[sc] = b
        course_star[cc] = a

    weights: Dict[ClonePair, int] = {}
    for a, b in inst.edges:
        student = inst.student(a)
        course = inst.course(b)
        if (a, b) in n_prime:
            sc, cc = n_prime[(a, b)]
            weights[(sc, cc)] = vote(inst, student, b, student_star[sc]) + vote(
                inst, course, a, course_star[cc]
            )
            continue
        student_votes = [
            (sc, vote(inst, student, b, student_star[sc]))
            for sc in range(student_offset[a], student_offset[a] + inst.cap(student))
        ]
        course_votes = [
            (cc, vote(inst, course, a, course_star[cc]))
            for cc in range(course_offset[b], course_offset[b] + inst.cap(course))
        ]
        for sc, sv in student_votes:
            for cc, cv in course_votes:
                weights[(sc, cc)] = sv + cv

    return CloneGraph(
        inst=inst,
        n=n,
        student_clones=tuple(student_clones),
        course_clones=tuple(course_clones),
        student_offset=tuple(student_offset),
        course_offset=tuple(course_offset),
        n_prime=n_prime,
        weights=weights,
        student_last_resort=tuple(0 if b is None else -1 for b in student_star),
        course_last_resort=tuple(0 if a is None else -1 for a in course_star),
    )


def clone_matching_weight(cg: CloneGraph, t_star: CloneMatching) -> int:
    """
    :raises CertificateError: if ``t_star`` uses a missing edge or a clone
        twice.
    """
    if len(t_star.student_side) != len(t_star) or len(t_star.course_side) != len(
        t_star
    ):
        raise CertificateError("Clone matching uses a clone more than once.")
    total = 0
    for sc, cc in t_star.pairs:
        try:
            total += cg.weight(sc, cc)
        except KeyError:
            raise CertificateError(
                f"({cg.student_clones[sc]}, {cg.course_clones[cc]}) is not an edge of the clone graph."
            )
    for sc, w in enumerate(cg.student_last_resort):
        if sc not in t_star.student_side:
            total += w
    for cc, w in enumerate(cg.course_last_resort):
        if cc not in t_star.course_side:
            total += w
    return total


def _own_clones(cg: CloneGraph, v: VertexId) -> range:
    offsets = cg.student_offset if v.side is Side.Student else cg.course_offset
    start = offsets[v.index]
    return range(start, start + cg.inst.cap(v))


def realize_matching(cg: CloneGraph, t: Matching) -> CloneMatching:
    """
    Lifts ``t`` into the clone graph so that the lifted matching weighs
    exactly ``-big_delta(N, t)``:

    * pairs shared with ``N`` keep their pinned clone edge.
    * every other ``t`` edge is attached, at each endpoint, to the clone
      holding the ``N`` partner it is compared against in that endpoint's
      adversarial pairing, or to a clone left free by ``N`` if it is
      compared against null.
    * clones left over fall back to their last resort.

    :raises CertificateError: on inconsistent bookkeeping.
    """
    inst = cg.inst
    n = cg.n
    check_matching(inst, t)

    pairs: Set[ClonePair] = set()
    for pair in t:
        if pair in n:
            pairs.add(cg.n_prime[pair])

    chosen: Dict[Tuple[Side, int, int], int] = {}
    for u in inst.vertices():
        old = n.partners(u)
        new = t.partners(u)
        if old == new:
            continue
        pinned: Dict[int, int] = {}
        for w in old:
            pair = (u.index, w) if u.side is Side.Student else (w, u.index)
            pinned[w] = cg.n_prime[pair][0 if u.side is Side.Student else 1]
        pinned_clones = set(pinned.values())
        free = iter(c for c in _own_clones(cg, u) if c not in pinned_clones)
        for x, y in compare_sets(inst, u, old, new).pairs():
            if y is None:
                continue
            if x is not None:
                chosen[(u.side, u.index, y)] = pinned[x]
                continue
            try:
                chosen[(u.side, u.index, y)] = next(free)
            except StopIteration:
                raise CertificateError(f"{u} ran out of free clones.")

    for a, b in t:
        if (a, b) in n:
            continue
        sc = chosen[(Side.Student, a, b)]
        cc = chosen[(Side.Course, b, a)]
        if (sc, cc) not in cg.weights:
            raise CertificateError(
                f"({cg.student_clones[sc]}, {cg.course_clones[cc]}) is not an edge of the clone graph."
            )
        pairs.add((sc, cc))

    t_star = CloneMatching(frozenset(pairs))
    if len(t_star.student_side) != len(pairs) or len(t_star.course_side) != len(
        pairs
    ):
        raise CertificateError("Realization uses a clone more than once.")
    return t_star


def max_weight_complete_matching(cg: CloneGraph) -> Tuple[int, CloneMatching]:
    """
    Maximum weight over all clone matchings that are complete on the real
    clones, found as a rectangular assignment problem.

    Rows are student clones. Columns are course clones followed by one
    last-resort column per student clone. A course clone left out of the
    assignment goes to its own last resort, so its last-resort weight is
    paid up front and subtracted from the entries of its column.
    """
    n_rows = len(cg.student_clones)
    n_courses = len(cg.course_clones)
    base = sum(cg.course_last_resort)
    if n_rows == 0:
        return base, CloneMatching(frozenset())

    forbidden = -(6 * n_rows + 10)
    matrix = np.full((n_rows, n_courses + n_rows), forbidden, dtype=np.int64)
    for (sc, cc), w in cg.weights.items():
        matrix[sc, cc] = w - cg.course_last_resort[cc]
    rows = np.arange(n_rows)
    matrix[rows, n_courses + rows] = cg.student_last_resort

    row_ind, col_ind = linear_sum_assignment(matrix, maximize=True)
    chosen = matrix[row_ind, col_ind]
    if (chosen == forbidden).any():
        raise CertificateError("Assignment picked a forbidden cell.")

    pairs = frozenset(
        (int(r), int(c)) for r, c in zip(row_ind, col_ind) if c < n_courses
    )
    return base + int(chosen.sum()), CloneMatching(pairs)


def verify_popular(inst: Instance, n: Matching) -> Verdict:
    """
    Decides popularity of ``n`` from its clone graph.

    An optimum of at most zero proves ``n`` popular. A positive optimum is
    projected back onto ``inst``; the projection is reported as a
    counterexample only once ``big_delta(n, T) < 0`` is confirmed, and the
    verdict is :class:`Inconclusive` otherwise.

    :raises InvalidMatching: if ``n`` is not valid for ``inst``.
    """
    cg = build_clone_graph(inst, n)
    value, witness = max_weight_complete_matching(cg)
    if value <= 0:
        return Popular(value)

    try:
        t = Matching.from_pairs(
            (
                cg.student_clones[sc].original.index,
                cg.course_clones[cc].original.index,
            )
            for sc, cc in witness
        )
    except InvalidMatching:
        return Inconclusive(value, witness)

    delta = big_delta(inst, n, t)
    if delta < 0:
        return NotPopular(t, delta, value)
    return Inconclusive(value, witness)


def build_dual_witness(
    inst: Instance,
    lm: LevelMatching,
    cg: Optional[CloneGraph] = None,
) -> DualWitness:
    """
    Labels the clones of the 2-level algorithm's output.

    A clone pair pinned to a level 0 edge goes to ``(A0, B0)`` with
    ``alpha = (+1, -1)``; a level 1 edge to ``(A1, B1)`` with
    ``alpha = (-1, +1)``. Unmatched student clones are ``A1`` and unmatched
    course clones ``B0``, both with ``alpha = 0``.

    :raises CertificateError: if ``lm`` holds a pair at both levels or does
        not match ``cg``.
    """
    try:
        m0 = lm.projection
    except InvalidMatching as e:
        raise CertificateError(f"Level matching is inconsistent: {e}")
    if cg is None:
        cg = build_clone_graph(inst, m0)
    elif cg.n != m0:
        raise CertificateError("Clone graph was not built from this matching.")

    alpha: Dict[CloneVertex, int] = {}
    partition: Dict[CloneVertex, Part] = {}
    for v in cg.student_clones:
        alpha[v] = 0
        partition[v] = Part.A1
    for v in cg.course_clones:
        alpha[v] = 0
        partition[v] = Part.B0

    for (a, b), (sc, cc) in cg.n_prime.items():
        student = cg.student_clones[sc]
        course = cg.course_clones[cc]
        if lm.level_of(a, b) == 0:
            alpha[student], partition[student] = 1, Part.A0
            alpha[course], partition[course] = -1, Part.B0
        else:
            alpha[student], partition[student] = -1, Part.A1
            alpha[course], partition[course] = 1, Part.B1
    return DualWitness(alpha, partition)


def _check_clones(cg: CloneGraph, w: DualWitness):
    if set(w.alpha) != set(cg.clones()):
        raise CertificateError("Dual witness and clone graph cover different clones.")


def check_dual(cg: CloneGraph, w: DualWitness) -> DualCheck:
    """
    Checks ``alpha`` against every edge constraint and every last-resort
    constraint of the clone graph. A feasible witness with objective zero
    bounds every complete clone matching by zero.

    :raises CertificateError: if ``w`` does not label exactly the clones of
        ``cg``.
    """
    _check_clones(cg, w)
    violated: List[Tuple[CloneVertex, CloneVertex]] = []
    for (sc, cc), weight in sorted(cg.weights.items()):
        student = cg.student_clones[sc]
        course = cg.course_clones[cc]
        if w.alpha[student] + w.alpha[course] < weight:
            violated.append((student, course))
    for clones, last_resort in (
        (cg.student_clones, cg.student_last_resort),
        (cg.course_clones, cg.course_last_resort),
    ):
        for v, weight in zip(clones, last_resort):
            if w.alpha[v] < weight:
                violated.append((v, v.last_resort()))
    return DualCheck(len(violated) == 0, w.objective, violated)


def check_complementary_slackness(
    cg: CloneGraph,
    w: DualWitness,
    t_star: CloneMatching,
) -> List[Tuple[CloneVertex, CloneVertex]]:
    """Edges of ``t_star`` whose dual constraint is not tight."""
    _check_clones(cg, w)
    slack: List[Tuple[CloneVertex, CloneVertex]] = []
    for sc, cc in t_star:
        student = cg.student_clones[sc]
        course = cg.course_clones[cc]
        if w.alpha[student] + w.alpha[course] != cg.weight(sc, cc):
            slack.append((student, course))
    for clones, last_resort, side in (
        (cg.student_clones, cg.student_last_resort, t_star.student_side),
        (cg.course_clones, cg.course_last_resort, t_star.course_side),
    ):
        for i, (v, weight) in enumerate(zip(clones, last_resort)):
            if i not in side and w.alpha[v] != weight:
                slack.append((v, v.last_resort()))
    return slack


def check_claim1(inst: Instance, lm: LevelMatching) -> bool:
    """
    On the clone graph of the 2-level algorithm's output, every edge from
    ``A1`` to ``B0`` weighs exactly -2 and every edge inside ``A0 x B0`` or
    ``A1 x B1`` weighs at most 0.
    """
    cg = build_clone_graph(inst, lm.projection)
    w = build_dual_witness(inst, lm, cg)
    for (sc, cc), weight in cg.weights.items():
        student = w.partition[cg.student_clones[sc]]
        course = w.partition[cg.course_clones[cc]]
        if student is Part.A1 and course is Part.B0:
            if weight != -2:
                return False
        elif (student, course) in ((Part.A0, Part.B0), (Part.A1, Part.B1)):
            if weight > 0:
                return False
    return True


def min_augmenting_path_length(cg: CloneGraph) -> Optional[int]:
    """
    Length in edges of a shortest augmenting path for the pinned matching
    in the clone graph without last-resort vertices, or ``None`` if there is
    no augmenting path.
    """
    student_side = cg.n_star.student_side
    course_side = cg.n_star.course_side
    distance: Dict[int, int] = {}
    queue: Deque[int] = deque()
    for sc in range(len(cg.student_clones)):
        if sc not in student_side:
            distance[sc] = 0
            queue.append(sc)
    while len(queue) != 0:
        sc = queue.popleft()
        for cc in cg.student_adjacency[sc]:
            if student_side.get(sc) == cc:
                continue
            mate = course_side.get(cc)
            if mate is None:
                return distance[sc] + 1
            if mate not in distance:
                distance[mate] = distance[sc] + 2
                queue.append(mate)
    return None
