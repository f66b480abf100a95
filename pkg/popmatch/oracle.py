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
Ground truth by exhaustive enumeration, for small instances only.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .common import (
    POPMATCH_MAX_ENUMERABLE_EDGES,
    POPMATCH_RESOLVED_JOBS,
    POPMATCH_RESOLVED_MAX_EDGES,
    POPMATCH_RESOLVED_MAX_MATCHINGS,
    Side,
    BudgetExceeded,
    CertificateError,
)
from .instance import Instance, Matching, check_matching
from .votes import delta_u

CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class EnumerationBudget(object):
    max_edges: int = field(default_factory=lambda: POPMATCH_RESOLVED_MAX_EDGES)
    max_matchings: int = field(
        default_factory=lambda: POPMATCH_RESOLVED_MAX_MATCHINGS
    )


@dataclass(frozen=True)
class SizeSpectrum(object):
    max_popular: int
    min_popular: int
    max_weakly_popular: int
    min_weakly_popular: int
    all_max_popular: List[Matching]
    n_matchings: int
    n_popular: int
    n_weakly_popular: int


def _masks(inst: Instance, budget: EnumerationBudget) -> List[int]:
    edges = inst.edges
    limit = min(budget.max_edges, POPMATCH_MAX_ENUMERABLE_EDGES)
    if len(edges) > limit:
        raise BudgetExceeded(
            f"Instance has {len(edges)} edges; the enumeration budget allows {limit}."
        )
    student_room = list(inst.student_caps)
    course_room = list(inst.course_caps)
    masks: List[int] = []

    # Deciding the highest edge first, and leaving it out before putting it
    # in, visits the masks in ascending order.
    def walk(e: int, mask: int):
        if e < 0:
            if len(masks) == budget.max_matchings:
                raise BudgetExceeded(
                    f"Instance has more than {budget.max_matchings} matchings."
                )
            masks.append(mask)
            return
        walk(e - 1, mask)
        a, b = edges[e]
        if student_room[a] > 0 and course_room[b] > 0:
            student_room[a] -= 1
            course_room[b] -= 1
            walk(e - 1, mask | (1 << e))
            student_room[a] += 1
            course_room[b] += 1

    walk(len(edges) - 1, 0)
    return masks


def _matching(inst: Instance, mask: int) -> Matching:
    return Matching(
        frozenset(pair for e, pair in enumerate(inst.edges) if mask >> e & 1)
    )


def enumerate_matchings(
    inst: Instance,
    budget: Optional[EnumerationBudget] = None,
) -> Iterator[Matching]:
    """
    Every matching of ``inst`` exactly once, ordered by the bitmask over
    ``inst.edges``.

    :raises BudgetExceeded: if the instance is beyond ``budget``.
    """
    for mask in _masks(inst, budget or EnumerationBudget()):
        yield _matching(inst, mask)


class Enumeration(object):
    """
    All matchings of an instance together with, for every vertex, the id of
    its partner set in each matching. Comparisons of two matchings then
    reduce to table lookups: ``big_delta(m_i, m_j)`` is the sum over
    vertices ``v`` of ``tables[v][ids[i, v], ids[j, v]]``.
    """

    def __init__(
        self,
        inst: Instance,
        budget: Optional[EnumerationBudget] = None,
        jobs: int = POPMATCH_RESOLVED_JOBS,
    ):
        self.inst = inst
        self.jobs = max(1, jobs)
        self.masks = _masks(inst, budget or EnumerationBudget())
        self.vertices = list(inst.vertices())
        self.index = {mask: i for i, mask in enumerate(self.masks)}

        mask_array = np.array(self.masks, dtype=np.int64)
        self.sizes = np.array([bin(mask).count("1") for mask in self.masks])
        self.ids = np.zeros((len(self.masks), len(self.vertices)), dtype=np.int64)
        self.sets: List[List[frozenset]] = []
        for column, v in enumerate(self.vertices):
            if v.side is Side.Student:
                incident = [
                    (e, b) for e, (a, b) in enumerate(inst.edges) if a == v.index
                ]
            else:
                incident = [
                    (e, a) for e, (a, b) in enumerate(inst.edges) if b == v.index
                ]
            incident_mask = 0
            for e, _ in incident:
                incident_mask |= 1 << e
            local, inverse = np.unique(mask_array & incident_mask, return_inverse=True)
            self.ids[:, column] = inverse.reshape(-1)
            self.sets.append(
                [
                    frozenset(w for e, w in incident if int(pattern) >> e & 1)
                    for pattern in local
                ]
            )

    def __len__(self) -> int:
        return len(self.masks)

    def matching(self, i: int) -> Matching:
        return _matching(self.inst, self.masks[i])

    def index_of(self, m: Matching) -> int:
        check_matching(self.inst, m)
        mask = 0
        for e, pair in enumerate(self.inst.edges):
            if pair in m:
                mask |= 1 << e
        return self.index[mask]

    def _delta(self, column: int, x: int, y: int) -> int:
        return delta_u(
            self.inst, self.vertices[column], self.sets[column][x], self.sets[column][y]
        )

    @cached_property
    def tables(self) -> List[np.ndarray]:
        result = []
        for column, sets in enumerate(self.sets):
            k = len(sets)
            table = np.zeros((k, k), dtype=np.int64)
            for x in range(k):
                for y in range(k):
                    if x != y:
                        table[x, y] = self._delta(column, x, y)
            result.append(table)
        return result

    def row(self, i: int) -> np.ndarray:
        """``big_delta(m_i, t)`` for every enumerated ``t``."""
        total = np.zeros(len(self), dtype=np.int64)
        for column, sets in enumerate(self.sets):
            x = self.ids[i, column]
            lookup = np.array([self._delta(column, x, y) for y in range(len(sets))])
            total += lookup[self.ids[:, column]]
        return total

    def column(self, j: int) -> np.ndarray:
        """``big_delta(t, m_j)`` for every enumerated ``t``."""
        total = np.zeros(len(self), dtype=np.int64)
        for column, sets in enumerate(self.sets):
            y = self.ids[j, column]
            lookup = np.array([self._delta(column, x, y) for x in range(len(sets))])
            total += lookup[self.ids[:, column]]
        return total

    def _block(self, start: int, stop: int) -> np.ndarray:
        block = np.zeros((stop - start, len(self)), dtype=np.int64)
        for column, table in enumerate(self.tables):
            ids = self.ids[:, column]
            block += table[ids[start:stop, None], ids[None, :]]
        return block

    def _chunks(self) -> List[Tuple[int, int]]:
        step = max(1, CHUNK_CELLS // max(1, len(self)))
        return [(s, min(s + step, len(self))) for s in range(0, len(self), step)]

    def scan(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Popularity of every enumerated matching, as two boolean arrays
        ``(popular, weakly_popular)``.
        """
        self.tables  # built once, before the workers start

        def work(bounds: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
            block = self._block(*bounds)
            return block.min(axis=1), block.max(axis=0)

        chunks = self._chunks()
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            results = list(executor.map(work, chunks))

        row_min = np.concatenate([r for r, _ in results])
        column_max = np.max(np.stack([c for _, c in results]), axis=0)
        return row_min >= 0, column_max <= 0


def _first_negative(values: np.ndarray, jobs: int) -> Optional[int]:
    bounds = np.array_split(np.arange(len(values)), max(1, jobs))

    def work(indices: np.ndarray) -> Optional[int]:
        hits = indices[values[indices] < 0]
        return int(hits[0]) if len(hits) != 0 else None

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        found = [i for i in executor.map(work, bounds) if i is not None]
    return min(found) if len(found) != 0 else None


def is_popular_bruteforce(
    inst: Instance,
    n: Matching,
    budget: Optional[EnumerationBudget] = None,
    jobs: int = POPMATCH_RESOLVED_JOBS,
) -> Tuple[bool, Optional[Matching]]:
    """
    Compares ``n`` against every matching of ``inst``. The counterexample,
    if any, is the first one in enumeration order.

    :raises BudgetExceeded: if the instance is beyond ``budget``.
    :raises InvalidMatching: if ``n`` is not valid for ``inst``.
    """
    enumeration = Enumeration(inst, budget, jobs)
    first = _first_negative(enumeration.row(enumeration.index_of(n)), jobs)
    if first is None:
        return True, None
    return False, enumeration.matching(first)


def is_weakly_popular_bruteforce(
    inst: Instance,
    n: Matching,
    budget: Optional[EnumerationBudget] = None,
    jobs: int = POPMATCH_RESOLVED_JOBS,
) -> Tuple[bool, Optional[Matching]]:
    """
    True if no matching of ``inst`` is strictly more popular than ``n``;
    otherwise the first such matching in enumeration order.
    """
    enumeration = Enumeration(inst, budget, jobs)
    first = _first_negative(-enumeration.column(enumeration.index_of(n)), jobs)
    if first is None:
        return True, None
    return False, enumeration.matching(first)


def popular_size_spectrum(
    inst: Instance,
    budget: Optional[EnumerationBudget] = None,
    jobs: int = POPMATCH_RESOLVED_JOBS,
) -> SizeSpectrum:
    """
    Sizes of the largest and smallest popular and weakly popular matchings,
    and every popular matching of maximum size.

    Quadratic in the number of matchings.

    :raises BudgetExceeded: if the instance is beyond ``budget``.
    """
    enumeration = Enumeration(inst, budget, jobs)
    popular, weakly_popular = enumeration.scan()
    if not popular.any() or not weakly_popular.any():
        raise CertificateError("No popular matching found; the enumeration is broken.")

    sizes = enumeration.sizes
    max_popular = int(sizes[popular].max())
    all_max_popular = [
        enumeration.matching(int(i))
        for i in np.flatnonzero(popular & (sizes == max_popular))
    ]
    return SizeSpectrum(
        max_popular=max_popular,
        min_popular=int(sizes[popular].min()),
        max_weakly_popular=int(sizes[weakly_popular].max()),
        min_weakly_popular=int(sizes[weakly_popular].min()),
        all_max_popular=all_max_popular,
        n_matchings=len(enumeration),
        n_popular=int(popular.sum()),
        n_weakly_popular=int(weakly_popular.sum()),
    )
