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
Vote calculus for comparing two matchings.

A vertex ``u`` compares the partner sets it gets in two matchings by first
discarding the partners common to both, padding the shorter remainder with
``None`` (the null option, worse than any real partner) and then pairing the
two remainders up. The comparison is adversarial: the pairing chosen is the
one that is worst for the first set.
"""
import itertools
from dataclasses import dataclass
from typing import Collection, List, Optional, Tuple

from .common import VertexId
from .instance import Instance, Matching, check_matching

Candidate = Optional[int]
"""An index on the opposite side of the voting vertex, or ``None`` for null."""

BRUTEFORCE_MAX_K = 8


@dataclass(frozen=True)
class SetComparison(object):
    """
    The adversarial pairing of two partner sets as seen by one vertex.

    ``s0`` and ``s1`` are the padded remainders sorted best-first; ``s0[i]``
    is compared against ``s1[pairing[i]]``.
    """

    s0: Tuple[Candidate, ...]
    s1: Tuple[Candidate, ...]
    pairing: Tuple[int, ...]
    score: int

    @property
    def k(self) -> int:
        return len(self.s0)

    def pairs(self) -> List[Tuple[Candidate, Candidate]]:
        return [(self.s0[i], self.s1[j]) for i, j in enumerate(self.pairing)]


def _key(inst: Instance, u: VertexId, v: Candidate) -> int:
    if v is None:
        return len(inst.pref_indices(u))
    try:
        return inst.rank(u, v)
    except KeyError:
        other = inst.names(u.side.opposite)
        name = other[v] if 0 <= v < len(other) else f"#{v}"
        raise ValueError(f"{name} is not an acceptable partner of {u}.")


def vote(inst: Instance, u: VertexId, v: Candidate, v_prime: Candidate) -> int:
    """
    +1 if ``u`` prefers ``v`` to ``v_prime``, -1 if it prefers ``v_prime``
    and 0 if they are the same.

    :raises ValueError: if either candidate is not acceptable to ``u``.
    """
    lhs = _key(inst, u, v)
    rhs = _key(inst, u, v_prime)
    if lhs < rhs:
        return 1
    if lhs > rhs:
        return -1
    return 0


def _remainders(
    inst: Instance,
    u: VertexId,
    s0: Collection[Candidate],
    s1: Collection[Candidate],
) -> Tuple[List[Candidate], List[Candidate]]:
    for s in (s0, s1):
        real = [v for v in s if v is not None]
        if len(set(real)) != len(real):
            raise ValueError(f"Partner set of {u} contains repeated elements.")
        if len(real) > inst.cap(u):
            raise ValueError(
                f"Partner set of {u} has {len(real)} elements but capacity {inst.cap(u)}."
            )
        for v in real:
            _key(inst, u, v)
    set0 = {v for v in s0 if v is not None}
    set1 = {v for v in s1 if v is not None}
    only0: List[Candidate] = sorted(set0 - set1, key=lambda v: _key(inst, u, v))
    only1: List[Candidate] = sorted(set1 - set0, key=lambda v: _key(inst, u, v))
    k = max(len(only0), len(only1))
    only0 += [None] * (k - len(only0))
    only1 += [None] * (k - len(only1))
    return only0, only1


def compare_sets(
    inst: Instance,
    u: VertexId,
    s0: Collection[Candidate],
    s1: Collection[Candidate],
) -> SetComparison:
    """
    Finds the pairing of ``s0``'s and ``s1``'s remainders with the smallest
    vote sum from ``u``'s point of view.

    Minimizing the sum amounts to maximizing the number of pairs in which
    the ``s1`` element beats the ``s0`` element. Both arrays are swept
    best-first; every ``s1`` element takes the best unpaired ``s0`` element
    it strictly beats. What is left is paired in order.
    """
    r0, r1 = _remainders(inst, u, s0, s1)
    k = len(r0)
    keys0 = [_key(inst, u, v) for v in r0]
    keys1 = [_key(inst, u, v) for v in r1]

    pairing: List[Optional[int]] = [None] * k
    used1 = [False] * k
    j = 0
    for i1 in range(k):
        while j < k and keys0[j] <= keys1[i1]:
            j += 1
        if j == k:
            break
        pairing[j] = i1
        used1[i1] = True
        j += 1

    leftover1 = iter(i1 for i1 in range(k) if not used1[i1])
    final: List[int] = []
    for i0 in range(k):
        paired = pairing[i0]
        final.append(paired if paired is not None else next(leftover1))

    score = sum(vote(inst, u, r0[i0], r1[final[i0]]) for i0 in range(k))
    return SetComparison(tuple(r0), tuple(r1), tuple(final), score)


def delta_u(
    inst: Instance,
    u: VertexId,
    s0: Collection[Candidate],
    s1: Collection[Candidate],
) -> int:
    """
    ``u``'s adversarial verdict on getting ``s0`` rather than ``s1``.

    :raises ValueError: if a set exceeds ``cap(u)``, repeats an element or
        holds an element ``u`` does not find acceptable.
    """
    return compare_sets(inst, u, s0, s1).score


def delta_u_bruteforce(
    inst: Instance,
    u: VertexId,
    s0: Collection[Candidate],
    s1: Collection[Candidate],
) -> int:
    """
    :func:`delta_u` by trying every bijection between the padded remainders.

    :raises ValueError: if the padded size exceeds ``BRUTEFORCE_MAX_K``.
    """
    r0, r1 = _remainders(inst, u, s0, s1)
    k = len(r0)
    if k > BRUTEFORCE_MAX_K:
        raise ValueError(
            f"Refusing to enumerate {k}! pairings (at most {BRUTEFORCE_MAX_K} elements)."
        )
    if k == 0:
        return 0
    votes = [[vote(inst, u, x, y) for y in r1] for x in r0]
    return min(
        sum(votes[i][sigma[i]] for i in range(k))
        for sigma in itertools.permutations(range(k))
    )


def sorted_delta_u(
    inst: Instance,
    u: VertexId,
    s0: Collection[Candidate],
    s1: Collection[Candidate],
) -> int:
    # Pairs the remainders rank for rank. Lies between the adversarial and
    # the favorable comparisons.
    r0, r1 = _remainders(inst, u, s0, s1)
    return sum(vote(inst, u, x, y) for x, y in zip(r0, r1))


def favorable_delta_u(
    inst: Instance,
    u: VertexId,
    s0: Collection[Candidate],
    s1: Collection[Candidate],
) -> int:
    """The pairing of the remainders with the largest vote sum."""
    return -delta_u(inst, u, s1, s0)


def big_delta(inst: Instance, m0: Matching, m1: Matching) -> int:
    """
    Sum of every vertex's :func:`delta_u` for its partners in ``m0`` versus
    its partners in ``m1``. Non-negative iff ``m0`` is at least as popular
    as ``m1``.

    :raises InvalidMatching: if either matching is invalid for ``inst``.
    """
    check_matching(inst, m0)
    check_matching(inst, m1)
    total = 0
    for u in inst.vertices():
        p0 = m0.partners(u)
        p1 = m1.partners(u)
        if p0 == p1:
            continue
        total += delta_u(inst, u, p0, p1)
    return total


def is_at_least_as_popular(inst: Instance, m0: Matching, m1: Matching) -> bool:
    return big_delta(inst, m0, m1) >= 0


def is_weakly_dominated(inst: Instance, m0: Matching, m1: Matching) -> bool:
    """True if ``m1`` is strictly more popular than ``m0``."""
    return big_delta(inst, m1, m0) > 0
