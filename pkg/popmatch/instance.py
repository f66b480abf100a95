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
import io
import re
import json
from functools import cached_property
from dataclasses import dataclass
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Optional,
    Set,
    TextIO,
    Tuple,
    Union,
)

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import maximum_flow

from .common import (
    Side,
    VertexId,
    ParseError,
    InvalidInstance,
    InvalidMatching,
)

Pair = Tuple[int, int]

KEYWORD_RX = re.compile(r"^(\s*)(students|courses|cap|pref)\s*:")


@dataclass(frozen=True)
class Instance(object):
    """
    A many-to-many bipartite preference instance.

    Vertices are addressed by ``(side, index)``; names only matter for I/O.
    Preference lists hold indices into the opposite side, most preferred
    first. The edge set is derived from the lists and never stored.
    """

    students: Tuple[str, ...]
    courses: Tuple[str, ...]
    student_caps: Tuple[int, ...]
    course_caps: Tuple[int, ...]
    student_prefs: Tuple[Tuple[int, ...], ...]
    course_prefs: Tuple[Tuple[int, ...], ...]

    @classmethod
    def empty(Self) -> "Instance":
        return Self((), (), (), (), (), ())

    # -- Vertex access
    def student(self, index: int) -> VertexId:
        return VertexId(Side.Student, index, self.students[index])

    def course(self, index: int) -> VertexId:
        return VertexId(Side.Course, index, self.courses[index])

    def vertex(self, side: Side, index: int) -> VertexId:
        if side is Side.Student:
            return self.student(index)
        return self.course(index)

    def vertices(self) -> Iterator[VertexId]:
        for a in range(len(self.students)):
            yield self.student(a)
        for b in range(len(self.courses)):
            yield self.course(b)

    def names(self, side: Side) -> Tuple[str, ...]:
        return self.students if side is Side.Student else self.courses

    def lookup(self, side: Side, name: str) -> Optional[VertexId]:
        table = self._student_index if side is Side.Student else self._course_index
        index = table.get(name)
        if index is None:
            return None
        return self.vertex(side, index)

    def cap(self, v: VertexId) -> int:
        if v.side is Side.Student:
            return self.student_caps[v.index]
        return self.course_caps[v.index]

    def pref_indices(self, v: VertexId) -> Tuple[int, ...]:
        if v.side is Side.Student:
            return self.student_prefs[v.index]
        return self.course_prefs[v.index]

    def prefs(self, v: VertexId) -> Tuple[VertexId, ...]:
        other = v.side.opposite
        return tuple(self.vertex(other, w) for w in self.pref_indices(v))

    def rank(self, v: VertexId, w: int) -> int:
        """
        Position of ``w`` (an index on the opposite side) in ``v``'s list.

        :raises KeyError: if ``w`` is not acceptable to ``v``.
        """
        if v.side is Side.Student:
            return self._student_ranks[v.index][w]
        return self._course_ranks[v.index][w]

    def rank_tables(self, side: Side) -> Tuple[Dict[int, int], ...]:
        """Per-vertex ``neighbor -> position`` tables for one side."""
        if side is Side.Student:
            return self._student_ranks
        return self._course_ranks

    def acceptable(self, v: VertexId, w: int) -> bool:
        if v.side is Side.Student:
            return w in self._student_ranks[v.index]
        return w in self._course_ranks[v.index]

    # -- Edges
    @cached_property
    def edges(self) -> Tuple[Pair, ...]:
        return tuple(
            (a, b)
            for a, prefs in enumerate(self.student_prefs)
            for b in sorted(set(prefs))
            if 0 <= b < len(self.courses)
            and a in self._course_ranks[b]
        )

    @cached_property
    def edge_set(self) -> FrozenSet[Pair]:
        return frozenset(self.edges)

    def is_edge(self, a: int, b: int) -> bool:
        return (a, b) in self.edge_set

    def digest(self) -> Dict[str, int]:
        return {
            "students": len(self.students),
            "courses": len(self.courses),
            "edges": len(self.edges),
        }

    # -- Internal tables
    @cached_property
    def _student_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.students)}

    @cached_property
    def _course_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.courses)}

    @cached_property
    def _student_ranks(self) -> Tuple[Dict[int, int], ...]:
        return tuple(_rank_table(prefs) for prefs in self.student_prefs)

    @cached_property
    def _course_ranks(self) -> Tuple[Dict[int, int], ...]:
        return tuple(_rank_table(prefs) for prefs in self.course_prefs)


def _rank_table(prefs: Iterable[int]) -> Dict[int, int]:
    table: Dict[int, int] = {}
    for position, w in enumerate(prefs):
        table.setdefault(w, position)
    return table


@dataclass(frozen=True)
class Matching(object):
    """A set of (student index, course index) pairs."""

    pairs: FrozenSet[Pair]

    @classmethod
    def from_pairs(Self, pairs: Iterable[Pair]) -> "Matching":
        pair_list = [(int(a), int(b)) for a, b in pairs]
        pair_set = frozenset(pair_list)
        if len(pair_set) != len(pair_list):
            seen: Set[Pair] = set()
            for pair in pair_list:
                if pair in seen:
                    raise InvalidMatching(f"Duplicate pair {pair} in matching.")
                seen.add(pair)
        return Self(pair_set)

    @classmethod
    def empty(Self) -> "Matching":
        return Self(frozenset())

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.pairs))

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    @cached_property
    def student_partners(self) -> Dict[int, FrozenSet[int]]:
        result: Dict[int, Set[int]] = {}
        for a, b in self.pairs:
            result.setdefault(a, set()).add(b)
        return {a: frozenset(bs) for a, bs in result.items()}

    @cached_property
    def course_partners(self) -> Dict[int, FrozenSet[int]]:
        result: Dict[int, Set[int]] = {}
        for a, b in self.pairs:
            result.setdefault(b, set()).add(a)
        return {b: frozenset(as_) for b, as_ in result.items()}

    def partners(self, v: VertexId) -> FrozenSet[int]:
        """Partner indices of ``v`` (on the opposite side)."""
        table = (
            self.student_partners if v.side is Side.Student else self.course_partners
        )
        return table.get(v.index, frozenset())

    def adjacency(self, inst: Instance) -> Dict[VertexId, List[VertexId]]:
        """Every vertex mapped to its partners, most preferred first."""
        result: Dict[VertexId, List[VertexId]] = {}
        for v in inst.vertices():
            partners = sorted(self.partners(v), key=lambda w: inst.rank(v, w))
            result[v] = [inst.vertex(v.side.opposite, w) for w in partners]
        return result


@dataclass(frozen=True)
class BlockingPair(object):
    student: VertexId
    course: VertexId

    def __str__(self) -> str:
        return f"({self.student}, {self.course})"


# -- Parsing and serialization
def _tokens(line: str) -> List[Tuple[str, int]]:
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_instance(text: Union[str, TextIO]) -> Instance:
    """
    Parses the line-oriented instance format::

        students: a a'
        courses: b b'
        cap: b 1
        pref: a b b'

    :raises ParseError: on syntax errors, unknown names or repeated lines.
    :raises InvalidInstance: if the parsed instance violates an invariant.
    """
    if not isinstance(text, str):
        text = text.read()

    directives: List[Tuple[int, str, List[Tuple[str, int]], int]] = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.rstrip("\n").split("#", 1)[0]
        if line.strip() == "":
            continue
        match = KEYWORD_RX.match(line)
        if match is None:
            column = len(line) - len(line.lstrip()) + 1
            raise ParseError(
                "expected one of 'students:', 'courses:', 'cap:', 'pref:'",
                lineno,
                column,
            )
        rest = line[match.end() :]
        offset = match.end()
        tokens = [(token, column + offset) for token, column in _tokens(rest)]
        directives.append((lineno, match.group(2), tokens, len(match.group(1)) + 1))

    students: List[str] = []
    courses: List[str] = []
    declared: Dict[str, Tuple[Side, int]] = {}
    for lineno, keyword, tokens, _ in directives:
        if keyword not in ("students", "courses"):
            continue
        side = Side.Student if keyword == "students" else Side.Course
        names = students if side is Side.Student else courses
        for token, column in tokens:
            if token in declared:
                previous, _ = declared[token]
                if previous is side:
                    raise ParseError(f"duplicate {side.value} '{token}'", lineno, column)
                raise ParseError(
                    f"'{token}' is declared both as a student and as a course",
                    lineno,
                    column,
                )
            declared[token] = (side, len(names))
            names.append(token)

    caps: Dict[Tuple[Side, int], int] = {}
    prefs: Dict[Tuple[Side, int], Tuple[int, ...]] = {}
    for lineno, keyword, tokens, column in directives:
        if keyword in ("students", "courses"):
            continue
        if len(tokens) == 0:
            raise ParseError(f"'{keyword}:' requires a vertex name", lineno, column)
        owner_name, owner_column = tokens[0]
        owner = declared.get(owner_name)
        if owner is None:
            raise ParseError(f"unknown vertex '{owner_name}'", lineno, owner_column)
        if keyword == "cap":
            if len(tokens) != 2:
                raise ParseError(
                    "expected 'cap: <name> <positive int>'", lineno, owner_column
                )
            value, value_column = tokens[1]
            try:
                cap = int(value)
            except ValueError:
                raise ParseError(
                    f"capacity '{value}' is not an integer", lineno, value_column
                )
            if owner in caps:
                raise ParseError(
                    f"capacity of '{owner_name}' given twice", lineno, owner_column
                )
            caps[owner] = cap
        else:
            if owner in prefs:
                raise ParseError(
                    f"preference list of '{owner_name}' given twice",
                    lineno,
                    owner_column,
                )
            side, _ = owner
            neighbors: List[int] = []
            for token, token_column in tokens[1:]:
                neighbor = declared.get(token)
                if neighbor is None or neighbor[0] is side:
                    raise ParseError(
                        f"unknown {side.opposite.value} '{token}'",
                        lineno,
                        token_column,
                    )
                neighbors.append(neighbor[1])
            prefs[owner] = tuple(neighbors)

    inst = Instance(
        students=tuple(students),
        courses=tuple(courses),
        student_caps=tuple(
            caps.get((Side.Student, i), 1) for i in range(len(students))
        ),
        course_caps=tuple(caps.get((Side.Course, i), 1) for i in range(len(courses))),
        student_prefs=tuple(
            prefs.get((Side.Student, i), ()) for i in range(len(students))
        ),
        course_prefs=tuple(
            prefs.get((Side.Course, i), ()) for i in range(len(courses))
        ),
    )
    violations = validate(inst)
    if len(violations) != 0:
        raise InvalidInstance(violations)
    return inst


def format_instance(inst: Instance) -> str:
    lines = [
        " ".join(["students:"] + list(inst.students)),
        " ".join(["courses:"] + list(inst.courses)),
    ]
    for v in inst.vertices():
        if inst.cap(v) != 1:
            lines.append(f"cap: {v.name} {inst.cap(v)}")
    for v in inst.vertices():
        prefs = inst.prefs(v)
        if len(prefs) != 0:
            lines.append(" ".join(["pref:", v.name] + [w.name for w in prefs]))
    return "\n".join(lines) + "\n"


def _json_matching(document: Any) -> List[Any]:
    # Accepts a full run report ({"result": {"matching": ...}}) or a bare
    # {"matching": ...} object.
    if not isinstance(document, dict):
        raise ParseError("expected a JSON object", 1)
    result = document.get("result")
    if isinstance(result, dict) and "matching" in result:
        pairs = result["matching"]
    elif "matching" in document:
        pairs = document["matching"]
    else:
        raise ParseError("JSON document has no 'matching' list", 1)
    if not isinstance(pairs, list):
        raise ParseError("'matching' must be a list of pairs", 1)
    return pairs


def parse_matching(text: Union[str, TextIO], inst: Instance) -> Matching:
    """
    Parses one ``<student> <course>`` pair per line, or the JSON report
    written by ``popmatch solve --format json``.

    Validity against the instance (edges, capacities) is not checked here;
    see :func:`check_matching`.
    """
    if not isinstance(text, str):
        text = text.read()

    named_pairs: List[Tuple[str, str, int]] = []
    if text.lstrip().startswith("{"):
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", e.lineno, e.colno)
        pairs_json = _json_matching(document)
        for pair in pairs_json:
            if not isinstance(pair, list) or len(pair) != 2:
                raise ParseError(f"malformed pair {pair!r}", 1)
            named_pairs.append((str(pair[0]), str(pair[1]), 1))
    else:
        for lineno, raw in enumerate(io.StringIO(text), start=1):
            line = raw.rstrip("\n").split("#", 1)[0]
            tokens = _tokens(line)
            if len(tokens) == 0:
                continue
            if len(tokens) != 2:
                raise ParseError("expected '<student> <course>'", lineno, tokens[0][1])
            named_pairs.append((tokens[0][0], tokens[1][0], lineno))

    pairs: List[Pair] = []
    for student_name, course_name, lineno in named_pairs:
        student = inst.lookup(Side.Student, student_name)
        if student is None:
            raise ParseError(f"unknown student '{student_name}'", lineno)
        course = inst.lookup(Side.Course, course_name)
        if course is None:
            raise ParseError(f"unknown course '{course_name}'", lineno)
        pairs.append((student.index, course.index))
    return Matching.from_pairs(pairs)


def format_matching(inst: Instance, m: Matching) -> str:
    return "".join(f"{inst.students[a]} {inst.courses[b]}\n" for a, b in m)


# -- Validation
def validate(inst: Instance) -> List[str]:
    """Returns a description of every violated instance invariant."""
    violations: List[str] = []
    sides = (
        (Side.Student, inst.students, inst.student_caps, inst.student_prefs),
        (Side.Course, inst.courses, inst.course_caps, inst.course_prefs),
    )
    for side, names, caps, prefs in sides:
        if len(caps) != len(names) or len(prefs) != len(names):
            violations.append(
                f"{side.value} tables disagree: {len(names)} names, {len(caps)} capacities, {len(prefs)} preference lists"
            )
            return violations
        if len(set(names)) != len(names):
            seen: Set[str] = set()
            for name in names:
                if name in seen:
                    violations.append(f"duplicate {side.value} name '{name}'")
                seen.add(name)

    for side, names, caps, prefs in sides:
        other_names = inst.names(side.opposite)
        for index, name in enumerate(names):
            if caps[index] < 1:
                violations.append(f"cap({name}) = {caps[index]} is less than 1")
            seen_neighbors: Set[int] = set()
            for w in prefs[index]:
                if not 0 <= w < len(other_names):
                    violations.append(
                        f"{name} lists unknown {side.opposite.value} #{w}"
                    )
                    continue
                if w in seen_neighbors:
                    violations.append(
                        f"duplicate preference: {name} lists {other_names[w]} more than once"
                    )
                seen_neighbors.add(w)

    for a, prefs in enumerate(inst.student_prefs):
        for b in set(prefs):
            if 0 <= b < len(inst.courses) and not inst.acceptable(inst.course(b), a):
                violations.append(
                    f"non-mutual edge ({inst.students[a]}, {inst.courses[b]}): {inst.courses[b]} does not list {inst.students[a]}"
                )
    for b, prefs in enumerate(inst.course_prefs):
        for a in set(prefs):
            if 0 <= a < len(inst.students) and not inst.acceptable(inst.student(a), b):
                violations.append(
                    f"non-mutual edge ({inst.students[a]}, {inst.courses[b]}): {inst.students[a]} does not list {inst.courses[b]}"
                )
    return violations


def check_matching(inst: Instance, m: Matching):
    """
    :raises InvalidMatching: if a pair is not an edge or a capacity is exceeded.
    """
    for a, b in m:
        if not (0 <= a < len(inst.students) and 0 <= b < len(inst.courses)):
            raise InvalidMatching(f"Pair ({a}, {b}) refers to unknown vertices.")
        if not inst.is_edge(a, b):
            raise InvalidMatching(
                f"Pair ({inst.students[a]}, {inst.courses[b]}) is not a mutually acceptable pair."
            )
    for a, partners in m.student_partners.items():
        if len(partners) > inst.student_caps[a]:
            raise InvalidMatching(
                f"{inst.students[a]} has {len(partners)} partners but capacity {inst.student_caps[a]}."
            )
    for b, partners in m.course_partners.items():
        if len(partners) > inst.course_caps[b]:
            raise InvalidMatching(
                f"{inst.courses[b]} has {len(partners)} partners but capacity {inst.course_caps[b]}."
            )


def matched_degrees(inst: Instance, m: Matching) -> Dict[VertexId, int]:
    return {v: len(m.partners(v)) for v in inst.vertices()}


# -- Baselines
def _prefers_to_worst(inst: Instance, m: Matching, v: VertexId, w: int) -> bool:
    partners = m.partners(v)
    if len(partners) < inst.cap(v):
        return True
    worst = max(inst.rank(v, p) for p in partners)
    return inst.rank(v, w) < worst


def is_pairwise_stable(
    inst: Instance, m: Matching
) -> Tuple[bool, List[BlockingPair]]:
    check_matching(inst, m)
    blocking: List[BlockingPair] = []
    for a, b in inst.edges:
        if (a, b) in m:
            continue
        student = inst.student(a)
        course = inst.course(b)
        if _prefers_to_worst(inst, m, student, b) and _prefers_to_worst(
            inst, m, course, a
        ):
            blocking.append(BlockingPair(student, course))
    return len(blocking) == 0, blocking


def max_matching_size(inst: Instance) -> int:
    """
    Size of a maximum matching, i.e. a maximum b-matching without repeated
    pairs, found as a maximum flow source -> students -> courses -> sink with
    vertex capacities on the outer arcs and unit capacity on every edge.
    """
    n_students = len(inst.students)
    n_courses = len(inst.courses)
    if len(inst.edges) == 0:
        return 0

    source = 0
    sink = n_students + n_courses + 1
    rows: List[int] = []
    cols: List[int] = []
    capacities: List[int] = []
    for a in range(n_students):
        rows.append(source)
        cols.append(1 + a)
        capacities.append(inst.student_caps[a])
    for a, b in inst.edges:
        rows.append(1 + a)
        cols.append(1 + n_students + b)
        capacities.append(1)
    for b in range(n_courses):
        rows.append(1 + n_students + b)
        cols.append(sink)
        capacities.append(inst.course_caps[b])

    graph = scipy.sparse.csr_matrix(
        (
            np.array(capacities, dtype=np.int32),
            (np.array(rows), np.array(cols)),
        ),
        shape=(sink + 1, sink + 1),
    )
    return int(maximum_flow(graph, source, sink).flow_value)


# -- Generation
def random_instance(
    n_students: int,
    n_courses: int,
    max_cap: int,
    edge_density: float,
    seed: int,
) -> Instance:
    """
    Generates an instance where every pair is mutually acceptable with
    probability ``edge_density``, preference orders are uniform random
    permutations and capacities are uniform in ``[1, max_cap]``.

    The output is a pure function of the arguments.
    """
    if n_students < 0 or n_courses < 0:
        raise ValueError("Vertex counts must be non-negative.")
    if max_cap < 1:
        raise ValueError("max_cap must be at least 1.")
    if not 0.0 <= edge_density <= 1.0:
        raise ValueError("edge_density must be within [0, 1].")

    rng = np.random.default_rng(seed)
    accepted = rng.random((n_students, n_courses)) < edge_density
    student_caps = rng.integers(1, max_cap + 1, size=n_students)
    course_caps = rng.integers(1, max_cap + 1, size=n_courses)
    student_prefs = tuple(
        tuple(int(b) for b in rng.permutation(np.flatnonzero(accepted[a])))
        for a in range(n_students)
    )
    course_prefs = tuple(
        tuple(int(a) for a in rng.permutation(np.flatnonzero(accepted[:, b])))
        for b in range(n_courses)
    )
    return Instance(
        students=tuple(f"s{a + 1}" for a in range(n_students)),
        courses=tuple(f"c{b + 1}" for b in range(n_courses)),
        student_caps=tuple(int(c) for c in student_caps),
        course_caps=tuple(int(c) for c in course_caps),
        student_prefs=student_prefs,
        course_prefs=course_prefs,
    )
