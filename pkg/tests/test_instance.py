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
import json

import pytest

from popmatch.common import Side, ParseError, InvalidInstance, InvalidMatching
from popmatch.instance import (
    Instance,
    Matching,
    check_matching,
    format_instance,
    format_matching,
    is_pairwise_stable,
    matched_degrees,
    max_matching_size,
    parse_instance,
    parse_matching,
    random_instance,
    validate,
)
from popmatch.report import RunReport, matching_payload
from popmatch.solvers import max_size_popular


def test_parse_square(square):
    assert square.students == ("a", "a'")
    assert square.courses == ("b", "b'")
    assert square.student_caps == (1, 1)
    assert square.course_caps == (1, 1)
    assert len(square.edges) == 3
    assert square.edges == ((0, 0), (0, 1), (1, 0))
    assert validate(square) == []


def test_parse_ranks(square):
    a = square.student(0)
    b = square.course(0)
    assert square.rank(a, 0) == 0
    assert square.rank(a, 1) == 1
    assert square.rank(b, 1) == 1
    assert not square.acceptable(square.student(1), 1)
    with pytest.raises(KeyError):
        square.rank(square.student(1), 1)


def test_parse_caps_and_comments(rural):
    assert rural.course_caps == (1, 2)
    assert rural.cap(rural.course(1)) == 2
    text = """\
    # leading comment
    students: x   # trailing comment
    students: y
    courses: z
    pref: x z
    pref: z x
    """
    inst = parse_instance(io.StringIO(text))
    assert inst.students == ("x", "y")
    assert inst.student_prefs == ((0,), ())
    assert inst.edges == ((0, 0),)


def test_parse_empty():
    assert parse_instance("") == Instance.empty()
    assert parse_instance("# nothing here\n\n") == Instance.empty()


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("students: a\nbogus: b\n", 2, 1),
        ("students: a\ncourses: b\npref: a c\n", 3, 9),
        ("students: a\ncourses: a\n", 2, 10),
        ("students: a a\n", 1, 13),
        ("students: a\ncourses: b\ncap: a two\n", 3, 8),
        ("students: a\ncourses: b\ncap: a 2\ncap: a 3\n", 4, 6),
        ("students: a\ncourses: b\npref: a b\npref: a b\n", 4, 7),
        ("students: a\ncourses: b\npref: q b\n", 3, 7),
        ("students: a\ncourses: b\npref: a a\n", 3, 9),
        ("students: a\npref:\n", 2, 1),
    ],
)
def test_parse_errors(text, line, column):
    with pytest.raises(ParseError) as e:
        parse_instance(text)
    assert e.value.line == line
    assert e.value.column == column
    assert str(e.value).startswith(f"{line}:{column}:")


def test_parse_rejects_non_mutual_edge():
    with pytest.raises(InvalidInstance) as e:
        parse_instance("students: a\ncourses: b\npref: a b\n")
    assert e.value.violations == ["non-mutual edge (a, b): b does not list a"]

    with pytest.raises(InvalidInstance) as e:
        parse_instance("students: a\ncourses: b\npref: b a\n")
    assert e.value.violations == ["non-mutual edge (a, b): a does not list b"]


def test_parse_rejects_bad_caps_and_repeats():
    with pytest.raises(InvalidInstance) as e:
        parse_instance("students: a\ncourses: b\ncap: b 0\npref: a b\npref: b a\n")
    assert e.value.violations == ["cap(b) = 0 is less than 1"]

    with pytest.raises(InvalidInstance) as e:
        parse_instance("students: a\ncourses: b\npref: a b b\npref: b a\n")
    assert e.value.violations == ["duplicate preference: a lists b more than once"]


def test_validate_direct():
    inst = Instance(
        students=("a",),
        courses=("b",),
        student_caps=(1,),
        course_caps=(1,),
        student_prefs=((0, 3),),
        course_prefs=((0,),),
    )
    assert validate(inst) == ["a lists unknown course #3"]


def test_format_round_trip(square, rural, clinic):
    for inst in (square, rural, clinic, Instance.empty()):
        assert parse_instance(format_instance(inst)) == inst
    assert "cap: h' 2\n" in format_instance(rural)
    assert "cap:" not in format_instance(square)


def test_lookup(square):
    assert square.lookup(Side.Student, "a'") == square.student(1)
    assert square.lookup(Side.Course, "a'") is None
    assert str(square.course(1)) == "b'"


def test_parse_matching_text(square, named):
    m = parse_matching("a b'  # second choice\n\na' b\n", square)
    assert m == named(square, ("a", "b'"), ("a'", "b"))
    assert format_matching(square, m) == "a b'\na' b\n"
    assert parse_matching(format_matching(square, m), square) == m


def test_parse_matching_json(square, named):
    m = named(square, ("a", "b'"), ("a'", "b"))
    report = RunReport(
        command=["solve", "--algo=maxpop", "square.txt"],
        instance=square.digest(),
        result=matching_payload(square, m, max_size_popular(square)),
    )
    assert parse_matching(report.to_json(), square) == m

    bare = json.dumps({"matching": [["a'", "b"], ["a", "b'"]]})
    assert parse_matching(bare, square) == m


@pytest.mark.parametrize(
    "document",
    [
        {"result": {"size": 0}},
        {"result": {"matching": "a b"}},
        {"matching": [1]},
        {"matching": [["a", "b", "c"]]},
        [["a", "b"]],
    ],
)
def test_parse_matching_json_errors(square, document):
    with pytest.raises(ParseError):
        parse_matching(json.dumps(document), square)


def test_parse_matching_errors(square):
    with pytest.raises(ParseError):
        parse_matching("a\n", square)
    with pytest.raises(ParseError):
        parse_matching("a c\n", square)
    with pytest.raises(ParseError):
        parse_matching("b a\n", square)
    with pytest.raises(ParseError):
        parse_matching("{not json", square)
    with pytest.raises(InvalidMatching):
        parse_matching("a b\na b\n", square)


def test_check_matching(square, named):
    check_matching(square, Matching.empty())
    check_matching(square, named(square, ("a", "b'"), ("a'", "b")))
    with pytest.raises(InvalidMatching):
        check_matching(square, named(square, ("a", "b"), ("a", "b'")))
    with pytest.raises(InvalidMatching):
        check_matching(square, named(square, ("a", "b"), ("a'", "b")))
    with pytest.raises(InvalidMatching):
        check_matching(square, named(square, ("a'", "b'")))
    with pytest.raises(InvalidMatching):
        check_matching(square, Matching.from_pairs([(5, 0)]))


def test_matching_partners(clinic, named):
    n = named(clinic, ("p", "h"), ("q", "h'"), ("r", "h"))
    h = clinic.lookup(Side.Course, "h")
    assert n.partners(h) == frozenset({0, 2})
    assert [v.name for v in n.adjacency(clinic)[h]] == ["p", "r"]
    degrees = matched_degrees(clinic, n)
    assert degrees[h] == 2
    assert degrees[clinic.lookup(Side.Student, "s")] == 0


def test_pairwise_stability(square, rural, named):
    stable, blocking = is_pairwise_stable(square, named(square, ("a", "b")))
    assert stable and blocking == []

    stable, blocking = is_pairwise_stable(
        square, named(square, ("a", "b'"), ("a'", "b"))
    )
    assert not stable
    assert [str(pair) for pair in blocking] == ["(a, b)"]

    stable, blocking = is_pairwise_stable(rural, named(rural, ("r", "h'"), ("r'", "h")))
    assert not stable
    assert [str(pair) for pair in blocking] == ["(r, h)"]

    with pytest.raises(InvalidMatching):
        is_pairwise_stable(square, named(square, ("a'", "b'")))


def test_max_matching_size(square, rural, clinic):
    assert max_matching_size(square) == 2
    assert max_matching_size(rural) == 2
    assert max_matching_size(clinic) == 4
    assert max_matching_size(Instance.empty()) == 0


def test_max_matching_size_complete():
    # Every pair can be used once, so capacities alone do not decide.
    inst = Instance(
        students=("x", "y"),
        courses=("z",),
        student_caps=(3, 3),
        course_caps=(5,),
        student_prefs=((0,), (0,)),
        course_prefs=((0, 1),),
    )
    assert max_matching_size(inst) == 2


def test_random_instance_deterministic():
    first = random_instance(6, 5, 3, 0.5, 42)
    assert first == random_instance(6, 5, 3, 0.5, 42)
    assert format_instance(first) == format_instance(random_instance(6, 5, 3, 0.5, 42))
    assert validate(first) == []
    assert first.students == ("s1", "s2", "s3", "s4", "s5", "s6")
    assert all(1 <= cap <= 3 for cap in first.student_caps + first.course_caps)


def test_random_instance_density():
    assert len(random_instance(4, 3, 1, 1.0, 0).edges) == 12
    assert len(random_instance(4, 3, 1, 0.0, 0).edges) == 0
    assert random_instance(0, 0, 1, 0.5, 0) == Instance.empty()


@pytest.mark.parametrize(
    "args",
    [(-1, 1, 1, 0.5), (1, 1, 0, 0.5), (1, 1, 1, 1.5), (1, 1, 1, -0.1)],
)
def test_random_instance_bad_arguments(args):
    with pytest.raises(ValueError):
        random_instance(*args, seed=0)
