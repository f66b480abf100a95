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
from typing import Callable, Tuple

import pytest

from popmatch.common import Side
from popmatch.instance import Instance, Matching, parse_instance

SQUARE_TEXT = """\
# The stable matching has size 1, the maximum matching size 2.
students: a a'
courses: b b'
pref: a b b'
pref: a' b
pref: b a a'
pref: b' a
"""

RURAL_TEXT = """\
students: r r'
courses: h h'
cap: h' 2
pref: r h h'
pref: r' h h'
pref: h r r'
pref: h' r r'
"""

CLINIC_TEXT = """\
students: p q r s
courses: h h' h''
cap: h 2
pref: p h h''
pref: q h h'
pref: r h
pref: s h
pref: h p q r s
pref: h' q
pref: h'' p
"""

# One student ranking six courses, for comparing partner sets.
DELTA_TEXT = """\
students: u
courses: v1 v2 v3 v4 v5 v6
cap: u 3
pref: u v1 v2 v3 v4 v5 v6
pref: v1 u
pref: v2 u
pref: v3 u
pref: v4 u
pref: v5 u
pref: v6 u
"""


def make_matching(inst: Instance, *pairs: Tuple[str, str]) -> Matching:
    indices = []
    for student, course in pairs:
        a = inst.lookup(Side.Student, student)
        b = inst.lookup(Side.Course, course)
        assert a is not None and b is not None
        indices.append((a.index, b.index))
    return Matching.from_pairs(indices)


@pytest.fixture
def named() -> Callable[..., Matching]:
    return make_matching


@pytest.fixture
def square() -> Instance:
    return parse_instance(SQUARE_TEXT)


@pytest.fixture
def rural() -> Instance:
    return parse_instance(RURAL_TEXT)


@pytest.fixture
def clinic() -> Instance:
    return parse_instance(CLINIC_TEXT)


@pytest.fixture
def delta_instance() -> Instance:
    return parse_instance(DELTA_TEXT)


@pytest.fixture
def instance_file(tmp_path) -> Callable[..., str]:
    def write(text: str, name: str = "instance.txt") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf8")
        return str(path)

    return write


@pytest.fixture
def example_path(instance_file) -> Callable[[str], str]:
    texts = {
        "square": SQUARE_TEXT,
        "rural": RURAL_TEXT,
        "clinic": CLINIC_TEXT,
    }

    def write(name: str) -> str:
        return instance_file(texts[name], f"{name}.txt")

    return write
