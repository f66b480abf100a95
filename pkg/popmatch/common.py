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
import os
from enum import Enum
from dataclasses import dataclass, field
from typing import List


# -- Assorted Helper Functions
def env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer, got '{value}'.")


# -- API Variables
POPMATCH_DEFAULT_MAX_EDGES = 16
# Matchings are int64 edge bitmasks.
POPMATCH_MAX_ENUMERABLE_EDGES = 62
POPMATCH_DEFAULT_MAX_MATCHINGS = 2_000_000

POPMATCH_RESOLVED_MAX_EDGES = min(
    env_int("POPMATCH_MAX_EDGES", POPMATCH_DEFAULT_MAX_EDGES),
    POPMATCH_MAX_ENUMERABLE_EDGES,
)
POPMATCH_RESOLVED_MAX_MATCHINGS = env_int(
    "POPMATCH_MAX_MATCHINGS", POPMATCH_DEFAULT_MAX_MATCHINGS
)
POPMATCH_RESOLVED_JOBS = env_int("POPMATCH_JOBS", 1)


# -- Exit codes (a stable contract for shell pipelines)
EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_NOT_POPULAR = 2
EXIT_INCONCLUSIVE = 3
EXIT_BUDGET_EXCEEDED = 4


# -- Vertices
class Side(str, Enum):
    Student = "student"
    Course = "course"

    @property
    def opposite(self) -> "Side":
        return Side.Course if self is Side.Student else Side.Student


@dataclass(frozen=True)
class VertexId(object):
    side: Side
    index: int
    name: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.name or f"{self.side.value}#{self.index}"

    def __lt__(self, rhs: "VertexId") -> bool:
        return (self.side.value, self.index) < (rhs.side.value, rhs.index)


# -- Errors
class PopmatchError(Exception):
    pass


class ParseError(PopmatchError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")


class InvalidInstance(PopmatchError):
    def __init__(self, violations: List[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class InvalidMatching(PopmatchError):
    pass


class BudgetExceeded(PopmatchError):
    pass


class CertificateError(PopmatchError):
    pass
