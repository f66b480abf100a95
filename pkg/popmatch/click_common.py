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
from functools import partial
from typing import Callable

import click

from .common import (
    POPMATCH_MAX_ENUMERABLE_EDGES,
    POPMATCH_RESOLVED_JOBS,
    POPMATCH_RESOLVED_MAX_EDGES,
    POPMATCH_RESOLVED_MAX_MATCHINGS,
)

opt = partial(click.option, show_default=True)


def opt_input(function: Callable) -> Callable:
    function = opt(
        "-i",
        "--input",
        "input_path",
        required=True,
        help="Instance file to read, or '-' for standard input.",
    )(function)
    return function


def opt_budget(function: Callable) -> Callable:
    function = opt(
        "--max-edges",
        default=POPMATCH_RESOLVED_MAX_EDGES,
        type=click.IntRange(0, POPMATCH_MAX_ENUMERABLE_EDGES),
        help=f"Refuse to enumerate instances with more edges than this (at most {POPMATCH_MAX_ENUMERABLE_EDGES}). Defaults to the value of the environment variable POPMATCH_MAX_EDGES or 16.",
    )(function)
    function = opt(
        "--max-matchings",
        default=POPMATCH_RESOLVED_MAX_MATCHINGS,
        type=click.IntRange(min=1),
        help="Abort the enumeration beyond this many matchings. Defaults to the value of the environment variable POPMATCH_MAX_MATCHINGS or 2000000.",
    )(function)
    function = opt(
        "-j",
        "--jobs",
        default=POPMATCH_RESOLVED_JOBS,
        type=click.IntRange(min=1),
        help="Number of threads comparing matchings simultaneously.",
    )(function)
    return function


def opt_format(function: Callable) -> Callable:
    function = opt(
        "-f",
        "--format",
        type=click.Choice(["text", "json"]),
        default="text",
        help="Output format. JSON output is stable for fixed inputs.",
    )(function)
    return function
