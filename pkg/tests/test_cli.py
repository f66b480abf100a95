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

import pytest
from click.testing import CliRunner

from popmatch.__main__ import cli
from popmatch.common import (
    EXIT_OK,
    EXIT_INVALID_INPUT,
    EXIT_NOT_POPULAR,
    EXIT_INCONCLUSIVE,
    EXIT_BUDGET_EXCEEDED,
)
from popmatch.instance import parse_instance, parse_matching, validate


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert result.output.startswith("popmatch v")


def test_solve_stable(runner, example_path):
    result = runner.invoke(cli, ["solve", "-a", "stable", "-i", example_path("square")])
    assert result.exit_code == EXIT_OK, result.output
    assert result.output == "a b\n"


def test_solve_maxpop_json(runner, example_path):
    result = runner.invoke(
        cli, ["solve", "-i", example_path("square"), "--format", "json"]
    )
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads(result.output)
    assert report["exit_status"] == 0
    assert report["instance"] == {"students": 2, "courses": 2, "edges": 3}
    assert report["result"]["size"] == 2
    assert report["result"]["algorithm"] == "maxpop"
    assert report["result"]["matching"] == [["a", "b'"], ["a'", "b"]]
    assert report["result"]["levels"] == [["a", 0, "b'"], ["a'", 1, "b"]]
    assert report["result"]["dual"]["objective"] == 0
    assert report["result"]["dual"]["feasible"] is True
    assert report["result"]["dual"]["violated"] == []


def test_solve_json_is_stable(runner, example_path):
    path = example_path("clinic")
    first = runner.invoke(cli, ["solve", "-i", path, "-f", "json"])
    second = runner.invoke(cli, ["solve", "-i", path, "-f", "json"])
    assert first.output == second.output


def test_solve_reads_stdin(runner):
    text = "students: x\ncourses: y\npref: x y\npref: y x\n"
    result = runner.invoke(cli, ["solve", "-a", "stable", "-i", "-"], input=text)
    assert result.exit_code == EXIT_OK
    assert result.output == "x y\n"


def test_solve_invalid_input(runner, tmp_path, instance_file):
    result = runner.invoke(cli, ["solve", "-i", str(tmp_path / "missing.txt")])
    assert result.exit_code == EXIT_INVALID_INPUT

    result = runner.invoke(cli, ["solve", "-i", instance_file("students: a\nbogus\n")])
    assert result.exit_code == EXIT_INVALID_INPUT
    assert "2:1" in result.output

    path = instance_file("students: a\ncourses: b\npref: a b\n")
    result = runner.invoke(cli, ["solve", "-i", path])
    assert result.exit_code == EXIT_INVALID_INPUT
    assert "non-mutual" in result.output


def test_verify_popular(runner, example_path, instance_file):
    matching = instance_file("p h\nq h'\nr h\n", "matching.txt")
    clinic = example_path("clinic")
    result = runner.invoke(cli, ["verify", "-i", clinic, "-m", matching])
    assert result.exit_code == EXIT_OK, result.output
    assert "Popular" in result.output


def test_verify_not_popular(runner, example_path, instance_file):
    matching = instance_file("a b'\n", "matching.txt")
    result = runner.invoke(
        cli, ["verify", "-i", example_path("square"), "-m", matching, "-f", "json"]
    )
    assert result.exit_code == EXIT_NOT_POPULAR
    report = json.loads(result.output)
    assert report["exit_status"] == EXIT_NOT_POPULAR
    assert report["result"]["verdict"] == "not_popular"
    assert report["result"]["delta"] == -2
    assert report["result"]["witness"] == [["a", "b'"], ["a'", "b"]]


@pytest.mark.parametrize("fixture", ["square", "rural", "clinic"])
def test_verify_own_json_output(runner, example_path, instance_file, fixture):
    path = example_path(fixture)
    solved = runner.invoke(cli, ["solve", "-i", path, "-f", "json"])
    assert solved.exit_code == EXIT_OK
    matching = instance_file(solved.output, "solved.json")
    result = runner.invoke(cli, ["verify", "-i", path, "-m", matching, "-f", "json"])
    assert result.exit_code == EXIT_OK, result.output
    assert json.loads(result.output)["result"]["verdict"] == "popular"


def test_verify_json_without_matching(runner, example_path, instance_file):
    matching = instance_file('{"result": {"size": 0}}', "empty.json")
    square = example_path("square")
    result = runner.invoke(cli, ["verify", "-i", square, "-m", matching])
    assert result.exit_code == EXIT_INVALID_INPUT


def test_verify_invalid_matching(runner, example_path, instance_file):
    square = example_path("square")
    over_capacity = instance_file("a b\na b'\n", "over.txt")
    result = runner.invoke(cli, ["verify", "-i", square, "-m", over_capacity])
    assert result.exit_code == EXIT_INVALID_INPUT

    unknown = instance_file("a z\n", "unknown.txt")
    result = runner.invoke(cli, ["verify", "-i", square, "-m", unknown])
    assert result.exit_code == EXIT_INVALID_INPUT


def test_verify_inconclusive(runner, example_path, instance_file):
    rural = example_path("rural")
    matching = instance_file("r h'\nr' h\n", "matching.txt")
    result = runner.invoke(cli, ["verify", "-i", rural, "-m", matching])
    assert result.exit_code == EXIT_INCONCLUSIVE
    assert "Inconclusive" in result.output

    result = runner.invoke(
        cli,
        ["verify", "-i", rural, "-m", matching, "--oracle-fallback", "-f", "json"],
    )
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads(result.output)
    assert report["result"]["verdict"] == "popular"
    assert report["result"]["source"] == "oracle"


def test_verify_fallback_over_budget(runner, example_path, instance_file):
    rural = example_path("rural")
    matching = instance_file("r h'\nr' h\n", "matching.txt")
    result = runner.invoke(
        cli,
        [
            "verify",
            "-i",
            rural,
            "-m",
            matching,
            "--oracle-fallback",
            "--max-edges",
            "2",
        ],
    )
    assert result.exit_code == EXIT_INCONCLUSIVE


def test_oracle(runner, example_path):
    result = runner.invoke(cli, ["oracle", "-i", example_path("rural"), "-f", "json"])
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads(result.output)["result"]
    assert report["max_popular"] == 2
    assert sorted(report["all_max_popular"]) == [
        [["r", "h"], ["r'", "h'"]],
        [["r", "h'"], ["r'", "h"]],
    ]
    assert report["solvers"]["stable"] == {"size": 2, "popular": True}
    assert report["solvers"]["maxpop"] == {"size": 2, "popular": True}


def test_oracle_text(runner, example_path):
    result = runner.invoke(cli, ["oracle", "-i", example_path("square")])
    assert result.exit_code == EXIT_OK, result.output
    assert "Enumerated 5 matchings" in result.output


def test_oracle_budget(runner, example_path):
    result = runner.invoke(
        cli, ["oracle", "-i", example_path("square"), "--max-edges", "2"]
    )
    assert result.exit_code == EXIT_BUDGET_EXCEEDED


def test_oracle_edge_limit(runner, example_path):
    result = runner.invoke(
        cli, ["oracle", "-i", example_path("square"), "--max-edges", "63"]
    )
    assert result.exit_code != EXIT_OK
    assert "--max-edges" in result.output


def test_gen_deterministic(runner, tmp_path):
    args = ["gen", "--students", "6", "--courses", "4", "--max-cap", "2"]
    args += ["--seed", "42"]
    first = tmp_path / "first.txt"
    second = tmp_path / "second.txt"
    assert runner.invoke(cli, args + ["-o", str(first)]).exit_code == EXIT_OK
    assert runner.invoke(cli, args + ["-o", str(second)]).exit_code == EXIT_OK
    assert first.read_bytes() == second.read_bytes()

    inst = parse_instance(first.read_text(encoding="utf8"))
    assert validate(inst) == []
    assert len(inst.students) == 6

    stdout = runner.invoke(cli, args)
    assert stdout.output == first.read_text(encoding="utf8")


@pytest.mark.parametrize("seed", range(5))
def test_solve_then_verify(runner, tmp_path, seed):
    instance = tmp_path / "instance.txt"
    solved = tmp_path / "solved.json"
    runner.invoke(
        cli,
        [
            "gen",
            "--students=12",
            "--courses=8",
            "--max-cap=3",
            "--density=0.4",
            f"--seed={seed}",
            f"--out={instance}",
        ],
    )
    result = runner.invoke(cli, ["solve", "-i", str(instance), "-f", "json"])
    assert result.exit_code == EXIT_OK
    solved.write_text(result.output, encoding="utf8")

    inst = parse_instance(instance.read_text(encoding="utf8"))
    m = parse_matching(result.output, inst)
    assert len(m) == json.loads(result.output)["result"]["size"]

    result = runner.invoke(cli, ["verify", "-i", str(instance), "-m", str(solved)])
    assert result.exit_code == EXIT_OK, result.output


def test_bench_json(runner):
    result = runner.invoke(cli, ["bench", "--sizes", "50,100", "-f", "json"])
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads(result.output)["result"]
    assert [run["target_edges"] for run in report["runs"]] == [50, 100]
    assert all(run["edges"] >= run["target_edges"] for run in report["runs"])
    assert len(report["growth_per_doubling"]) == 1


def test_bench_bad_sizes(runner):
    result = runner.invoke(cli, ["bench", "--sizes", "10,-5"])
    assert result.exit_code != EXIT_OK
