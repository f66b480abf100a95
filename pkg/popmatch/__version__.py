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
import re
import sys
import importlib.metadata

PYPROJECT_VERSION_RX = re.compile(r"^version\s*=\s*\"([^\"]+)\"", re.MULTILINE)


def _from_pyproject() -> str:
    # Source checkouts are not installed, so fall back to the manifest.
    repo_directory = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    pyproject_path = os.path.join(repo_directory, "pyproject.toml")
    try:
        with open(pyproject_path, encoding="utf8") as f:
            match = PYPROJECT_VERSION_RX.search(f.read())
    except FileNotFoundError:
        match = None
    if match is None:
        print(
            "Warning: Failed to extract the version of popmatch.",
            file=sys.stderr,
        )
        return "UNKNOWN"
    return match[1]


def _get_version() -> str:
    try:
        return importlib.metadata.version("popmatch")
    except importlib.metadata.PackageNotFoundError:
        return _from_pyproject()


__version__ = _get_version()


if __name__ == "__main__":
    print(__version__, end="")
