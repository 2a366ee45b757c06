#!/usr/bin/env python3
# Copyright 2026 The llmp Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Prepend the Apache-2.0 header to project sources that lack it."""
import pathlib
import sys

LINES = [
    "Copyright 2026 The llmp Authors. All Rights Reserved.",
    "",
    'Licensed under the Apache License, Version 2.0 (the "License");',
    "you may not use this file except in compliance with the License.",
    "You may obtain a copy of the License at",
    "",
    "    http://www.apache.org/licenses/LICENSE-2.0",
    "",
    "Unless required by applicable law or agreed to in writing, software",
    'distributed under the License is distributed on an "AS IS" BASIS,',
    "WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.",
    "See the License for the specific language governing permissions and",
    "limitations under the License.",
]

DIRS = ["include", "src", "tests", "tools"]
SLASH = {".cpp", ".hpp", ".h", ".cc"}
HASH = {".py", ".txt", ".cmake"}


def header(prefix):
    return "\n".join((prefix + " " + l).rstrip() for l in LINES) + "\n\n"


def apply(path):
    ext = path.suffix
    if ext in SLASH:
        text = header("//")
    elif ext in HASH and (ext != ".txt" or path.name == "CMakeLists.txt"):
        text = header("#")
    else:
        return False
    body = path.read_text()
    if LINES[0] in "\n".join(body.splitlines()[:3]):
        return False
    if body.startswith("#!"):
        shebang, _, rest = body.partition("\n")
        path.write_text(shebang + "\n" + text + rest)
    else:
        path.write_text(text + body)
    return True


def main():
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    paths = [root / "CMakeLists.txt"]
    for d in DIRS:
        paths += sorted(p for p in (root / d).rglob("*") if p.is_file())
    changed = sum(apply(p) for p in paths)
    print(f"{changed} files updated")


if __name__ == "__main__":
    main()
