#
# Copyright 2026 The lego-forge Authors
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
#
"""Labels each query in nested_queries.sql with a nesting flag.

A query counts as nested when some SELECT node has an ancestor that is a
SELECT or a CTE. Parsing uses sqlglot with the SQLite dialect. Output is one
JSON object per line: {"sql": ..., "nested": ...}.

Usage: python3 label_nested.py nested_queries.sql > nested_fixture.jsonl
"""

import json
import sys

import sqlglot
from sqlglot import exp


def is_nested(sql: str) -> bool:
    tree = sqlglot.parse_one(sql, read="sqlite")
    for node in tree.find_all(exp.Select):
        parent = node.parent
        while parent is not None:
            if isinstance(parent, (exp.Select, exp.CTE)):
                return True
            parent = parent.parent
    return False


def main() -> None:
    with open(sys.argv[1], encoding="utf-8") as fh:
        for line in fh:
            sql = line.rstrip("\n")
            if not sql:
                continue
            print(json.dumps({"sql": sql, "nested": is_nested(sql)}))


if __name__ == "__main__":
    main()
