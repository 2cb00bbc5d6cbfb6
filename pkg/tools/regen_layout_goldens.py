"""Regenerate tests/goldens/compiler_layouts.json from the reference compiler.

Requires node and ``npm install`` in tools/. The goldens are checked in; the
test suite only reads them.
"""

import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
SOURCES = sorted((ROOT / "src" / "statemigrate" / "contracts").glob("*.sol")) + sorted(
    (ROOT / "tests" / "goldens" / "layout_cases").glob("*.sol")
)
OUT = ROOT / "tests" / "goldens" / "compiler_layouts.json"


def main() -> int:
    proc = subprocess.run(
        ["node", str(ROOT / "tools" / "solc_layout.js"), *map(str, SOURCES)],
        capture_output=True,
        text=True,
        cwd=ROOT / "tools",
    )
    if proc.returncode:
        sys.stderr.write(proc.stderr)
        return proc.returncode
    layouts = json.loads(proc.stdout)
    OUT.write_text(json.dumps(layouts, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(layouts)} layouts to {OUT.relative_to(ROOT)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
