"""Write the merged cross-language graph of every boundary pair as dot files.

Usage: python scripts/emit_graphs.py PACKAGE_DIR OUT_DIR
Render with: dot -Tsvg OUT_DIR/<file>.dot -o graph.svg
"""

from __future__ import annotations

import sys
from pathlib import Path

from xbound.package import analyze_package
from xbound.rules import default_rules


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    pkg, out = Path(argv[0]), Path(argv[1])
    out.mkdir(parents=True, exist_ok=True)
    report = analyze_package(pkg, default_rules()[0], keep_graphs=True)
    for name, text in sorted(report.graphs.items()):
        (out / name).write_text(text, encoding="utf-8")
        print(out / name)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
