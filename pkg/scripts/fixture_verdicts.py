"""Print the verdict table for every fixture package and variant.

Usage: python scripts/fixture_verdicts.py [ROOT ...]
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

from xbound.package import analyze_package, discover_packages
from xbound.rules import default_rules

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
DEFAULT_ROOTS = [FIXTURES / "packages", FIXTURES / "variants"]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    roots = [Path(a) for a in argv] or DEFAULT_ROOTS
    rules, _ = default_rules()
    print(f"{'package':<20} {'scope':<6} {'export':<12} {'native':<28} {'verdict':<20} ms")
    for root in roots:
        for pkg in discover_packages(root):
            start = time.perf_counter()
            report = analyze_package(pkg, rules)
            ms = (time.perf_counter() - start) * 1000
            if not report.findings:
                print(f"{report.package:<20} {'-':<6} {'-':<12} {'-':<28} {'NoFlow':<20} {ms:.1f}")
            for f in report.findings:
                print(f"{report.package:<20} {f.scope:<6} {f.exported:<12} {f.native_function:<28} "
                      f"{f.verdict.value:<20} {ms:.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
