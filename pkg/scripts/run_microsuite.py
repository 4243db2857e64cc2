"""Score native flow detection on the annotated micro-suite.

Each fixture names its entry function in a ``// entry: NAME`` header and marks
sink lines with ``// sink: tainted`` (argument data reaches it) or
``// sink: clean`` (it must not be reported).  A reported sink is any line
holding a Sink node reachable from the entry function's root.

Usage: python scripts/run_microsuite.py [DIR]
"""

from __future__ import annotations

import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from xbound.graph import Role, reachable
from xbound.native.dfg import build_native_dfg, tag_native_roles
from xbound.native.parser import parse_native_path
from xbound.rules import default_rules

DEFAULT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "microsuite"
_ENTRY = re.compile(r"//\s*entry:\s*(\S+)")
_SINK = re.compile(r"//\s*sink:\s*(tainted|clean)")


@dataclass
class Score:
    name: str
    tainted: set
    clean: set
    reported: set

    @property
    def true_positives(self) -> set:
        return self.reported & self.tainted

    @property
    def false_positives(self) -> set:
        return self.reported - self.tainted


def ground_truth(path: Path) -> tuple:
    entry, tainted, clean = None, set(), set()
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        m = _ENTRY.search(line)
        if m and entry is None:
            entry = m.group(1)
        m = _SINK.search(line)
        if m:
            (tainted if m.group(1) == "tainted" else clean).add(i)
    return entry, tainted, clean


def score_file(path: Path, rules) -> Score:
    entry, tainted, clean = ground_truth(path)
    nf = parse_native_path(path)
    reported: set = set()
    for fn in nf.functions:
        if fn.short_name != entry:
            continue
        g = tag_native_roles(build_native_dfg(fn), rules)
        reported |= {g.node(i).location.line for i in reachable(g, g.root, Role.Sink)}
    return Score(path.name, tainted, clean, reported)


def run(directory: Path = DEFAULT_DIR) -> list:
    rules, _ = default_rules()
    return [score_file(p, rules) for p in sorted(Path(directory).glob("*.cc"))]


def totals(scores) -> tuple:
    tp = sum(len(s.true_positives) for s in scores)
    fp = sum(len(s.false_positives) for s in scores)
    expected = sum(len(s.tainted) for s in scores)
    recall = tp / expected if expected else 1.0
    precision = tp / (tp + fp) if tp + fp else 1.0
    return recall, precision


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    start = time.perf_counter()
    scores = run(Path(argv[0]) if argv else DEFAULT_DIR)
    for s in scores:
        missed = sorted(s.tainted - s.reported)
        extra = sorted(s.false_positives)
        print(f"{s.name:<26} tp={len(s.true_positives)} missed={missed} false={extra}")
    recall, precision = totals(scores)
    print(f"recall {recall:.1%}  precision {precision:.1%}  ({time.perf_counter() - start:.2f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
