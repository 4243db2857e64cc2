"""Independent reference implementations used as test oracles.

Nothing here imports the graph traversal code under test.
"""

from __future__ import annotations

import re


def closure(n_ids, edges) -> dict:
    """Reflexive transitive closure by Floyd-Warshall over a boolean matrix."""
    ids = sorted(n_ids)
    pos = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    reach = [[i == j for j in range(n)] for i in range(n)]
    for a, b in edges:
        reach[pos[a]][pos[b]] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return {ids[i]: {ids[j] for j in range(n) if reach[i][j]} for i in range(n)}


def brute_verdict(root, nodes, edges) -> str:
    """nodes: {id: (language, is_sink, is_sanitizer)}; returns a verdict name."""
    reach = closure(nodes, edges)[root]
    if not any(nodes[i][1] for i in reach):
        return "NoFlow"
    langs = {nodes[i][0] for i in reach if nodes[i][2]}
    if not langs:
        return "Vulnerable"
    if langs == {"Native"}:
        return "SanitizedNative"
    if langs == {"HighLevel"}:
        return "SanitizedHighLevel"
    return "SanitizedBoth"


_NODE = re.compile(r'^\s*"(\d+)"\s*\[label="((?:[^"\\]|\\.)*)",color=(\w+)\]\s*$')
_EDGE = re.compile(r'^\s*"(\d+)"\s*->\s*"(\d+)"\s*\[label="((?:[^"\\]|\\.)*)"\]\s*$')


def read_dot(text: str) -> tuple:
    """Minimal reader for the dot subset the tool writes: (nodes, edges)."""
    nodes, edges = {}, []
    lines = text.strip().splitlines()
    assert lines[0].startswith("digraph ") and lines[-1] == "}"
    for line in lines[1:-1]:
        m = _NODE.match(line)
        if m:
            nodes[int(m.group(1))] = (m.group(2), m.group(3))
            continue
        m = _EDGE.match(line)
        assert m, f"unrecognized dot line: {line!r}"
        edges.append((int(m.group(1)), int(m.group(2)), m.group(3)))
    return nodes, edges
