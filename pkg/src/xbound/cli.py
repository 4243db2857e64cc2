"""Command-line entry point: ``xbound scan|app|stats``."""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .app import DEFAULT_DEPTH, analyze_app
from .package import (
    DEFAULT_BUDGET_SECONDS, HEADER_CLASSES, PackageError, analyze_packages, discover_packages, inventory,
    package_name,
)
from .rules import RulesError, builtin_rules, default_rules, load_rules

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


def _rules(path):
    if path is None:
        return default_rules()
    return load_rules(path)


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def _write(text: str, dest):
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _error(msg: str) -> int:
    print(f"xbound: error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def build_scan_report(roots, rules, budget: float, rules_label: str, timing: bool = False,
                      keep_graphs: bool = False) -> tuple:
    """Run package analysis over ``roots``; returns ``(report dict, package reports)``."""
    targets = []
    for root in roots:
        root = Path(root)
        for pkg in discover_packages(root):
            targets.append((pkg, root))
    reports = []
    # group by root so paths in the report stay relative to the root they came from
    for root in dict.fromkeys(r for _, r in targets):
        dirs = [p for p, r in targets if r == root]
        reports.extend(analyze_packages(dirs, rules, budget, base=root, keep_graphs=keep_graphs))
    report = {
        "version": __version__,
        "config": {
            "command": "scan",
            "roots": [str(r) for r in roots],
            "rules": rules_label,
            "budget_seconds": budget,
        },
        "packages": [r.to_dict(timing) for r in reports],
        "app_findings": [],
    }
    return report, reports


def cmd_scan(args) -> int:
    try:
        rules, _ = _rules(args.rules)
    except RulesError as exc:
        return _error(str(exc))
    for root in args.roots:
        if not Path(root).is_dir():
            return _error(f"{root}: not a readable directory")
    try:
        report, reports = build_scan_report(args.roots, rules, args.budget_seconds,
                                            args.rules or "builtin", args.timing, bool(args.emit_dot))
    except (OSError, PackageError) as exc:
        return _error(str(exc))
    _write(dump_report(report), args.json)
    if args.emit_dot:
        out = Path(args.emit_dot)
        out.mkdir(parents=True, exist_ok=True)
        for r in reports:
            for name, text in sorted(r.graphs.items()):
                (out / name).write_text(text, encoding="utf-8")
    vulnerable = sum(len(r.vulnerable) for r in reports)
    if args.json not in (None, "-"):
        timed = sum(1 for r in reports if r.timed_out)
        print(f"{len(reports)} package(s), {vulnerable} vulnerable finding(s)"
              + (f", {timed} timed out" if timed else ""), file=sys.stderr)
    return EXIT_FINDINGS if vulnerable else EXIT_CLEAN


def cmd_app(args) -> int:
    if args.rules is None:
        app_rules = builtin_rules()
        label = "builtin"
    else:
        try:
            _, app_rules = load_rules(args.rules)
        except RulesError as exc:
            return _error(str(exc))
        label = args.rules
        if not app_rules:
            return _error(f"{args.rules}: no approle directives")
    if not Path(args.root).exists():
        return _error(f"{args.root}: no such file or directory")
    try:
        result = analyze_app(args.root, app_rules, args.depth)
    except OSError as exc:
        return _error(str(exc))
    report = {
        "version": __version__,
        "config": {"command": "app", "roots": [str(args.root)], "rules": label, "depth": args.depth},
        "packages": [],
        "app_findings": result.to_list(),
    }
    _write(dump_report(report), args.json)
    return EXIT_FINDINGS if result.findings else EXIT_CLEAN


def stats_rows(roots) -> list:
    rows = []
    for root in roots:
        root = Path(root)
        for pkg in discover_packages(root):
            inv = inventory(pkg)
            rel = pkg.relative_to(root).as_posix() if pkg != root else "."
            rows.append((package_name(pkg), rel, inv))
    return rows


def stats_summary(rows) -> dict:
    hist = Counter()
    for _, _, inv in rows:
        if inv.has_native_code:
            for h in inv.headers:
                hist[h] += 1
    return {
        "packages": len(rows),
        "with_native_code": sum(1 for r in rows if r[2].has_native_code),
        "without_native_code": sum(1 for r in rows if not r[2].has_native_code),
        "headers": {h: hist.get(h, 0) for h in (*HEADER_CLASSES, "none")},
        "direct_export": sum(1 for r in rows if r[2].direct_export),
        "bindings": sum(r[2].binding_count for r in rows),
    }


def cmd_stats(args) -> int:
    for root in args.roots:
        if not Path(root).is_dir():
            return _error(f"{root}: not a readable directory")
    rows = stats_rows(args.roots)
    summary = stats_summary(rows)
    if args.json:
        data = {
            "packages": [{"package": n, "path": p, **inv.to_dict()} for n, p, inv in rows],
            "summary": summary,
        }
        _write(dump_report(data), args.json)
        return EXIT_CLEAN
    print(f"{'package':<28} {'.c':>4} {'.h':>4} {'.cc':>4} {'.js':>4} {'.ts':>4} {'bind':>5} direct  headers")
    for name, _, inv in rows:
        c = inv.file_counts
        heads = ",".join(inv.headers) if inv.has_native_code else "no C/C++ code"
        print(f"{name:<28} {c['.c']:>4} {c['.h/.hpp']:>4} {c['.cpp/.cc']:>4} {c['.js']:>4} {c['.ts']:>4} "
              f"{inv.binding_count:>5} {'yes' if inv.direct_export else 'no':<7} {heads}")
    print()
    print(f"packages: {summary['packages']}  with C/C++ code: {summary['with_native_code']}  "
          f"direct export: {summary['direct_export']}")
    print("headers: " + ", ".join(f"{k}={v}" for k, v in summary["headers"].items()))
    return EXIT_CLEAN


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xbound", description=__doc__)
    p.add_argument("--version", action="version", version=f"xbound {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scan", help="analyze native-extension packages")
    s.add_argument("roots", nargs="+")
    s.add_argument("--rules", help="rules file (default: built-in lists)")
    s.add_argument("--budget-seconds", type=float, default=DEFAULT_BUDGET_SECONDS)
    s.add_argument("--json", help="write the JSON report here (default: stdout)")
    s.add_argument("--emit-dot", metavar="DIR", help="write one dot graph per finding into DIR")
    s.add_argument("--timing", action="store_true", help="record elapsed_ms (makes output run-dependent)")
    s.set_defaults(func=cmd_scan)

    a = sub.add_parser("app", help="find request data reaching vulnerable extension APIs")
    a.add_argument("root")
    a.add_argument("--rules", help="rules file whose approle lines replace the built-in rules")
    a.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    a.add_argument("--json", help="write the JSON report here (default: stdout)")
    a.set_defaults(func=cmd_app)

    t = sub.add_parser("stats", help="inventory packages without analyzing them")
    t.add_argument("roots", nargs="+")
    t.add_argument("--json", help="write the inventory as JSON here")
    t.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "budget_seconds", 1) is not None and getattr(args, "budget_seconds", 1) <= 0:
        return _error("--budget-seconds must be positive")
    if getattr(args, "depth", 0) < 0:
        return _error("--depth must be >= 0")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
