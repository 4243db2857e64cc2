"""Package-level detection of missing type and argument-count checks.

Pipeline per package: parse every native and script file, extract binding
registrations, pair each script call of a bound name with the native function
it reaches, merge the two graphs and judge the result.  Bound native functions
that no script code calls directly are judged on their own graph.
"""

from __future__ import annotations

import json
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .graph import (
    FunctionGraph, Location, NodeKind, Role, Verdict,
    emit_dot, judge, merge, node_caption, reachable, shortest_path,
)
from .native.bindings import BindingEntry, extract_bindings
from .native.dfg import build_native_dfg, tag_native_roles
from .native.parser import NativeFunction, parse_native
from .rules import RuleSet
from .script.dfg import build_script_dfg, tag_script_roles
from .script.parser import ScriptFunction, ScriptModule, parse_module
from .script.sites import NativeCallSite, find_native_call_sites, native_module_vars

NATIVE_EXTS = (".c", ".cc", ".cpp", ".cxx", ".h", ".hh", ".hpp")
SCRIPT_EXTS = (".js",)
SKIP_DIRS = frozenset({"node_modules", ".git", "build", "test", "tests", "__pycache__"})
DEFAULT_BUDGET_SECONDS = 60.0
HEADER_CLASSES = ("nan.h", "napi.h", "node_api.h", "node.h/v8.h")
_INCLUDE_RE = re.compile(r'^\s*#\s*include\s*[<"]([^>"]+)[>"]', re.M)


class PackageError(OSError):
    pass


@dataclass(frozen=True)
class BoundaryPair:
    script_function: ScriptFunction
    native_function: NativeFunction
    site: NativeCallSite
    binding: BindingEntry

    @property
    def exported(self) -> str:
        return self.site.exported


@dataclass(frozen=True)
class Finding:
    package: str
    misuse: str  # M3 | M4
    scope: str  # cross | intra
    verdict: Verdict
    native_function: str
    script_function: str = ""
    exported: str = ""
    sinks: tuple = ()  # Location of each reachable sink of this misuse
    witness_path: tuple = ()  # node ids, root to sink
    witness: tuple = ()  # captions of the witness nodes
    sanitizers: tuple = ()  # Location of each reachable sanitizer
    graph_name: str = ""
    call_site: Location | None = None  # script call crossing the boundary (cross scope only)

    def __post_init__(self):
        if self.verdict is Verdict.Vulnerable and self.sanitizers:
            raise ValueError("a vulnerable finding cannot have reachable sanitizers")

    @property
    def vulnerable(self) -> bool:
        return self.verdict is Verdict.Vulnerable

    def to_dict(self) -> dict:
        return {
            "misuse": self.misuse,
            "scope": self.scope,
            "verdict": self.verdict.value,
            "exported": self.exported,
            "script_function": self.script_function,
            "native_function": self.native_function,
            "call_site": self.call_site.to_dict() if self.call_site else None,
            "sink": self.sinks[0].to_dict() if self.sinks else None,
            "sinks": [s.to_dict() for s in self.sinks],
            "witness_path": list(self.witness_path),
            "witness": list(self.witness),
            "sanitizers": [s.to_dict() for s in self.sanitizers],
        }


@dataclass(frozen=True)
class PackageInventory:
    file_counts: dict  # ".c", ".h/.hpp", ".cpp/.cc", ".js", ".ts"
    headers: tuple  # sorted subset of HEADER_CLASSES, or ("none",)
    binding_count: int
    direct_export: bool

    @property
    def has_native_code(self) -> bool:
        return (self.file_counts[".c"] + self.file_counts[".h/.hpp"] + self.file_counts[".cpp/.cc"]) > 0

    def to_dict(self) -> dict:
        return {
            "file_counts": dict(self.file_counts),
            "headers": list(self.headers),
            "binding_count": self.binding_count,
            "direct_export": self.direct_export,
            "has_native_code": self.has_native_code,
        }


@dataclass
class PackageReport:
    package: str
    path: str
    inventory: PackageInventory
    findings: list = field(default_factory=list)
    bindings: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    timed_out: bool = False
    elapsed_ms: float | None = None
    graphs: dict = field(default_factory=dict)  # graph name -> dot text, when requested

    @property
    def is_native_package(self) -> bool:
        return self.inventory.has_native_code and self.inventory.binding_count > 0

    @property
    def vulnerable(self) -> list:
        return [f for f in self.findings if f.vulnerable]

    def to_dict(self, timing: bool = False) -> dict:
        return {
            "package": self.package,
            "path": self.path,
            "native": self.is_native_package,
            "inventory": self.inventory.to_dict(),
            "bindings": [b.to_dict() for b in self.bindings],
            "findings": [f.to_dict() for f in self.findings],
            "diagnostics": list(self.diagnostics),
            "timed_out": self.timed_out,
            "elapsed_ms": round(self.elapsed_ms, 3) if timing and self.elapsed_ms is not None else None,
        }


class _Budget:
    def __init__(self, seconds: float | None):
        self.start = time.monotonic()
        self.deadline = None if seconds is None else self.start + seconds
        self.expired = False

    def check(self) -> bool:
        """True while there is time left; latches once the budget is spent."""
        if not self.expired and self.deadline is not None and time.monotonic() > self.deadline:
            self.expired = True
        return not self.expired

    @property
    def elapsed_ms(self) -> float:
        return (time.monotonic() - self.start) * 1000.0


# file discovery

def package_files(pkg_dir: Path) -> list:
    """Source files of a package, skipping dependencies and nested packages."""
    out = []
    for dirpath, dirnames, filenames in os.walk(pkg_dir):
        here = Path(dirpath)
        keep = []
        for d in sorted(dirnames):
            if d in SKIP_DIRS or d.startswith("."):
                continue
            if (here / d / "package.json").is_file():
                continue
            keep.append(d)
        dirnames[:] = keep
        for f in sorted(filenames):
            if f.endswith(NATIVE_EXTS + SCRIPT_EXTS + (".ts",)):
                out.append(here / f)
    return sorted(out)


def discover_packages(root) -> list:
    """Package directories under ``root`` (those holding a package.json).

    A root without any package.json that still contains source files is
    treated as a single package.
    """
    root = Path(root)
    if not root.is_dir():
        raise PackageError(f"{root}: not a readable directory")
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d not in ("node_modules", ".git") and not d.startswith("."))
        if "package.json" in filenames:
            found.append(Path(dirpath))
    if not found and package_files(root):
        found.append(root)
    return sorted(found)


def package_name(pkg_dir: Path) -> str:
    meta = pkg_dir / "package.json"
    if meta.is_file():
        try:
            data = json.loads(meta.read_text(encoding="utf-8"))
            if isinstance(data, dict) and isinstance(data.get("name"), str) and data["name"]:
                return data["name"]
        except (OSError, ValueError):
            pass
    return pkg_dir.name


def classify_headers(texts) -> tuple:
    found = set()
    for text in texts:
        for inc in _INCLUDE_RE.findall(text):
            base = inc.rsplit("/", 1)[-1]
            if base == "nan.h":
                found.add("nan.h")
            elif base == "napi.h":
                found.add("napi.h")
            elif base in ("node_api.h", "js_native_api.h"):
                found.add("node_api.h")
            elif base in ("node.h", "v8.h"):
                found.add("node.h/v8.h")
    return tuple(h for h in HEADER_CLASSES if h in found) or ("none",)


def _count_files(files) -> dict:
    counts = {".c": 0, ".h/.hpp": 0, ".cpp/.cc": 0, ".js": 0, ".ts": 0}
    for f in files:
        ext = f.suffix.lower()
        if ext == ".c":
            counts[".c"] += 1
        elif ext in (".h", ".hh", ".hpp"):
            counts[".h/.hpp"] += 1
        elif ext in (".cc", ".cpp", ".cxx"):
            counts[".cpp/.cc"] += 1
        elif ext == ".js":
            counts[".js"] += 1
        elif ext == ".ts":
            counts[".ts"] += 1
    return counts


# graph-level analyses

def _locations(graph, ids) -> tuple:
    nm = graph.node_map
    return tuple(sorted({nm[i].location for i in ids}, key=lambda l: (l.path, l.line, l.col)))


def _sink_ids_by_misuse(graph, rules: RuleSet, ids) -> dict:
    out: dict = {}
    nm = graph.node_map
    for i in ids:
        n = nm[i]
        for m in rules.sink_misuses(n.callee) or ["M3"]:
            out.setdefault(m, []).append(i)
    return out


def _findings_for(graph, rules: RuleSet, package: str, scope: str, native_name: str,
                  script_name: str = "", exported: str = "", call_site: Location | None = None) -> list:
    verdict = judge(graph)
    if verdict is Verdict.NoFlow:
        return []
    sinks = reachable(graph, graph.root, Role.Sink)
    sanitizers = reachable(graph, graph.root, Role.Sanitizer)
    out = []
    nm = graph.node_map
    for misuse, ids in sorted(_sink_ids_by_misuse(graph, rules, sinks).items()):
        path = shortest_path(graph, graph.root, ids)
        out.append(Finding(
            package, misuse, scope, verdict, native_name, script_name, exported,
            _locations(graph, ids), tuple(path), tuple(node_caption(nm[i]) for i in path),
            _locations(graph, sanitizers), graph.name, call_site,
        ))
    return out


def analyze_intra(graphs, rules: RuleSet, package: str = "") -> list:
    """Judge each tagged native function graph on its own."""
    out = []
    for g in graphs:
        out.extend(_findings_for(g, rules, package, "intra", g.name))
    return out


def analyze_cross(pair: BoundaryPair, rules: RuleSet, package: str = "",
                  script_graph: FunctionGraph | None = None,
                  native_graph: FunctionGraph | None = None) -> tuple:
    """Merge the pair's graphs at the call node and judge from the script root.

    Returns ``(findings, merged graph)``; findings is empty when no sink is reachable.
    """
    sg = script_graph or tag_script_roles(build_script_dfg(pair.script_function), rules)
    ng = native_graph or tag_native_roles(build_native_dfg(pair.native_function), rules)
    call = call_node_for(sg, pair.site)
    merged = merge(sg, call, ng)
    return _findings_for(merged, rules, package, "cross", pair.native_function.name,
                         pair.script_function.name, pair.exported, pair.site.location), merged


def call_node_for(graph: FunctionGraph, site: NativeCallSite) -> int:
    """The Call node of ``graph`` standing for the call at ``site``."""
    cands = [n for n in graph.nodes if n.kind is NodeKind.Call and n.callee == site.callee
             and n.location.line == site.location.line]
    exact = [n for n in cands if n.location.col == site.location.col]
    chosen = exact or cands
    if not chosen:
        # the call sits in a statement we could not split; fall back to that statement
        chosen = [n for n in graph.nodes if n.location.line == site.location.line and n.id != graph.root]
    if not chosen:
        return graph.root
    return min(chosen, key=lambda n: n.id).id


def _native_index(functions) -> dict:
    idx: dict = {}
    for f in functions:
        idx.setdefault(f.name, []).append(f)
    for f in functions:
        if f.short_name != f.name:
            idx.setdefault(f.short_name, []).append(f)
    return idx


def resolve_symbol(symbol: str, index: dict) -> NativeFunction | None:
    cands = index.get(symbol) or index.get(symbol.rsplit("::", 1)[-1]) or []
    # prefer a definition with a body over a forward-declared shell
    return max(cands, key=lambda f: (len(f.body), -f.line)) if cands else None


def link_boundary(bindings, sites, native_functions, modules) -> tuple:
    """Pair each script call of a bound name with the native function it reaches.

    Returns ``(pairs, diagnostics)``.
    """
    index = _native_index(native_functions)
    fn_by_key = {}
    for m in modules:
        for f in m.all_functions:
            fn_by_key[(m.path, f.name)] = f
    by_name: dict = {}
    for b in bindings:
        by_name.setdefault(b.exported, []).append(b)
    pairs, diags = [], []
    for site in sites:
        for b in by_name.get(site.exported, ()):
            nf = resolve_symbol(b.symbol, index)
            if nf is None:
                diags.append(f"{b.location.path}:{b.location.line}: binding {b.exported!r} names "
                             f"{b.symbol}, which has no parsed definition; pair skipped")
                continue
            sf = fn_by_key.get((site.path, site.function))
            if sf is None:
                continue
            pairs.append(BoundaryPair(sf, nf, site, b))
    called = {s.exported for s in sites}
    for b in bindings:
        if b.exported not in called:
            diags.append(f"{b.location.path}:{b.location.line}: binding {b.exported!r} is never "
                         f"called from script code")
    return pairs, diags


def _rel(path: Path, base: Path) -> str:
    try:
        return path.relative_to(base).as_posix()
    except ValueError:
        return path.as_posix()


def analyze_package(pkg_dir, rules: RuleSet, budget_seconds: float | None = DEFAULT_BUDGET_SECONDS,
                    base=None, keep_graphs: bool = False) -> PackageReport:
    """Run cross-language and fallback intra-procedural analysis on one package."""
    pkg_dir = Path(pkg_dir)
    if not pkg_dir.is_dir():
        raise PackageError(f"{pkg_dir}: not a readable directory")
    base = Path(base) if base is not None else pkg_dir
    budget = _Budget(budget_seconds)
    name = package_name(pkg_dir)
    files = package_files(pkg_dir)
    diags: list = []
    native_files, modules, native_texts = [], [], []
    for f in files:
        if not budget.check():
            break
        if f.suffix == ".ts":
            continue
        try:
            text = f.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            diags.append(f"{_rel(f, base)}: unreadable ({exc.strerror})")
            continue
        rel = _rel(f, base)
        if f.suffix.lower() in NATIVE_EXTS:
            native_texts.append(text)
            nf = parse_native(text, rel)
            native_files.append(nf)
            diags.extend(f"{rel}: {d}" for d in nf.diagnostics)
        else:
            modules.append(parse_module(text, rel))
    functions = [fn for nf in native_files for fn in nf.functions]
    sites = [s for nf in native_files for s in nf.sites]
    bindings, bdiags = extract_bindings(sites, with_diagnostics=True)
    diags.extend(f"{d.location.path}:{d.location.line}: {d.message}" for d in bdiags)
    direct = False
    call_sites = []
    for m in modules:
        mv = native_module_vars(m)
        direct = direct or mv.direct_export
        diags.extend(f"{d.location.path}:{d.location.line}: {d.message}" for d in mv.diagnostics)
        call_sites.extend(find_native_call_sites(m, bindings))
    inventory = PackageInventory(_count_files(files), classify_headers(native_texts), len(bindings), direct)
    report = PackageReport(name, _rel(pkg_dir, base) or ".", inventory, bindings=list(bindings))
    if not inventory.has_native_code or not bindings:
        report.diagnostics = diags
        report.timed_out = budget.expired
        report.elapsed_ms = budget.elapsed_ms
        return report

    pairs, ldiags = link_boundary(bindings, call_sites, functions, modules)
    diags.extend(ldiags)
    findings: list = []
    native_graphs: dict = {}
    script_graphs: dict = {}

    def native_graph(nf):
        key = id(nf)
        if key not in native_graphs:
            native_graphs[key] = tag_native_roles(build_native_dfg(nf), rules)
        return native_graphs[key]

    paired = set()
    for pair in pairs:
        if not budget.check():
            break
        key = (pair.script_function.path, pair.script_function.name)
        if key not in script_graphs:
            script_graphs[key] = tag_script_roles(build_script_dfg(pair.script_function), rules)
        got, merged = analyze_cross(pair, rules, name, script_graphs[key], native_graph(pair.native_function))
        paired.add(id(pair.native_function))
        findings.extend(got)
        if keep_graphs:
            report.graphs[_graph_file_name(name, merged.name, pair.site.location)] = emit_dot(merged)
    index = _native_index(functions)
    seen = set()
    for b in bindings:
        if not budget.check():
            break
        nf = resolve_symbol(b.symbol, index)
        if nf is None:
            if not any(b.exported == p.exported for p in pairs):
                diags.append(f"{b.location.path}:{b.location.line}: binding {b.exported!r} names "
                             f"{b.symbol}, which has no parsed definition")
            continue
        if id(nf) in paired or id(nf) in seen:
            continue
        seen.add(id(nf))
        g = native_graph(nf)
        got = [_with_export(f, b.exported) for f in analyze_intra([g], rules, name)]
        findings.extend(got)
        if keep_graphs and got:
            report.graphs[_graph_file_name(name, g.name, Location(nf.path, nf.line, 0))] = emit_dot(g)
    report.findings = sorted(findings, key=_finding_key)
    report.diagnostics = sorted(set(diags))
    report.timed_out = budget.expired
    report.elapsed_ms = budget.elapsed_ms
    return report


def _with_export(f: Finding, exported: str) -> Finding:
    return replace(f, exported=exported)


def _finding_key(f: Finding):
    loc = f.sinks[0] if f.sinks else Location("", 0, 0)
    site = f.call_site or Location("", 0, 0)
    return (f.scope, f.exported, f.native_function, f.script_function, site.path, site.line, site.col,
            f.misuse, loc.path, loc.line, loc.col)


_UNSAFE = re.compile(r"[^A-Za-z0-9_.-]+")


def _graph_file_name(package: str, graph: str, loc: Location) -> str:
    return _UNSAFE.sub("_", f"{package}__{graph}__L{loc.line}").strip("_") + ".dot"


# many packages

def job_count(default: int | None = None) -> int:
    raw = os.environ.get("XBOUND_JOBS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return default or max(1, min(os.cpu_count() or 1, 8))


def _analyze_one(args):
    pkg_dir, rules, budget, base, keep_graphs = args
    return analyze_package(pkg_dir, rules, budget, base, keep_graphs)


def analyze_packages(pkg_dirs, rules: RuleSet, budget_seconds=DEFAULT_BUDGET_SECONDS, base=None,
                     keep_graphs: bool = False, jobs: int | None = None) -> list:
    """Analyze packages in parallel; results come back in input order."""
    pkg_dirs = list(pkg_dirs)
    jobs = job_count() if jobs is None else jobs
    work = [(d, rules, budget_seconds, base, keep_graphs) for d in pkg_dirs]
    if jobs <= 1 or len(work) <= 1:
        return [_analyze_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
        return list(pool.map(_analyze_one, work))


def inventory(pkg_dir) -> PackageInventory:
    """Inventory only (no analysis)."""
    pkg_dir = Path(pkg_dir)
    files = package_files(pkg_dir)
    texts, sites, direct = [], [], False
    for f in files:
        try:
            text = f.read_text(encoding="utf-8", errors="replace")
        except OSError:
            continue
        if f.suffix.lower() in NATIVE_EXTS:
            texts.append(text)
            sites.extend(parse_native(text, str(f)).sites)
        elif f.suffix == ".js":
            direct = direct or native_module_vars(parse_module(text, str(f))).direct_export
    return PackageInventory(_count_files(files), classify_headers(texts), len(extract_bindings(sites)), direct)


__all__ = [
    "BoundaryPair", "Finding", "PackageInventory", "PackageReport", "PackageError",
    "analyze_cross", "analyze_intra", "analyze_package", "analyze_packages", "discover_packages",
    "inventory", "link_boundary",
]
