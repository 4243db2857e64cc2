"""Demand-driven backward influence analysis over application code.

Starting at each call of a rule's API, the tracked argument is walked back
through variable definitions of the enclosing function.  Walks that end at a
parameter continue at the matching argument of every caller, up to a depth
limit.  A call is a misuse when a request-derived entity reaches it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .graph import Location
from .rules import AppRuleSpec
from .script.dfg import callee_text
from .script.parser import JsNode, ScriptFunction, ScriptModule, parse_module, pattern_names
from .script.sites import CallGraph, build_call_graph

DEFAULT_DEPTH = 16
APP_SKIP_DIRS = frozenset({"node_modules", ".git", "dist", "coverage"})


@dataclass(frozen=True)
class Influence:
    kind: str  # param source literal opaque external
    name: str
    location: Location
    function: str = ""
    index: int = -1  # parameter position for kind == "param"

    @property
    def key(self):
        return (self.name, self.location)


@dataclass(frozen=True)
class InfluenceSet:
    entities: frozenset = frozenset()
    truncated: bool = False
    # entity key -> caller chain (outermost caller first, call-site function last)
    chains: tuple = ()

    @property
    def names(self) -> list:
        return sorted({e.name for e in self.entities})

    def chain_of(self, entity: Influence) -> tuple:
        return dict(self.chains).get(entity.key, ())

    def __contains__(self, name) -> bool:
        return any(e.name == name for e in self.entities)

    def __len__(self) -> int:
        return len(self.entities)


@dataclass(frozen=True)
class AppCallSite:
    function: str
    path: str
    location: Location
    callee: str
    call: JsNode = field(compare=False, repr=False)

    @property
    def args(self) -> tuple:
        return self.call.args


@dataclass(frozen=True)
class AppFinding:
    rule: str
    api: str
    location: Location
    entity: str
    source: str
    chain: tuple
    truncated: bool = False
    package: str = ""

    def __post_init__(self):
        if not self.chain:
            raise ValueError("caller chain must be non-empty")

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "api": self.api,
            "package": self.package,
            "location": self.location.to_dict(),
            "entity": self.entity,
            "source": self.source,
            "chain": list(self.chain),
            "truncated": self.truncated,
        }


class Program:
    """Parsed application files with lookups shared by every rule."""

    def __init__(self, modules, call_graph: CallGraph | None = None):
        if isinstance(modules, ScriptModule):
            modules = [modules]
        self.modules = list(modules)
        self.call_graph = call_graph or build_call_graph(self.modules)
        self.functions: dict = {}
        for m in self.modules:
            for f in m.all_functions:
                self.functions[(m.path, f.name)] = f
        self._defs: dict = {}

    def function(self, path: str, name: str) -> ScriptFunction:
        return self.functions[(path, name)]

    def parent(self, fn: ScriptFunction) -> ScriptFunction | None:
        if fn.kind == "toplevel":
            return None
        return self.functions.get((fn.path, fn.parent or "<top-level>"))

    def defs(self, fn: ScriptFunction) -> dict:
        key = (fn.path, fn.name)
        if key not in self._defs:
            self._defs[key] = definitions(fn)
        return self._defs[key]


def definitions(fn: ScriptFunction) -> dict:
    """Variable -> list of expressions assigned to it anywhere in ``fn`` (field-insensitive)."""
    out: dict = {}

    def add(name, value):
        out.setdefault(name, []).append(value)

    for s in fn.statements():
        if s.kind == "func" and s.fn is not None and s.fn.binding:
            add(s.fn.binding, JsNode("func", s.fn.name, (), s.line, s.col, s.start, s.end))
        for target, init in s.decls:
            if init is None:
                continue
            for name in pattern_names(target):
                add(name, init)
        for e in s.exprs:
            for sub in e.walk():
                if sub.kind == "assign":
                    lhs, rhs = sub.kids
                    if lhs.kind in ("object", "array"):
                        for name in pattern_names(lhs):
                            add(name, rhs)
                        continue
                    base = lhs
                    while base.kind in ("member", "index"):
                        base = base.kids[0]
                    if base.kind == "name":
                        add(base.text, rhs)
    return out


def _member_suffix(e: JsNode) -> str | None:
    if e.kind == "member":
        return "." + e.text
    if e.kind == "index" and e.kids[1].kind == "lit" and e.kids[1].text[:1] in "'\"":
        return "." + e.kids[1].text[1:-1]
    return None


class _Walker:
    """Intra-procedural backward walk producing leaf influences."""

    def __init__(self, program: Program):
        self.program = program

    def run(self, fn: ScriptFunction, expr: JsNode) -> set:
        self.seen: set = set()
        return self.expr(fn, expr, "")

    def expr(self, fn: ScriptFunction, e: JsNode, suffix: str) -> set:
        k = e.kind
        loc = Location(fn.path, e.line, e.col)
        if k == "name":
            return self.name(fn, e.text, suffix, loc)
        if k in ("member", "index"):
            sfx = _member_suffix(e)
            return self.expr(fn, e.kids[0], (sfx or "") + suffix)
        if k in ("call", "new"):
            return {Influence("opaque", callee_text(fn.source, e.callee) + "()", loc, fn.name)}
        if k == "lit":
            return {Influence("literal", e.text if len(e.text) <= 40 else e.text[:37] + "...", loc, fn.name)}
        if k in ("func", "class"):
            return {Influence("literal", "function" if k == "func" else "class", loc, fn.name)}
        if k == "unary" and e.text in ("typeof", "void", "delete", "!", "-", "+", "~"):
            return {Influence("literal", e.text, loc, fn.name)}
        if k in ("array", "object"):
            out = set()
            for kid in e.kids:
                if kid.kind == "prop":
                    out |= self.expr(fn, kid.kids[-1], "")
                else:
                    out |= self.expr(fn, kid, "")
            return out
        if k == "assign":
            return self.expr(fn, e.kids[1], suffix)
        if k == "seq":
            return self.expr(fn, e.kids[-1], suffix)
        if k == "cond":
            return self.expr(fn, e.kids[1], suffix) | self.expr(fn, e.kids[2], suffix)
        if k == "binary" and e.text in ("||", "&&", "??"):
            return self.expr(fn, e.kids[0], suffix) | self.expr(fn, e.kids[1], suffix)
        out = set()
        for kid in e.kids:
            out |= self.expr(fn, kid, "")
        if not out:
            out.add(Influence("literal", k, loc, fn.name))
        return out

    def name(self, fn: ScriptFunction, name: str, suffix: str, loc: Location) -> set:
        scope = fn
        while scope is not None:
            positions = [i for i, group in enumerate(scope.param_names) if name in group]
            if positions:
                ploc = Location(scope.path, scope.line, scope.col)
                return {Influence("param", name + suffix, ploc, scope.name, positions[0])}
            values = self.program.defs(scope).get(name)
            if values:
                key = (scope.path, scope.name, name, suffix)
                if key in self.seen:
                    return set()
                self.seen.add(key)
                out = set()
                for v in values:
                    out |= self.expr(scope, v, suffix)
                return out
            scope = self.program.parent(scope)
        return {Influence("external", name + suffix, loc, fn.name)}


def find_call_sites(program, rule: AppRuleSpec) -> list:
    """Member calls of ``rule.api`` with enough arguments to reach the tracked position."""
    if not isinstance(program, Program):
        program = Program(program)
    out = []
    for m in program.modules:
        for fn in m.all_functions:
            for s in fn.statements():
                exprs = list(s.exprs)
                for e in exprs:
                    for sub in e.walk():
                        if (sub.kind == "call" and sub.callee.kind == "member" and sub.callee.text == rule.api
                                and len(sub.args) > rule.tracked):
                            out.append(AppCallSite(fn.name, m.path, Location(m.path, sub.line, sub.col),
                                                   callee_text(m.source, sub.callee), sub))
    uniq = {(s.location, s.callee): s for s in out}
    return sorted(uniq.values(), key=lambda s: (s.path, s.location.line, s.location.col))


def backward_intra(program, site: AppCallSite, tracked: int) -> InfluenceSet:
    if not isinstance(program, Program):
        program = Program(program)
    fn = program.function(site.path, site.function)
    leaves = _Walker(program).run(fn, site.args[tracked])
    chains = tuple((e.key, (site.function,)) for e in sorted(leaves, key=_entity_key))
    return InfluenceSet(frozenset(leaves), False, chains)


def _call_at(fn: ScriptFunction, loc: Location) -> JsNode | None:
    for s in fn.statements():
        for e in s.exprs:
            for sub in e.walk():
                if sub.kind in ("call", "new") and sub.line == loc.line and sub.col == loc.col:
                    return sub
    return None


def backward_inter(program, site: AppCallSite, rule: AppRuleSpec, call_graph: CallGraph | None = None,
                   depth: int = DEFAULT_DEPTH) -> InfluenceSet:
    """Backward walk continued into callers for parameter leaves, at most ``depth`` levels up."""
    if not isinstance(program, Program):
        program = Program(program, call_graph)
    cg = call_graph or program.call_graph
    walker = _Walker(program)
    start = program.function(site.path, site.function)
    chains: dict = {}
    entities: dict = {}
    truncated = False
    visited = set()
    work = [(leaf, (site.function,), 0) for leaf in sorted(walker.run(start, site.args[rule.tracked]), key=_entity_key)]
    while work:
        leaf, chain, level = work.pop(0)
        if leaf.key not in entities:
            entities[leaf.key] = leaf
            chains[leaf.key] = chain
        if leaf.kind != "param":
            continue
        fn = program.functions.get((leaf.location.path, leaf.function))
        if fn is None:
            continue
        callers = [e for e in cg.callers_of(fn.name, fn.path) if e.kind == "call"]
        if not callers:
            continue
        if level >= depth:
            truncated = True
            continue
        param = fn.param_names[leaf.index][0] if fn.param_names[leaf.index] else ""
        suffix = leaf.name[len(param):] if param and leaf.name.startswith(param) else ""
        vkey = (fn.path, fn.name, leaf.index, suffix)
        if vkey in visited:
            continue
        visited.add(vkey)
        for edge in callers:
            caller = program.functions.get((edge.caller_path, edge.caller))
            if caller is None:
                continue
            call = _call_at(caller, edge.location)
            if call is None or leaf.index >= len(call.args):
                continue
            arg = call.args[leaf.index]
            if arg.kind == "spread":
                continue
            walker.seen = set()
            got = walker.expr(caller, arg, suffix)
            for g in sorted(got, key=_entity_key):
                work.append((g, (caller.name, *chain), level + 1))
    ordered = sorted(entities.values(), key=_entity_key)
    return InfluenceSet(frozenset(ordered), truncated, tuple((e.key, chains[e.key]) for e in ordered))


def _entity_key(e: Influence):
    return (e.name, e.location.path, e.location.line, e.location.col, e.kind)


def evaluate(rule: AppRuleSpec, influences: InfluenceSet, site: AppCallSite | None = None):
    """Misuse iff some source pattern of ``rule`` covers an influencing entity.

    Returns ``(misuse, finding or None)``.
    """
    matches = []
    for e in sorted(influences.entities, key=_entity_key):
        if e.kind not in ("param", "external"):
            continue
        src = rule.source_matches(e.name)
        if src is not None:
            matches.append((e, src))
    if not matches:
        return False, None
    if site is None:
        return True, None
    entity, src = matches[0]
    chain = influences.chain_of(entity) or (site.function,)
    return True, AppFinding(rule.signature, rule.api, site.location, entity.name, src, tuple(chain),
                            influences.truncated, rule.package)


@dataclass
class AppReport:
    root: str
    findings: list
    sites: int
    diagnostics: list = field(default_factory=list)
    files: int = 0

    def to_list(self) -> list:
        return [f.to_dict() for f in self.findings]


def app_files(root) -> list:
    root = Path(root)
    if root.is_file():
        return [root]
    out = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d not in APP_SKIP_DIRS and not d.startswith("."))
        out.extend(Path(dirpath) / f for f in sorted(filenames) if f.endswith(".js"))
    return sorted(out)


def load_program(root) -> Program:
    root = Path(root)
    base = root if root.is_dir() else root.parent
    modules = []
    for f in app_files(root):
        text = f.read_text(encoding="utf-8", errors="replace")
        modules.append(parse_module(text, f.relative_to(base).as_posix()))
    return Program(modules)


def analyze_program(program: Program, rules, depth: int = DEFAULT_DEPTH, jobs: int = 1) -> list:
    def one(rule):
        found = []
        for site in find_call_sites(program, rule):
            infl = backward_inter(program, site, rule, program.call_graph, depth)
            misuse, finding = evaluate(rule, infl, site)
            if misuse:
                found.append(finding)
        return found

    rules = list(rules)
    if jobs > 1 and len(rules) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, rules))
    else:
        results = [one(r) for r in rules]
    findings = [f for group in results for f in group]
    return sorted(findings, key=lambda f: (f.location.path, f.location.line, f.location.col, f.rule))


def analyze_app(root, rules, depth: int = DEFAULT_DEPTH) -> AppReport:
    """Run every rule over the ``.js`` files below ``root``."""
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(f"{root}: no such file or directory")
    program = load_program(root)
    rules = list(rules)
    findings = analyze_program(program, rules, depth)
    n_sites = sum(len(find_call_sites(program, r)) for r in rules)
    return AppReport(root.as_posix(), findings, n_sites, [], len(program.modules))
