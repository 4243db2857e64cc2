"""Native-extension call sites and intra-file call graphs for script modules."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..graph import Location
from .dfg import callee_text
from .parser import TOP_LEVEL, ROUTE_METHODS, JsNode, ScriptFunction, ScriptModule, pattern_names

LOADER_MODULES = frozenset({"bindings", "node-gyp-build", "node-pre-gyp", "@mapbox/node-pre-gyp", "prebuild-install"})
_NATIVE_PATH = re.compile(r"(\.node$)|(build/(Release|Debug)/)")


@dataclass(frozen=True)
class NativeCallSite:
    function: str  # canonical name of the enclosing script function
    location: Location
    exported: str
    args: tuple = field(compare=False, repr=False)
    callee: str = ""  # normalized callee text, e.g. "addon.Pad"
    path: str = ""


@dataclass(frozen=True)
class ScriptDiagnostic:
    message: str
    location: Location


@dataclass(frozen=True)
class CallEdge:
    caller: str
    callee: str
    location: Location
    kind: str = "call"  # call | route
    external: bool = False
    callee_path: str = ""

    @property
    def caller_path(self) -> str:
        return self.location.path


@dataclass(frozen=True)
class CallGraph:
    edges: tuple

    @property
    def triples(self) -> list:
        return [(e.caller, e.callee, e.location) for e in self.edges]

    def internal(self) -> "CallGraph":
        return CallGraph(tuple(e for e in self.edges if not e.external))

    def callers_of(self, name: str, path: str | None = None) -> list:
        return [e for e in self.edges if not e.external and e.callee == name
                and (path is None or e.callee_path == path)]

    def callees_of(self, name: str, path: str | None = None) -> list:
        return [e for e in self.edges if e.caller == name and (path is None or e.caller_path == path)]


def string_literal(e: JsNode | None) -> str | None:
    if e is not None and e.kind == "lit" and len(e.text) >= 2 and e.text[0] in "'\"" and e.text[-1] == e.text[0]:
        return e.text[1:-1]
    if e is not None and e.kind == "lit" and e.text.startswith("`") and "${" not in e.text:
        return e.text[1:-1]
    return None


def _is_require(e: JsNode) -> bool:
    return e.kind == "call" and e.callee.kind == "name" and e.callee.text == "require"


def native_require(e: JsNode | None) -> tuple:
    """Classify an expression as a native-module load.

    Returns ``(is_native, dynamic)`` where ``dynamic`` flags a ``require`` whose
    argument is not a literal string.
    """
    if e is None:
        return False, False
    while e.kind == "unary" and e.text == "await" and e.kids:
        e = e.kids[0]
    if e.kind == "call" and _is_require(e.callee):
        # require('bindings')('addon.node')
        mod = string_literal(e.callee.args[0]) if e.callee.args else None
        return mod in LOADER_MODULES, False
    if _is_require(e):
        if not e.args:
            return False, False
        mod = string_literal(e.args[0])
        if mod is None:
            return False, True
        return bool(_NATIVE_PATH.search(mod)), False
    return False, False


def _walk_function(fn: ScriptFunction):
    for s in fn.statements():
        for e in s.exprs:
            yield from e.walk()
        for target, init in s.decls:
            if init is None:
                yield from target.walk()


@dataclass
class NativeModuleVars:
    objects: set = field(default_factory=set)  # variables holding the loaded extension
    direct: dict = field(default_factory=dict)  # local name -> exported name
    direct_export: bool = False
    diagnostics: list = field(default_factory=list)


def native_module_vars(module: ScriptModule) -> NativeModuleVars:
    out = NativeModuleVars()
    for fn in module.all_functions:
        for s in fn.statements():
            pairs = list(s.decls)
            for e in s.exprs:
                for sub in e.walk():
                    if sub.kind == "assign" and sub.text == "=":
                        pairs.append((sub.kids[0], sub.kids[1]))
            for e in s.exprs:
                for sub in e.walk():
                    if _is_require(sub) and sub.args and string_literal(sub.args[0]) is None:
                        out.diagnostics.append(ScriptDiagnostic(
                            "dynamic require ignored", Location(module.path, sub.line, sub.col)))
            for target, init in pairs:
                native, _ = native_require(init)
                if not native:
                    continue
                if target.kind == "name":
                    out.objects.add(target.text)
                elif target.kind == "member" and _is_module_exports(target):
                    out.direct_export = True
                elif target.kind == "object":
                    for prop in target.kids:
                        if prop.kind == "prop":
                            for local in pattern_names(prop.kids[-1]):
                                out.direct[local] = prop.text
    return out


def _is_module_exports(e: JsNode) -> bool:
    return (e.kind == "member" and e.text == "exports" and e.kids[0].kind == "name"
            and e.kids[0].text == "module")


def find_native_call_sites(module: ScriptModule, bindings) -> list:
    """Member calls ``<extension var>.<exported>(...)`` whose name is bound natively."""
    exported = {b.exported for b in bindings}
    mv = native_module_vars(module)
    sites = []
    for fn in module.all_functions:
        for sub in _walk_function(fn):
            if sub.kind != "call":
                continue
            c = sub.callee
            name = None
            if c.kind == "member" and c.kids[0].kind == "name" and c.kids[0].text in mv.objects:
                name = c.text
            elif c.kind == "index" and c.kids[0].kind == "name" and c.kids[0].text in mv.objects:
                name = string_literal(c.kids[1])
            elif c.kind == "name" and c.text in mv.direct:
                name = mv.direct[c.text]
            if name is None or name not in exported:
                continue
            sites.append(NativeCallSite(
                fn.name, Location(module.path, sub.line, sub.col), name, sub.args,
                callee_text(module.source, c), module.path,
            ))
    sites.sort(key=lambda s: (s.location.line, s.location.col, s.exported))
    return sites


def _function_literals(args) -> list:
    return [a.fn for a in args if a.kind == "func" and a.fn is not None]


def build_call_graph(modules) -> CallGraph:
    """Caller/callee edges resolved by declared name.

    ``modules`` is one :class:`ScriptModule` or a list of them.  Plain calls
    resolve within the file first; across files only a unique declared name
    (or ``<var>.<name>`` where ``var = require('./local')``) resolves.
    """
    if isinstance(modules, ScriptModule):
        modules = [modules]
    by_file: dict = {}
    global_names: dict = {}
    for m in modules:
        table: dict = {}
        for f in m.functions:
            if f.binding:
                table.setdefault(f.binding, []).append(f)
                global_names.setdefault(f.binding, []).append(f)
        by_file[m.path] = table
    edges = set()
    for m in modules:
        local = by_file[m.path]
        local_requires = _local_requires(m)
        for fn in m.all_functions:
            for sub in _walk_function(fn):
                if sub.kind not in ("call", "new"):
                    continue
                loc = Location(m.path, sub.line, sub.col)
                c = sub.callee
                targets = []
                if c.kind == "name":
                    targets = local.get(c.text) or []
                    if not targets and len(global_names.get(c.text, ())) == 1:
                        targets = global_names[c.text]
                elif c.kind == "member" and c.kids[0].kind == "name" and c.kids[0].text in local_requires:
                    cands = global_names.get(c.text, [])
                    hint = local_requires[c.kids[0].text]
                    cands = [f for f in cands if _path_matches(f.path, hint)] or (cands if len(cands) == 1 else [])
                    targets = cands
                if targets:
                    for t in targets:
                        edges.add(CallEdge(fn.name, t.name, loc, "call", False, t.path))
                else:
                    edges.add(CallEdge(fn.name, callee_text(m.source, c), loc, "call", True, ""))
                if c.kind == "member" and c.text in ROUTE_METHODS:
                    for lit in _function_literals(sub.args):
                        edges.add(CallEdge(fn.name, lit.name, loc, "route", False, m.path))
    ordered = sorted(edges, key=lambda e: (e.location.path, e.location.line, e.location.col,
                                           e.caller, e.callee, e.kind))
    return CallGraph(tuple(ordered))


def _local_requires(m: ScriptModule) -> dict:
    out = {}
    for fn in m.all_functions:
        for s in fn.statements():
            for target, init in s.decls:
                if target.kind == "name" and init is not None and _is_require(init) and init.args:
                    mod = string_literal(init.args[0])
                    if mod and mod.startswith("."):
                        out[target.text] = mod
    return out


def _path_matches(path: str, spec: str) -> bool:
    stem = spec.rstrip("/").split("/")[-1]
    if stem.endswith(".js"):
        stem = stem[:-3]
    base = path.replace("\\", "/").split("/")[-1]
    return base in (stem, stem + ".js") or path.replace("\\", "/").endswith("/" + stem + "/index.js")


__all__ = [
    "CallEdge", "CallGraph", "NativeCallSite", "ScriptDiagnostic", "NativeModuleVars",
    "build_call_graph", "find_native_call_sites", "native_module_vars", "native_require", "TOP_LEVEL",
]
