"""Flow-insensitive def-use graphs for native functions, plus role tagging."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..graph import FlowEdge, FunctionGraph, GraphNode, Language, Location, NodeKind, Role
from ..rules import RuleSet
from .parser import Expr, NativeFunction, Stmt

# Argument containers whose indexing marks a value coming from the caller.
ARG_ARRAYS = ("info", "args", "argv")
CONTEXT_TYPE_MARKERS = ("napi_env", "Napi::Env", "Isolate", "Context")
CONTEXT_NAMES = frozenset({"env", "isolate", "self"})
COMPARISONS = frozenset({"==", "!=", "<", ">", "<=", ">="})
ARGCOUNT_TRAIT = "argcount-compare"
_SNIPPET_MAX = 120
_WS = re.compile(r"\s+")


@dataclass
class _Node:
    id: int
    kind: NodeKind
    label: str
    line: int
    col: int
    callee: str = ""
    reads: set = field(default_factory=set)
    defs: set = field(default_factory=set)
    root_labels: set = field(default_factory=set)
    traits: set = field(default_factory=set)
    parent: int | None = None


def _is_context_type(type_text: str) -> bool:
    return any(m in type_text for m in CONTEXT_TYPE_MARKERS)


def _simple_name(e: Expr) -> str | None:
    if e.kind == "name" and "::" not in e.text and not e.text.startswith("~") and "<" not in e.text:
        return e.text
    return None


def target_root(e: Expr) -> str | None:
    """Variable written when ``e`` is the target of an assignment (x, x.f, x[i], *x)."""
    while True:
        if e.kind in ("member", "index", "postfix"):
            e = e.kids[0]
        elif e.kind == "unary" and e.text in ("*", "&") and e.kids:
            e = e.kids[0]
        elif e.kind == "cast" and len(e.kids) == 1:
            e = e.kids[0]
        else:
            return _simple_name(e)


class _FunctionContext:
    def __init__(self, fn: NativeFunction):
        self.fn = fn
        self.tokens = fn.tokens
        self.source = fn.source
        self.params = {p.name for p in fn.params if p.name and p.name not in CONTEXT_NAMES
                       and not _is_context_type(p.type)}
        self.locals: dict = {}  # name -> (array_or_pointer, type_text)
        self.context_locals = {p.name for p in fn.params if p.name and (p.name in CONTEXT_NAMES or _is_context_type(p.type))}
        self.argc_names = {"argc"}
        for s in fn.statements():
            for d in s.declarators:
                self.locals[d.name] = (d.array or d.pointer or "*" in s.type_text, s.type_text)
                if _is_context_type(s.type_text):
                    self.context_locals.add(d.name)
            for e in s.exprs:
                for sub in e.walk():
                    if sub.kind == "call" and sub.text.endswith("napi_get_cb_info") and len(sub.args) > 2:
                        a = sub.args[2]
                        if a.kind == "unary" and a.text == "&":
                            n = target_root(a)
                            if n:
                                self.argc_names.add(n)
        self.arg_bases = self.params | (set(ARG_ARRAYS) - self.context_locals)

    def snippet(self, start_tok: int, end_tok: int) -> str:
        if end_tok <= start_tok or start_tok >= len(self.tokens):
            return ""
        a = self.tokens[start_tok].start
        b = self.tokens[min(end_tok, len(self.tokens)) - 1].end
        text = _WS.sub(" ", self.source[a:b]).strip()
        if len(text) > _SNIPPET_MAX:
            text = text[: _SNIPPET_MAX - 3] + "..."
        return text

    def token_text(self, start: int, end: int) -> str:
        return "".join(t.text for t in self.tokens[start:end])

    # def-use facts over expression trees
    def reads_of(self, exprs) -> set:
        out = set()
        for e in exprs:
            # a plain `x = ...` writes x without reading it
            written = {id(sub.kids[0]) for sub in e.walk() if sub.kind == "assign" and sub.text == "="}
            for sub in e.walk():
                if sub.kind == "lambda":
                    out |= self.token_reads(sub.start, sub.end)
                n = _simple_name(sub)
                if n and id(sub) not in written:
                    out.add(n)
        return out

    def token_reads(self, start: int, end: int) -> set:
        out = set()
        toks = self.tokens
        for k in range(start, end):
            t = toks[k]
            if t.kind != "id":
                continue
            prev = toks[k - 1].text if k > start else ""
            nxt = toks[k + 1].text if k + 1 < end else ""
            if prev in (".", "->", "::") or nxt == "::":
                continue
            out.add(t.text)
        return out

    def defs_of(self, exprs) -> set:
        out = set()
        for e in exprs:
            for sub in e.walk():
                if sub.kind == "assign":
                    n = target_root(sub.kids[0])
                    if n:
                        out.add(n)
                elif sub.kind in ("unary", "postfix") and sub.text in ("++", "--"):
                    n = target_root(sub.kids[0])
                    if n:
                        out.add(n)
                elif sub.kind == "call":
                    for a in sub.args:
                        if a.kind == "unary" and a.text == "&":
                            n = target_root(a.kids[0])
                            if n:
                                out.add(n)
                        else:
                            n = _simple_name(a)
                            if n and self.locals.get(n, (False, ""))[0]:
                                # a local buffer handed to a call may be written by it
                                out.add(n)
        return out

    def root_labels_of(self, exprs) -> set:
        out = set()
        consumed = set()
        for e in exprs:
            for sub in e.walk():
                if sub.kind == "index":
                    base = _simple_name(sub.kids[0])
                    if base and base in self.arg_bases:
                        idx = sub.kids[1]
                        out.add(f"{base}[{self.token_text(idx.start, idx.end)}]")
                        consumed.add(id(sub.kids[0]))
        for e in exprs:
            for sub in e.walk():
                if sub.kind == "lambda":
                    out |= self.token_root_labels(sub.start, sub.end)
                n = _simple_name(sub)
                if n and n in self.params and id(sub) not in consumed:
                    out.add(n)
        return out

    def token_root_labels(self, start: int, end: int) -> set:
        out = set()
        toks = self.tokens
        k = start
        while k < end:
            t = toks[k]
            prev = toks[k - 1].text if k > start else ""
            if t.kind == "id" and prev not in (".", "->", "::"):
                if t.text in self.arg_bases and k + 1 < end and toks[k + 1].text == "[":
                    j = k + 2
                    depth = 1
                    while j < end and depth:
                        if toks[j].text == "[":
                            depth += 1
                        elif toks[j].text == "]":
                            depth -= 1
                        j += 1
                    out.add(f"{t.text}[{self.token_text(k + 2, j - 1)}]")
                    k = j
                    continue
                if t.text in self.params:
                    out.add(t.text)
            k += 1
        return out

    def is_argcount(self, e: Expr) -> bool:
        for sub in e.walk():
            if sub.kind == "name" and sub.text in self.argc_names:
                return True
            if sub.kind == "call" and sub.text.endswith(".Length") and not sub.args:
                recv = sub.callee.kids[0] if sub.callee.kind == "member" else None
                if recv is not None and _simple_name(recv) in self.arg_bases:
                    return True
        return False

    def has_argcount_compare(self, exprs) -> bool:
        for e in exprs:
            for sub in e.walk():
                if sub.kind == "binary" and sub.text in COMPARISONS:
                    if self.is_argcount(sub.kids[0]) or self.is_argcount(sub.kids[1]):
                        return True
        return False


def _principal_call(s: Stmt) -> Expr | None:
    if s.kind == "expr" and len(s.exprs) == 1:
        e = s.exprs[0]
        if e.kind == "cast" and len(e.kids) == 1:
            e = e.kids[0]
        if e.kind == "call":
            return e
        if e.kind == "assign" and e.kids[1].kind == "call":
            return e.kids[1]
    if s.kind == "decl" and len(s.declarators) == 1:
        d = s.declarators[0]
        if d.init is not None and d.init.kind == "call":
            return d.init
    return None


def _nested_calls(e: Expr, parent: Expr | None, out: list):
    """Pre-order (call, enclosing call) pairs, not descending into lambdas."""
    if e.kind == "lambda":
        return
    if e.kind == "call":
        out.append((e, parent))
        parent = e
    for k in e.kids:
        _nested_calls(k, parent, out)


def native_nodes(fn: NativeFunction) -> tuple:
    """Compute per-node def-use facts; returns (context, [node facts])."""
    ctx = _FunctionContext(fn)
    nodes: list = []
    root_tok = next((k for k, t in enumerate(fn.tokens) if t.line == fn.line), 0)
    nodes.append(_Node(0, NodeKind.FunctionDef, fn.header, fn.line,
                       fn.tokens[root_tok].col if fn.tokens else 0))

    def add_stmt(s: Stmt):
        if s.kind in ("block", "label", "empty", "jump"):
            for c in s.children():
                add_stmt(c)
            return
        compound = s.kind in ("if", "while", "switch", "do", "for")
        if compound and not s.exprs and not s.declarators:
            for c in s.children():
                add_stmt(c)
            return
        if compound:
            end = (s.header_end + 1) if s.header_end >= 0 else s.start + 1
            label = ctx.snippet(s.start, end)
            if s.kind == "do":
                label = "do ... while (" + ctx.snippet(s.exprs[0].start, s.exprs[0].end) + ")"
        else:
            label = ctx.snippet(s.start, s.end)
        principal = _principal_call(s)
        if s.kind == "return":
            kind = NodeKind.Return
        elif principal is not None:
            kind = NodeKind.Call
        else:
            kind = NodeKind.Statement
        node = _Node(len(nodes), kind, label, s.line, s.col, principal.text if principal is not None else "")
        if s.kind == "opaque":
            node.reads = ctx.token_reads(s.start, s.end)
            toks = fn.tokens
            node.defs = {
                toks[k].text for k in range(s.start, s.end - 1)
                if toks[k].kind == "id" and toks[k + 1].kind == "op" and toks[k + 1].text == "="
            }
            node.root_labels = ctx.token_root_labels(s.start, s.end)
            cmp = any(t.kind == "op" and t.text in COMPARISONS for t in toks[s.start:s.end])
            lengthy = any(
                toks[k].text == "Length" and toks[k - 1].text in (".", "->") and toks[k - 2].text in ctx.arg_bases
                for k in range(s.start + 2, s.end)
            )
            if cmp and (node.reads & ctx.argc_names or lengthy):
                node.traits.add(ARGCOUNT_TRAIT)
        else:
            node.reads = ctx.reads_of(s.exprs)
            node.defs = ctx.defs_of(s.exprs)
            for d in s.declarators:
                node.reads |= ctx.reads_of(d.dims)
                if d.initialized:
                    node.defs.add(d.name)
            if s.declarators and _is_context_type(s.type_text):
                node.defs -= {d.name for d in s.declarators}
            node.root_labels = ctx.root_labels_of(s.exprs)
            if ctx.has_argcount_compare(s.exprs):
                node.traits.add(ARGCOUNT_TRAIT)
        node.defs -= ctx.context_locals
        nodes.append(node)
        stmt_id = node.id
        if s.kind != "opaque":
            pairs: list = []
            for e in s.exprs:
                _nested_calls(e, None, pairs)
            call_ids: dict = {}
            if principal is not None:
                call_ids[id(principal)] = stmt_id
            for call, parent in pairs:
                if call is principal:
                    continue
                sub = _Node(
                    len(nodes), NodeKind.Call, ctx.snippet(call.start, call.end), call.line, call.col, call.text,
                )
                sub.reads = ctx.reads_of([call])
                sub.root_labels = ctx.root_labels_of([call])
                sub.parent = call_ids.get(id(parent), stmt_id) if parent is not None else stmt_id
                call_ids[id(call)] = sub.id
                nodes.append(sub)
        for c in s.children():
            add_stmt(c)

    for s in fn.body:
        add_stmt(s)
    return ctx, nodes


def build_native_dfg(fn: NativeFunction) -> FunctionGraph:
    """Def-use graph of one native function.

    Edge u->v labelled x when node u defines x and node v reads x.  The root
    (the function definition) feeds every node that references a parameter or
    indexes an argument container (``info[0]``, ``args[0]``).  Nested calls are
    separate Call nodes with an unlabelled edge into their enclosing node.
    """
    ctx, facts = native_nodes(fn)
    defs: dict = {}
    reads: dict = {}
    for n in facts[1:]:
        for v in n.defs:
            defs.setdefault(v, []).append(n.id)
        for v in n.reads:
            reads.setdefault(v, []).append(n.id)
    edges = []
    for n in facts[1:]:
        for lab in n.root_labels:
            edges.append(FlowEdge(0, n.id, lab))
        if n.parent is not None:
            edges.append(FlowEdge(n.id, n.parent, ""))
    for var, srcs in defs.items():
        for u in srcs:
            for v in reads.get(var, ()):
                if u != v:
                    edges.append(FlowEdge(u, v, var))
    nodes = []
    for n in facts:
        roles = frozenset({Role.Root}) if n.id == 0 else frozenset()
        nodes.append(GraphNode(
            n.id, Language.Native, n.kind, n.label, Location(fn.path, n.line, n.col),
            roles, n.callee, frozenset(n.traits),
        ))
    return FunctionGraph.build(fn.name, nodes, edges, 0)


def tag_native_roles(graph: FunctionGraph, rules: RuleSet) -> FunctionGraph:
    """Mark sink and sanitizer nodes; nodes and edges are left untouched."""
    roles: dict = {}
    for n in graph.nodes:
        if n.language is not Language.Native:
            continue
        got = set()
        if n.kind is NodeKind.Call and n.callee:
            if rules.sink_misuses(n.callee):
                got.add(Role.Sink)
            if rules.is_native_sanitizer(n.callee):
                got.add(Role.Sanitizer)
        if ARGCOUNT_TRAIT in n.traits:
            got.add(Role.Sanitizer)
        if got:
            roles[n.id] = got
    return graph.with_roles(roles) if roles else graph
