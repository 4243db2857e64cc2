"""Flow-insensitive def-use graphs for script functions, plus sanitizer tagging."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..graph import FlowEdge, FunctionGraph, GraphNode, Language, Location, NodeKind, Role
from ..rules import RuleSet
from .lexer import tokenize
from .parser import JsNode, JsStmt, ScriptFunction, pattern_names

COMPARISONS = frozenset({"==", "!=", "===", "!==", "<", ">", "<=", ">="})
ARGCOUNT_TRAIT = "argcount-compare"
TYPEOF_TRAIT = "typeof"
INSTANCEOF_TRAIT = "instanceof"
_SNIPPET_MAX = 120
_WS = re.compile(r"\s+")
_NOT_VARIABLES = frozenset({"this", "super", "undefined", "import", "new.target"})


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
    traits: set = field(default_factory=set)
    parent: int | None = None
    parent_label: str = ""


def callee_text(source: str, callee: JsNode) -> str:
    """Callee source with whitespace removed and optional chaining flattened."""
    return _WS.sub("", source[callee.start:callee.end]).replace("?.", ".")


def _snippet(source: str, start: int, end: int) -> str:
    text = _WS.sub(" ", source[start:end]).strip()
    if len(text) > _SNIPPET_MAX:
        text = text[: _SNIPPET_MAX - 3] + "..."
    return text


def _assigned_names(target: JsNode) -> list:
    """Variables written by an assignment to ``target``."""
    if target.kind in ("object", "array"):
        return pattern_names(target)
    while target.kind in ("member", "index"):
        target = target.kids[0]
    return [target.text] if target.kind == "name" and target.text not in _NOT_VARIABLES else []


def expr_reads(e: JsNode) -> set:
    """Names read by ``e``; nested function bodies are opaque."""
    out = set()
    written = set()
    for sub in e.walk():
        if sub.kind == "assign" and sub.text == "=":
            lhs = sub.kids[0]
            if lhs.kind == "name":
                written.add(id(lhs))
            elif lhs.kind in ("object", "array"):
                for p in lhs.walk():
                    if p.kind == "name":
                        written.add(id(p))
    for sub in e.walk():
        if sub.kind == "name" and id(sub) not in written and sub.text not in _NOT_VARIABLES:
            out.add(sub.text)
    return out


def expr_defs(e: JsNode) -> set:
    out = set()
    for sub in e.walk():
        if sub.kind == "assign":
            out.update(_assigned_names(sub.kids[0]))
        elif sub.kind == "update":
            out.update(_assigned_names(sub.kids[0]))
    return out


def _is_arguments_length(e: JsNode, counted: set) -> bool:
    for sub in e.walk():
        if sub.kind == "member" and sub.text == "length":
            base = sub.kids[0]
            if base.kind == "name" and base.text in counted:
                return True
    return False


def expr_traits(e: JsNode, counted: set) -> set:
    out = set()
    for sub in e.walk():
        if sub.kind == "unary" and sub.text == "typeof" and sub.kids and sub.kids[0].kind in ("name", "member", "index"):
            out.add(TYPEOF_TRAIT)
        elif sub.kind == "binary" and sub.text == "instanceof":
            out.add(INSTANCEOF_TRAIT)
        elif sub.kind == "binary" and sub.text in COMPARISONS:
            if any(_is_arguments_length(k, counted) for k in sub.kids):
                out.add(ARGCOUNT_TRAIT)
    return out


def _unwrap_await(e: JsNode) -> JsNode:
    while e.kind == "unary" and e.text == "await" and e.kids:
        e = e.kids[0]
    return e


def principal_call(s: JsStmt) -> JsNode | None:
    """The call a statement node stands for, when the statement is essentially one call."""
    if s.kind == "expr" and s.exprs:
        e = _unwrap_await(s.exprs[0])
        if e.kind in ("call", "new"):
            return e
        if e.kind == "assign":
            rhs = _unwrap_await(e.kids[1])
            if rhs.kind in ("call", "new"):
                return rhs
    if s.kind == "var" and len(s.decls) == 1:
        target, init = s.decls[0]
        if init is not None and target.kind == "name":
            init = _unwrap_await(init)
            if init.kind in ("call", "new"):
                return init
    return None


def _nested_calls(e: JsNode, parent: JsNode | None, out: list):
    if e.kind == "func":
        return
    if e.kind in ("call", "new"):
        out.append((e, parent))
        parent = e
    for k in e.kids:
        _nested_calls(k, parent, out)


class _Builder:
    def __init__(self, fn: ScriptFunction):
        self.fn = fn
        self.src = fn.source
        self.params = set(fn.all_param_names)
        # names whose `.length` counts arguments: `arguments` and rest parameters
        self.counted = {"arguments"} | {
            n for p in fn.params if p.kind == "rest" for n in pattern_names(p)
        }
        self.nodes: list = [_Node(0, NodeKind.FunctionDef, fn.header or fn.name, fn.line, fn.col)]

    def new(self, kind, label, line, col, callee="") -> _Node:
        n = _Node(len(self.nodes), kind, label, line, col, callee)
        self.nodes.append(n)
        return n

    def header_label(self, s: JsStmt) -> str:
        if s.kind == "do":
            e = s.exprs[0]
            return "do ... while (" + _snippet(self.src, e.start, e.end) + ")"
        end = s.header_end if s.header_end >= 0 else s.end
        return _snippet(self.src, s.start, end)

    def stmt(self, s: JsStmt):
        k = s.kind
        if k in ("block", "empty", "jump", "func", "try"):
            for c in s.children():
                self.stmt(c)
            return
        if k == "class":
            for e in s.exprs:
                self.expression_node(s, e)
            return
        compound = k in ("if", "while", "do", "for", "forin", "switch")
        if compound and not s.exprs and not s.decls:
            for c in s.children():
                self.stmt(c)
            return
        if k == "opaque":
            self.opaque(s)
            return
        label = self.header_label(s) if compound else _snippet(self.src, s.start, s.end)
        principal = principal_call(s)
        if k == "return":
            kind = NodeKind.Return
        elif principal is not None:
            kind = NodeKind.Call
        else:
            kind = NodeKind.Statement
        node = self.new(kind, label, s.line, s.col,
                        callee_text(self.src, principal.callee) if principal is not None else "")
        for e in s.exprs:
            node.reads |= expr_reads(e)
            node.defs |= expr_defs(e)
            node.traits |= expr_traits(e, self.counted)
        for target, _init in s.decls:
            if target.kind == "name":
                if _init is not None or k == "forin":
                    node.defs.add(target.text)
            else:
                # destructuring: defaults inside the pattern are reads of the statement
                for sub in target.walk():
                    if sub.kind == "assign":
                        node.reads |= expr_reads(sub.kids[1])
                for name in pattern_names(target):
                    ref = self.new(NodeKind.NameRef, name, target.line, target.col)
                    ref.defs.add(name)
                    ref.parent = node.id
                    ref.parent_label = name
        self.calls(s, node, principal)
        for c in s.children():
            self.stmt(c)

    def expression_node(self, s: JsStmt, e: JsNode):
        node = self.new(NodeKind.Statement, _snippet(self.src, s.start, s.end), s.line, s.col)
        node.reads |= expr_reads(e)
        node.traits |= expr_traits(e, self.counted)

    def calls(self, s: JsStmt, node: _Node, principal: JsNode | None):
        pairs: list = []
        for e in s.exprs:
            _nested_calls(e, None, pairs)
        ids: dict = {}
        if principal is not None:
            ids[id(principal)] = node.id
        for call, parent in pairs:
            if call is principal:
                continue
            sub = self.new(NodeKind.Call, _snippet(self.src, call.start, call.end), call.line, call.col,
                           callee_text(self.src, call.callee))
            sub.reads = expr_reads(call)
            sub.traits = expr_traits(call, self.counted)
            sub.parent = ids.get(id(parent), node.id) if parent is not None else node.id
            ids[id(call)] = sub.id

    def opaque(self, s: JsStmt):
        node = self.new(NodeKind.Statement, _snippet(self.src, s.start, s.end), s.line, s.col)
        toks = tokenize(self.src[s.start:s.end])
        for i, t in enumerate(toks):
            if t.kind != "id":
                continue
            prev = toks[i - 1].text if i else ""
            if prev in (".", "?."):
                continue
            node.reads.add(t.text)
            nxt = toks[i + 1] if i + 1 < len(toks) else None
            if nxt is not None and nxt.kind == "op" and nxt.text == "=":
                node.defs.add(t.text)
            if t.text == "typeof":
                node.traits.add(TYPEOF_TRAIT)
        node.reads -= _NOT_VARIABLES


def script_nodes(fn: ScriptFunction) -> list:
    b = _Builder(fn)
    for s in fn.body:
        b.stmt(s)
    return b.nodes


def build_script_dfg(fn: ScriptFunction) -> FunctionGraph:
    """Def-use graph of one script function.

    Edge u->v labelled x when node u defines x and node v reads x.  The root
    feeds every node that reads a parameter.  A destructuring declaration feeds
    one NameRef node per bound name; nested calls feed their enclosing node.
    """
    facts = script_nodes(fn)
    params = set(fn.all_param_names)
    defs: dict = {}
    reads: dict = {}
    for n in facts[1:]:
        for v in n.defs:
            defs.setdefault(v, []).append(n.id)
        for v in n.reads:
            reads.setdefault(v, []).append(n.id)
    edges = []
    for n in facts[1:]:
        for v in sorted(n.reads & params):
            edges.append(FlowEdge(0, n.id, v))
        if n.parent is not None:
            if n.kind is NodeKind.NameRef:
                edges.append(FlowEdge(n.parent, n.id, n.parent_label))
            else:
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
            n.id, Language.HighLevel, n.kind, n.label, Location(fn.path, n.line, n.col),
            roles, n.callee, frozenset(n.traits),
        ))
    return FunctionGraph.build(fn.name, nodes, edges, 0)


def tag_script_roles(graph: FunctionGraph, rules: RuleSet) -> FunctionGraph:
    """Mark type checks and argument-count checks as sanitizers."""
    roles: dict = {}
    for n in graph.nodes:
        if n.language is not Language.HighLevel or n.has(Role.Root):
            continue
        callee = n.callee if n.kind is NodeKind.Call else ""
        if rules.is_script_sanitizer(callee, n.traits) or ARGCOUNT_TRAIT in n.traits:
            roles[n.id] = {Role.Sanitizer}
    return graph.with_roles(roles) if roles else graph
