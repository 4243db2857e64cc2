"""Recursive-descent / Pratt parser for the JavaScript subset.

Every function literal (declaration, expression, arrow, method) becomes a
:class:`ScriptFunction`.  Statements the grammar does not cover are kept as
opaque statements up to the next ``;`` or line break at depth zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .lexer import JsToken, tokenize

TOP_LEVEL = "<top-level>"

ASSIGN_OPS = frozenset({
    "=", "+=", "-=", "*=", "/=", "%=", "**=", "<<=", ">>=", ">>>=", "&=", "|=", "^=",
    "&&=", "||=", "??=",
})
BINARY_PREC = {
    "??": 1, "||": 2, "&&": 3, "|": 4, "^": 5, "&": 6,
    "==": 7, "!=": 7, "===": 7, "!==": 7,
    "<": 8, ">": 8, "<=": 8, ">=": 8, "instanceof": 8, "in": 8,
    "<<": 9, ">>": 9, ">>>": 9, "+": 10, "-": 10, "*": 11, "/": 11, "%": 11, "**": 12,
}
PREFIX_OPS = frozenset({"!", "~", "-", "+", "++", "--"})
PREFIX_WORDS = frozenset({"typeof", "void", "delete", "await"})
RESERVED = frozenset({
    "break", "case", "catch", "class", "const", "continue", "debugger", "default",
    "delete", "do", "else", "export", "extends", "finally", "for", "function", "if",
    "import", "in", "instanceof", "new", "return", "super", "switch", "this", "throw",
    "try", "typeof", "var", "void", "while", "with", "null", "true", "false",
})
ROUTE_METHODS = frozenset({"get", "post", "put", "delete", "patch", "use", "all", "head", "options"})


class ParseFail(Exception):
    pass


@dataclass
class JsNode:
    """Expression node.

    ``text`` is the identifier for names, the literal for literals, the
    property name for member access, the operator for operators and the key
    for object properties.  ``fn`` links function literals to their
    :class:`ScriptFunction`.
    """

    kind: str
    text: str = ""
    kids: tuple = ()
    line: int = 0
    col: int = 0
    start: int = 0  # char offset
    end: int = 0
    fn: "ScriptFunction | None" = field(default=None, repr=False)
    flag: bool = False  # computed member / shorthand property / optional call

    def walk(self):
        """Pre-order traversal that does not enter nested function bodies."""
        yield self
        if self.kind in ("func", "class"):
            if self.kind == "class":
                for k in self.kids:
                    yield from k.walk()
            return
        for k in self.kids:
            yield from k.walk()

    @property
    def callee(self):
        return self.kids[0] if self.kind in ("call", "new") else None

    @property
    def args(self) -> tuple:
        return self.kids[1:] if self.kind in ("call", "new") else ()


@dataclass
class JsStmt:
    kind: str  # var expr return throw if for forin while do switch try block opaque empty func class jump
    line: int
    col: int
    start: int
    end: int
    exprs: tuple = ()
    body: tuple = ()
    orelse: tuple = ()
    decls: tuple = ()  # (pattern node, init node or None) pairs
    decl_kind: str = ""
    header_end: int = -1  # char offset where the header of a compound statement ends
    fn: "ScriptFunction | None" = field(default=None, repr=False)

    def children(self):
        return (*self.body, *self.orelse)


@dataclass
class ScriptFunction:
    name: str
    params: tuple  # pattern nodes, one per position
    body: tuple  # JsStmt
    path: str
    line: int
    col: int
    end_line: int
    kind: str  # declaration expression arrow method toplevel
    binding: str = ""  # name under which plain calls reach this function
    parent: str = ""  # canonical name of the enclosing function
    start: int = 0
    end: int = 0
    header: str = ""
    source: str = field(default="", repr=False, compare=False)

    @property
    def param_names(self) -> tuple:
        """Names bound by each parameter position (tuples, since patterns bind several)."""
        return tuple(tuple(pattern_names(p)) for p in self.params)

    @property
    def all_param_names(self) -> list:
        return [n for group in self.param_names for n in group]

    def statements(self):
        def rec(items):
            for s in items:
                yield s
                yield from rec(s.children())
        yield from rec(self.body)


@dataclass
class ScriptModule:
    path: str
    functions: list
    toplevel: ScriptFunction
    source: str = field(default="", repr=False)
    diagnostics: list = field(default_factory=list)

    def function(self, name: str) -> ScriptFunction:
        if name == TOP_LEVEL:
            return self.toplevel
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def all_functions(self) -> list:
        return [self.toplevel, *self.functions]


def pattern_names(p: JsNode) -> list:
    """Identifiers bound by a declaration or parameter pattern, in source order."""
    if p is None:
        return []
    if p.kind == "name":
        return [p.text]
    if p.kind == "assign":
        return pattern_names(p.kids[0])
    if p.kind in ("spread", "rest"):
        return pattern_names(p.kids[0])
    if p.kind == "array":
        out = []
        for k in p.kids:
            out.extend(pattern_names(k))
        return out
    if p.kind == "object":
        out = []
        for prop in p.kids:
            if prop.kind == "prop":
                out.extend(pattern_names(prop.kids[-1]))
            elif prop.kind == "spread":
                out.extend(pattern_names(prop.kids[0]))
        return out
    return []


class _Parser:
    def __init__(self, src: str, path: str):
        self.src = src
        self.path = path
        self.t = tokenize(src)
        self.i = 0
        self.n = len(self.t)
        self.functions: list = []
        self.fn_stack: list = []
        self.naming_hint: list = []  # variable name for the next function literal

    # helpers
    def peek(self, k: int = 0) -> JsToken | None:
        j = self.i + k
        return self.t[j] if j < self.n else None

    def at(self, *texts, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind in ("op", "id") and tok.text in texts

    def at_op(self, *texts, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind == "op" and tok.text in texts

    def here(self) -> JsToken:
        tok = self.peek()
        if tok is None:
            raise ParseFail("unexpected end of input")
        return tok

    def expect(self, text: str) -> JsToken:
        tok = self.here()
        if tok.text != text or tok.kind not in ("op", "id"):
            raise ParseFail(f"expected {text!r} at {tok.line}:{tok.col}")
        self.i += 1
        return tok

    def prev_end(self) -> int:
        return self.t[self.i - 1].end if self.i > 0 else 0

    def node(self, kind, text, kids, first: JsToken, **kw) -> JsNode:
        return JsNode(kind, text, tuple(kids), first.line, first.col, first.start, self.prev_end(), **kw)

    def semicolon(self):
        """Consume a statement terminator, applying automatic semicolon insertion."""
        if self.at_op(";"):
            self.i += 1
            return
        tok = self.peek()
        if tok is None or (tok.kind == "op" and tok.text == "}") or tok.nl_before:
            return
        raise ParseFail(f"missing ';' at {tok.line}:{tok.col}")

    def skip_group(self):
        """Skip a balanced bracket group starting at the current token."""
        open_ = self.here().text
        close = {"(": ")", "[": "]", "{": "}"}[open_]
        depth = 0
        while self.i < self.n:
            tok = self.t[self.i]
            if tok.kind == "op":
                if tok.text in ("(", "[", "{"):
                    depth += 1
                elif tok.text in (")", "]", "}"):
                    depth -= 1
                    if depth == 0:
                        self.i += 1
                        return
            self.i += 1
        raise ParseFail("unbalanced group")

    # program
    def program(self) -> list:
        items = []
        while self.i < self.n:
            if self.at_op("}"):
                # stray closer; drop it and continue
                self.i += 1
                continue
            items.append(self.statement())
        return items

    def block_items(self) -> list:
        items = []
        while self.i < self.n and not self.at_op("}"):
            items.append(self.statement())
        return items

    def statement(self) -> JsStmt:
        save = self.i
        nfun = len(self.functions)
        try:
            return self._statement()
        except ParseFail:
            self.i = save
            del self.functions[nfun:]
            return self.opaque()

    def opaque(self) -> JsStmt:
        first = self.here()
        start = self.i
        depth = 0
        while self.i < self.n:
            tok = self.t[self.i]
            if self.i > start and depth == 0 and tok.nl_before:
                break
            if tok.kind == "op":
                if tok.text in ("(", "[", "{"):
                    depth += 1
                elif tok.text in (")", "]", "}"):
                    if depth == 0:
                        if tok.text == "}":
                            break
                        self.i += 1
                        continue
                    depth -= 1
                elif tok.text == ";" and depth == 0:
                    self.i += 1
                    break
            self.i += 1
        if self.i == start:
            self.i += 1
        return JsStmt("opaque", first.line, first.col, first.start, self.prev_end())

    def _mk(self, kind, first: JsToken, **kw) -> JsStmt:
        return JsStmt(kind, first.line, first.col, first.start, self.prev_end(), **kw)

    def _statement(self) -> JsStmt:
        tok = self.here()
        tx = tok.text
        if tok.kind == "op":
            if tx == "{":
                self.i += 1
                body = self.block_items()
                self.expect("}")
                return self._mk("block", tok, body=tuple(body))
            if tx == ";":
                self.i += 1
                return self._mk("empty", tok)
        if tok.kind == "id":
            if tx in ("var", "let", "const") and not (tx == "let" and self.at_op("(", k=1)):
                self.i += 1
                decls = self.declarations()
                self.semicolon()
                return self._mk("var", tok, decls=decls, decl_kind=tx,
                                exprs=tuple(i for _, i in decls if i is not None))
            if tx == "function" or (tx == "async" and self.at("function", k=1) and not self.peek(1).nl_before):
                fn_node = self.function_expr(declaration=True)
                return self._mk("func", tok, fn=fn_node.fn)
            if tx == "class":
                cls = self.class_expr(declaration=True)
                return self._mk("class", tok, exprs=(cls,))
            if tx == "if":
                self.i += 1
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                hdr = self.prev_end()
                then = self.statement()
                orelse = ()
                if self.at("else"):
                    self.i += 1
                    orelse = (self.statement(),)
                return self._mk("if", tok, exprs=(cond,), body=(then,), orelse=orelse, header_end=hdr)
            if tx == "while":
                self.i += 1
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                hdr = self.prev_end()
                body = self.statement()
                return self._mk("while", tok, exprs=(cond,), body=(body,), header_end=hdr)
            if tx == "do":
                self.i += 1
                body = self.statement()
                self.expect("while")
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                if self.at_op(";"):
                    self.i += 1
                return self._mk("do", tok, exprs=(cond,), body=(body,), header_end=tok.end)
            if tx == "for":
                return self.for_statement(tok)
            if tx in ("return", "throw"):
                self.i += 1
                exprs = ()
                nxt = self.peek()
                if nxt is not None and not nxt.nl_before and not self.at_op(";", "}"):
                    exprs = (self.expr(),)
                elif tx == "throw":
                    raise ParseFail("throw needs an operand")
                self.semicolon()
                return self._mk(tx, tok, exprs=exprs)
            if tx in ("break", "continue"):
                self.i += 1
                nxt = self.peek()
                if nxt is not None and nxt.kind == "id" and not nxt.nl_before:
                    self.i += 1
                self.semicolon()
                return self._mk("jump", tok)
            if tx == "debugger":
                self.i += 1
                self.semicolon()
                return self._mk("empty", tok)
            if tx == "try":
                self.i += 1
                body = [self.statement()]
                exprs = []
                decls = []
                if self.at("catch"):
                    self.i += 1
                    if self.at_op("("):
                        self.i += 1
                        param = self.binding_target()
                        decls.append((param, None))
                        self.expect(")")
                    body.append(self.statement())
                if self.at("finally"):
                    self.i += 1
                    body.append(self.statement())
                return self._mk("try", tok, body=tuple(body), decls=tuple(decls), exprs=tuple(exprs))
            if tx == "switch":
                self.i += 1
                self.expect("(")
                disc = self.expr()
                self.expect(")")
                hdr = self.prev_end()
                self.expect("{")
                body = []
                tests = [disc]
                while not self.at_op("}"):
                    if self.at("case"):
                        self.i += 1
                        tests.append(self.expr())
                        self.expect(":")
                    elif self.at("default"):
                        self.i += 1
                        self.expect(":")
                    else:
                        body.append(self.statement())
                self.expect("}")
                return self._mk("switch", tok, exprs=tuple(tests), body=tuple(body), header_end=hdr)
            if tx in ("import", "export"):
                return self.module_item(tok)
            if self.at_op(":", k=1) and tx not in RESERVED:
                self.i += 2
                inner = self.statement()
                return self._mk("block", tok, body=(inner,))
        e = self.expr()
        self.semicolon()
        return self._mk("expr", tok, exprs=(e,))

    def module_item(self, tok: JsToken) -> JsStmt:
        if tok.text == "import" and (self.at_op("(", k=1) or self.at_op(".", k=1)):
            e = self.expr()
            self.semicolon()
            return self._mk("expr", tok, exprs=(e,))
        if tok.text == "export":
            self.i += 1
            if self.at("default"):
                self.i += 1
                if self.at("function", "class", "async"):
                    return self._statement()
                e = self.assign_expr()
                self.semicolon()
                return self._mk("expr", tok, exprs=(e,))
            if self.at("var", "let", "const", "function", "class", "async"):
                return self._statement()
        # import declarations and export lists carry no data flow we model
        while self.i < self.n and not self.at_op(";"):
            if self.i > 0 and self.peek().nl_before and self.t[self.i - 1].kind in ("str",):
                break
            if self.at_op("{"):
                self.skip_group()
                continue
            self.i += 1
        if self.at_op(";"):
            self.i += 1
        return self._mk("empty", tok)

    def declarations(self) -> tuple:
        decls = []
        while True:
            target = self.binding_target()
            init = None
            if self.at_op("="):
                self.i += 1
                if target.kind == "name":
                    self.naming_hint.append(target.text)
                    try:
                        init = self.assign_expr()
                    finally:
                        self.naming_hint.pop()
                else:
                    init = self.assign_expr()
            decls.append((target, init))
            if self.at_op(","):
                self.i += 1
                continue
            return tuple(decls)

    def binding_target(self) -> JsNode:
        tok = self.here()
        if tok.kind == "op" and tok.text in ("{", "["):
            return self.primary()
        if tok.kind == "id" and tok.text not in RESERVED:
            self.i += 1
            return self.node("name", tok.text, (), tok)
        raise ParseFail(f"binding target expected at {tok.line}:{tok.col}")

    def for_statement(self, tok: JsToken) -> JsStmt:
        self.i += 1
        if self.at("await"):
            self.i += 1
        self.expect("(")
        decls: tuple = ()
        decl_kind = ""
        exprs: list = []
        init_expr = None
        if self.at("var", "let", "const"):
            decl_kind = self.here().text
            self.i += 1
            decl_start = self.i
            target = self.binding_target()
            if self.at("of", "in"):
                self.i += 1
                rhs = self.expr()
                self.expect(")")
                hdr = self.prev_end()
                body = self.statement()
                return self._mk("forin", tok, exprs=(rhs,), decls=((target, rhs),), decl_kind=decl_kind,
                                body=(body,), header_end=hdr)
            self.i = decl_start
            decls = self.declarations()
            exprs.extend(i for _, i in decls if i is not None)
        elif not self.at_op(";"):
            init_expr = self.expr(no_in=True)
            if self.at("of", "in"):
                self.i += 1
                rhs = self.expr()
                self.expect(")")
                hdr = self.prev_end()
                body = self.statement()
                assign = JsNode("assign", "=", (init_expr, rhs), init_expr.line, init_expr.col, init_expr.start, rhs.end)
                return self._mk("forin", tok, exprs=(assign,), body=(body,), header_end=hdr)
            exprs.append(init_expr)
        self.expect(";")
        if not self.at_op(";"):
            exprs.append(self.expr())
        self.expect(";")
        if not self.at_op(")"):
            exprs.append(self.expr())
        self.expect(")")
        hdr = self.prev_end()
        body = self.statement()
        return self._mk("for", tok, exprs=tuple(exprs), decls=decls, decl_kind=decl_kind, body=(body,), header_end=hdr)

    # functions
    def _new_function(self, kind: str, first: JsToken, declared: str, binding: str) -> ScriptFunction:
        fn = ScriptFunction("", (), (), self.path, first.line, first.col, first.line, kind,
                            binding=binding, start=first.start, source=self.src)
        fn._declared = declared  # resolved into a canonical name after parsing
        self.functions.append(fn)
        return fn

    def params(self) -> tuple:
        self.expect("(")
        out = []
        while not self.at_op(")"):
            if self.at_op("..."):
                tok = self.here()
                self.i += 1
                out.append(self.node("rest", "...", (self.binding_target(),), tok))
            else:
                target = self.binding_target()
                if self.at_op("="):
                    tok = self.here()
                    self.i += 1
                    default = self.assign_expr()
                    target = JsNode("assign", "=", (target, default), target.line, target.col, target.start, default.end)
                out.append(target)
            if self.at_op(","):
                self.i += 1
                continue
            break
        self.expect(")")
        return tuple(out)

    def function_body(self, fn: ScriptFunction):
        self.fn_stack.append(fn)
        hint_depth = len(self.naming_hint)
        self.naming_hint.append(None)
        try:
            self.expect("{")
            fn.header = _squash(self.src[fn.start:self.t[self.i - 1].start])
            body = self.block_items()
            close = self.expect("}")
        finally:
            del self.naming_hint[hint_depth:]
            self.fn_stack.pop()
        fn.body = tuple(body)
        fn.end_line = close.line
        fn.end = close.end

    def function_expr(self, declaration: bool = False) -> JsNode:
        first = self.here()
        if self.at("async"):
            self.i += 1
        self.expect("function")
        if self.at_op("*"):
            self.i += 1
        name = ""
        if self.peek() is not None and self.peek().kind == "id" and not self.at_op("("):
            name = self.here().text
            self.i += 1
        hint = self.naming_hint[-1] if self.naming_hint else None
        declared = name or (hint or "")
        binding = name if declaration else (hint or "")
        fn = self._new_function("declaration" if declaration else "expression", first, declared, binding)
        fn.params = self.params()
        self.function_body(fn)
        return self.node("func", fn.name, (), first, fn=fn)

    def arrow_function(self, first: JsToken, params: tuple) -> JsNode:
        hint = self.naming_hint[-1] if self.naming_hint else None
        fn = self._new_function("arrow", first, hint or "", hint or "")
        fn.params = params
        self.expect("=>")
        if self.at_op("{"):
            self.function_body(fn)
        else:
            self.fn_stack.append(fn)
            self.naming_hint.append(None)
            try:
                fn.header = _squash(self.src[fn.start:self.t[self.i - 1].end])
                body_tok = self.here()
                e = self.assign_expr()
            finally:
                self.naming_hint.pop()
                self.fn_stack.pop()
            fn.body = (JsStmt("return", body_tok.line, body_tok.col, e.start, e.end, exprs=(e,)),)
            fn.end_line = self.t[self.i - 1].line
            fn.end = e.end
        return self.node("func", "", (), first, fn=fn)

    def is_arrow_ahead(self) -> bool:
        """At '(' : does the matching ')' precede '=>' ?"""
        j = self.i
        depth = 0
        while j < self.n:
            tok = self.t[j]
            if tok.kind == "op":
                if tok.text in ("(", "[", "{"):
                    depth += 1
                elif tok.text in (")", "]", "}"):
                    depth -= 1
                    if depth == 0:
                        nxt = self.t[j + 1] if j + 1 < self.n else None
                        return nxt is not None and nxt.kind == "op" and nxt.text == "=>" and not nxt.nl_before
            j += 1
        return False

    def class_expr(self, declaration: bool = False) -> JsNode:
        first = self.expect("class")
        name = ""
        if self.peek() is not None and self.peek().kind == "id" and self.here().text not in ("extends",):
            name = self.here().text
            self.i += 1
        kids = []
        if self.at("extends"):
            self.i += 1
            kids.append(self.lhs_expr())
        self.expect("{")
        owner = name or (self.naming_hint[-1] if self.naming_hint and self.naming_hint[-1] else f"anon@{first.line}:{first.col}")
        while not self.at_op("}"):
            if self.at_op(";"):
                self.i += 1
                continue
            mtok = self.here()
            if self.at("static") and not self.at_op("(", k=1) and not self.at_op("=", k=1):
                self.i += 1
                if self.at_op("{"):
                    # static initialization block
                    self.skip_group()
                    continue
            is_async = self.at("async") and not self.at_op("(", k=1) and not self.here().text == "=" and not self.peek(1).nl_before
            if is_async:
                self.i += 1
            if self.at_op("*"):
                self.i += 1
            if self.at("get", "set") and not self.at_op("(", k=1) and not self.at_op("=", k=1):
                self.i += 1
            key = self.property_key()
            if self.at_op("("):
                fn = self._new_function("method", mtok, f"{owner}.{key.text or 'anon'}", "")
                fn._method = True
                fn.params = self.params()
                self.function_body(fn)
                kids.append(self.node("func", fn.name, (), mtok, fn=fn))
            else:
                if self.at_op("="):
                    self.i += 1
                    kids.append(self.assign_expr())
                self.semicolon()
        self.expect("}")
        return self.node("class", name, kids, first)

    def property_key(self) -> JsNode:
        tok = self.here()
        if tok.kind == "op" and tok.text == "[":
            self.i += 1
            e = self.assign_expr()
            self.expect("]")
            return self.node("computed", "", (e,), tok)
        if tok.kind == "op" and tok.text == "#":
            self.i += 1
            tok2 = self.here()
            self.i += 1
            return self.node("key", "#" + tok2.text, (), tok)
        if tok.kind in ("id", "num"):
            self.i += 1
            return self.node("key", tok.text, (), tok)
        if tok.kind == "str":
            self.i += 1
            return self.node("key", tok.text[1:-1], (), tok)
        raise ParseFail(f"property key expected at {tok.line}:{tok.col}")

    # expressions
    def expr(self, no_in: bool = False) -> JsNode:
        first = self.here()
        e = self.assign_expr(no_in)
        if not self.at_op(","):
            return e
        items = [e]
        while self.at_op(","):
            self.i += 1
            items.append(self.assign_expr(no_in))
        return self.node("seq", ",", items, first)

    def assign_expr(self, no_in: bool = False) -> JsNode:
        first = self.here()
        # arrow functions
        if first.kind == "id" and first.text == "async" and not self.at_op("=>", k=1):
            nxt = self.peek(1)
            if nxt is not None and not nxt.nl_before:
                if nxt.kind == "id" and self.at_op("=>", k=2) and nxt.text not in RESERVED:
                    self.i += 2
                    return self.arrow_function(first, (JsNode("name", nxt.text, (), nxt.line, nxt.col, nxt.start, nxt.end),))
                if nxt.kind == "op" and nxt.text == "(":
                    save = self.i
                    self.i += 1
                    if self.is_arrow_ahead():
                        params = self.params()
                        return self.arrow_function(first, params)
                    self.i = save
        if first.kind == "id" and first.text not in RESERVED and self.at_op("=>", k=1):
            self.i += 1
            p = JsNode("name", first.text, (), first.line, first.col, first.start, first.end)
            return self.arrow_function(first, (p,))
        if first.kind == "op" and first.text == "(" and self.is_arrow_ahead():
            params = self.params()
            return self.arrow_function(first, params)
        if first.kind == "id" and first.text == "yield" and self.fn_stack:
            self.i += 1
            if self.at_op("*"):
                self.i += 1
            nxt = self.peek()
            if nxt is None or nxt.nl_before or self.at_op(")", "]", "}", ",", ";", ":"):
                return self.node("unary", "yield", (), first)
            operand = self.assign_expr(no_in)
            return self.node("unary", "yield", (operand,), first)
        lhs = self.cond_expr(no_in)
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text in ASSIGN_OPS:
            self.i += 1
            hint = _assign_hint(lhs)
            self.naming_hint.append(hint)
            try:
                rhs = self.assign_expr(no_in)
            finally:
                self.naming_hint.pop()
            return self.node("assign", tok.text, (lhs, rhs), first)
        return lhs

    def cond_expr(self, no_in: bool = False) -> JsNode:
        first = self.here()
        c = self.binary(1, no_in)
        if self.at_op("?"):
            self.i += 1
            self.naming_hint.append(None)
            try:
                a = self.assign_expr()
                self.expect(":")
                b = self.assign_expr(no_in)
            finally:
                self.naming_hint.pop()
            return self.node("cond", "?", (c, a, b), first)
        return c

    def binary(self, minp: int, no_in: bool = False) -> JsNode:
        first = self.here()
        left = self.unary()
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in ("op", "id"):
                break
            if tok.kind == "id" and tok.text not in ("instanceof", "in"):
                break
            if no_in and tok.text == "in":
                break
            p = BINARY_PREC.get(tok.text)
            if p is None or p < minp:
                break
            self.i += 1
            # ** is right associative
            right = self.binary(p if tok.text == "**" else p + 1, no_in)
            left = self.node("binary", tok.text, (left, right), first)
        return left

    def unary(self) -> JsNode:
        first = self.here()
        if first.kind == "op" and first.text in PREFIX_OPS:
            self.i += 1
            operand = self.unary()
            kind = "update" if first.text in ("++", "--") else "unary"
            return self.node(kind, first.text, (operand,), first)
        if first.kind == "id" and first.text in PREFIX_WORDS:
            nxt = self.peek(1)
            if first.text != "await" or (nxt is not None and not (nxt.kind == "op" and nxt.text in (")", ";", ",", "=", "=>", "]", "}", "."))):
                self.i += 1
                operand = self.unary()
                return self.node("unary", first.text, (operand,), first)
        e = self.postfix_expr()
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text in ("++", "--") and not tok.nl_before:
            self.i += 1
            return self.node("update", tok.text, (e,), first, flag=True)
        return e

    def lhs_expr(self) -> JsNode:
        return self.postfix_expr()

    def postfix_expr(self) -> JsNode:
        first = self.here()
        if first.kind == "id" and first.text == "new":
            e = self.new_expr()
        else:
            e = self.primary()
        while True:
            tok = self.peek()
            if tok is None:
                return e
            if tok.kind == "op" and tok.text in (".", "?."):
                self.i += 1
                if self.at_op("("):
                    args = self.arguments()
                    e = self.node("call", "", (e, *args), first, flag=True)
                    continue
                if self.at_op("["):
                    self.i += 1
                    idx = self.expr()
                    self.expect("]")
                    e = self.node("index", "", (e, idx), first)
                    continue
                name_tok = self.here()
                if name_tok.kind == "op" and name_tok.text == "#":
                    self.i += 1
                    name_tok = self.here()
                if name_tok.kind != "id":
                    raise ParseFail(f"property name expected at {name_tok.line}:{name_tok.col}")
                self.i += 1
                e = self.node("member", name_tok.text, (e,), first)
            elif tok.kind == "op" and tok.text == "[":
                self.i += 1
                idx = self.expr()
                self.expect("]")
                e = self.node("index", "", (e, idx), first)
            elif tok.kind == "op" and tok.text == "(":
                args = self.arguments()
                e = self.node("call", "", (e, *args), first)
            elif tok.kind == "template":
                # tagged template
                self.i += 1
                lit = JsNode("lit", tok.text, (), tok.line, tok.col, tok.start, tok.end)
                e = self.node("call", "", (e, lit), first)
            else:
                return e

    def new_expr(self) -> JsNode:
        first = self.expect("new")
        if self.at_op("."):
            # new.target
            self.i += 1
            self.here()
            self.i += 1
            return self.node("name", "new.target", (), first)
        if self.at("new"):
            callee = self.new_expr()
        else:
            callee = self.primary()
        while self.at_op(".", "["):
            if self.at_op("."):
                self.i += 1
                name_tok = self.here()
                self.i += 1
                callee = self.node("member", name_tok.text, (callee,), first)
            else:
                self.i += 1
                idx = self.expr()
                self.expect("]")
                callee = self.node("index", "", (callee, idx), first)
        args = self.arguments() if self.at_op("(") else ()
        return self.node("new", "", (callee, *args), first)

    def arguments(self) -> tuple:
        self.expect("(")
        args = []
        self.naming_hint.append(None)
        try:
            while not self.at_op(")"):
                if self.at_op("..."):
                    tok = self.here()
                    self.i += 1
                    inner = self.assign_expr()
                    args.append(self.node("spread", "...", (inner,), tok))
                else:
                    args.append(self.assign_expr())
                if self.at_op(","):
                    self.i += 1
                    continue
                break
            self.expect(")")
        finally:
            self.naming_hint.pop()
        return tuple(args)

    def primary(self) -> JsNode:
        tok = self.here()
        k = tok.kind
        if k in ("num", "str", "template", "regex"):
            self.i += 1
            return self.node("lit", tok.text, (), tok)
        if k == "id":
            tx = tok.text
            if tx in ("true", "false", "null"):
                self.i += 1
                return self.node("lit", tx, (), tok)
            if tx == "this" or tx == "super":
                self.i += 1
                return self.node("name", tx, (), tok)
            if tx == "function" or (tx == "async" and self.at("function", k=1)):
                return self.function_expr()
            if tx == "class":
                return self.class_expr()
            if tx == "import":
                self.i += 1
                return self.node("name", "import", (), tok)
            if tx in RESERVED and tx not in ("in", "instanceof"):
                raise ParseFail(f"unexpected keyword {tx!r} at {tok.line}:{tok.col}")
            self.i += 1
            return self.node("name", tx, (), tok)
        if k == "op":
            tx = tok.text
            if tx == "(":
                self.i += 1
                self.naming_hint.append(None)
                try:
                    e = self.expr()
                finally:
                    self.naming_hint.pop()
                self.expect(")")
                return e
            if tx == "[":
                return self.array_literal()
            if tx == "{":
                return self.object_literal()
        raise ParseFail(f"unexpected {tok.text!r} at {tok.line}:{tok.col}")

    def array_literal(self) -> JsNode:
        first = self.expect("[")
        elems = []
        self.naming_hint.append(None)
        try:
            while not self.at_op("]"):
                if self.at_op(","):
                    self.i += 1
                    continue
                if self.at_op("..."):
                    tok = self.here()
                    self.i += 1
                    elems.append(self.node("spread", "...", (self.assign_expr(),), tok))
                else:
                    elems.append(self.assign_expr())
                if self.at_op(","):
                    self.i += 1
                    continue
                break
            self.expect("]")
        finally:
            self.naming_hint.pop()
        return self.node("array", "[]", elems, first)

    def object_literal(self) -> JsNode:
        first = self.expect("{")
        props = []
        while not self.at_op("}"):
            ptok = self.here()
            if self.at_op("..."):
                self.i += 1
                self.naming_hint.append(None)
                try:
                    props.append(self.node("spread", "...", (self.assign_expr(),), ptok))
                finally:
                    self.naming_hint.pop()
            else:
                is_async = self.at("async") and not self.at_op(":", ",", "(", "}", k=1)
                if is_async:
                    self.i += 1
                if self.at_op("*"):
                    self.i += 1
                if self.at("get", "set") and not self.at_op(":", ",", "(", "}", k=1):
                    self.i += 1
                key = self.property_key()
                if self.at_op(":"):
                    self.i += 1
                    self.naming_hint.append(None)
                    try:
                        value = self.assign_expr()
                    finally:
                        self.naming_hint.pop()
                    props.append(self.node("prop", key.text, (key, value), ptok))
                elif self.at_op("("):
                    fn = self._new_function("method", ptok, "", "")
                    fn.params = self.params()
                    self.function_body(fn)
                    value = self.node("func", "", (), ptok, fn=fn)
                    props.append(self.node("prop", key.text, (key, value), ptok))
                else:
                    # shorthand, possibly with a default (only valid as a pattern)
                    if key.kind != "key" or not key.text or not (key.text[0].isalpha() or key.text[0] in "_$"):
                        raise ParseFail("bad shorthand property")
                    name = JsNode("name", key.text, (), key.line, key.col, key.start, key.end)
                    value = name
                    if self.at_op("="):
                        self.i += 1
                        default = self.assign_expr()
                        value = JsNode("assign", "=", (name, default), name.line, name.col, name.start, default.end)
                    props.append(self.node("prop", key.text, (key, value), ptok, flag=True))
            if self.at_op(","):
                self.i += 1
                continue
            break
        self.expect("}")
        return self.node("object", "{}", props, first)


def _assign_hint(lhs: JsNode) -> str | None:
    return lhs.text if lhs.kind == "name" else None


def _squash(text: str) -> str:
    out = " ".join(text.split())
    return out if len(out) <= 120 else out[:117] + "..."


def _assign_names(functions: list):
    counts: dict = {}
    for fn in functions:
        d = fn._declared
        if d:
            counts[d] = counts.get(d, 0) + 1
    for fn in functions:
        d = fn._declared
        if not d:
            fn.name = f"anon@{fn.line}:{fn.col}"
        elif counts[d] > 1:
            fn.name = f"{d}@{fn.line}:{fn.col}"
        else:
            fn.name = d


def parse_module(text: str, path: str = "<memory>") -> ScriptModule:
    """Parse a script file; never raises on syntax outside the subset."""
    p = _Parser(text, path)
    body = p.program()
    top = ScriptFunction(TOP_LEVEL, (), tuple(body), path, 1, 0, p.t[-1].line if p.t else 1, "toplevel",
                         start=0, end=len(text), header=TOP_LEVEL, source=text)
    # names are only final once duplicates are known, so parents are linked afterwards
    _link_parents(p.functions)
    _assign_names(p.functions)
    for fn in p.functions:
        fn.parent = fn._parent.name if fn._parent is not None else TOP_LEVEL
        if not fn.header:
            fn.header = fn.name
    for fn in p.functions:
        for attr in ("_declared", "_parent"):
            if hasattr(fn, attr):
                delattr(fn, attr)
    functions = sorted(p.functions, key=lambda f: (f.start, f.line, f.col))
    return ScriptModule(path, functions, top, text)


def _link_parents(functions: list):
    """Record each function's lexically enclosing function (by source span)."""
    spans = sorted(functions, key=lambda f: (f.start, -f.end))
    stack: list = []
    for fn in spans:
        while stack and not (stack[-1].start <= fn.start and fn.end <= stack[-1].end):
            stack.pop()
        fn._parent = stack[-1] if stack else None
        stack.append(fn)


def parse_script(text: str, path: str = "<memory>") -> list:
    """All function literals in a file, in source order."""
    return parse_module(text, path).functions


def parse_script_path(path) -> ScriptModule:
    path = Path(path)
    return parse_module(path.read_text(encoding="utf-8", errors="replace"), str(path))
