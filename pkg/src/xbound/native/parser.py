"""Recursive-descent parser for the C/C++ subset found in native extensions.

The parser never gives up on a file.  Top-level constructs are split into
chunks at ``;`` and ``{``; chunks that look like function headers get their
bodies parsed statement by statement, everything else is skipped to the next
balanced brace.  Inside a body, a statement that does not fit the grammar is
kept as an opaque statement spanning up to the next ``;`` at depth zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .lexer import Token, tokenize

BUILTIN_TYPES = frozenset({
    "void", "bool", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "auto", "wchar_t", "char8_t", "char16_t", "char32_t", "__int64",
})
QUALIFIERS = frozenset({
    "const", "volatile", "static", "extern", "inline", "constexpr", "register",
    "mutable", "thread_local", "struct", "class", "enum", "union", "typename",
    "virtual", "explicit", "friend", "__inline", "NAN_INLINE",
})
KEYWORDS = frozenset({
    "if", "else", "while", "do", "for", "switch", "case", "default", "return",
    "break", "continue", "goto", "try", "catch", "throw", "delete", "new",
    "sizeof", "alignof", "this", "true", "false", "nullptr", "operator", "using",
    "typedef", "namespace", "template", "static_assert", "static_cast",
    "reinterpret_cast", "const_cast", "dynamic_cast", "public", "private",
    "protected",
})
CASTS = frozenset({"static_cast", "reinterpret_cast", "const_cast", "dynamic_cast"})
ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "^=", "|="})
BINARY_PREC = {
    "||": 4, "&&": 5, "|": 6, "^": 7, "&": 8, "==": 9, "!=": 9,
    "<": 10, ">": 10, "<=": 10, ">=": 10, "<=>": 10, "<<": 11, ">>": 11,
    "+": 12, "-": 12, "*": 13, "/": 13, "%": 13, ".*": 14, "->*": 14,
}
PREFIX_OPS = frozenset({"!", "~", "-", "+", "*", "&", "++", "--"})
TRAILING_QUALIFIERS = frozenset({"const", "noexcept", "override", "final", "volatile", "&", "&&"})

# Macros that expand to a function header; value = implicit parameters.
METHOD_MACROS = {
    "NAN_METHOD": (("info", "Nan::FunctionCallbackInfo<v8::Value>&"),),
    "NAN_GETTER": (("property", "v8::Local<v8::String>"), ("info", "Nan::PropertyCallbackInfo<v8::Value>&")),
    "NAN_SETTER": (
        ("property", "v8::Local<v8::String>"),
        ("value", "v8::Local<v8::Value>"),
        ("info", "Nan::PropertyCallbackInfo<void>&"),
    ),
    "NAN_MODULE_INIT": (("target", "Nan::ADDON_REGISTER_FUNCTION_ARGS_TYPE"),),
    "NAPI_MODULE_INIT": (("env", "napi_env"), ("exports", "napi_value")),
}

# Callees whose last name segment marks a potential registration.
REGISTRATION_CALLEES = frozenset({
    "Set", "SetMethod", "SetPrototypeMethod", "NODE_SET_METHOD",
    "NODE_SET_PROTOTYPE_METHOD", "Export", "napi_define_properties",
    "napi_create_function", "InstanceMethod", "StaticMethod",
    "rb_define_method", "rb_define_singleton_method",
    "rb_define_module_function", "rb_define_global_function",
    "PyModule_Create", "PyModule_Create2", "Py_InitModule", "Py_InitModule3",
})

NATIVE_SUFFIXES = (".c", ".cc", ".cpp", ".cxx", ".h", ".hh", ".hpp")


class ParseFail(Exception):
    pass


@dataclass
class Expr:
    """Expression node.

    ``text`` holds the identifier for names, the literal for literals, the
    member name for member access, the operator for unary/binary/assign, the
    type for casts and the normalized callee text for calls.
    """

    kind: str
    text: str = ""
    kids: tuple = ()
    line: int = 0
    col: int = 0
    start: int = 0  # token index
    end: int = 0  # token index, exclusive

    def walk(self, into_lambdas: bool = False):
        yield self
        if self.kind == "lambda" and not into_lambdas:
            return
        for k in self.kids:
            yield from k.walk(into_lambdas)

    @property
    def callee(self) -> "Expr | None":
        return self.kids[0] if self.kind == "call" else None

    @property
    def args(self) -> tuple:
        return self.kids[1:] if self.kind == "call" else ()


@dataclass
class Declarator:
    name: str
    pointer: bool
    array: bool
    init: Expr | None  # `= value` or `= {...}`
    ctor: tuple | None  # `(args)` or `{args}` direct initialization
    dims: tuple = ()
    line: int = 0
    col: int = 0

    @property
    def initialized(self) -> bool:
        return self.init is not None or self.ctor is not None


@dataclass
class Stmt:
    """Statement node; ``exprs`` are the expressions evaluated by the statement itself."""

    kind: str  # decl expr return if while do for switch block opaque label empty jump try
    line: int
    col: int
    start: int
    end: int
    exprs: tuple = ()
    body: tuple = ()
    orelse: tuple = ()
    type_text: str = ""
    declarators: tuple = ()
    header_end: int = -1  # last token index of the header for compound statements

    def children(self):
        return (*self.body, *self.orelse)


@dataclass(frozen=True)
class Param:
    name: str
    type: str


@dataclass
class NativeFunction:
    name: str
    params: tuple
    body: tuple
    path: str
    line: int  # line of the header
    end_line: int
    header: str
    macro: str = ""  # method macro the header was written with, if any
    tokens: list = field(default_factory=list, repr=False, compare=False)
    source: str = field(default="", repr=False, compare=False)

    def __post_init__(self):
        if not self.name:
            raise ValueError("native function needs a symbol name")

    @property
    def short_name(self) -> str:
        return self.name.rsplit("::", 1)[-1]

    def statements(self):
        """Every statement in source order, compound statements before their children."""
        def rec(items):
            for s in items:
                yield s
                yield from rec(s.children())
        yield from rec(self.body)


@dataclass
class RegistrationSite:
    callee: str
    call: Expr
    path: str
    function: str
    tables: dict = field(repr=False, default_factory=dict)

    @property
    def line(self) -> int:
        return self.call.line

    @property
    def name(self) -> str:
        return self.callee.replace(".", "::").rsplit("::", 1)[-1]


@dataclass
class NativeFile:
    path: str
    functions: list
    sites: list
    tables: dict
    diagnostics: list = field(default_factory=list)

    def __iter__(self):
        # unpacks as (functions, registration sites)
        yield self.functions
        yield self.sites


def join_type(tokens) -> str:
    """Type text with spaces only between adjacent words (``unsigned int``, ``Napi::Env``)."""
    out = []
    prev = None
    for t in tokens:
        if prev is not None and prev.kind == "id" and t.kind == "id":
            out.append(" ")
        out.append(t.text)
        prev = t
    return "".join(out)


def normalize_callee(tokens, start: int, end: int) -> str:
    return "".join("." if t.text == "->" else t.text for t in tokens[start:end])


class _Parser:
    def __init__(self, tokens: list, start: int, end: int):
        self.t = tokens
        self.i = start
        self.end = end

    # token helpers
    def peek(self, k: int = 0) -> Token | None:
        j = self.i + k
        return self.t[j] if j < self.end else None

    def at(self, *texts, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind in ("op", "id") and tok.text in texts

    def at_id(self, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.kind == "id"

    def expect(self, text: str) -> Token:
        if not self.at(text):
            tok = self.peek()
            raise ParseFail(f"expected {text!r} at {tok.line if tok else 'EOF'}")
        tok = self.t[self.i]
        self.i += 1
        return tok

    def here(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseFail("unexpected end")
        return tok

    def skip_balanced(self) -> int:
        """Skip a bracketed group starting at the current token; return its closing index."""
        open_ = self.here().text
        close = {"(": ")", "[": "]", "{": "}"}[open_]
        depth = 0
        while self.i < self.end:
            tx = self.t[self.i].text if self.t[self.i].kind == "op" else None
            if tx == open_:
                depth += 1
            elif tx == close:
                depth -= 1
                if depth == 0:
                    self.i += 1
                    return self.i - 1
            self.i += 1
        raise ParseFail("unbalanced group")

    # statements
    def block_items(self) -> list:
        items = []
        while self.i < self.end and not self.at("}"):
            items.append(self.statement())
        return items

    def statement(self) -> Stmt:
        save = self.i
        try:
            return self._statement()
        except ParseFail:
            self.i = save
            return self.opaque()

    def _mk(self, kind, first: Token, start: int, **kw) -> Stmt:
        return Stmt(kind, first.line, first.col, start, self.i, **kw)

    def _statement(self) -> Stmt:
        tok = self.here()
        start = self.i
        tx = tok.text
        if tok.kind == "op":
            if tx == "{":
                self.i += 1
                body = self.block_items()
                self.expect("}")
                return self._mk("block", tok, start, body=tuple(body))
            if tx == ";":
                self.i += 1
                return self._mk("empty", tok, start)
        if tok.kind == "id":
            if tx == "if":
                self.i += 1
                if self.at("constexpr"):
                    self.i += 1
                self.expect("(")
                cond = self.condition()
                self.expect(")")
                hdr = self.i - 1
                then = self.statement()
                orelse = ()
                if self.at("else"):
                    self.i += 1
                    orelse = (self.statement(),)
                return self._mk("if", tok, start, exprs=cond, body=(then,), orelse=orelse, header_end=hdr)
            if tx in ("while", "switch"):
                self.i += 1
                self.expect("(")
                cond = self.condition()
                self.expect(")")
                hdr = self.i - 1
                body = self.statement()
                return self._mk(tx, tok, start, exprs=cond, body=(body,), header_end=hdr)
            if tx == "do":
                self.i += 1
                body = self.statement()
                self.expect("while")
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                self.expect(";")
                return self._mk("do", tok, start, exprs=(cond,), body=(body,), header_end=start)
            if tx == "for":
                return self.for_statement(tok, start)
            if tx in ("case", "default"):
                self.i += 1
                if tx == "case":
                    self.cond_expr()
                self.expect(":")
                return self._mk("label", tok, start)
            if tx == "return":
                self.i += 1
                exprs = ()
                if not self.at(";"):
                    exprs = (self.init_list() if self.at("{") else self.expr(),)
                self.expect(";")
                return self._mk("return", tok, start, exprs=exprs)
            if tx == "throw":
                self.i += 1
                exprs = () if self.at(";") else (self.expr(),)
                self.expect(";")
                return self._mk("expr", tok, start, exprs=exprs)
            if tx in ("break", "continue"):
                self.i += 1
                self.expect(";")
                return self._mk("jump", tok, start)
            if tx == "goto":
                self.i += 2
                self.expect(";")
                return self._mk("jump", tok, start)
            if tx == "try":
                self.i += 1
                body = [self.statement()]
                while self.at("catch"):
                    self.i += 1
                    if not self.at("("):
                        raise ParseFail("catch")
                    self.skip_balanced()
                    body.append(self.statement())
                return self._mk("block", tok, start, body=tuple(body))
            if tx in ("using", "typedef", "static_assert", "template"):
                self.skip_to_semicolon()
                return self._mk("empty", tok, start)
            if self.at(":", k=1) and tx not in KEYWORDS:
                self.i += 2
                return self._mk("label", tok, start)
        decl = self.try_decl()
        if decl is not None:
            self.expect(";")
            type_text, decls = decl
            inits = tuple(e for d in decls for e in _declarator_exprs(d))
            return self._mk("decl", tok, start, exprs=inits, type_text=type_text, declarators=tuple(decls))
        e = self.expr()
        self.expect(";")
        return self._mk("expr", tok, start, exprs=(e,))

    def condition(self) -> tuple:
        save = self.i
        decl = self.try_decl()
        if decl is not None and self.at(")"):
            type_text, decls = decl
            d = decls[0]
            if d.initialized:
                return tuple(e for e in _declarator_exprs(d))
        self.i = save
        return (self.expr(),)

    def for_statement(self, tok: Token, start: int) -> Stmt:
        self.i += 1
        self.expect("(")
        exprs: list = []
        decls: list = []
        type_text = ""
        save = self.i
        decl = self.try_decl(for_range=True)
        if decl is not None and self.at(":"):
            self.i += 1
            type_text, decls = decl
            rng = self.expr()
            self.expect(")")
            hdr = self.i - 1
            body = self.statement()
            # the loop variable is defined from the range expression
            return self._mk(
                "for", tok, start, exprs=(rng,), body=(body,), type_text=type_text,
                declarators=tuple(Declarator(d.name, d.pointer, d.array, rng, None, (), d.line, d.col) for d in decls),
                header_end=hdr,
            )
        self.i = save
        if self.at(";"):
            self.i += 1
        else:
            decl = self.try_decl()
            if decl is not None:
                type_text, decls = decl
                for d in decls:
                    exprs.extend(_declarator_exprs(d))
            else:
                exprs.append(self.expr())
            self.expect(";")
        if not self.at(";"):
            exprs.append(self.expr())
        self.expect(";")
        if not self.at(")"):
            exprs.append(self.expr())
        self.expect(")")
        hdr = self.i - 1
        body = self.statement()
        return self._mk("for", tok, start, exprs=tuple(exprs), body=(body,), type_text=type_text,
                        declarators=tuple(decls), header_end=hdr)

    def skip_to_semicolon(self):
        depth = 0
        while self.i < self.end:
            tok = self.t[self.i]
            if tok.kind == "op":
                if tok.text in "([{":
                    depth += 1
                elif tok.text in ")]}":
                    depth -= 1
                elif tok.text == ";" and depth <= 0:
                    self.i += 1
                    return
            self.i += 1

    def opaque(self) -> Stmt:
        start = self.i
        first = self.t[start]
        depth = 0
        while self.i < self.end:
            tok = self.t[self.i]
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
                    if depth == 0 and tok.text == "}":
                        self.i += 1
                        if self.at(";"):
                            self.i += 1
                        break
                elif tok.text == ";" and depth == 0:
                    self.i += 1
                    break
            self.i += 1
        if self.i == start:
            self.i += 1
        return Stmt("opaque", first.line, first.col, start, self.i)

    # declarations
    def scan_template(self, j: int) -> int | None:
        """Given t[j] == '<', return the index after the matching '>' or None."""
        depth = 0
        while j < self.end:
            tok = self.t[j]
            tx = tok.text if tok.kind == "op" else None
            if tx == "<":
                depth += 1
            elif tx == ">":
                depth -= 1
            elif tx == ">>":
                depth -= 2
            elif tx in (";", "{", "}", "&&", "||", ")", "=", "?", "!", "==", "!="):
                return None
            elif tx == "(":
                d2 = 0
                while j < self.end:
                    if self.t[j].text == "(":
                        d2 += 1
                    elif self.t[j].text == ")":
                        d2 -= 1
                        if d2 == 0:
                            break
                    j += 1
            if depth == 0:
                return j + 1
            if depth < 0:
                return None
            j += 1
        return None

    def qualified_name(self, type_context: bool = False) -> str:
        start = self.i
        if self.at("::"):
            self.i += 1
        if self.at("~"):
            self.i += 1
        tok = self.here()
        if tok.kind != "id" or (tok.text in KEYWORDS and tok.text not in ("template",)):
            raise ParseFail("name expected")
        self.i += 1
        while True:
            if self.at("<"):
                e = self.scan_template(self.i)
                if e is not None:
                    nxt = self.t[e] if e < self.end else None
                    follow = nxt is not None and nxt.text in ("(", "::", "{")
                    if type_context or follow:
                        self.i = e
            if self.at("::") and (self.at_id(k=1) or self.at("~", k=1)):
                self.i += 2 if self.at_id(k=1) else 3
                continue
            break
        return normalize_callee(self.t, start, self.i)

    def try_type(self) -> tuple | None:
        """Parse a type; return (text, strong) where strong means surely a type."""
        start = self.i
        strong = False
        seen_base = False
        while self.at_id() and self.here().text in QUALIFIERS:
            strong = strong or self.here().text in ("const", "struct", "enum", "unsigned")
            self.i += 1
        while self.at_id() and self.here().text in BUILTIN_TYPES:
            self.i += 1
            seen_base = strong = True
        if not seen_base:
            if self.at("::") or (self.at_id() and self.here().text not in KEYWORDS and self.here().text not in QUALIFIERS):
                try:
                    name = self.qualified_name(type_context=True)
                except ParseFail:
                    self.i = start
                    return None
                if "<" in name or name.endswith("_t"):
                    strong = True
            else:
                self.i = start
                return None
        while self.at_id() and self.here().text in ("const", "volatile"):
            self.i += 1
        while self.at("*", "&", "&&") or (self.at_id() and self.here().text in ("const", "volatile")):
            if self.at("*", "&", "&&"):
                strong = True
            self.i += 1
        return join_type(self.t[start:self.i]), strong

    def try_decl(self, for_range: bool = False):
        save = self.i
        try:
            res = self._decl(for_range)
        except ParseFail:
            res = None
        if res is None:
            self.i = save
        return res

    def _decl(self, for_range: bool):
        start = self.i
        tok = self.peek()
        if tok is None or tok.kind not in ("id", "op"):
            return None
        if tok.kind == "id" and tok.text in KEYWORDS:
            return None
        t = self.try_type()
        if t is None:
            return None
        # strip pointer declarator tokens back off the type text; they belong to the first declarator
        j = self.i
        while j > start and self.t[j - 1].text in ("*", "&", "&&"):
            j -= 1
        type_text = join_type(self.t[start:j])
        self.i = j
        decls = []
        while True:
            pointer = False
            while self.at("*", "&", "&&") or (self.at_id() and self.here().text in ("const", "volatile")):
                if self.at("*"):
                    pointer = True
                self.i += 1
            name_tok = self.here()
            if name_tok.kind != "id" or name_tok.text in KEYWORDS or name_tok.text in BUILTIN_TYPES:
                return None
            self.i += 1
            follow = (";", ",", "[", "(", "{", "=") + ((":", ")") if for_range else (")",))
            if not self.at(*follow):
                return None
            dims = []
            array = False
            while self.at("["):
                self.i += 1
                array = True
                if not self.at("]"):
                    dims.append(self.expr())
                self.expect("]")
            init = ctor = None
            if self.at("="):
                self.i += 1
                init = self.init_list() if self.at("{") else self.assign_expr()
            elif self.at("("):
                ctor = self.call_args()
            elif self.at("{"):
                ctor = self.init_list().kids
            decls.append(Declarator(name_tok.text, pointer, array, init, ctor, tuple(dims), name_tok.line, name_tok.col))
            if self.at(","):
                self.i += 1
                continue
            break
        if not self.at(";", ":", ")"):
            return None
        if not decls:
            return None
        return type_text, decls

    # expressions
    def _node(self, kind, text, kids, first: Token, start: int) -> Expr:
        return Expr(kind, text, tuple(kids), first.line, first.col, start, self.i)

    def expr(self) -> Expr:
        start = self.i
        first = self.here()
        e = self.assign_expr()
        if not self.at(","):
            return e
        items = [e]
        while self.at(","):
            self.i += 1
            items.append(self.assign_expr())
        return self._node("comma", ",", items, first, start)

    def assign_expr(self) -> Expr:
        start = self.i
        first = self.here()
        if self.at("throw"):
            self.i += 1
            inner = () if self.at(";", ")", ",") else (self.assign_expr(),)
            return self._node("unary", "throw", inner, first, start)
        lhs = self.cond_expr()
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text in ASSIGN_OPS:
            self.i += 1
            rhs = self.init_list() if self.at("{") else self.assign_expr()
            return self._node("assign", tok.text, (lhs, rhs), first, start)
        return lhs

    def cond_expr(self) -> Expr:
        start = self.i
        first = self.here()
        c = self.binary(4)
        if self.at("?"):
            self.i += 1
            a = self.expr()
            self.expect(":")
            b = self.assign_expr()
            return self._node("cond", "?", (c, a, b), first, start)
        return c

    def binary(self, minp: int) -> Expr:
        start = self.i
        first = self.here()
        left = self.unary()
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "op":
                break
            p = BINARY_PREC.get(tok.text)
            if p is None or p < minp:
                break
            self.i += 1
            right = self.binary(p + 1)
            left = self._node("binary", tok.text, (left, right), first, start)
        return left

    def unary(self) -> Expr:
        start = self.i
        first = self.here()
        tx = first.text
        if first.kind == "op" and tx in PREFIX_OPS:
            self.i += 1
            operand = self.unary()
            return self._node("unary", tx, (operand,), first, start)
        if first.kind == "id":
            if tx in ("sizeof", "alignof"):
                self.i += 1
                if self.at("..."):
                    self.i += 1
                if self.at("("):
                    self.skip_balanced()
                else:
                    self.unary()
                return self._node("sizeof", tx, (), first, start)
            if tx == "new":
                return self.new_expr(first, start)
            if tx == "delete":
                self.i += 1
                if self.at("["):
                    self.i += 1
                    self.expect("]")
                operand = self.unary()
                return self._node("unary", "delete", (operand,), first, start)
        if first.kind == "op" and tx == "(":
            cast = self.try_cast(first, start)
            if cast is not None:
                return cast
        return self.postfix(self.primary(), first, start)

    def try_cast(self, first: Token, start: int) -> Expr | None:
        save = self.i
        self.i += 1
        t = self.try_type()
        if t is not None and self.at(")"):
            self.i += 1
            nxt = self.peek()
            if nxt is not None:
                text, strong = t
                operand_start = nxt.kind in ("id", "num", "str", "char") or nxt.text in ("(", "!", "~")
                if strong and (operand_start or nxt.text in ("*", "&", "-", "+", "++", "--")):
                    if not (nxt.kind == "id" and nxt.text in BINARY_PREC):
                        operand = self.unary()
                        return self._node("cast", text, (operand,), first, start)
                elif not strong and nxt.kind in ("id", "num", "str", "char"):
                    operand = self.unary()
                    return self._node("cast", text, (operand,), first, start)
        self.i = save
        return None

    def new_expr(self, first: Token, start: int) -> Expr:
        self.i += 1
        if self.at("("):
            self.skip_balanced()
        t = self.try_type()
        if t is None:
            raise ParseFail("type after new")
        kids = []
        while self.at("["):
            self.i += 1
            kids.append(self.expr())
            self.expect("]")
        if self.at("("):
            kids.extend(self.call_args())
        elif self.at("{"):
            kids.extend(self.init_list().kids)
        return self._node("new", t[0], kids, first, start)

    def call_args(self) -> tuple:
        self.expect("(")
        args = []
        if self.at(")"):
            self.i += 1
            return ()
        while True:
            if self.at("{"):
                args.append(self.init_list())
            elif self.at("...") and self.at(",", ")", k=1):
                # elided argument placeholder
                tok = self.here()
                self.i += 1
                args.append(Expr("lit", "...", (), tok.line, tok.col, self.i - 1, self.i))
            else:
                args.append(self.assign_expr())
            if self.at("..."):
                self.i += 1
            if self.at(","):
                self.i += 1
                continue
            self.expect(")")
            return tuple(args)

    def init_list(self) -> Expr:
        start = self.i
        first = self.expect("{")
        elems = []
        while not self.at("}"):
            est = self.i
            etok = self.here()
            if self.at("{"):
                e = self.init_list()
            elif self.at(".") and self.at_id(k=1) and self.at("=", k=2):
                name = self.t[self.i + 1].text
                self.i += 3
                val = self.init_list() if self.at("{") else self.assign_expr()
                e = self._node("designated", name, (val,), etok, est)
            elif self.at("..."):
                self.i += 1
                e = self._node("lit", "...", (), etok, est)
            else:
                e = self.assign_expr()
            elems.append(e)
            if self.at(","):
                self.i += 1
                continue
            break
        self.expect("}")
        return self._node("init", "{}", elems, first, start)

    def primary(self) -> Expr:
        start = self.i
        tok = self.here()
        if tok.kind == "num" or tok.kind == "char":
            self.i += 1
            return self._node("lit", tok.text, (), tok, start)
        if tok.kind == "str":
            parts = []
            while self.peek() is not None and self.peek().kind in ("str", "id"):
                nxt = self.peek()
                if nxt.kind == "id":
                    # adjacent literal pieces joined by format macros (PRIu64)
                    if not (nxt.text.isupper() and self.peek(1) is not None and self.peek(1).kind == "str"):
                        break
                    self.i += 1
                    continue
                parts.append(nxt.text)
                self.i += 1
            return self._node("lit", _join_strings(parts), (), tok, start)
        if tok.kind == "op":
            if tok.text == "(":
                self.i += 1
                e = self.expr()
                self.expect(")")
                return e
            if tok.text == "::":
                name = self.qualified_name()
                return self._node("name", name, (), tok, start)
            if tok.text == "[":
                return self.lambda_expr(tok, start)
            if tok.text == "{":
                return self.init_list()
            raise ParseFail(f"unexpected {tok.text!r}")
        tx = tok.text
        if tx in ("true", "false", "nullptr", "this"):
            self.i += 1
            return self._node("lit", tx, (), tok, start)
        if tx in CASTS:
            self.i += 1
            if not self.at("<"):
                raise ParseFail("cast template")
            e = self.scan_template(self.i)
            if e is None:
                raise ParseFail("cast template")
            type_text = normalize_callee(self.t, self.i + 1, e - 1)
            self.i = e
            self.expect("(")
            operand = self.expr()
            self.expect(")")
            return self._node("cast", type_text, (operand,), tok, start)
        if tx in BUILTIN_TYPES:
            while self.at_id() and self.here().text in BUILTIN_TYPES:
                self.i += 1
            type_text = join_type(self.t[start:self.i])
            if self.at("("):
                args = self.call_args()
            elif self.at("{"):
                args = self.init_list().kids
            else:
                raise ParseFail("functional cast")
            return self._node("cast", type_text, args, tok, start)
        if tx in KEYWORDS:
            raise ParseFail(f"keyword {tx}")
        name = self.qualified_name()
        return self._node("name", name, (), tok, start)

    def lambda_expr(self, tok: Token, start: int) -> Expr:
        self.skip_balanced()
        if self.at("("):
            self.skip_balanced()
        while self.at_id() and self.here().text in ("mutable", "constexpr", "noexcept"):
            self.i += 1
        if self.at("->"):
            while self.i < self.end and not self.at("{"):
                self.i += 1
        if not self.at("{"):
            raise ParseFail("lambda body")
        self.skip_balanced()
        return self._node("lambda", "", (), tok, start)

    def postfix(self, e: Expr, first: Token, start: int) -> Expr:
        while True:
            if self.at("("):
                args = self.call_args()
                callee_text = normalize_callee(self.t, e.start, e.end)
                e = self._node("call", callee_text, (e, *args), first, start)
            elif self.at("["):
                self.i += 1
                idx = self.expr()
                self.expect("]")
                e = self._node("index", "[]", (e, idx), first, start)
            elif self.at(".", "->"):
                self.i += 1
                if self.at("template"):
                    self.i += 1
                mstart = self.i
                if self.at("~"):
                    self.i += 1
                name_tok = self.here()
                if name_tok.kind != "id":
                    raise ParseFail("member name")
                self.i += 1
                if self.at("<"):
                    end = self.scan_template(self.i)
                    if end is not None and end < self.end and self.t[end].text == "(":
                        self.i = end
                e = self._node("member", normalize_callee(self.t, mstart, self.i), (e,), first, start)
            elif self.at("++", "--"):
                op = self.here().text
                self.i += 1
                e = self._node("postfix", op, (e,), first, start)
            else:
                return e


def _join_strings(parts) -> str:
    """Concatenate adjacent string literal tokens into one quoted literal."""
    if len(parts) == 1:
        return parts[0]
    inner = []
    for p in parts:
        q = p.index('"')
        inner.append(p[q + 1:-1])
    return '"' + "".join(inner) + '"'


def _declarator_exprs(d: Declarator):
    yield from d.dims
    if d.init is not None:
        yield d.init
    if d.ctor is not None:
        yield from d.ctor


def string_value(e: Expr | None) -> str | None:
    """The contents of a plain string literal expression, else None."""
    if e is None or e.kind != "lit" or '"' not in e.text:
        return None
    q = e.text.index('"')
    return e.text[q + 1:-1]


# ---------------------------------------------------------------------------
# top-level scanning


def _split_params(tokens: list) -> tuple:
    params = []
    depth = 0
    cur: list = []
    groups = []
    for t in tokens:
        if t.kind == "op" and t.text in ("(", "[", "<", "{"):
            depth += 1
        elif t.kind == "op" and t.text in (")", "]", ">", "}"):
            depth -= 1
        elif t.kind == "op" and t.text == ">>":
            depth -= 2
        if t.kind == "op" and t.text == "," and depth == 0:
            groups.append(cur)
            cur = []
            continue
        cur.append(t)
    if cur:
        groups.append(cur)
    for g in groups:
        # default arguments are irrelevant for naming
        for k, t in enumerate(g):
            if t.kind == "op" and t.text == "=":
                g = g[:k]
                break
        while g and g[-1].kind == "op" and g[-1].text in ("]",):
            # strip array suffix
            k = len(g) - 1
            while k >= 0 and g[k].text != "[":
                k -= 1
            g = g[:k]
        if not g or (len(g) == 1 and g[0].text in ("void", "...")):
            continue
        last = g[-1]
        if (
            len(g) >= 2
            and last.kind == "id"
            and last.text not in BUILTIN_TYPES
            and last.text not in QUALIFIERS
            and not (len(g) >= 2 and g[-2].text == "::")
        ):
            params.append(Param(last.text, join_type(g[:-1])))
        else:
            params.append(Param("", join_type(g)))
    return tuple(params)


def _match_forward(tokens: list, i: int, end: int) -> int:
    """Index of the bracket closing tokens[i], or end when unbalanced."""
    open_ = tokens[i].text
    close = {"(": ")", "[": "]", "{": "}"}[open_]
    depth = 0
    for j in range(i, end):
        t = tokens[j]
        if t.kind != "op":
            continue
        if t.text == open_:
            depth += 1
        elif t.text == close:
            depth -= 1
            if depth == 0:
                return j
    return end


def _function_header(chunk: list):
    """Return (name, params, macro) when the chunk is a function header."""
    toks = list(chunk)
    if not toks:
        return None
    # ctor initializer list
    depth = 0
    for k, t in enumerate(toks):
        if t.kind == "op" and t.text in ("(", "[", "<"):
            depth += 1
        elif t.kind == "op" and t.text in (")", "]", ">"):
            depth -= 1
        elif t.kind == "op" and t.text == ":" and depth == 0 and k > 0 and toks[k - 1].text == ")":
            toks = toks[:k]
            break
    # trailing return type
    depth = 0
    for k, t in enumerate(toks):
        if t.kind == "op" and t.text == "(":
            depth += 1
        elif t.kind == "op" and t.text == ")":
            depth -= 1
        elif t.kind == "op" and t.text == "->" and depth == 0 and k > 0:
            toks = toks[:k]
            break
    while toks and toks[-1].text in TRAILING_QUALIFIERS:
        toks = toks[:-1]
    while len(toks) >= 4 and toks[-1].text == ")" and toks[-4].text in ("noexcept", "throw") and toks[-3].text == "(":
        toks = toks[:-4]
    if not toks or toks[-1].text != ")":
        return None
    depth = 0
    open_idx = None
    for k in range(len(toks) - 1, -1, -1):
        t = toks[k]
        if t.kind == "op" and t.text == ")":
            depth += 1
        elif t.kind == "op" and t.text == "(":
            depth -= 1
            if depth == 0:
                open_idx = k
                break
    if open_idx is None or open_idx == 0:
        return None
    name_end = open_idx
    j = name_end - 1
    if toks[j].kind != "id":
        return None
    if toks[j].text in KEYWORDS and toks[j].text not in ("operator",):
        return None
    # collect qualified name backwards (A::B::~C)
    while j >= 2 and toks[j - 1].text == "::" and toks[j - 2].kind == "id":
        j -= 2
    if j >= 1 and toks[j - 1].text == "~":
        j -= 1
    prefix = toks[:j]
    if any(t.kind == "op" and t.text in ("=", "(", ")") for t in prefix):
        return None
    name = "".join(t.text for t in toks[j:name_end])
    inner = toks[open_idx + 1:-1]
    bare = toks[name_end - 1].text
    if bare in METHOD_MACROS:
        implicit = tuple(Param(n, ty) for n, ty in METHOD_MACROS[bare])
        sym = "".join(t.text for t in inner) or bare
        return sym, implicit, bare
    if not prefix and bare.isupper() and len(inner) >= 1 and all(t.kind == "id" or t.text == "::" for t in inner):
        # unknown method macro `FOO(Symbol) {`
        return "".join(t.text for t in inner), (), bare
    if not prefix and name not in ("main",):
        # plain call-like chunk `foo(x) {` without return type: only accept macros
        if not bare.isupper():
            return None
    return name, _split_params(inner), ""


def _collect_tables(stmts, tables: dict):
    for s in stmts:
        if s.kind == "decl":
            for d in s.declarators:
                if d.init is not None and d.init.kind == "init":
                    tables[d.name] = d.init
                elif d.ctor is not None and d.init is None and s.type_text and any(c.kind == "init" for c in d.ctor):
                    tables[d.name] = Expr("init", "{}", tuple(d.ctor), d.line, d.col)
        _collect_tables(s.children(), tables)


def _collect_sites(fn: NativeFunction, tables: dict) -> list:
    sites = []
    for s in fn.statements():
        for e in s.exprs:
            for sub in e.walk():
                if sub.kind == "call":
                    last = sub.text.replace(".", "::").rsplit("::", 1)[-1]
                    if last in REGISTRATION_CALLEES:
                        sites.append(RegistrationSite(sub.text, sub, fn.path, fn.name, tables))
    return sites


def parse_native(text: str, path: str = "<memory>") -> NativeFile:
    """Parse C/C++ source into functions and registration call sites."""
    toks = tokenize(text)
    toks = [t for t in toks if t.kind != "pp"]
    n = len(toks)
    functions: list = []
    tables: dict = {}
    diagnostics: list = []
    scopes: list = []  # names of enclosing classes (None for namespaces/extern blocks)
    i = 0
    while i < n:
        t = toks[i]
        if t.kind == "op" and t.text == "}":
            if scopes:
                scopes.pop()
            i += 1
            if i < n and toks[i].text == ";":
                i += 1
            continue
        if t.kind == "op" and t.text == ";":
            i += 1
            continue
        if t.kind == "id" and t.text in ("public", "private", "protected") and i + 1 < n and toks[i + 1].text == ":":
            i += 2
            continue
        if t.kind == "id" and t.text == "namespace":
            j = i + 1
            while j < n and toks[j].text not in ("{", ";", "="):
                j += 1
            if j < n and toks[j].text == "{":
                scopes.append(None)
                i = j + 1
                continue
        if t.kind == "id" and t.text == "extern" and i + 2 < n and toks[i + 1].kind == "str" and toks[i + 2].text == "{":
            scopes.append(None)
            i += 3
            continue
        # gather one chunk
        j = i
        depth = 0
        while j < n:
            tj = toks[j]
            if tj.kind == "op":
                if tj.text in ("(", "["):
                    depth += 1
                elif tj.text in (")", "]"):
                    depth = max(0, depth - 1)
                elif depth == 0 and tj.text in (";", "{", "}"):
                    break
            j += 1
        chunk = toks[i:j]
        if j >= n:
            break
        term = toks[j].text
        if term == ";" or term == "}":
            i = j + 1 if term == ";" else j
            continue
        # term == "{"
        words = [c.text for c in chunk]
        is_class = (
            bool(words)
            and words[0] in ("class", "struct", "union")
            or (len(words) >= 2 and words[0] == "template" and any(w in ("class", "struct") for w in words)
                and "(" not in words)
        )
        if is_class and "(" not in words and "=" not in words:
            name_idx = next((k for k, w in enumerate(words) if w in ("class", "struct", "union")), 0) + 1
            cname = chunk[name_idx].text if name_idx < len(chunk) and chunk[name_idx].kind == "id" else None
            scopes.append(cname)
            i = j + 1
            continue
        close = _match_forward(toks, j, n)
        header = None
        if words and words[0] not in ("typedef", "enum") and "=" not in _top_level_words(chunk):
            header = _function_header(chunk)
        if header is not None:
            name, params, macro = header
            cls = next((s for s in reversed(scopes) if s), None)
            if cls and "::" not in name:
                name = f"{cls}::{name}"
            parser = _Parser(toks, j + 1, close)
            body = parser.block_items()
            while parser.i < close:
                # stray closers inside the body; keep going
                parser.i += 1
                body.extend(parser.block_items())
            header_text = " ".join(c.text for c in chunk)
            end_line = toks[close].line if close < n else toks[-1].line
            fn = NativeFunction(
                name, params, tuple(body), path, chunk[0].line if chunk else t.line, end_line,
                _tidy(header_text), macro, toks, text,
            )
            functions.append(fn)
            i = close + 1
            continue
        # non-function brace: declaration with initializer, enum, typedef, unknown
        k = close + 1
        while k < n and toks[k].text != ";" and toks[k].text != "}" and toks[k].text != "{":
            k += 1
        if "=" in _top_level_words(chunk) or (words and words[0] == "static"):
            parser = _Parser(toks, i, min(k + 1, n))
            stmt = parser.statement()
            _collect_tables([stmt], tables)
        i = k + 1 if k < n and toks[k].text == ";" else k
        if i == j:
            i = j + 1
    sites = []
    for fn in functions:
        _collect_tables(fn.body, tables)
    for fn in functions:
        sites.extend(_collect_sites(fn, tables))
    return NativeFile(path, functions, sites, tables, diagnostics)


def _top_level_words(chunk: list) -> list:
    out = []
    depth = 0
    for t in chunk:
        if t.kind == "op" and t.text in ("(", "[", "<"):
            depth += 1
        elif t.kind == "op" and t.text in (")", "]", ">"):
            depth -= 1
        elif depth == 0:
            out.append(t.text)
    return out


def _tidy(text: str) -> str:
    for a, b in ((" (", "("), ("( ", "("), (" )", ")"), (" ,", ","), (" ::", "::"), (":: ", "::"),
                 (" < ", "<"), (" >", ">"), (" &", "&"), (" *", "*"), ("< ", "<")):
        text = text.replace(a, b)
    return text


def parse_native_path(path) -> NativeFile:
    path = Path(path)
    text = path.read_text(encoding="utf-8", errors="replace")
    return parse_native(text, str(path))
