"""Recognize registration calls that expose native functions under script names."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..graph import Location
from .parser import Expr, RegistrationSite, string_value

NULLISH = frozenset({"NULL", "nullptr", "0", "nil", "Qnil"})
_WRAPPERS = frozenset({"RUBY_METHOD_FUNC", "reinterpret_cast", "static_cast", "PyCFunction"})


class ApiStyle(enum.Enum):
    NApi = "NApi"
    Nan = "Nan"
    Ruby = "Ruby"
    Python = "Python"


@dataclass(frozen=True)
class BindingEntry:
    exported: str
    symbol: str
    style: ApiStyle
    location: Location

    def __post_init__(self):
        if not self.exported or not self.symbol:
            raise ValueError("binding entry needs an exported name and a symbol")

    def to_dict(self) -> dict:
        return {
            "exported": self.exported,
            "symbol": self.symbol,
            "style": self.style.value,
            "location": self.location.to_dict(),
        }


@dataclass(frozen=True)
class BindingDiagnostic:
    message: str
    location: Location


def _unwrap(e: Expr) -> Expr:
    """Strip casts, address-of and function-pointer wrapper macros."""
    while True:
        if e.kind == "cast" and len(e.kids) == 1:
            e = e.kids[0]
        elif e.kind == "unary" and e.text == "&" and e.kids:
            e = e.kids[0]
        elif e.kind == "call" and e.text in _WRAPPERS and len(e.args) == 1:
            e = e.args[0]
        else:
            return e


def _symbol(e: Expr | None) -> str | None:
    if e is None:
        return None
    e = _unwrap(e)
    if e.kind == "name" and e.text not in NULLISH:
        return e.text
    return None


def _literal_in(e: Expr) -> str | None:
    """First plain string literal inside ``e`` (handles New<String>("x") wrappers)."""
    for sub in e.walk():
        v = string_value(sub)
        if v is not None:
            return v
    return None


def _function_in(e: Expr) -> tuple | None:
    """Symbol passed to a function-object constructor, with the style it implies."""
    for sub in e.walk():
        if sub.kind != "call":
            continue
        t = sub.text
        if t.endswith("Function::New") and len(sub.args) >= 2:
            sym = _symbol(sub.args[1])
            if sym:
                return sym, ApiStyle.NApi
        if "FunctionTemplate" in t and sub.args:
            sym = _symbol(sub.args[0])
            if sym:
                return sym, ApiStyle.Nan
    return None


class _Extractor:
    def __init__(self):
        self.entries: list = []
        self.diagnostics: list = []

    def loc(self, site: RegistrationSite, e: Expr | None = None) -> Location:
        e = e or site.call
        return Location(site.path, e.line, e.col)

    def add(self, site, name_expr, sym, style, where=None):
        name = string_value(_unwrap(name_expr)) if name_expr is not None else None
        if name is None and name_expr is not None:
            name = _literal_in(name_expr)
        if name is None:
            self.diagnostics.append(BindingDiagnostic(
                f"registration of {sym} via {site.name} has a non-literal name; skipped", self.loc(site, where)))
            return
        self.entries.append(BindingEntry(name, sym, style, self.loc(site, where)))

    def resolve_table(self, site: RegistrationSite, e: Expr) -> Expr | None:
        e = _unwrap(e)
        if e.kind == "init":
            return e
        if e.kind == "name":
            return site.tables.get(e.text)
        if e.kind == "index":
            return self.resolve_table(site, e.kids[0])
        return None

    def site(self, site: RegistrationSite):
        name = site.name
        args = site.call.args
        handler = getattr(self, "do_" + name, None)
        if handler is not None:
            handler(site, args)

    # Nan / V8 / node-addon-api object setters
    def do_Set(self, site, args):
        if len(args) < 2:
            return
        name_expr, value = args[-2], args[-1]
        found = _function_in(value)
        if found is None:
            return
        self.add(site, name_expr, found[0], found[1])

    def do_SetMethod(self, site, args):
        if len(args) >= 3:
            sym = _symbol(args[2])
            if sym:
                style = ApiStyle.NApi if "Napi" in site.callee else ApiStyle.Nan
                self.add(site, args[1], sym, style)

    do_SetPrototypeMethod = do_SetMethod
    do_NODE_SET_METHOD = do_SetMethod
    do_NODE_SET_PROTOTYPE_METHOD = do_SetMethod
    do_Export = do_SetMethod

    def do_InstanceMethod(self, site, args):
        if len(args) >= 2:
            sym = _symbol(args[1])
            if sym:
                self.add(site, args[0], sym, ApiStyle.NApi)

    do_StaticMethod = do_InstanceMethod

    # N-API C
    def do_napi_create_function(self, site, args):
        if len(args) >= 4:
            sym = _symbol(args[3])
            if sym and not (args[1].kind in ("name", "lit") and args[1].text in NULLISH):
                self.add(site, args[1], sym, ApiStyle.NApi)

    def do_napi_define_properties(self, site, args):
        if not args:
            return
        # descriptors are the fourth argument; elided listings keep them last
        table = self.resolve_table(site, args[3] if len(args) >= 4 else args[-1])
        if table is None:
            self.diagnostics.append(BindingDiagnostic(
                "napi_define_properties with an unresolvable descriptor table; skipped", self.loc(site)))
            return
        elems = list(table.kids)
        descs = elems if elems and all(_is_descriptor(e) for e in elems) else [table]
        for d in descs:
            self.descriptor(site, d)

    def descriptor(self, site, d: Expr):
        if d.kind == "call":
            # DECLARE_NAPI_METHOD("name", Func) style helper macros
            if len(d.args) >= 2:
                sym = _symbol(d.args[1])
                if sym:
                    self.add(site, d.args[0], sym, ApiStyle.NApi, d)
            return
        fields = [k.kids[0] if k.kind == "designated" else k for k in d.kids]
        named = {k.text: k.kids[0] for k in d.kids if k.kind == "designated"}
        if named:
            name_expr = named.get("utf8name")
            sym = _symbol(named.get("method"))
        else:
            if not fields:
                return
            name_expr = fields[0]
            sym = _symbol(fields[2]) if len(fields) > 2 else None
            if sym is None:
                for f in fields[1:]:
                    s = _symbol(f)
                    if s and not s.startswith("napi_") and not s.isupper():
                        sym = s
                        break
        if sym is None:
            return
        if name_expr is None or _unwrap(name_expr).text in NULLISH:
            self.diagnostics.append(BindingDiagnostic(
                f"descriptor for {sym} has no literal utf8name; skipped", self.loc(site, d)))
            return
        self.add(site, name_expr, sym, ApiStyle.NApi, d)

    # Ruby C API
    def do_rb_define_method(self, site, args):
        if len(args) >= 3:
            sym = _symbol(args[2])
            if sym:
                self.add(site, args[1], sym, ApiStyle.Ruby)

    do_rb_define_singleton_method = do_rb_define_method
    do_rb_define_module_function = do_rb_define_method

    def do_rb_define_global_function(self, site, args):
        if len(args) >= 2:
            sym = _symbol(args[1])
            if sym:
                self.add(site, args[0], sym, ApiStyle.Ruby)

    # CPython
    def do_PyModule_Create(self, site, args):
        if not args:
            return
        moddef = self.resolve_table(site, args[0])
        if moddef is None:
            self.diagnostics.append(BindingDiagnostic(
                "PyModule_Create with an unresolvable module definition; skipped", self.loc(site)))
            return
        rows = [k for k in moddef.kids if k.kind == "init" and k.kids and string_value(_unwrap(k.kids[0])) is not None]
        if rows:
            # method rows written inline in the module definition
            self.method_table(site, Expr("init", "{}", tuple(rows), moddef.line, moddef.col))
        for field_ in moddef.kids:
            value = field_.kids[0] if field_.kind == "designated" else field_
            if field_.kind == "designated" and field_.text != "m_methods":
                continue
            methods = self.resolve_table(site, value) if _unwrap(value).kind in ("name", "init") else None
            if methods is not None and methods is not moddef and methods.kids and all(
                    m.kind == "init" for m in methods.kids):
                self.method_table(site, methods)

    do_PyModule_Create2 = do_PyModule_Create

    def do_Py_InitModule(self, site, args):
        if len(args) >= 2:
            methods = self.resolve_table(site, args[1])
            if methods is not None:
                self.method_table(site, methods)

    do_Py_InitModule3 = do_Py_InitModule

    def method_table(self, site, methods: Expr):
        for m in methods.kids:
            if m.kind != "init" or len(m.kids) < 2:
                continue
            named = {k.text: k.kids[0] for k in m.kids if k.kind == "designated"}
            name_expr = named.get("ml_name", m.kids[0])
            sym = _symbol(named.get("ml_meth", m.kids[1]))
            if sym is None:
                continue  # sentinel row
            self.add(site, name_expr, sym, ApiStyle.Python, m)


def _is_descriptor(e: Expr) -> bool:
    return e.kind == "init" or (e.kind == "call" and len(e.args) >= 2)


def extract_bindings(sites, with_diagnostics: bool = False):
    """One BindingEntry per recognized (name, symbol) pair, in site order."""
    ex = _Extractor()
    for s in sites:
        ex.site(s)
    if with_diagnostics:
        return ex.entries, ex.diagnostics
    return ex.entries
