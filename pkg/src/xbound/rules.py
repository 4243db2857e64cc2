"""Sink/sanitizer rule sets and the line-oriented rules file.

Grammar, one directive per line (``#`` starts a comment)::

    types <comma-separated list>
    sink native <M3|M4> "<pattern>"
    sanitizer native "<pattern>"
    sanitizer script "<pattern>"
    approle "<api>(<_|tracked>,...)" sources <comma-separated>

Call patterns follow the notation used for the default lists: a leading ``*.``
stands for any receiver, ``#type#`` expands over the configured type list and a
trailing ``()`` is optional.  Script sanitizers may also name an operator
(``typeof``, ``instanceof``).
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from pathlib import Path

TYPE_VAR = "#type#"
SCRIPT_OPERATORS = ("typeof", "instanceof")
DEFAULT_TYPES = (
    "Boolean", "Number", "Int32", "Uint32", "Int64", "Double", "String",
    "Object", "Function", "Array", "Buffer", "External", "Date", "BigInt",
)
# Extra spellings accepted wherever a type name is: napi_get_value_bool etc.
TYPE_ALIASES = {"Boolean": ("Bool",)}
DEFAULT_SOURCES = ("req", "req.body", "req.params", "req.query")


class RulesError(ValueError):
    """Malformed rules file; the message names the offending line."""


@dataclass(frozen=True)
class CallPattern:
    text: str
    misuse: str = ""
    regex: re.Pattern = field(compare=False, repr=False, default=None)

    @property
    def operator(self) -> str | None:
        return self.text if self.text in SCRIPT_OPERATORS else None

    def matches(self, callee: str) -> bool:
        return bool(callee) and self.regex is not None and self.regex.fullmatch(callee) is not None


def _type_alternation(types) -> str:
    names = []
    for t in types:
        names.append(t)
        names.extend(TYPE_ALIASES.get(t, ()))
    names.sort(key=len, reverse=True)
    return "(?i:" + "|".join(re.escape(n) for n in names) + r")\w*"


def compile_pattern(text: str, types, misuse: str = "") -> CallPattern:
    """Compile a call pattern into a regex over normalized callee text.

    Callee text uses ``.`` for member access (``->`` is normalized away) and
    ``::`` for qualification, with template arguments written without spaces.
    """
    body = text.strip()
    if not body:
        raise ValueError("empty pattern")
    if body.count(TYPE_VAR) > 1:
        raise ValueError(f"{TYPE_VAR} may appear at most once: {text!r}")
    if body in SCRIPT_OPERATORS:
        return CallPattern(body, misuse, None)
    if body.endswith("()"):
        body = body[:-2]
    prefix = r"(?:.*(?:\.|::))?"
    if body.startswith("*."):
        body = body[2:]
    elif body.startswith("*::"):
        body = body[3:]
        # `*::Cast` needs a qualifier, it never matches a bare `Cast(...)`
        prefix = r".*::"
    if not body:
        raise ValueError(f"bad pattern {text!r}")
    tv = _type_alternation(types)
    out = []
    i = 0
    while i < len(body):
        if body.startswith("<" + TYPE_VAR + ">", i):
            out.append(r"<(?:const)?(?:\w+::)*" + tv + r"(?:<[^<>]*>)?\*?>")
            i += len(TYPE_VAR) + 2
        elif body.startswith(TYPE_VAR, i):
            out.append(tv)
            i += len(TYPE_VAR)
        elif body[i] == ".":
            out.append(r"(?:\.|::)")
            i += 1
        else:
            out.append(re.escape(body[i]))
            i += 1
    return CallPattern(text, misuse, re.compile(prefix + "".join(out)))


@dataclass(frozen=True)
class RuleSet:
    native_sinks: tuple
    native_sanitizers: tuple
    script_sanitizers: tuple
    types: tuple = DEFAULT_TYPES

    def __post_init__(self):
        if not self.native_sinks:
            raise RulesError("rule set needs at least one native sink")
        if not self.types:
            raise RulesError("type expansion list is empty")

    def sink_misuses(self, callee: str) -> list:
        return sorted({p.misuse for p in self.native_sinks if p.matches(callee)})

    def is_native_sanitizer(self, callee: str) -> bool:
        return any(p.matches(callee) for p in self.native_sanitizers)

    def is_script_sanitizer(self, callee: str, traits=frozenset()) -> bool:
        for p in self.script_sanitizers:
            if p.operator is not None:
                if p.operator in traits:
                    return True
            elif p.matches(callee):
                return True
        return False

    def expand(self, pattern_text: str) -> list:
        """Concrete names a ``#type#`` pattern stands for (documentation aid)."""
        if TYPE_VAR not in pattern_text:
            return [pattern_text]
        return [pattern_text.replace(TYPE_VAR, t) for t in self.types]


@dataclass(frozen=True)
class AppRuleSpec:
    api: str
    arity: tuple  # one bool per position, True at the tracked one
    sources: tuple = DEFAULT_SOURCES
    package: str = ""
    param: str = ""

    def __post_init__(self):
        if sum(1 for a in self.arity if a) != 1:
            raise ValueError(f"{self.api}: exactly one tracked position required")
        if not self.sources:
            raise ValueError(f"{self.api}: source set is empty")

    @property
    def tracked(self) -> int:
        return self.arity.index(True)

    @property
    def signature(self) -> str:
        parts = [(self.param or "tracked") if t else "_" for t in self.arity]
        return f"{self.api}({', '.join(parts)})"

    def source_matches(self, entity: str) -> str | None:
        """Return the most specific source pattern that covers ``entity``."""
        hits = []
        for src in self.sources:
            if src.endswith(".*"):
                base = src[:-2]
                if entity.startswith(base + ".") and len(entity) > len(base) + 1:
                    hits.append(src)
            elif entity == src or entity.startswith(src + "."):
                hits.append(src)
        return max(hits, key=lambda s: (len(s), s)) if hits else None


def builtin_rules() -> list:
    """The seven application rules for the vulnerable native-extension APIs."""
    table = [
        ("sqlite3", "run", ("_", "data")),
        ("libxml", "parseXml", ("xml",)),
        ("bignum", "powm", ("_", "pow")),
        ("time", "setTimezone", ("tz",)),
        ("pg-native", "query", ("_", "values", "_")),
        ("discordjs/opus", "encode", ("data",)),
        ("bigint-buffer", "toBigIntLE", ("buff",)),
    ]
    rules = []
    for pkg, api, params in table:
        arity = tuple(p != "_" for p in params)
        param = next(p for p in params if p != "_")
        rules.append(AppRuleSpec(api, arity, DEFAULT_SOURCES, pkg, param))
    return rules


DEFAULT_RULES_TEXT = """\
# Default sinks and sanitizers for missing type checks (M3/M4).
types Boolean, Number, Int32, Uint32, Int64, Double, String, Object, Function, Array, Buffer, External, Date, BigInt

sink native M3 "napi_get_buffer_info()"
sink native M3 "Buffer::Data()"
sink native M3 "Buffer::Length()"
sink native M3 "*.As<#type#>"
sink native M3 "*.To<#type#>"
sink native M3 "*.To#type#()"
sink native M3 "*.ToLocalChecked()"
sink native M3 "*::Cast()"
sink native M3 "napi_get_value_#type#()"
# legacy V8 conversions (args[0]->Int32Value())
sink native M3 "*.#type#Value()"

sanitizer native "napi_is_#type#()"
sanitizer native "napi_typeof()"
sanitizer native "Nan::Check()"
sanitizer native "*.HasInstance()"
sanitizer native "*.Is#type#()"

sanitizer script "typeof"
sanitizer script "Buffer.isBuffer()"
# sanitizer script "instanceof"

approle "run(_, tracked)" sources req, req.body, req.params, req.query
approle "parseXml(tracked)" sources req, req.body, req.params, req.query
approle "powm(_, tracked)" sources req, req.body, req.params, req.query
approle "setTimezone(tracked)" sources req, req.body, req.params, req.query
approle "query(_, tracked, _)" sources req, req.body, req.params, req.query
approle "encode(tracked)" sources req, req.body, req.params, req.query
approle "toBigIntLE(tracked)" sources req, req.body, req.params, req.query
"""

_APPROLE_RE = re.compile(r"^\s*([A-Za-z_$][\w$]*)\s*\((.*)\)\s*$")


def parse_rules(text: str, origin: str = "<rules>") -> tuple:
    """Parse rules-file text into ``(RuleSet, [AppRuleSpec, ...])``."""
    types = list(DEFAULT_TYPES)
    raw_sinks, raw_native_san, raw_script_san, app_rules = [], [], [], []

    def fail(lineno, msg):
        raise RulesError(f"{origin}:{lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            words = shlex.split(line, comments=True)
        except ValueError as exc:
            fail(lineno, f"unbalanced quoting ({exc})")
        directive = words[0]
        if directive == "types":
            items = [t.strip() for t in line[len("types"):].split(",") if t.strip()]
            if not items or any(not re.fullmatch(r"\w+", t) for t in items):
                fail(lineno, "types needs a comma-separated list of names")
            types = items
        elif directive == "sink":
            if len(words) != 4 or words[1] != "native" or words[2] not in ("M3", "M4"):
                fail(lineno, 'expected: sink native <M3|M4> "<pattern>"')
            raw_sinks.append((lineno, words[3], words[2]))
        elif directive == "sanitizer":
            if len(words) != 3 or words[1] not in ("native", "script"):
                fail(lineno, 'expected: sanitizer <native|script> "<pattern>"')
            target = raw_native_san if words[1] == "native" else raw_script_san
            target.append((lineno, words[2], ""))
        elif directive == "approle":
            if len(words) < 3 or words[2] != "sources":
                fail(lineno, 'expected: approle "<api>(...)" sources <list>')
            m = _APPROLE_RE.match(words[1])
            if not m:
                fail(lineno, f"bad approle signature {words[1]!r}")
            marks = [p.strip() for p in m.group(2).split(",")]
            if any(p not in ("_", "tracked") for p in marks):
                fail(lineno, "approle positions must be _ or tracked")
            rest = line.split("sources", 1)[1]
            sources = tuple(s.strip() for s in rest.split(",") if s.strip())
            try:
                app_rules.append(AppRuleSpec(m.group(1), tuple(p == "tracked" for p in marks), sources))
            except ValueError as exc:
                fail(lineno, str(exc))
        else:
            fail(lineno, f"unknown directive {directive!r}")

    def build(entries):
        out = []
        for lineno, text_, misuse in entries:
            try:
                out.append(compile_pattern(text_, types, misuse))
            except ValueError as exc:
                fail(lineno, str(exc))
        return tuple(out)

    if not raw_sinks:
        raise RulesError(f"{origin}: no native sinks defined (at least one 'sink native' line required)")
    ruleset = RuleSet(build(raw_sinks), build(raw_native_san), build(raw_script_san), tuple(types))
    return ruleset, app_rules


def load_rules(path) -> tuple:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise RulesError(f"{path}: cannot read rules file ({exc.strerror})") from exc
    return parse_rules(text, str(path))


def default_rules() -> tuple:
    return parse_rules(DEFAULT_RULES_TEXT, "<default rules>")
