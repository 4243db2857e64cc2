"""Tokenizer for the JavaScript subset.

Template literals are kept as single opaque tokens; regular-expression
literals are recognized from the previous significant token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_PUNCT = sorted(
    [
        ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "??=",
        "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "++", "--", "+=", "-=",
        "*=", "/=", "%=", "&=", "|=", "^=", "**", "<<", ">>",
    ],
    key=len,
    reverse=True,
)
_IDENT_RE = re.compile("[A-Za-z_$\\u0080-\\uffff][\\w$\\u0080-\\uffff]*")
_NUM_RE = re.compile(
    r"0[xX][0-9a-fA-F_]+n?|0[oO][0-7_]+n?|0[bB][01_]+n?|"
    r"(?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?n?"
)
# after these keywords a slash starts a regular expression
_REGEX_AFTER_WORDS = frozenset({
    "return", "typeof", "instanceof", "in", "of", "new", "delete", "void", "throw",
    "case", "do", "else", "yield", "await",
})


@dataclass(frozen=True)
class JsToken:
    kind: str  # id num str template regex op
    text: str
    line: int  # 1-based
    col: int  # 0-based
    start: int
    end: int
    nl_before: bool = False


def _regex_allowed(prev: JsToken | None) -> bool:
    if prev is None:
        return True
    if prev.kind == "op":
        return prev.text not in (")", "]", "}")
    if prev.kind == "id":
        return prev.text in _REGEX_AFTER_WORDS
    return False


def tokenize(src: str) -> list:
    toks: list = []
    i, n = 0, len(src)
    line, line_start = 1, 0
    nl = False
    if src.startswith("#!"):
        j = src.find("\n")
        i = n if j < 0 else j

    def advance_lines(a, b):
        nonlocal line, line_start
        c = src.count("\n", a, b)
        if c:
            line += c
            line_start = src.rfind("\n", a, b) + 1
        return c

    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            line_start = i + 1
            nl = True
            i += 1
            continue
        if c in " \t\r\f\v\ufeff\u00a0\u2028\u2029":
            i += 1
            continue
        if src.startswith("//", i):
            j = src.find("\n", i)
            i = n if j < 0 else j
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            j = n if j < 0 else j + 2
            if advance_lines(i, j):
                nl = True
            i = j
            continue
        col = i - line_start
        tline = line
        prev = toks[-1] if toks else None
        m = _IDENT_RE.match(src, i)
        if m:
            toks.append(JsToken("id", m.group(), tline, col, i, m.end(), nl))
            i = m.end()
            nl = False
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            m = _NUM_RE.match(src, i)
            j = m.end() if m and m.end() > i else i + 1
            toks.append(JsToken("num", src[i:j], tline, col, i, j, nl))
            i = j
            nl = False
            continue
        if c in "\"'":
            j = _string_end(src, i)
            toks.append(JsToken("str", src[i:j], tline, col, i, j, nl))
            advance_lines(i, j)
            i = j
            nl = False
            continue
        if c == "`":
            j = template_end(src, i)
            toks.append(JsToken("template", src[i:j], tline, col, i, j, nl))
            advance_lines(i, j)
            i = j
            nl = False
            continue
        if c == "/" and _regex_allowed(prev) and not src.startswith("//", i):
            j = _regex_end(src, i)
            if j is not None:
                toks.append(JsToken("regex", src[i:j], tline, col, i, j, nl))
                i = j
                nl = False
                continue
        for p in _PUNCT:
            if src.startswith(p, i):
                if p == "?." and i + 2 < n and src[i + 2].isdigit():
                    continue
                text = p
                break
        else:
            text = c
        toks.append(JsToken("op", text, tline, col, i, i + len(text), nl))
        i += len(text)
        nl = False
    return toks


def _string_end(src: str, i: int) -> int:
    q = src[i]
    j = i + 1
    n = len(src)
    while j < n:
        ch = src[j]
        if ch == "\\":
            j += 2
            continue
        if ch == q:
            return j + 1
        if ch == "\n":
            return j
        j += 1
    return n


def template_end(src: str, i: int) -> int:
    """End offset of the template literal starting at ``src[i] == '`'``."""
    j = i + 1
    n = len(src)
    while j < n:
        ch = src[j]
        if ch == "\\":
            j += 2
            continue
        if ch == "`":
            return j + 1
        if ch == "$" and j + 1 < n and src[j + 1] == "{":
            j = _substitution_end(src, j + 2)
            continue
        j += 1
    return n


def _substitution_end(src: str, j: int) -> int:
    depth = 1
    n = len(src)
    while j < n:
        ch = src[j]
        if ch in "\"'":
            j = _string_end(src, j)
            continue
        if ch == "`":
            j = template_end(src, j)
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return j + 1
        j += 1
    return n


def _regex_end(src: str, i: int) -> int | None:
    j = i + 1
    n = len(src)
    in_class = False
    while j < n:
        ch = src[j]
        if ch == "\n":
            return None
        if ch == "\\":
            j += 2
            continue
        if in_class:
            if ch == "]":
                in_class = False
        elif ch == "[":
            in_class = True
        elif ch == "/":
            j += 1
            while j < n and (src[j].isalnum() or src[j] in "_$"):
                j += 1
            return j
        j += 1
    return None
