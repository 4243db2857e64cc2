"""Tokenizer for the C/C++ subset."""

from __future__ import annotations

import re
from dataclasses import dataclass

# longest first
_PUNCT = [
    "->*", "<<=", ">>=", "...", "<=>",
    "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", ".*",
]
_PUNCT_RE = re.compile("|".join(re.escape(p) for p in _PUNCT))
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUM_RE = re.compile(r"(?:0[xX][0-9a-fA-F']+|0[bB][01']+|(?:\d[\d']*\.?[\d']*|\.\d[\d']*)(?:[eE][+-]?\d+)?)[uUlLfF]*")
_STR_PREFIXES = {"L", "u", "U", "u8", "R", "LR", "uR", "UR", "u8R"}


@dataclass(frozen=True)
class Token:
    kind: str  # id, num, str, char, op, pp
    text: str
    line: int  # 1-based
    col: int  # 0-based
    start: int  # offset into the source
    end: int


def tokenize(src: str) -> list:
    toks = []
    i, n = 0, len(src)
    line, line_start = 1, 0
    at_line_start = True

    def newline_count(a, b):
        return src.count("\n", a, b)

    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            line_start = i + 1
            at_line_start = True
            i += 1
            continue
        if c in " \t\r\f\v":
            i += 1
            continue
        if c == "\\" and i + 1 < n and src[i + 1] in "\r\n":
            i += 1
            continue
        if src.startswith("//", i):
            j = src.find("\n", i)
            i = n if j < 0 else j
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            j = n if j < 0 else j + 2
            nl = newline_count(i, j)
            if nl:
                line += nl
                line_start = src.rfind("\n", i, j) + 1
            i = j
            continue
        col = i - line_start
        if c == "#" and at_line_start:
            j = i
            while j < n:
                k = src.find("\n", j)
                if k < 0:
                    j = n
                    break
                # backslash continuation (allow trailing \r)
                if src[k - 1] == "\\" or (src[k - 1] == "\r" and src[k - 2] == "\\"):
                    j = k + 1
                    continue
                j = k
                break
            text = src[i:j]
            toks.append(Token("pp", text, line, col, i, j))
            nl = newline_count(i, j)
            if nl:
                line += nl
                line_start = src.rfind("\n", i, j) + 1
            i = j
            continue
        at_line_start = False
        m = _IDENT_RE.match(src, i)
        if m:
            word = m.group()
            j = m.end()
            if word in _STR_PREFIXES and j < n and src[j] in "\"'":
                if word.endswith("R") and src[j] == '"':
                    end = _raw_string_end(src, j)
                else:
                    end = _quoted_end(src, j, src[j])
                kind = "str" if src[j] == '"' else "char"
                toks.append(Token(kind, src[i:end], line, col, i, end))
                nl = newline_count(i, end)
                if nl:
                    line += nl
                    line_start = src.rfind("\n", i, end) + 1
                i = end
                continue
            toks.append(Token("id", word, line, col, i, j))
            i = j
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            m = _NUM_RE.match(src, i)
            j = m.end() if m and m.end() > i else i + 1
            toks.append(Token("num", src[i:j], line, col, i, j))
            i = j
            continue
        if c in "\"'":
            end = _quoted_end(src, i, c)
            toks.append(Token("str" if c == '"' else "char", src[i:end], line, col, i, end))
            i = end
            continue
        m = _PUNCT_RE.match(src, i)
        j = m.end() if m else i + 1
        toks.append(Token("op", src[i:j], line, col, i, j))
        i = j
    return toks


def _quoted_end(src: str, i: int, quote: str) -> int:
    j = i + 1
    n = len(src)
    while j < n:
        ch = src[j]
        if ch == "\\":
            j += 2
            continue
        if ch == quote or ch == "\n":
            return j + 1
        j += 1
    return n


def _raw_string_end(src: str, i: int) -> int:
    paren = src.find("(", i)
    if paren < 0:
        return _quoted_end(src, i, '"')
    delim = src[i + 1:paren]
    close = src.find(")" + delim + '"', paren)
    return len(src) if close < 0 else close + len(delim) + 2
