"""Reader and writer for the line-oriented ``tqft-tri v1`` text format.

    tqft-tri v1
    tets 2
    signs +1 -1
    glue 0 0 1 2
    gamma 0
    angles 0 0.333 0.333 0.334

Comments start with ``#``.  Angles are in units of pi; decimals are read
exactly as fractions, and ``p/q`` is accepted as well.
"""
from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .errors import FormatSyntaxError, SemanticError
from .mesh import Triangulation, build_triangulation

MAGIC = "tqft-tri v1"
_INT = re.compile(r"^[+-]?\d+$")
_NUM = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$|^[+-]?\d+/\d+$")


def _tokens(line: str):
    """Yield (token, column) pairs, 1-based columns."""
    for m in re.finditer(r"\S+", line):
        yield m.group(0), m.start() + 1


def _int(tok, lineno, col):
    if not _INT.match(tok):
        raise FormatSyntaxError(f"expected an integer, got {tok!r}", lineno, col)
    return int(tok)


def _num(tok, lineno, col):
    if not _NUM.match(tok):
        raise FormatSyntaxError(f"expected a number, got {tok!r}", lineno, col)
    return Fraction(tok)


def parse(text: str) -> Triangulation:
    lines = text.splitlines()
    content = []
    for i, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0]
        if line.strip():
            content.append((i, line))
    if not content:
        raise FormatSyntaxError("empty document", 1, 1)

    it = iter(content)
    lineno, line = next(it)
    if line.strip() != MAGIC:
        raise FormatSyntaxError(f"first line must be {MAGIC!r}", lineno, 1)

    try:
        lineno, line = next(it)
    except StopIteration:
        raise FormatSyntaxError("missing 'tets' line", lineno + 1, 1) from None
    toks = list(_tokens(line))
    if len(toks) != 2 or toks[0][0] != "tets":
        raise FormatSyntaxError("expected 'tets <n>'", lineno, toks[0][1] if toks else 1)
    n = _int(toks[1][0], lineno, toks[1][1])
    if n < 0:
        raise FormatSyntaxError("tetrahedron count must be non-negative", lineno, toks[1][1])

    try:
        lineno, line = next(it)
    except StopIteration:
        raise FormatSyntaxError("missing 'signs' line", lineno + 1, 1) from None
    toks = list(_tokens(line))
    if not toks or toks[0][0] != "signs":
        raise FormatSyntaxError("expected 'signs <s1> ... <sn>'", lineno, toks[0][1] if toks else 1)
    if len(toks) - 1 != n:
        raise FormatSyntaxError(f"expected {n} signs, got {len(toks) - 1}", lineno, toks[0][1])
    signs = []
    for tok, col in toks[1:]:
        if tok not in ("+1", "-1", "1"):
            raise FormatSyntaxError(f"sign must be +1 or -1, got {tok!r}", lineno, col)
        signs.append(int(tok))

    glue, gamma, angles = [], [], {}
    for lineno, line in it:
        toks = list(_tokens(line))
        key, kcol = toks[0]
        args = toks[1:]
        if key == "glue":
            if len(args) != 4:
                raise FormatSyntaxError("expected 'glue <t> <f> <t'> <f'>'", lineno, kcol)
            glue.append(tuple(_int(t, lineno, c) for t, c in args))
        elif key == "gamma":
            gamma.extend(_int(t, lineno, c) for t, c in args)
        elif key == "angles":
            if len(args) != 4:
                raise FormatSyntaxError("expected 'angles <t> <a> <b> <c>'", lineno, kcol)
            t = _int(args[0][0], lineno, args[0][1])
            if t in angles:
                raise SemanticError(f"line {lineno}: angles for tetrahedron {t} given twice")
            angles[t] = tuple(_num(x, lineno, c) for x, c in args[1:])
        else:
            raise FormatSyntaxError(f"unknown directive {key!r}", lineno, kcol)

    ang = None
    if angles:
        missing = [t for t in range(n) if t not in angles]
        extra = [t for t in angles if not 0 <= t < n]
        if missing or extra:
            raise SemanticError(f"angles must be given for every tetrahedron 0..{n - 1}")
        ang = [angles[t] for t in range(n)]
    return build_triangulation(signs, glue, gamma, angles=ang)


def _fmt_num(x) -> str:
    x = Fraction(x)
    d = x.denominator
    k = 0
    while d % 2 == 0 or d % 5 == 0:
        d //= 2 if d % 2 == 0 else 5
        k += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    if x.denominator == 1:
        return str(x.numerator)
    num = abs(x.numerator) * 10 ** k // x.denominator
    s = str(num).rjust(k + 1, "0")
    out = f"{s[:-k]}.{s[-k:]}".rstrip("0").rstrip(".")
    return ("-" if x < 0 else "") + out


def serialize(tri: Triangulation) -> str:
    out = [MAGIC, f"tets {tri.n}", " ".join(["signs"] + [f"{s:+d}" for s in tri.signs])]
    for a, b in tri.gluings:
        out.append(f"glue {a.tet} {a.face} {b.tet} {b.face}")
    if tri.gamma:
        out.append(" ".join(["gamma"] + [str(e) for e in sorted(tri.gamma)]))
    if tri.angles is not None:
        for t, trip in enumerate(tri.angles):
            out.append(" ".join(["angles", str(t)] + [_fmt_num(x) for x in trip]))
    return "\n".join(out) + "\n"


def load(path) -> Triangulation:
    return parse(Path(path).read_text(encoding="utf-8"))


def dump(tri: Triangulation, path) -> None:
    Path(path).write_text(serialize(tri), encoding="utf-8")
