"""Reference documents: line-oriented containers of canonical expressions.

::

    # comment
    system hydrogen              header lines: KEY VALUE...
    variant printed
    define M1 = m1 + m2          file-local scalar macro (infix syntax)
    block grade 1                grade N | h0 | kinetic | jacobi-position N | jacobi-momentum N
    (op (term ...))              canonical s-expression, may span lines
    end

``jacobi-*`` blocks hold a single vector expression ``(vec ...)``; every other
block holds an ``(op ...)``.  The same format is written by ``mpqed expand``
and ``mpqed jacobi``, so generated output can serve as a reference.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..symkernel import OpExpr, Registry, SexprError, loads, loads_vec
from ..symkernel.scalars import UnknownSymbolError

__all__ = [
    "Block",
    "ReferenceDocument",
    "ReferenceError",
    "parse_reference",
    "parse_document",
    "format_document",
    "BLOCK_KINDS",
]

BLOCK_KINDS = {"grade": True, "h0": False, "kinetic": False,
               "jacobi-position": True, "jacobi-momentum": True}
HEADER_KEYS = {"system", "variant", "scheme", "order", "mu", "scaling", "source", "note"}


class ReferenceError(ValueError):
    """Syntax or symbol error in a reference document (1-based line and column)."""

    def __init__(self, message, line, col=1, suggestions=(), source="<reference>"):
        self.line = line
        self.col = col
        self.suggestions = list(suggestions)
        self.source = source
        hint = ""
        if self.suggestions and "did you mean" not in message:
            hint = f" (did you mean: {', '.join(self.suggestions)}?)"
        super().__init__(f"{source}:{line}:{col}: {message}{hint}")


@dataclass
class Block:
    kind: str
    index: int | None
    expr: object          # OpExpr or VecExpr
    line: int = 0
    text: str = ""

    @property
    def key(self) -> tuple:
        return (self.kind, self.index)

    @property
    def label(self) -> str:
        return self.kind if self.index is None else f"{self.kind} {self.index}"


@dataclass
class ReferenceDocument:
    header: dict = field(default_factory=dict)
    defines: dict = field(default_factory=dict)
    blocks: list = field(default_factory=list)
    source: str = "<reference>"

    def block(self, kind, index=None):
        for b in self.blocks:
            if b.key == (kind, index):
                return b
        return None

    def grades(self) -> list:
        return sorted(b.index for b in self.blocks if b.kind == "grade")


def _wrap_sexpr(exc: SexprError, offset: int, source: str):
    return ReferenceError(str(exc).split(": ", 1)[-1], exc.line + offset, exc.col,
                          exc.suggestions, source)


def parse_reference(text: str, registry: Registry, local=None) -> OpExpr:
    """Parse a single canonical ``(op ...)`` expression."""
    try:
        return loads(text, registry, local)
    except SexprError as exc:
        raise _wrap_sexpr(exc, 0, "<expression>") from None


def parse_document(text: str, registry: Registry, source: str = "<reference>"
                   ) -> ReferenceDocument:
    doc = ReferenceDocument(source=source)
    lines = text.splitlines()
    i = 0
    seen = set()
    while i < len(lines):
        raw = lines[i]
        ln = i + 1
        line = raw.strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "define":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.+)", rest)
            if not m:
                raise ReferenceError("expected 'define NAME = expression'", ln, 1, source=source)
            name, body = m.group(1), m.group(2)
            try:
                doc.defines[name] = registry.parse(body, doc.defines)
            except UnknownSymbolError as exc:
                col = raw.index(body) + 1 + (exc.pos or 0)
                raise ReferenceError(f"unknown symbol {exc.name!r}", ln, col, exc.suggestions,
                                     source) from None
            except ValueError as exc:
                raise ReferenceError(str(exc), ln, raw.index(body) + 1, source=source) from None
            continue
        if word == "block":
            parts = rest.split()
            if not parts or parts[0] not in BLOCK_KINDS:
                raise ReferenceError(
                    f"unknown block kind {parts[0] if parts else ''!r}; expected one of "
                    + ", ".join(BLOCK_KINDS), ln, raw.index("block") + 7, source=source)
            kind = parts[0]
            index = None
            if BLOCK_KINDS[kind]:
                if len(parts) != 2 or not parts[1].lstrip("-").isdigit():
                    raise ReferenceError(f"block {kind} needs an integer index", ln, 1,
                                         source=source)
                index = int(parts[1])
            elif len(parts) != 1:
                raise ReferenceError(f"block {kind} takes no index", ln, 1, source=source)
            if (kind, index) in seen:
                raise ReferenceError(f"duplicate block {rest}", ln, 1, source=source)
            seen.add((kind, index))
            body = []
            start = i
            while i < len(lines) and lines[i].strip() != "end":
                s = lines[i]
                body.append("" if s.lstrip().startswith("#") else s)
                i += 1
            if i >= len(lines):
                raise ReferenceError(f"block {rest} is not closed by 'end'", ln, 1, source=source)
            i += 1
            btext = "\n".join(body)
            try:
                if kind.startswith("jacobi-"):
                    expr = loads_vec(btext, registry, doc.defines)
                else:
                    expr = loads(btext, registry, doc.defines)
            except SexprError as exc:
                raise _wrap_sexpr(exc, start, source) from None
            doc.blocks.append(Block(kind, index, expr, ln, btext))
            continue
        if word in HEADER_KEYS:
            doc.header[word] = rest
            continue
        if word == "end":
            raise ReferenceError("'end' without an open block", ln, 1, source=source)
        raise ReferenceError(f"unrecognized line starting with {word!r}", ln, 1, source=source)
    return doc


def format_document(header: dict, blocks: list, comments: dict | None = None) -> str:
    """Serialize header items and ``(label, text)`` block pairs.

    ``comments`` maps a block label to extra ``#`` lines written inside the block.
    """
    out = []
    for k, v in header.items():
        out.append(f"{k} {v}")
    for label, text in blocks:
        out.append(f"block {label}")
        for c in (comments or {}).get(label, []):
            out.append(f"# {c}")
        out.append(text)
        out.append("end")
    return "\n".join(out) + "\n"
