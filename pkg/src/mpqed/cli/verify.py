"""Grade-by-grade comparison of generated expressions against a reference document."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..jacobi import JacobiScheme
from ..multipole import Expansion, expand
from ..symkernel import OpExpr, OpTerm, ScalarExpr, VecExpr, canonicalize
from .reference import ReferenceDocument

__all__ = ["Entry", "DiscrepancyReport", "compare_ops", "compare_vecs", "generate_blocks",
           "verify_document", "STATUSES"]

STATUSES = ("match", "sign-flip", "coefficient-mismatch", "missing-in-reference",
            "missing-in-generated")


@dataclass
class Entry:
    block: str
    shape: str                 # canonical text of the operator part
    status: str
    generated: object = None   # ScalarExpr / RatFunc or None
    reference: object = None
    residual: object = None    # generated - reference
    ratio: object = None       # generated / reference when both are single-grade

    def line(self) -> str:
        out = f"{self.block}: {self.status:<21} {self.shape}"
        if self.status == "match":
            return out
        extra = []
        if self.generated is not None:
            extra.append(f"generated {self.generated}")
        if self.reference is not None:
            extra.append(f"reference {self.reference}")
        if self.residual is not None:
            extra.append(f"residual {self.residual}")
        if self.ratio is not None and self.status == "coefficient-mismatch":
            extra.append(f"ratio {self.ratio}")
        return out + "\n    " + "; ".join(extra)


@dataclass
class DiscrepancyReport:
    """All compared entries; :attr:`discrepancies` is empty exactly when every block is equal."""

    entries: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def discrepancies(self) -> list:
        return [e for e in self.entries if e.status != "match"]

    @property
    def empty(self) -> bool:
        return not self.discrepancies

    def statuses(self, block: str | None = None) -> list:
        return [e.status for e in self.entries if block is None or e.block == block]

    def by_block(self) -> dict:
        out: dict = {}
        for e in self.entries:
            out.setdefault(e.block, []).append(e)
        return out

    def summary(self) -> dict:
        counts = {s: 0 for s in STATUSES}
        for e in self.entries:
            counts[e.status] += 1
        return counts

    def text(self) -> str:
        lines = [e.line() for e in self.entries]
        for s in self.skipped:
            lines.append(f"{s}: skipped")
        c = self.summary()
        lines.append("summary: " + ", ".join(f"{k} {v}" for k, v in c.items()))
        return "\n".join(lines) + "\n"


def _shape_text(t: OpTerm) -> str:
    fs = " ".join(f.sexpr for f in t.factors)
    return f"(herm {int(t.herm)}) {fs}" if fs else f"(herm {int(t.herm)})"


def _single(c: ScalarExpr):
    g = c.grades()
    return c.at(g[0]) if len(g) == 1 else None


def _classify(label, shape, gen, ref, flipped=False) -> Entry:
    """Per-term status; ``flipped`` marks a block that equals the negated reference."""
    if gen is None:
        return Entry(label, shape, "missing-in-generated", None, ref)
    if ref is None:
        return Entry(label, shape, "missing-in-reference", gen, None)
    if gen == ref:
        return Entry(label, shape, "match", gen, ref)
    if flipped:
        return Entry(label, shape, "sign-flip", gen, ref, gen - ref)
    ratio = None
    if isinstance(gen, ScalarExpr):
        g, r = _single(gen), _single(ref)
        if g is not None and r is not None and gen.grades() == ref.grades():
            ratio = g / r
    elif not ref.is_zero():
        ratio = gen / ref
    return Entry(label, shape, "coefficient-mismatch", gen, ref, gen - ref, ratio)


def compare_ops(gen: OpExpr, ref: OpExpr, label: str) -> list:
    g = {t.shape_key: t for t in canonicalize(gen).terms}
    r = {t.shape_key: t for t in canonicalize(ref).terms}
    keys = list(g) + [k for k in r if k not in g]
    flipped = bool(keys) and gen != ref and gen == -ref
    out = []
    for k in keys:
        t = g.get(k) or r.get(k)
        out.append(_classify(label, _shape_text(t), g[k].coef if k in g else None,
                             r[k].coef if k in r else None, flipped))
    if not keys:
        out.append(Entry(label, "(zero)", "match"))
    return out


def compare_vecs(gen: VecExpr, ref: VecExpr, label: str) -> list:
    g = dict(gen.terms)
    r = dict(ref.terms)
    keys = list(g) + [k for k in r if k not in g]
    flipped = bool(keys) and gen != ref and gen == -ref
    out = [_classify(label, k.sexpr, g.get(k), r.get(k), flipped) for k in keys]
    if not keys:
        out.append(Entry(label, "(zero)", "match"))
    return out


def generate_blocks(cfg, keys, scheme: str | None = None) -> dict:
    """Produce the generated counterpart of each requested ``(kind, index)`` key."""
    s = cfg.system()
    J: JacobiScheme | None = cfg.jacobi()
    need_exp = any(k[0] in ("grade", "h0", "kinetic") for k in keys)
    out = {}
    ex: Expansion | None = None
    if need_exp:
        order = max([k[1] for k in keys if k[0] == "grade"] or [1])
        ex = expand(s, scheme or cfg.scheme, max(order, 1), J,
                    include_self_energy=cfg.include_self_energy)
    for kind, idx in keys:
        if kind == "grade":
            out[(kind, idx)] = ex.grades.get(idx, OpExpr.zero(s.registry))
        elif kind == "h0":
            out[(kind, idx)] = ex.h0
        elif kind == "kinetic":
            out[(kind, idx)] = ex.groups["kinetic"]
        elif kind in ("jacobi-position", "jacobi-momentum"):
            if J is None:
                raise ValueError("jacobi blocks need a partition in the config")
            if not 1 <= idx <= s.N:
                raise ValueError(f"{kind} {idx}: particle index out of range 1..{s.N}")
            out[(kind, idx)] = J.lab_position(idx) if kind == "jacobi-position" \
                else J.lab_momentum(idx)
    return out


def verify_document(doc: ReferenceDocument, generated: dict) -> DiscrepancyReport:
    rep = DiscrepancyReport()
    for b in doc.blocks:
        gen = generated.get(b.key)
        if gen is None:
            rep.skipped.append(b.label)
            continue
        if isinstance(b.expr, VecExpr):
            rep.entries.extend(compare_vecs(gen, b.expr, b.label))
        else:
            rep.entries.extend(compare_ops(gen, b.expr, b.label))
    return rep
