"""Jacobi coordinates from cluster partition trees.

A tree is written as nested lists ``[left, right, index, sign]`` where leaves
are particle numbers, ``index`` is the Jacobi label given to the relative
vector of the node and ``sign`` is ``"left-right"`` (``R = c_left - c_right``)
or ``"right-left"``.  The overall centroid is always ``R_1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from sympy.polys.matrices import DomainMatrix

from .symkernel import (
    Dot,
    Mom,
    OpExpr,
    OpTerm,
    Pos,
    RatFunc,
    Registry,
    ScalarExpr,
    VecExpr,
    canonicalize,
    default_registry,
    substitute,
)
from .symkernel.vectors import Cross, FieldAtom

__all__ = [
    "PartitionTree",
    "JacobiScheme",
    "InvariantReport",
    "TreeError",
    "FrameError",
    "build_scheme",
    "transform",
    "check_invariants",
    "atoms_frames",
]

SIGNS = ("left-right", "right-left")


class TreeError(ValueError):
    """Malformed partition tree or singular mass assignment."""


class FrameError(ValueError):
    """Expression mixes lab and Jacobi atoms (or is in the wrong frame)."""


@dataclass(frozen=True)
class PartitionTree:
    """Binary tree node; leaves are plain ints."""

    left: object
    right: object
    index: int
    sign: str = "left-right"

    def __post_init__(self):
        if self.sign not in SIGNS:
            raise TreeError(f"sign must be one of {SIGNS}, got {self.sign!r}")
        if self.index == 1:
            raise TreeError("Jacobi index 1 is reserved for the center of mass")

    @classmethod
    def from_nested(cls, node) -> "PartitionTree":
        if isinstance(node, PartitionTree):
            return node
        if not isinstance(node, (list, tuple)) or len(node) not in (3, 4):
            raise TreeError(f"node must be [left, right, index(, sign)], got {node!r}")
        left, right, index = node[0], node[1], node[2]
        sign = node[3] if len(node) == 4 else "left-right"

        def child(x):
            if isinstance(x, bool) or not isinstance(x, (int, list, tuple, PartitionTree)):
                raise TreeError(f"invalid tree child {x!r}")
            return x if isinstance(x, int) else cls.from_nested(x)

        if not isinstance(index, int) or isinstance(index, bool):
            raise TreeError(f"Jacobi index must be an integer, got {index!r}")
        return cls(child(left), child(right), index, sign)

    def leaves(self) -> list:
        out = []
        for c in (self.left, self.right):
            out.extend([c] if isinstance(c, int) else c.leaves())
        return out

    def nodes(self) -> list:
        out = [self]
        for c in (self.left, self.right):
            if not isinstance(c, int):
                out.extend(c.nodes())
        return out

    def to_nested(self):
        def enc(c):
            return c if isinstance(c, int) else c.to_nested()
        return [enc(self.left), enc(self.right), self.index, self.sign]

    def validate(self, n: int | None = None):
        leaves = self.leaves()
        n = n or len(leaves)
        if sorted(leaves) != list(range(1, n + 1)):
            raise TreeError(f"leaves {leaves} are not a permutation of 1..{n}")
        idx = sorted(node.index for node in self.nodes())
        if idx != list(range(2, n + 1)):
            raise TreeError(f"internal Jacobi indices {idx} must be exactly 2..{n}")


def _mat_mul(A, B, reg):
    n, k, m = len(A), len(B), len(B[0])
    return [[sum((A[i][t] * B[t][j] for t in range(k)), reg.zero()) for j in range(m)]
            for i in range(n)]


def _transpose(A):
    return [list(r) for r in zip(*A)]


def _identity(n, reg):
    return [[reg.one() if i == j else reg.zero() for j in range(n)] for i in range(n)]


def _invert(A, reg):
    fld = reg.field()
    n = len(A)
    dm = DomainMatrix([[x._el if x._el.field is fld else x._el.set_field(fld) for x in row]
                       for row in A], (n, n), fld.to_domain())
    try:
        inv = dm.inv()
    except Exception as exc:  # sympy raises DMNonInvertibleMatrixError
        raise TreeError(f"singular Jacobi matrix: {exc}") from exc
    rows = inv.to_list()
    return [[RatFunc(reg, x) for x in row] for row in rows]


@dataclass
class JacobiScheme:
    """Exact linear maps between lab and Jacobi coordinates.

    ``backward[j][a]`` gives ``R_j = Σ_a backward[j][a] r_a``; ``forward[a][j]``
    gives ``r_a = Σ_j forward[a][j] R_j``.  Momenta use ``D = backward^T``:
    ``p_a = Σ_j D[a][j] P_j`` and ``P_j = Σ_a forward[a][j] p_a``.
    """

    tree: PartitionTree
    masses: tuple
    registry: Registry
    forward: list
    backward: list
    effective_masses: dict
    momentum_forward: list = field(default_factory=list)
    momentum_backward: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.masses)

    def position_map(self, direction="to_jacobi") -> dict:
        reg = self.registry
        if direction == "to_jacobi":
            return {Pos(a + 1, "lab"): VecExpr(reg, [(Pos(j + 1, "jac"), self.forward[a][j])
                                                     for j in range(self.N)])
                    for a in range(self.N)}
        return {Pos(j + 1, "jac"): VecExpr(reg, [(Pos(a + 1, "lab"), self.backward[j][a])
                                                 for a in range(self.N)])
                for j in range(self.N)}

    def momentum_map(self, direction="to_jacobi") -> dict:
        reg = self.registry
        if direction == "to_jacobi":
            return {Mom(a + 1, "lab"): VecExpr(reg, [(Mom(j + 1, "jac"),
                                                      self.momentum_forward[a][j])
                                                     for j in range(self.N)])
                    for a in range(self.N)}
        return {Mom(j + 1, "jac"): VecExpr(reg, [(Mom(a + 1, "lab"), self.momentum_backward[j][a])
                                                 for a in range(self.N)])
                for j in range(self.N)}

    def lab_position(self, a: int) -> VecExpr:
        return self.position_map("to_jacobi")[Pos(a, "lab")]

    def lab_momentum(self, a: int) -> VecExpr:
        return self.momentum_map("to_jacobi")[Mom(a, "lab")]

    def jacobi_position(self, j: int) -> VecExpr:
        return self.position_map("to_lab")[Pos(j, "jac")]

    def jacobi_momentum(self, j: int) -> VecExpr:
        return self.momentum_map("to_lab")[Mom(j, "jac")]


def build_scheme(tree, masses, registry: Registry | None = None) -> JacobiScheme:
    """Assemble the Jacobi maps for ``tree`` with particle masses ``masses``.

    ``masses`` are RatFunc values or symbol names (one per particle).
    """
    reg = registry or default_registry()
    tree = PartitionTree.from_nested(tree)
    ms = tuple(m if isinstance(m, RatFunc) else reg.parse(str(m)) for m in masses)
    n = len(ms)
    tree.validate(n)
    rows: dict[int, list] = {}
    eff: dict[int, RatFunc] = {}

    def centroid(node):
        """Returns (weights over particles, total mass)."""
        if isinstance(node, int):
            w = [reg.zero()] * n
            w[node - 1] = reg.one()
            return w, ms[node - 1]
        wl, ml = centroid(node.left)
        wr, mr = centroid(node.right)
        tot = ml + mr
        if tot.is_zero():
            raise TreeError(f"zero total mass in cluster {node.leaves()}")
        if ml.is_zero() or mr.is_zero():
            raise TreeError(f"zero cluster mass below node {node.index}")
        if node.sign == "left-right":
            rows[node.index] = [a - b for a, b in zip(wl, wr)]
        else:
            rows[node.index] = [b - a for a, b in zip(wl, wr)]
        eff[node.index] = ml * mr / tot
        return [(a * ml + b * mr) / tot for a, b in zip(wl, wr)], tot

    w, M = centroid(tree)
    rows[1] = w
    eff[1] = M
    backward = [rows[j] for j in range(1, n + 1)]
    forward = _invert(backward, reg)
    D = _transpose(backward)           # p = D P
    Dinv = _transpose(forward)         # P = D^{-1} p
    return JacobiScheme(tree, ms, reg, forward, backward, eff, D, Dinv)


def atoms_frames(e: OpExpr) -> set:
    frames = set()

    def walk(x):
        if isinstance(x, (Pos, Mom)):
            frames.add(x.frame)
        elif isinstance(x, Cross):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, FieldAtom):
            walk(x.point)
            for d, _ in x.dirs:
                walk(d)
        elif isinstance(x, VecExpr):
            for t, _ in x.terms:
                walk(t)
        elif isinstance(x, Dot):
            walk(x.left)
            walk(x.right)
        elif hasattr(x, "arg"):
            walk(x.arg)

    for t in canonicalize(e).terms:
        for f in t.factors:
            walk(f)
    return frames


def transform(e: OpExpr, scheme: JacobiScheme, direction: str = "to_jacobi") -> OpExpr:
    """Rewrite ``e`` in the other frame (positions, momenta, field points, Coulomb arguments)."""
    if direction not in ("to_jacobi", "to_lab"):
        raise ValueError(f"direction must be to_jacobi or to_lab, got {direction!r}")
    frames = atoms_frames(e)
    source = "lab" if direction == "to_jacobi" else "jac"
    if len(frames) > 1:
        raise FrameError(f"expression mixes frames {sorted(frames)}")
    if frames and frames != {source}:
        raise FrameError(f"expression is in frame {frames.pop()!r}, expected {source!r}")
    mapping = dict(scheme.position_map(direction))
    mapping.update(scheme.momentum_map(direction))
    return substitute(e, mapping)


@dataclass
class InvariantReport:
    results: dict  # name -> (passed, residual)

    @property
    def ok(self) -> bool:
        return all(p for p, _ in self.results.values())

    def lines(self):
        for name, (p, res) in self.results.items():
            yield f"{name}: {'pass' if p else 'FAIL'}" + ("" if p else f"  residual = {res}")


def _matrix_residual(A, reg):
    n = len(A)
    res = []
    for i in range(n):
        for j in range(n):
            d = A[i][j] - (reg.one() if i == j else reg.zero())
            if not d.is_zero():
                res.append(((i + 1, j + 1), d))
    return res


def check_invariants(scheme: JacobiScheme) -> InvariantReport:
    """Verify the four exact identities of a Jacobi scheme."""
    reg = scheme.registry
    n = scheme.N
    C, Cinv = scheme.forward, scheme.backward
    out = {}
    r1 = _matrix_residual(_mat_mul(C, Cinv, reg), reg)
    out["inverse"] = (not r1, r1)
    r2 = _matrix_residual(_mat_mul(scheme.momentum_forward, _transpose(C), reg), reg)
    out["canonical"] = (not r2, r2)

    def sc(v):
        return ScalarExpr(reg, {0: v})

    kin_lab = OpExpr(reg, [OpTerm(sc(reg.one() / (scheme.masses[a] * 2)),
                                  [Dot(Mom(a + 1), Mom(a + 1))]) for a in range(n)])
    kin_jac = OpExpr(reg, [OpTerm(sc(reg.one() / (scheme.effective_masses[j + 1] * 2)),
                                  [Dot(Mom(j + 1, "jac"), Mom(j + 1, "jac"))]) for j in range(n)])
    res = transform(kin_lab, scheme) - kin_jac
    out["kinetic"] = (res.is_zero(), res)
    i_lab = OpExpr(reg, [OpTerm(sc(scheme.masses[a]), [Dot(Pos(a + 1), Pos(a + 1))])
                         for a in range(n)])
    i_jac = OpExpr(reg, [OpTerm(sc(scheme.effective_masses[j + 1]),
                                [Dot(Pos(j + 1, "jac"), Pos(j + 1, "jac"))]) for j in range(n)])
    res = transform(i_lab, scheme) - i_jac
    out["moment_of_inertia"] = (res.is_zero(), res)
    return InvariantReport(out)
