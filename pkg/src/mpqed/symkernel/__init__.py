"""Exact symbolic kernel: rational-function scalars, index-free vectors and
noncommutative operator sums with a canonical form."""
from __future__ import annotations

from .operators import (
    NAMED_ATOMS,
    Dot,
    InverseNorm,
    Named,
    OpExpr,
    OpTerm,
    add,
    canonicalize,
    commutes,
    dot,
    equals,
    inv_norm,
    multiply,
    named,
    scalar,
    substitute,
    term,
)
from .scalars import (
    RatFunc,
    Registry,
    RegistryMismatchError,
    ScalarExpr,
    ScalarSyntaxError,
    UnknownSymbolError,
    default_registry,
)
from .serialize import SexprError, dumps, loads, loads_vec
from .vectors import Cross, FieldAtom, Moment, Mom, Pos, Spin, Support, VecExpr, as_vec

__all__ = [
    "NAMED_ATOMS", "Dot", "InverseNorm", "Named", "OpExpr", "OpTerm", "add", "canonicalize",
    "commutes", "dot", "equals", "inv_norm", "multiply", "named", "scalar", "substitute", "term",
    "RatFunc", "Registry", "RegistryMismatchError", "ScalarExpr", "ScalarSyntaxError",
    "UnknownSymbolError", "default_registry", "SexprError", "dumps", "loads", "loads_vec",
    "Cross", "FieldAtom", "Moment", "Mom", "Pos", "Spin", "Support", "VecExpr", "as_vec",
]
