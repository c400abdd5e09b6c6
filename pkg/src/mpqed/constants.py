"""Scalar symbols shared by the physics modules."""
from __future__ import annotations

from .symkernel import Registry, default_registry

#: integration variables for the polarization/magnetization line integrals
LAMBDA = "lam"
LAMBDA2 = "lam2"

_CONSTANTS = (
    ("e", "charge-unit", "C"),
    ("hbar", "fundamental-constant", "J s"),
    ("c", "fundamental-constant", "m/s"),
    ("eps0", "fundamental-constant", "F/m"),
    ("pi", "fundamental-constant", ""),
    ("alpha", "coupling", ""),
    ("mu", "grading", ""),
    (LAMBDA, "integration", ""),
    (LAMBDA2, "integration", ""),
)


def ensure_constants(registry: Registry | None = None) -> Registry:
    """Register e, hbar, c, eps0, pi, alpha, the grading symbol and the λ variables."""
    reg = registry or default_registry()
    for name, kind, dim in _CONSTANTS:
        reg.symbol(name, kind, dim)
    return reg


def coulomb_constant(registry: Registry | None = None):
    """``e**2 / (4 pi eps0)``."""
    reg = ensure_constants(registry)
    return reg.parse("e**2/(4*pi*eps0)")
