"""Scaled multipolar expansions of QED Hamiltonians for neutral atomic systems.

The package splits into an exact symbolic kernel (:mod:`mpqed.symkernel`) and
the physics pipeline built on it: Hamiltonian construction (:mod:`mpqed.pzw`),
dilation and scaling (:mod:`mpqed.fields`, :mod:`mpqed.scaling`), Jacobi
coordinates (:mod:`mpqed.jacobi`) and graded multipole families
(:mod:`mpqed.multipole`).
"""
from __future__ import annotations

from .constants import ensure_constants
from .symkernel import default_registry

__version__ = "0.1.0"

ensure_constants(default_registry())
