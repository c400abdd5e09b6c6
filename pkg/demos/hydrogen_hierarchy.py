"""Hydrogen to fourth order in the multipolar scheme, one grade at a time.

Shows which couplings enter at each grade: the dipole alone at grade 1, then
quadrupole, spin and Roentgen terms at grade 2, and the diamagnetic square at
grade 4.
"""
from __future__ import annotations

from mpqed.cli.config import load_config
from mpqed.cli.latex import LatexPrinter, default_rewrites
from mpqed.multipole import expand

cfg = load_config("hydrogen", order=4)
s, J = cfg.system(), cfg.jacobi()
ex = expand(s, "mp", cfg.order, J)
printer = LatexPrinter(cfg.z, default_rewrites(J))

print("H_0 =", printer.render(ex.h0))
for g in range(1, cfg.order + 1):
    block = ex.grades[g]
    print(f"\ngrade {g} ({len(block.terms)} terms)")
    for t in block.terms:
        print("   ", printer.render(block.__class__(block.registry, [t])))
