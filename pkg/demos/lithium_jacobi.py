"""Jacobi coordinates for lithium built from a partition tree.

The tree first pairs electrons 1 and 2, adds electron 3 to that pair and
finally the nucleus.  The script prints lab positions in terms of Jacobi
vectors, the effective masses, and the exact invariant checks.
"""
from __future__ import annotations

from mpqed.cli.config import load_config
from mpqed.jacobi import check_invariants

cfg = load_config("lithium")
J = cfg.jacobi()
print("tree:", J.tree.to_nested())
for a in range(1, J.N + 1):
    print(f"r_{a} =", " + ".join(f"({c}) {t.sexpr}" for t, c in J.lab_position(a).terms))
for j, m in sorted(J.effective_masses.items()):
    print(f"M_{j} = {m}")
for line in check_invariants(J).lines():
    print(line)
