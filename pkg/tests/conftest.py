from __future__ import annotations

import pytest

from mpqed.cli.config import load_config
from mpqed.pzw import ParticleSystem
from mpqed.symkernel import FieldAtom, Mom, Pos, Registry, VecExpr


def jac(reg, kind, j):
    return VecExpr.atom((Pos if kind == "R" else Mom)(j, "jac"), reg)


def field_at_r1(reg, kind="E", dirs=()):
    return FieldAtom(kind, jac(reg, "R", 1), 1, dirs)


@pytest.fixture
def reg():
    return Registry("test")


@pytest.fixture
def hydrogen(reg):
    return ParticleSystem((1, -1), ("m1", "m2"), 2, name="hydrogen", registry=reg)


@pytest.fixture
def helium():
    return ParticleSystem((1, 1, -2), ("m1", "m1", "m3"), 3, name="helium",
                          registry=Registry("helium"))


@pytest.fixture(scope="session")
def configs():
    """Built-in configs; each carries its own registry and cached Jacobi scheme."""
    return {name: load_config(name) for name in ("hydrogen", "helium", "lithium")}


# -- acceptance summary -----------------------------------------------------------------
def pytest_runtest_logreport(report):
    if report.when == "call" and "test_properties.py" in report.nodeid:
        from acceptance_registry import PROPERTY_OUTCOMES
        PROPERTY_OUTCOMES[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    from acceptance_registry import PROPERTY_OUTCOMES, RESULTS
    if not RESULTS and not PROPERTY_OUTCOMES:
        return
    from test_acceptance import line
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(RESULTS):
        tr.write_line(line(n, *RESULTS[n]))
    if PROPERTY_OUTCOMES:
        bad = [k for k, v in PROPERTY_OUTCOMES.items() if v != "passed"]
        detail = f"{len(PROPERTY_OUTCOMES)} property laws, 1000 cases each; " + (
            "zero failures" if not bad else "failed: " + ", ".join(bad))
        tr.write_line(line(10, not bad, detail))
