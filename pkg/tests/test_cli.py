from __future__ import annotations

import sys
from pathlib import Path

import pytest

from mpqed.cli.config import ConfigError, data_path, load_config
from mpqed.cli.latex import print_latex
from mpqed.cli.main import main, run_expand, run_jacobi, run_verify, substitute_constants
from mpqed.cli.reference import ReferenceError, parse_document
from mpqed.symkernel import OpExpr, dot, equals, loads

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from conftest import field_at_r1, jac

MANIFEST = tomllib.loads(data_path("references", "manifest.toml").read_text())["entry"]


def write(tmp_path, text, name="sys.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- config ---------------------------------------------------------------------------
@pytest.mark.parametrize("body,key", [
    ('charges = [1, -1]\nmasses = ["m1"]', "masses"),
    ('charges = [1, 1]\nmasses = ["m1", "m2"]', "charges"),
    ('charges = [1, -1]\nmasses = ["m1", "m2"]\norder = 0', "order"),
    ('charges = [1, -1]\nmasses = ["m1", "m2"]\nscheme = "velocity"', "scheme"),
    ('charges = [1, -1]\nmasses = ["m1", "m2"]\nnucleus = 3', "nucleus"),
    ('charges = [1, -1]\nmasses = ["m1", "m2"]\nZ = 2\nnucleus = 2', "Z"),
    ('charges = [1, -1]\nmasses = ["m1", "m2"]\ncolour = 1', "colour"),
    ('masses = ["m1", "m2"]', "charges"),
    ('charges = [1, -1]\nmasses = ["m1", "m2"]\npartition = [1, 1, 2, "left-right"]', "partition"),
])
def test_config_errors_name_the_field(tmp_path, body, key):
    with pytest.raises(ConfigError) as info:
        load_config(write(tmp_path, body))
    assert info.value.field == key


def test_config_overrides(configs):
    cfg = load_config("helium", order=2, scheme="minimal")
    assert (cfg.order, cfg.scheme) == (2, "mc")
    assert cfg.mu_definition == "2*alpha"
    assert configs["hydrogen"].mu_definition == "alpha"


def test_unknown_system_lists_builtins():
    with pytest.raises(ConfigError) as info:
        load_config("beryllium")
    assert "hydrogen" in str(info.value)


# -- reference documents ------------------------------------------------------------------
def test_parse_error_reports_line_and_column(configs):
    reg = configs["hydrogen"].registry
    text = "system hydrogen\nblock grade 1\n(op (term (coef (g 1 \"q\")) (herm 0)\n  (named H_f)))\nend\n"
    with pytest.raises(ReferenceError) as info:
        parse_document(text, reg)
    assert info.value.line == 3 and info.value.col > 1


def test_unclosed_block(configs):
    with pytest.raises(ReferenceError) as info:
        parse_document("block h0\n(op)\n", configs["hydrogen"].registry)
    assert info.value.line == 1


def test_define_with_unknown_symbol_suggests(configs):
    with pytest.raises(ReferenceError) as info:
        parse_document("define M = m1 + m3\n", configs["hydrogen"].registry)
    assert "m1" in info.value.suggestions or "m2" in info.value.suggestions
    assert info.value.col == len("define M = m1 + ") + 1


# -- latex ----------------------------------------------------------------------------------
def test_latex_dipole(hydrogen):
    reg = hydrogen.registry
    e = dot(jac(reg, "R", 2), field_at_r1(reg), coef=reg.rf("e"), grade=1)
    assert print_latex(e, 1) == r"e R_{2} \cdot E(\alpha R_{1})"
    assert print_latex(e, 2) == r"e R_{2} \cdot E(2\alpha R_{1})"


def test_latex_zero_and_hermitian(hydrogen):
    reg = hydrogen.registry
    assert print_latex(OpExpr.zero(reg)) == "0"
    h = dot(jac(reg, "P", 1), field_at_r1(reg, "A"), herm=True)
    out = print_latex(h, 1)
    assert out.startswith(r"\left[") and out.endswith(r" + \mathrm{h.c.}\right]")


# -- verify ---------------------------------------------------------------------------------
def _report(system, variant):
    cfg = load_config(system, reference=f"{system}.{variant}.ref")
    from mpqed.cli.verify import generate_blocks, verify_document
    doc = parse_document(Path(cfg.reference_path()).read_text(), cfg.registry)
    gen = generate_blocks(cfg, [b.key for b in doc.blocks], doc.header.get("scheme"))
    return cfg, doc, verify_document(doc, gen)


@pytest.mark.parametrize("system", ["hydrogen", "helium", "lithium"])
def test_oracle_variants_match_fully(system):
    _, _, rep = _report(system, "oracle")
    assert rep.empty and not rep.skipped


@pytest.mark.parametrize("system", ["hydrogen", "helium", "lithium"])
def test_printed_variants_report_exactly_the_manifest(system):
    cfg, doc, rep = _report(system, "printed")
    expected = {(m["block"], m["shape"]): m for m in MANIFEST if m["system"] == system}
    got = {(e.block, e.shape): e for e in rep.discrepancies}
    assert set(got) == set(expected)
    for key, m in expected.items():
        e = got[key]
        assert e.status == m["status"], key
        if "residual" in m:
            value = cfg.registry.parse(m["residual"], doc.defines)
            res = e.residual
            assert (res.at(res.grades()[0]) if hasattr(res, "grades") else res) == value, key


def test_lithium_r3_residual_and_ratio():
    _, _, rep = _report("lithium", "printed")
    (e,) = [e for e in rep.discrepancies if e.block == "jacobi-position 3"]
    assert e.status == "coefficient-mismatch"
    assert str(e.ratio) == "-1"


def test_helium_kinetic_factor_two():
    _, _, rep = _report("helium", "printed")
    (e,) = [e for e in rep.discrepancies if e.block == "kinetic"]
    assert str(e.ratio) == "2"


# -- command line ------------------------------------------------------------------------------
def test_exit_codes(tmp_path, capsys):
    assert main(["scale"]) == 0
    assert main(["verify", "-s", "hydrogen", "-r", "hydrogen.oracle.ref"]) == 0
    assert main(["verify", "-s", "hydrogen"]) == 1
    assert main(["expand", "-s", "nowhere"]) == 2
    assert main(["expand"]) == 2
    assert main(["expand", "-s", "hydrogen", "-k", "0"]) == 2
    assert main([]) == 2
    bad = tmp_path / "bad.ref"
    bad.write_text("block grade 1\n(op (term\nend\n")
    assert main(["verify", "-s", "hydrogen", "-r", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.ref:" in err


def test_scale_output(capsys):
    main(["scale"])
    out = capsys.readouterr().out
    assert "mu_exponent 1\neta_exponent 2\neta_over_mu_exponent 1" in out
    assert main(["scale", "-c", "mu^2 = Zalpha*mu = eta"]) == 0


def test_expand_is_deterministic():
    cfg = load_config("helium", order=2, format="both")
    assert run_expand(cfg) == run_expand(load_config("helium", order=2, format="both"))


def test_expanded_output_parses_back(configs):
    cfg = load_config("hydrogen", order=2)
    text = run_expand(cfg)
    doc = parse_document(text, cfg.registry)
    assert doc.grades() == [1, 2]
    assert doc.header["scheme"] == "mp"


def test_jacobi_command_reports_invariants():
    text, ok = run_jacobi(load_config("lithium"))
    assert ok
    lines = [ln for ln in text.splitlines() if ln.startswith("# invariant")]
    assert [ln.split()[2] for ln in lines] == ["inverse:", "canonical:", "kinetic:",
                                                "moment_of_inertia:"]
    assert all(ln.endswith(": pass") for ln in lines)


def test_natural_units(hydrogen):
    reg = hydrogen.registry
    e = OpExpr.zero(reg) + dot(jac(reg, "R", 2), jac(reg, "R", 2), coef=reg.parse("hbar*c"))
    out = substitute_constants(e, {"hbar": "1", "c": "1"})
    assert out.terms[0].coef.at(0) == reg.one()
    text = run_expand(load_config("hydrogen", order=1, natural_units=True))
    assert "hbar" not in text


def test_si_units():
    text = run_expand(load_config("hydrogen", order=1, hbar_c_units=False))
    assert "eps0" in text and "hbar" not in text


def test_print_command(tmp_path, capsys):
    p = tmp_path / "e.sexpr"
    p.write_text('(op (term (coef (g 1 "-e")) (herm 0) '
                 '(dot (pos jac 2) (field E (vec (lin "1" (pos jac 1))) 1 (dirs)))))')
    assert main(["print", "-s", "hydrogen", str(p)]) == 0
    assert capsys.readouterr().out == "-e R_{2} \\cdot E(\\alpha R_{1})\n"


def test_verify_text_has_summary():
    text, empty = run_verify(load_config("helium", reference="helium.oracle.ref"))
    assert empty and text.rstrip().splitlines()[-1].startswith("summary: match 35")


def test_generated_grade_parses_to_the_expansion():
    from mpqed.multipole import expand
    cfg = load_config("helium", order=1)
    body = run_expand(cfg).split("block grade 1\n", 1)[1].split("\nend", 1)[0]
    ex = expand(cfg.system(), "mp", 1, cfg.jacobi())
    assert equals(loads(body, cfg.registry), ex.grades[1])
