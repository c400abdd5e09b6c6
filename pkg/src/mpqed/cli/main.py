"""``mpqed`` command line.

Exit codes: 0 success, 1 discrepancy or failed invariant, 2 usage, config or
parse error, 3 internal error.
"""
from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

import sympy

from .. import __version__
from ..jacobi import TreeError, check_invariants
from ..multipole import Expansion, assemble_hierarchy, expand
from ..scaling import ScalingConstraint, ScalingError, solve_scaling
from ..symkernel import OpExpr, OpTerm, SexprError, UnknownSymbolError, canonicalize
from .config import ConfigError, RunConfig, builtin_systems, load_config
from .latex import LatexPrinter, default_rewrites
from .reference import ReferenceError, format_document, parse_document, parse_reference
from .verify import generate_blocks, verify_document

EXIT_OK, EXIT_DISCREPANCY, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- formatting helpers ---------------------------------------------------------------
def format_op(e: OpExpr) -> str:
    """Canonical text with one term per line (parses back to the same expression)."""
    from ..symkernel.serialize import dumps

    text = dumps(e)
    if text == "(op)":
        return text
    body = text[len("(op "):-1]
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == '"':
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                terms.append(body[start:i + 1].strip())
                start = i + 1
    return "(op\n  " + "\n  ".join(terms) + ")"


def substitute_constants(e: OpExpr, mapping: dict) -> OpExpr:
    """Replace named constants in every coefficient, e.g. ``{"hbar": "1", "c": "1"}``."""
    reg = e.registry
    subs = {sympy.Symbol(k): sympy.sympify(v) for k, v in mapping.items()}

    def conv(rf):
        if not rf.free_symbols() & set(mapping):
            return rf
        return reg.parse(sympy.sstr(sympy.cancel(rf.to_sympy().subs(subs))))

    terms = [OpTerm(t.coef.map(conv), t.factors, t.herm) for t in e.terms]
    return canonicalize(OpExpr(reg, terms))


SI_UNITS = {"hbar": "e**2/(4*pi*eps0*alpha*c)"}
NATURAL_UNITS = {"hbar": "1", "c": "1"}


def _units(cfg: RunConfig, e: OpExpr) -> OpExpr:
    if cfg.natural_units:
        return substitute_constants(e, NATURAL_UNITS)
    if not cfg.hbar_c_units:
        return substitute_constants(e, SI_UNITS)
    return e


def _printer(cfg: RunConfig) -> LatexPrinter:
    return LatexPrinter(cfg.z, default_rewrites(cfg.jacobi()))


def _header(cfg: RunConfig, ex: Expansion | None = None) -> dict:
    sol = ex.solution if ex is not None else solve_scaling()
    h = {"system": cfg.name, "scheme": cfg.scheme, "mu": cfg.mu_definition}
    if ex is not None:
        h["order"] = str(ex.order)
    h["scaling"] = sol.describe()
    if cfg.diamagnetic_lambda != "independent":
        h["note"] = f"diamagnetic_lambda {cfg.diamagnetic_lambda}"
    return h


def _emit(cfg: RunConfig, header: dict, blocks: list, latex_names: dict) -> str:
    """``blocks`` holds (label, expr, text); ``latex_names`` maps label -> LaTeX lhs."""
    p = _printer(cfg)
    if cfg.format == "canonical":
        return format_document(header, [(lbl, txt) for lbl, _, txt in blocks])
    if cfg.format == "latex":
        out = [f"% {k} {v}" for k, v in header.items()]
        for lbl, e, _ in blocks:
            out.append(f"{latex_names.get(lbl, lbl)} = {_render(p, e)}")
        return "\n".join(out) + "\n"
    comments = {lbl: [f"latex: {_render(p, e)}"] for lbl, e, _ in blocks}
    return format_document(header, [(lbl, txt) for lbl, _, txt in blocks], comments)


def _render(p: LatexPrinter, e) -> str:
    if isinstance(e, OpExpr):
        return p.render(e)
    return p.vec(e, bare=True)


# -- subcommands ------------------------------------------------------------------------
def _config(args) -> RunConfig:
    if not args.system:
        raise UsageError("--system is required (built-in: " + ", ".join(builtin_systems()) + ")")
    over = {"order": getattr(args, "order", None), "scheme": getattr(args, "scheme", None),
            "format": getattr(args, "format", None)}
    for flag in ("include_self_energy", "natural_units"):
        if getattr(args, flag, False):
            over[flag] = True
    if getattr(args, "reference", None):
        over["reference"] = args.reference
    return load_config(args.system, **over)


def run_expand(cfg: RunConfig) -> str:
    s = cfg.system()
    ex = expand(s, cfg.scheme, cfg.order, cfg.jacobi(), include_self_energy=cfg.include_self_energy)
    grades = ex.grades
    if cfg.diamagnetic_lambda == "shared":
        grades = assemble_hierarchy(s, cfg.scheme, cfg.order, cfg.jacobi(), "shared")
    h0 = _units(cfg, ex.h0)
    blocks = [("h0", h0, format_op(h0))]
    names = {"h0": "H_0"}
    for n in range(1, cfg.order + 1):
        g = _units(cfg, grades.get(n, OpExpr.zero(s.registry)))
        blocks.append((f"grade {n}", g, format_op(g)))
        names[f"grade {n}"] = rf"\mu^{{{n}}} W^{{{n}}}_\mu"
    return _emit(cfg, _header(cfg, ex), blocks, names)


def run_jacobi(cfg: RunConfig) -> tuple:
    J = cfg.jacobi()
    if J is None:
        raise ConfigError("partition", "the jacobi command needs a partition tree", cfg.source)
    n = J.N
    keys = [("jacobi-position", a) for a in range(1, n + 1)]
    keys += [("jacobi-momentum", a) for a in range(1, n + 1)]
    keys.append(("kinetic", None))
    gen = generate_blocks(cfg, keys)
    blocks, names = [], {}
    for kind, idx in keys:
        e = gen[(kind, idx)]
        label = kind if idx is None else f"{kind} {idx}"
        text = format_op(e) if isinstance(e, OpExpr) else e.sexpr
        blocks.append((label, e, text))
        names[label] = {"jacobi-position": f"r_{{{idx}}}", "jacobi-momentum": f"p_{{{idx}}}",
                        "kinetic": "T"}[kind]
    header = {"system": cfg.name, "note": "partition " + repr(J.tree.to_nested())}
    text = _emit(cfg, header, blocks, names)
    rep = check_invariants(J)
    prefix = "% " if cfg.format == "latex" else "# "
    text += "".join(f"{prefix}invariant {line}\n" for line in rep.lines())
    return text, rep.ok


def run_scale(chains) -> str:
    c = ScalingConstraint.parse(*chains) if chains else None
    sol = solve_scaling(c) if c else solve_scaling()
    return (f"mu_exponent {sol.mu}\neta_exponent {sol.eta}\n"
            f"eta_over_mu_exponent {sol.eta_over_mu}\n{sol.describe()}\n")


def run_verify(cfg: RunConfig) -> tuple:
    path = cfg.reference_path()
    if path is None:
        raise ConfigError("reference", "no reference file given (--reference or config key)",
                          cfg.source)
    doc = parse_document(Path(path).read_text(), cfg.registry, str(path))
    sysname = doc.header.get("system")
    if sysname and sysname != cfg.name:
        raise UsageError(f"{path}: reference is for system {sysname!r}, config is {cfg.name!r}")
    scheme = doc.header.get("scheme")
    gen = generate_blocks(cfg, [b.key for b in doc.blocks], scheme)
    rep = verify_document(doc, gen)
    return f"reference {path}\n" + rep.text(), rep.empty


def run_print(cfg: RunConfig, source: str) -> str:
    text = sys.stdin.read() if source == "-" else Path(source).read_text()
    p = _printer(cfg)
    if text.lstrip().startswith("(op"):
        return _render(p, parse_reference(text, cfg.registry)) + "\n"
    doc = parse_document(text, cfg.registry, source)
    return "".join(f"{b.label}: {_render(p, b.expr)}\n" for b in doc.blocks)


# -- argument parsing ---------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpqed", description=__doc__.splitlines()[0] if __doc__
                                 else None)
    ap.add_argument("--version", action="version", version=f"mpqed {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")

    def common(p, order=True, fmt=True):
        p.add_argument("--system", "-s", help="built-in system name or path to a TOML config")
        p.add_argument("--scheme", choices=["mp", "mc", "multipolar", "minimal"])
        if order:
            p.add_argument("--order", "-k", type=int)
        if fmt:
            p.add_argument("--format", "-f", choices=["canonical", "latex", "both"])

    p = sub.add_parser("expand", help="generate the graded interaction hierarchy")
    common(p)
    p.add_argument("--include-self-energy", action="store_true")
    p.add_argument("--natural-units", action="store_true", help="print with hbar = c = 1")
    p = sub.add_parser("jacobi", help="Jacobi coordinates, kinetic form and invariants")
    common(p, order=False)
    p = sub.add_parser("scale", help="solve the scaling constraints")
    p.add_argument("--constraint", "-c", action="append", metavar="CHAIN",
                   help="monomial chain such as 'mu^2 = Zalpha*mu = eta' (repeatable)")
    p = sub.add_parser("verify", help="compare generated blocks with a reference document")
    common(p, fmt=False)
    p.add_argument("--reference", "-r", help="reference file (default: the config's reference)")
    p.add_argument("--include-self-energy", action="store_true")
    p = sub.add_parser("print", help="render a canonical expression or document as LaTeX")
    p.add_argument("--system", "-s", help="system whose symbols the input uses")
    p.add_argument("input", help="file with an (op ...) expression or a document, or -")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        status = EXIT_OK
        if args.command == "scale":
            out = run_scale(args.constraint)
        elif args.command == "expand":
            out = run_expand(_config(args))
        elif args.command == "jacobi":
            out, ok = run_jacobi(_config(args))
            status = EXIT_OK if ok else EXIT_DISCREPANCY
        elif args.command == "verify":
            out, ok = run_verify(_config(args))
            status = EXIT_OK if ok else EXIT_DISCREPANCY
        else:
            out = run_print(_config(args), args.input)
        sys.stdout.write(out)
        return status
    except (ConfigError, ReferenceError, SexprError, ScalingError, TreeError, UsageError,
            UnknownSymbolError, FileNotFoundError) as exc:
        print(f"mpqed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:   # noqa: BLE001
        print("mpqed: internal error", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
