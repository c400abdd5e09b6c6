"""Run configuration: a flat TOML document with explicit keys.

Keys::

    name                 system label (default: file stem)
    charges              list of integers, units of e              (required)
    masses               list of mass symbol names                 (required)
    nucleus              1-based index of the nucleus              (default 1)
    Z                    nuclear charge number                     (default |charge of nucleus|)
    spins                list of booleans                          (default all true)
    partition            nested Jacobi tree [left, right, index, sign]
    scheme               "mp" | "mc" (also "multipolar" | "minimal")
    order                expansion order k >= 1
    format               "canonical" | "latex" | "both"
    reference            reference file (relative to the config file or bundled data)
    include_self_energy  bool, default false
    hbar_c_units         bool, default true (false: hbar written via e, eps0, alpha, c)
    natural_units        bool, default false (hbar = c = 1 in printed output)
    diamagnetic_lambda   "independent" | "shared"
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..jacobi import JacobiScheme, PartitionTree, TreeError, build_scheme
from ..pzw import ParticleSystem
from ..symkernel import Registry

__all__ = ["ConfigError", "RunConfig", "load_config", "builtin_systems", "data_path"]

KEYS = {
    "name", "charges", "masses", "nucleus", "Z", "spins", "partition", "scheme", "order",
    "format", "reference", "include_self_energy", "hbar_c_units", "natural_units",
    "diamagnetic_lambda",
}
SCHEMES = {"mp": "mp", "multipolar": "mp", "mc": "mc", "minimal": "mc"}
FORMATS = ("canonical", "latex", "both")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str, source: str = ""):
        self.field = field_name
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}{field_name}: {message}")


def data_path(*parts) -> Path:
    base = resources.files("mpqed") / "data"
    for part in parts:
        base = base / part
    return Path(str(base))


def builtin_systems() -> list:
    return sorted(p.stem for p in data_path("systems").glob("*.toml"))


@dataclass
class RunConfig:
    name: str
    charges: tuple
    masses: tuple
    nucleus: int = 1
    Z: int | None = None
    spins: tuple | None = None
    partition: object = None
    scheme: str = "mp"
    order: int = 1
    format: str = "canonical"
    reference: str | None = None
    include_self_energy: bool = False
    hbar_c_units: bool = True
    natural_units: bool = False
    diamagnetic_lambda: str = "independent"
    source: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.validate()

    def err(self, key, msg):
        return ConfigError(key, msg, self.source)

    def validate(self):
        if not isinstance(self.charges, (list, tuple)) or not self.charges:
            raise self.err("charges", "must be a non-empty list of integers")
        if any(isinstance(q, bool) or not isinstance(q, int) for q in self.charges):
            raise self.err("charges", f"must be integers, got {list(self.charges)}")
        if not isinstance(self.masses, (list, tuple)) or len(self.masses) != len(self.charges):
            raise self.err("masses", f"need one mass symbol per particle ({len(self.charges)})")
        if any(not isinstance(m, str) or not m.isidentifier() for m in self.masses):
            raise self.err("masses", f"mass names must be identifiers, got {list(self.masses)}")
        n = len(self.charges)
        if isinstance(self.nucleus, bool) or not isinstance(self.nucleus, int) \
                or not 1 <= self.nucleus <= n:
            raise self.err("nucleus", f"must be an integer in 1..{n}")
        if sum(self.charges) != 0:
            raise self.err("charges", f"system must be neutral (total charge {sum(self.charges)})")
        zq = abs(self.charges[self.nucleus - 1])
        if self.Z is not None and (not isinstance(self.Z, int) or self.Z != zq):
            raise self.err("Z", f"Z={self.Z} is inconsistent with the nucleus charge {zq}")
        if self.spins is not None and (len(self.spins) != n
                                       or any(not isinstance(s, bool) for s in self.spins)):
            raise self.err("spins", f"need {n} booleans")
        if self.scheme not in SCHEMES:
            raise self.err("scheme", f"must be one of mp, mc (got {self.scheme!r})")
        self.scheme = SCHEMES[self.scheme]
        if isinstance(self.order, bool) or not isinstance(self.order, int) or self.order < 1:
            raise self.err("order", f"must be an integer >= 1 (got {self.order!r})")
        if self.format not in FORMATS:
            raise self.err("format", f"must be one of {', '.join(FORMATS)}")
        if self.diamagnetic_lambda not in ("independent", "shared"):
            raise self.err("diamagnetic_lambda", "must be 'independent' or 'shared'")
        if self.partition is not None:
            try:
                PartitionTree.from_nested(self.partition).validate(n)
            except TreeError as exc:
                raise self.err("partition", str(exc)) from None

    def reference_path(self) -> Path | None:
        """The reference file, looked up next to the config and in the bundled data."""
        if self.reference is None:
            return None
        base = Path(self.source).parent if self.source else None
        return resolve_reference(str(self.reference), base)

    @property
    def z(self) -> int:
        return self.Z or abs(self.charges[self.nucleus - 1])

    @property
    def mu_definition(self) -> str:
        return "alpha" if self.z == 1 else f"{self.z}*alpha"

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, _cache={}, **kw)

    # -- derived objects (one fresh registry per config) -------------------------
    @property
    def registry(self) -> Registry:
        if "reg" not in self._cache:
            self._cache["reg"] = Registry(self.name)
            self.system()   # registers the mass symbols
        return self._cache["reg"]

    def system(self) -> ParticleSystem:
        if "sys" not in self._cache:
            self._cache["sys"] = ParticleSystem(
                tuple(self.charges), tuple(self.masses), self.nucleus, self.Z,
                tuple(self.spins) if self.spins is not None else None, self.name, self.registry)
        return self._cache["sys"]

    def jacobi(self) -> JacobiScheme | None:
        if self.partition is None:
            return None
        if "jac" not in self._cache:
            s = self.system()
            self._cache["jac"] = build_scheme(self.partition, s.masses, self.registry)
        return self._cache["jac"]


def _resolve_system(name_or_path: str) -> Path:
    p = Path(name_or_path)
    if p.suffix == ".toml" or p.exists():
        if not p.exists():
            raise ConfigError("system", f"config file {name_or_path!r} not found")
        return p
    builtin = data_path("systems", f"{name_or_path}.toml")
    if builtin.exists():
        return builtin
    raise ConfigError("system", f"unknown system {name_or_path!r}; built-in systems: "
                      + ", ".join(builtin_systems()))


def resolve_reference(ref: str, base: Path | None = None) -> Path:
    p = Path(ref)
    candidates = [p]
    if base is not None and not p.is_absolute():
        candidates.append(base / p)
    candidates.append(data_path("references", ref))
    for c in candidates:
        if c.exists():
            return c
    raise ConfigError("reference", f"reference file {ref!r} not found")


def load_config(name_or_path: str, **overrides) -> RunConfig:
    """Load a config from a path or a built-in system name, then apply overrides."""
    path = _resolve_system(name_or_path)
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"invalid TOML: {exc}", str(path)) from None
    unknown = sorted(set(raw) - KEYS)
    if unknown:
        raise ConfigError(unknown[0], f"unknown key (allowed: {', '.join(sorted(KEYS))})",
                          str(path))
    for req in ("charges", "masses"):
        if req not in raw:
            raise ConfigError(req, "required key is missing", str(path))
    raw.setdefault("name", path.stem)
    cfg = RunConfig(source=str(path), **raw)
    return cfg.with_overrides(**overrides) if overrides else cfg
