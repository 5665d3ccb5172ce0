"""Loading experiment, group, walk and Bohr-set files (TOML).

References to other files are either paths (resolved relative to the file
that mentions them) or bare names of files shipped in ``twistlab/data``,
e.g. ``group = "sl2z"`` loads ``data/group-sl2z.toml``.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .bohr import (Arc, BernoulliSet, BohrSetSpec, ExplicitSet, FullSet, KroneckerSystem,
                   ProgressionSet, WindowSet, product_bohr)
from .matgroup import GeneratorSystem, RepresentationSpec
from .reals import DEFAULT_BITS, RationalityTagError, TorusPoint, parse_real
from .walks import WalkMeasure

KINDS = ("equidistribution", "irreducibility", "bohr-density", "pattern", "surjectivity",
         "recurrence", "galois")
STOCHASTIC = {"equidistribution", "irreducibility", "pattern"}


class ConfigError(ValueError):
    """Problem in a configuration file; the message names the file and field."""


def data_path(name: str) -> Path:
    return Path(str(resources.files("twistlab") / "data" / name))


def load_toml(path: Path) -> dict:
    try:
        text = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return tomllib.loads(text.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not UTF-8 text") from None


@dataclass
class Section:
    """A table from a config file that remembers where it came from."""

    data: dict
    path: Path
    prefix: str = ""

    def where(self, key: str) -> str:
        return f"{self.path}: field '{self.prefix}{key}'"

    def has(self, key: str) -> bool:
        return key in self.data

    def get(self, key: str, kind=None, default: Any = ...):
        if key not in self.data:
            if default is ...:
                raise ConfigError(f"{self.where(key)} is required")
            return default
        value = self.data[key]
        if kind is not None and not _is_kind(value, kind):
            names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
            raise ConfigError(f"{self.where(key)} must be {names}, got {value!r}")
        return value

    def sub(self, key: str, default: Any = ...) -> "Section":
        value = self.get(key, dict, default)
        return Section(value or {}, self.path, f"{self.prefix}{key}.")

    def real(self, key: str, default: Any = ...):
        value = self.get(key, default=default)
        if value is default and default is not ...:
            return default
        try:
            return parse_real(value)
        except (ValueError, RationalityTagError) as exc:
            raise ConfigError(f"{self.where(key)}: {exc}") from None

    def fraction(self, key: str, default: Any = ...) -> Fraction:
        value = self.real(key, default)
        if not isinstance(value, Fraction):
            raise ConfigError(f"{self.where(key)} must be rational")
        return value

    def ints(self, key: str, default: Any = ...) -> list:
        value = self.get(key, list, default)
        if value is not default and not all(_is_kind(x, int) for x in value):
            raise ConfigError(f"{self.where(key)} must be a list of integers")
        return value

    def check_keys(self, allowed) -> None:
        extra = sorted(set(self.data) - set(allowed))
        if extra:
            raise ConfigError(f"{self.path}: unknown field(s) "
                              + ", ".join(f"'{self.prefix}{k}'" for k in extra))


def _is_kind(value, kind) -> bool:
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if isinstance(value, bool) and bool not in kinds:
        return False
    return isinstance(value, kinds)


def resolve(ref: str, category: str, base: Path) -> Path:
    if ref.endswith(".toml"):
        p = Path(ref)
        return p if p.is_absolute() else (base.parent / p)
    p = data_path(f"{category}-{ref}.toml")
    if not p.exists():
        raise ConfigError(f"{base}: no shipped {category} named {ref!r}")
    return p


# groups, walks, Bohr sets ---------------------------------------------------------

def _matrix(sec: Section, key: str) -> list:
    m = sec.get(key, list)
    if not m or not all(isinstance(r, list) and len(r) == len(m) and all(_is_kind(x, int) for x in r)
                        for r in m):
        raise ConfigError(f"{sec.where(key)} must be a square integer matrix")
    return m


def load_group(path: Path) -> GeneratorSystem:
    sec = Section(load_toml(path), Path(path))
    sec.check_keys({"name", "dim", "generators", "inverses", "form"})
    gens_sec = sec.sub("generators")
    gens = {lab: _matrix(gens_sec, lab) for lab in gens_sec.data}
    if not gens:
        raise ConfigError(f"{sec.where('generators')} is empty")
    dim = sec.get("dim", int)
    for lab, m in gens.items():
        if len(m) != dim:
            raise ConfigError(f"{gens_sec.where(lab)} is {len(m)}x{len(m)}, expected dim {dim}")
    inverses = sec.get("inverses", dict, {})
    form = sec.ints("form", None)
    try:
        return GeneratorSystem.from_matrices(sec.get("name", str), gens, inverses, form)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def group_ref(sec: Section, key: str = "group") -> GeneratorSystem:
    return load_group(resolve(sec.get(key, str), "group", sec.path))


def load_bohr(path: Path, bits: int = DEFAULT_BITS) -> BohrSetSpec:
    sec = Section(load_toml(path), Path(path))
    sec.check_keys({"name", "tau", "arcs", "product_of", "description"})
    if sec.has("product_of"):
        parts = sec.get("product_of", list)
        return product_bohr([load_bohr(resolve(p, "bohr", sec.path), bits) for p in parts])
    rows = sec.get("tau", list)
    try:
        tau = tuple(tuple(parse_real(x) for x in row) for row in rows)
        system = KroneckerSystem(tau)
    except (ValueError, TypeError, RationalityTagError) as exc:
        raise ConfigError(f"{sec.where('tau')}: {exc}") from None
    arcs = []
    for i, a in enumerate(sec.get("arcs", list)):
        asec = Section(a, sec.path, f"arcs[{i}].")
        try:
            arcs.append(Arc(asec.real("center"), asec.real("radius")))
        except ValueError as exc:
            raise ConfigError(f"{sec.where(f'arcs[{i}]')}: {exc}") from None
    try:
        return BohrSetSpec(system, tuple(arcs), bits)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def bohr_ref(sec: Section, key: str = "bohr", bits: int = DEFAULT_BITS) -> BohrSetSpec:
    return load_bohr(resolve(sec.get(key, str), "bohr", sec.path), bits)


def load_walk(sec: Section, gens: GeneratorSystem) -> WalkMeasure:
    if not sec.has("weights"):
        return WalkMeasure.uniform(gens)
    wsec = sec.sub("weights")
    try:
        mu = WalkMeasure({lab: wsec.fraction(lab) for lab in wsec.data})
        mu.check_support(gens)
    except ValueError as exc:
        raise ConfigError(f"{sec.where('weights')}: {exc}") from None
    return mu


def torus_point(sec: Section, key: str) -> TorusPoint:
    value = sec.get(key, list)
    try:
        return TorusPoint(tuple(parse_real(x) for x in value))
    except (ValueError, RationalityTagError) as exc:
        raise ConfigError(f"{sec.where(key)}: {exc}") from None


def representation(sec: Section) -> RepresentationSpec:
    variant = sec.get("variant", str)
    try:
        if variant == "form":
            return RepresentationSpec.for_form(sec.ints("form"))
        return RepresentationSpec(variant, sec.get("d", int))
    except ValueError as exc:
        raise ConfigError(f"{sec.where('variant')}: {exc}") from None


def window(sec: Section, key: str, N: int) -> tuple:
    """[lo, hi] for the cube [lo, hi]^N, or [[lo...], [hi...]] for a box."""
    value = sec.get(key, list)
    if len(value) == 2 and all(_is_kind(x, int) for x in value):
        return ((value[0],) * N, (value[1],) * N)
    if (len(value) == 2 and all(isinstance(c, list) and len(c) == N for c in value)
            and all(_is_kind(x, int) for c in value for x in c)):
        return (tuple(value[0]), tuple(value[1]))
    raise ConfigError(f"{sec.where(key)} must be [lo, hi] or [[lo...], [hi...]] of length {N}")


def set_source(sec: Section, N: int | None = None, bits: int = DEFAULT_BITS) -> WindowSet:
    """One of: bohr = ref | progression | bernoulli | explicit | full."""
    keys = [k for k in ("bohr", "progression", "bernoulli", "explicit", "full") if sec.has(k)]
    if len(keys) != 1:
        raise ConfigError(f"{sec.path}: table '{sec.prefix.rstrip('.')}' needs exactly one of "
                          "bohr, progression, bernoulli, explicit, full")
    kind = keys[0]
    if kind == "bohr":
        out = bohr_ref(sec, "bohr", bits)
    elif kind == "progression":
        p = sec.sub("progression")
        out = ProgressionSet(tuple(p.ints("moduli")), tuple(p.ints("residues")))
    elif kind == "bernoulli":
        b = sec.sub("bernoulli")
        lo, hi = window(b, "window", b.get("dim", int))
        out = BernoulliSet(float(b.fraction("p")), lo, hi, b.get("seed", int))
    elif kind == "explicit":
        out = ExplicitSet.of(sec.get("explicit", list))
    else:
        out = FullSet(sec.get("full", int))
    if N is not None and out.N != N:
        raise ConfigError(f"{sec.where(kind)}: set lives in Z^{out.N}, expected Z^{N}")
    return out


# experiment files -----------------------------------------------------------------

@dataclass
class ExperimentConfig:
    kind: str
    name: str
    path: Path
    section: Section
    seed: int | None
    bits: int
    digest: str
    overrides: dict = field(default_factory=dict)


def load_experiment(path, seed: int | None = None, bits: int | None = None) -> ExperimentConfig:
    path = Path(path)
    raw = load_toml(path)
    sec = Section(raw, path)
    kind = sec.get("kind", str)
    if kind not in KINDS:
        raise ConfigError(f"{sec.where('kind')}: unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    cfg_seed = seed if seed is not None else sec.get("seed", int, None)
    if kind in STOCHASTIC and cfg_seed is None and _needs_seed(kind, sec):
        raise ConfigError(f"{sec.where('seed')} is required for a {kind} experiment")
    cfg_bits = bits if bits is not None else sec.get("precision_bits", int, DEFAULT_BITS)
    if cfg_bits < 64:
        raise ConfigError(f"{sec.where('precision_bits')} must be at least 64")
    h = hashlib.sha256(path.read_bytes())
    h.update(repr((cfg_seed, cfg_bits)).encode())
    return ExperimentConfig(kind, sec.get("name", str, path.stem), path, sec, cfg_seed, cfg_bits,
                            h.hexdigest(), {"seed": seed, "precision_bits": bits})


def _needs_seed(kind: str, sec: Section) -> bool:
    if kind == "equidistribution":
        return sec.sub("walk", {}).get("mode", str, "exact") != "exact"
    if kind == "pattern":
        return "bernoulli" in sec.sub("E", {}).data
    return True
