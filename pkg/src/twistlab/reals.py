"""Exact torus coordinates.

Coordinates of points on the torus are either exact fractions or
``HPReal`` values: finite Q-linear combinations of square roots of
squarefree integers and *declared* irrational constants.  Because
sqrt(1), sqrt(2), sqrt(3), ... are linearly independent over Q, whether
such a value is rational is decided symbolically, never from a float.
Numerical values are produced on demand as fixed-point integers with an
explicit error bound.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

DEFAULT_BITS = 256
MAX_BITS = 1 << 14

# A basis monomial: sqrt(radicand) times a product of declared constants.
Key = tuple[int, tuple[str, ...]]
ONE: Key = (1, ())


class PrecisionError(ArithmeticError):
    """A comparison could not be decided at the maximal working precision."""


class RationalityTagError(TypeError):
    """A coordinate was supplied without an exact/irrational tag."""


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return (s, d) with n = s*s*d and d squarefree."""
    if n <= 0:
        raise ValueError(f"radicand must be positive, got {n}")
    s, d, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            d *= p
        p += 1
    return s, d * n


def _opaque_value(name: str) -> Fraction:
    # declared constants are named by their nominal decimal expansion
    return Fraction(name.split(":", 1)[1])


def _key_mul(k1: Key, k2: Key) -> tuple[int, Key]:
    d1, o1 = k1
    d2, o2 = k2
    g = math.gcd(d1, d2)
    return g, ((d1 // g) * (d2 // g), tuple(sorted(o1 + o2)))


class HPReal:
    """Exact real number in Q + sum_k Q * basis_k, evaluated at any precision.

    >>> x = HPReal.sqrt(5) * Fraction(1, 2) - Fraction(1, 2)
    >>> round(float(x), 6)
    0.618034
    """

    __slots__ = ("_terms", "_hash", "_cache")

    def __init__(self, terms=None):
        clean = {}
        for k, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[k] = clean.get(k, 0) + c
        self._terms = {k: c for k, c in clean.items() if c}
        self._hash = None
        self._cache = {}

    # construction -------------------------------------------------------
    @classmethod
    def rational(cls, q) -> "HPReal":
        return cls({ONE: Fraction(q)})

    @classmethod
    def sqrt(cls, n: int) -> "HPReal":
        s, d = _squarefree_split(int(n))
        return cls({(d, ()): s})

    @classmethod
    def declared(cls, decimal: str) -> "HPReal":
        """A constant declared irrational, with nominal value ``decimal``."""
        Fraction(decimal)  # validates
        return cls({(1, (f"irr:{decimal}",)): 1})

    # structure ----------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def rational_part(self) -> Fraction:
        return self._terms.get(ONE, Fraction(0))

    @property
    def is_rational(self) -> bool:
        return all(k == ONE for k in self._terms)

    def irrational_part(self) -> "HPReal":
        return HPReal({k: c for k, c in self._terms.items() if k != ONE})

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.rational_part

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, HPReal):
            return other
        if isinstance(other, (int, Fraction)):
            return HPReal.rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        t = dict(self._terms)
        for k, c in o._terms.items():
            t[k] = t.get(k, 0) + c
        return HPReal(t)

    __radd__ = __add__

    def __neg__(self):
        return HPReal({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return HPReal({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, HPReal):
            return NotImplemented
        t: dict = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                g, k = _key_mul(k1, k2)
                t[k] = t.get(k, 0) + g * c1 * c2
        return HPReal(t)

    __rmul__ = __mul__

    # numerics -----------------------------------------------------------
    def fixed(self, bits: int = DEFAULT_BITS) -> tuple[int, int]:
        """Return (v, err) with |self * 2**bits - v| <= err (both integers)."""
        hit = self._cache.get(bits)
        if hit is not None:
            return hit
        v, err = 0, 0
        for (d, ops), c in self._terms.items():
            r = c
            for name in ops:
                r *= _opaque_value(name)
            p, q = r.numerator, r.denominator
            if d == 1:
                num = p << bits
                v += num // q
                err += 0 if num % q == 0 else 1
            else:
                root = math.isqrt(d * p * p << (2 * bits))
                v += (root // q) if p > 0 else -(root // q) - 1
                err += 2
        self._cache[bits] = (v, err)
        return v, err

    def sign(self) -> int:
        if not self._terms:
            return 0
        bits = 64
        while bits <= MAX_BITS:
            v, e = self.fixed(bits)
            if v > e:
                return 1
            if v < -e:
                return -1
            bits *= 2
        raise PrecisionError(f"sign of {self} undecidable at {MAX_BITS} bits")

    def floor(self) -> int:
        if self.is_rational:
            return math.floor(self.rational_part)
        bits = 64
        while bits <= MAX_BITS:
            v, e = self.fixed(bits)
            lo, hi = (v - e) >> bits, (v + e) >> bits
            if lo == hi:
                return lo
            bits *= 2
        raise PrecisionError(f"floor of {self} undecidable at {MAX_BITS} bits")

    def __float__(self):
        v, _ = self.fixed(80)
        return v / (1 << 80)

    # comparisons --------------------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            if self.is_rational:
                self._hash = hash(self.rational_part)
            else:
                self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def _cmp(self, other):
        o = self._coerce(other)
        if o is None:
            return None
        return (self - o).sign()

    def __lt__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s < 0

    def __le__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s <= 0

    def __gt__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s > 0

    def __ge__(self, other):
        s = self._cmp(other)
        return NotImplemented if s is None else s >= 0

    def __repr__(self):
        return f"HPReal({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (d, ops), c in sorted(self._terms.items()):
            factors = ([] if d == 1 else [f"sqrt({d})"]) + list(ops)
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([str(c)] + factors))
        return " + ".join(parts)


Coord = Union[Fraction, HPReal]


def normalize(x) -> Coord:
    """Collapse rational HPReal values to Fraction; reject untagged floats."""
    if isinstance(x, bool):
        raise RationalityTagError("boolean is not a torus coordinate")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, HPReal):
        return x.rational_part if x.is_rational else x
    raise RationalityTagError(
        f"coordinate {x!r} of type {type(x).__name__} carries no rationality tag; "
        "pass a Fraction or an HPReal")


def as_real(x) -> HPReal:
    x = normalize(x)
    return x if isinstance(x, HPReal) else HPReal.rational(x)


def floor_of(x: Coord) -> int:
    return math.floor(x) if isinstance(x, Fraction) else x.floor()


def mod1(x) -> Coord:
    x = normalize(x)
    return normalize(x - floor_of(x))


def sign_of(x: Coord) -> int:
    if isinstance(x, Fraction):
        return (x > 0) - (x < 0)
    return x.sign()


def fixed_of(x: Coord, bits: int = DEFAULT_BITS) -> tuple[int, int]:
    if isinstance(x, Fraction):
        num = x.numerator << bits
        return num // x.denominator, 0 if num % x.denominator == 0 else 1
    return x.fixed(bits)


def lin_comb(coeffs: Sequence[int], xs: Sequence[Coord]) -> Coord:
    """Exact sum(c * x) over matching sequences."""
    if all(isinstance(x, Fraction) for x in xs):
        return sum((c * x for c, x in zip(coeffs, xs)), Fraction(0))
    acc = HPReal()
    for c, x in zip(coeffs, xs):
        if c:
            acc = acc + as_real(x) * int(c)
    return normalize(acc)


# named constants -----------------------------------------------------------

GOLDEN = normalize((HPReal.sqrt(5) - 1) * Fraction(1, 2))
SQRT2M1 = normalize(HPReal.sqrt(2) - 1)


def frac_sqrt(n: int) -> Coord:
    """Fractional part of sqrt(n)."""
    return normalize(HPReal.sqrt(n) - math.isqrt(n))


_NAMED = {"golden": GOLDEN, "sqrt2m1": SQRT2M1}
_FUNC = re.compile(r"^(sqrt|frac_sqrt)\((\d+)\)$")


def parse_real(text) -> Coord:
    """Parse a coordinate literal.

    Accepted forms: integers, ``"p/q"``, plain decimals (taken exactly as
    rationals), ``"golden"``, ``"sqrt2m1"``, ``"sqrt(n)"``,
    ``"frac_sqrt(n)"`` and ``"irr:<decimal>"`` for a declared irrational.
    A leading ``-`` negates a named constant.
    """
    if isinstance(text, bool):
        raise ValueError("boolean is not a real literal")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise RationalityTagError(
            f"bare float {text!r}: quote it as a decimal string or 'p/q'")
    s = str(text).strip().replace(" ", "")
    neg = s.startswith("-") and not s[1:2].isdigit() and s[1:2] != "."
    if neg:
        s = s[1:]
    if s in _NAMED:
        val = _NAMED[s]
    elif s.startswith("irr:"):
        val = HPReal.declared(s[4:])
    elif (m := _FUNC.match(s)):
        n = int(m.group(2))
        val = normalize(HPReal.sqrt(n)) if m.group(1) == "sqrt" else frac_sqrt(n)
    else:
        try:
            val = Fraction(s)
        except ValueError:
            raise ValueError(f"cannot parse real literal {text!r}") from None
    return normalize(-val) if neg else val


def format_real(x: Coord) -> str:
    x = normalize(x)
    if isinstance(x, Fraction):
        return str(x)
    for name, val in _NAMED.items():
        if x == val:
            return name
    return str(x)


def lcm_all(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


# torus points --------------------------------------------------------------

@dataclass(frozen=True)
class TorusPoint:
    """Point of T^M = R^M / Z^M; coordinates stored reduced to [0, 1)."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(mod1(c) for c in self.coords))

    @classmethod
    def of(cls, *coords) -> "TorusPoint":
        return cls(tuple(parse_real(c) if isinstance(c, str) else c for c in coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coords)

    @property
    def rationality(self) -> str:
        return "rational" if self.is_rational else "irrational"

    @property
    def denominator(self) -> int:
        """Least m with m * x = 0 in T^M (rational points only)."""
        if not self.is_rational:
            raise ValueError("irrational point has no finite order")
        return lcm_all(c.denominator for c in self.coords)

    def pair(self, v: Sequence[int]) -> Coord:
        """Exact <x, v> mod 1."""
        if len(v) != self.dim:
            raise ValueError(f"vector of length {len(v)} paired with point in T^{self.dim}")
        return mod1(lin_comb(v, self.coords))

    def phase(self, v: Sequence[int], bits: int = DEFAULT_BITS) -> tuple[float, float]:
        """<x, v> mod 1 as a float together with an absolute error bound."""
        p = self.pair(v)
        if isinstance(p, Fraction):
            return float(p), 0.0
        val, err = p.fixed(bits)
        return (val % (1 << bits)) / (1 << bits), err / (1 << bits) + 2.0 ** -52

    def character(self, v: Sequence[int]) -> complex:
        """chi_x(v) = exp(2 pi i <x, v>)."""
        ph, _ = self.phase(v)
        return complex(math.cos(2 * math.pi * ph), math.sin(2 * math.pi * ph))

    def fixed(self, bits: int = DEFAULT_BITS) -> tuple[tuple[int, ...], tuple[int, ...]]:
        vals, errs = [], []
        for c in self.coords:
            v, e = fixed_of(c, bits)
            vals.append(v)
            errs.append(e)
        return tuple(vals), tuple(errs)

    def __str__(self):
        return "(" + ", ".join(format_real(c) for c in self.coords) + ")"
